"""Shipped benchmark kernels with seeded canonical input generators.

Every kernel parses, type-checks, transforms, and runs fault-free under
all-binary64.  `analysis_inputs` produces the canonical desk-scale workload
for error/tuning experiments; `gradient_inputs` produces smaller instances
sized for finite-difference validation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from ..frontend import Program, parse, typecheck
from ..frontend.ast import FunctionDef
from ..precision import round_single

DEFAULT_SEED = 20230415

_DIR = Path(__file__).parent


@lru_cache(maxsize=None)
def _load(file: str) -> Program:
    return typecheck(parse((_DIR / file).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class CorpusKernel:
    """One shipped kernel: source file, entry point, and canonical inputs."""

    name: str
    file: str
    entry: str
    default_threshold: float
    notes: str
    tracked_vars: tuple[str, ...] = ()
    profile_loop: str | None = None
    approx_map_base: tuple[tuple[str, str], ...] = ()
    approx_map_ext: tuple[tuple[str, str], ...] = ()

    def load(self) -> tuple[Program, FunctionDef]:
        program = _load(self.file)
        return program, program.function(self.entry)

    def source(self) -> str:
        return (_DIR / self.file).read_text(encoding="utf-8")

    def analysis_inputs(self, seed: int = DEFAULT_SEED, count: int | None = None) -> list[dict]:
        return _GENERATORS[self.name](seed, count, grad=False)

    def gradient_inputs(self, seed: int = DEFAULT_SEED, count: int = 100) -> list[dict]:
        return _GENERATORS[self.name](seed, count, grad=True)


def _gen_arc_length(seed: int, count: int | None, grad: bool) -> list[dict]:
    if not grad:
        return [{"amp": 1.0, "n": 10000}]
    rng = random.Random(seed)
    return [
        {"amp": 0.5 + rng.random(), "n": rng.randint(20, 60)} for _ in range(count or 100)
    ]


def _gen_simpsons(seed: int, count: int | None, grad: bool) -> list[dict]:
    if not grad:
        return [{"a": 0.0, "b": 2.0, "n": 10000}]
    rng = random.Random(seed)
    out = []
    for _ in range(count or 100):
        a = rng.uniform(0.0, 1.0)
        out.append({"a": a, "b": a + 1.0 + rng.random(), "n": rng.randint(20, 60)})
    return out


KMEANS_DIM = 8


def _gen_kmeans(seed: int, count: int | None, grad: bool) -> list[dict]:
    rng = random.Random(seed)
    n = count if count is not None else (100 if grad else 1000)
    out = []
    for _ in range(n):
        # Attribute data ships as binary32 (exactly representable); cluster
        # centers are accumulated in binary64 and are not.
        attrs = [round_single(rng.random()) for _ in range(KMEANS_DIM)]
        clus = [1.0 + rng.random() for _ in range(KMEANS_DIM)]
        out.append({"attributes": attrs, "clusters": clus, "d": KMEANS_DIM})
    return out


def _gen_cg(seed: int, count: int | None, grad: bool) -> list[dict]:
    rng = random.Random(seed)
    if not grad:
        n = 64
        return [{"b": [rng.uniform(-1.0, 1.0) for _ in range(n)], "n": n, "iters": 50}]
    out = []
    for _ in range(count or 100):
        n = 8
        out.append({"b": [rng.uniform(-1.0, 1.0) for _ in range(n)], "n": n, "iters": 10})
    return out


def _gen_black_scholes(seed: int, count: int | None, grad: bool) -> list[dict]:
    rng = random.Random(seed)
    n = count if count is not None else (100 if grad else 1000)
    out = []
    for _ in range(n):
        out.append(
            {
                "spot": rng.uniform(10.0, 50.0),
                "strike": rng.uniform(10.0, 50.0),
                "t": rng.uniform(1.0, 2.0),
                "rate": rng.uniform(0.05, 0.1),
                "sigma": rng.uniform(0.2, 0.4),
            }
        )
    return out


_GENERATORS = {
    "arc_length": _gen_arc_length,
    "simpsons": _gen_simpsons,
    "kmeans": _gen_kmeans,
    "cg": _gen_cg,
    "black_scholes": _gen_black_scholes,
}


KERNELS: dict[str, CorpusKernel] = {
    k.name: k
    for k in [
        CorpusKernel(
            name="arc_length",
            file="arc_length.fpl",
            entry="arc_length",
            default_threshold=1e-5,
            notes="mixed-precision tuning of an n=10^4 arc-length sum at threshold 1e-5",
        ),
        CorpusKernel(
            name="simpsons",
            file="simpsons.fpl",
            entry="simpsons",
            default_threshold=1e-6,
            notes="mixed-precision tuning of an n=10^4 Simpson quadrature at threshold 1e-6",
        ),
        CorpusKernel(
            name="kmeans",
            file="kmeans_distance.fpl",
            entry="kmeans_distance",
            default_threshold=1e-6,
            notes="per-variable demotion study of the distance kernel on 1000 seeded points",
        ),
        CorpusKernel(
            name="cg",
            file="cg_poisson.fpl",
            entry="cg_poisson",
            # Sensitivity level below which the residual-chain variables no
            # longer matter; the solution accumulator x stays in high
            # precision, so it is not a cutoff tracker.
            default_threshold=1e5,
            notes="per-iteration sensitivity profile of a 50-iteration CG solve",
            tracked_vars=("r", "p", "ap"),
            profile_loop="k",
        ),
        CorpusKernel(
            name="black_scholes",
            file="black_scholes.fpl",
            entry="black_scholes",
            default_threshold=1e-6,
            notes="approximate log/sqrt/exp substitution study over 1000 option draws",
            approx_map_base=(("ratio", "log"), ("t", "sqrt")),
            approx_map_ext=(("ratio", "log"), ("t", "sqrt"), ("expo", "exp")),
        ),
    ]
}


def get_kernel(name: str) -> CorpusKernel:
    if name not in KERNELS:
        raise KeyError(f"unknown corpus kernel '{name}' (have: {', '.join(KERNELS)})")
    return KERNELS[name]
