"""Command-line interface.

Subcommands: analyze | sensitivity | tune | approx | validate | dump-adjoint
| corpus.  Exit codes: 1 parse/typecheck error, 2 transform error, 3 runtime
fault, 4 bad flags/config.  Set CHEF_LOG=DEBUG|INFO|WARNING for logging
verbosity.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import random
import sys
from pathlib import Path

from .adjoint import TransformError, emit, transform
from .analysis import (
    analyze,
    approx_analysis,
    iteration_profile,
    sensitivity,
    tune,
    validate,
)
from .analysis.report import analysis_csv, sensitivity_csv, sensitivity_json, write_json
from .corpus import DEFAULT_SEED, KERNELS, get_kernel
from .frontend import ParseError, TypecheckError, parse, typecheck
from .frontend import ast
from .models import builtin_model, load_user_model
from .models.base import ErrorModel
from .precision import ConfigError, PrecisionSpec
from .runtime.interpreter import RuntimeFault, _eval_length

log = logging.getLogger("fplerr")

EXIT_FRONTEND = 1
EXIT_TRANSFORM = 2
EXIT_RUNTIME = 3
EXIT_USAGE = 4


class CliError(Exception):
    """Bad flags or unusable configuration (exit code 4)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; we reserve that
        raise CliError(message)


def _setup_logging() -> None:
    level = os.environ.get("CHEF_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(name)s: %(message)s")


def _load_program(path: str):
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such file: {path}")
    program = typecheck(parse(p.read_text(encoding="utf-8")))
    return program


def _pick_function(program, name: str | None):
    if name is None:
        return program.functions[-1]  # entry-point convention: last definition
    try:
        return program.function(name)
    except KeyError:
        raise CliError(f"no function named '{name}'") from None


def _parse_model(text: str, mapping: dict[str, str] | None) -> ErrorModel:
    if text.startswith("user:"):
        return load_user_model(text[5:])
    if text == "approx-func":
        if not mapping:
            raise CliError("--model approx-func requires --map <file>")
        return builtin_model("approx-func", mapping=mapping)
    return builtin_model(text)


def _parse_map_file(path: str | None) -> dict[str, str] | None:
    if path is None:
        return None
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such file: {path}")
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("model"):
            continue
        parts = line.split()
        if parts[0] == "map" and len(parts) == 3:
            mapping[parts[1]] = parts[2]
        elif len(parts) == 2:
            mapping[parts[0]] = parts[1]
        else:
            raise CliError(f"{path}:{lineno}: expected 'map <variable> <function>'")
    return mapping


def _parse_precision_spec(text: str | None) -> PrecisionSpec:
    if text is None:
        return PrecisionSpec.all_double()
    p = Path(text)
    if p.exists():
        return PrecisionSpec.load(p)
    return PrecisionSpec.parse(text)


def _parse_fixes(items: list[str]) -> dict[str, float]:
    out: dict[str, float] = {}
    for item in items or []:
        if "=" not in item:
            raise CliError(f"--fix expects name=value, got '{item}'")
        name, val = item.split("=", 1)
        out[name.strip()] = float(val)
    return out


def _read_inputs_csv(path: str, fn: ast.FunctionDef) -> list[dict]:
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such file: {path}")
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        raw_rows = list(reader)
    if not raw_rows:
        raise CliError(f"{path}: no input rows")

    rows: list[dict] = []
    for raw in raw_rows:
        int_vals: dict[str, int] = {}
        row: dict = {}
        for pdef in fn.params:
            if isinstance(pdef.kind, ast.ScalarInt):
                if pdef.name not in raw:
                    raise CliError(f"{path}: missing column '{pdef.name}'")
                int_vals[pdef.name] = int(float(raw[pdef.name]))
                row[pdef.name] = int_vals[pdef.name]
        for pdef in fn.params:
            if isinstance(pdef.kind, ast.ArrayReal):
                n = _eval_length(pdef.kind.length, int_vals, f"parameter '{pdef.name}'")
                vals = []
                for i in range(n):
                    col = f"{pdef.name}[{i}]"
                    if col not in raw:
                        raise CliError(f"{path}: missing column '{col}'")
                    vals.append(float(raw[col]))
                row[pdef.name] = vals
            elif not isinstance(pdef.kind, ast.ScalarInt):
                if pdef.name not in raw:
                    raise CliError(f"{path}: missing column '{pdef.name}'")
                row[pdef.name] = float(raw[pdef.name])
        rows.append(row)
    return rows


def _sample_inputs(spec: str, fn: ast.FunctionDef, fixes: dict[str, float], default_seed: int) -> tuple[list[dict], int]:
    parts = spec.split(",")
    if len(parts) not in (2, 3):
        raise CliError("--sample expects '<uniform|normal>,<count>[,<seed>]'")
    dist = parts[0]
    if dist not in ("uniform", "normal"):
        raise CliError(f"unknown distribution '{dist}'")
    count = int(parts[1])
    seed = int(parts[2]) if len(parts) == 3 else default_seed
    rng = random.Random(seed)

    def draw() -> float:
        return rng.random() if dist == "uniform" else rng.gauss(0.0, 1.0)

    int_vals: dict[str, int] = {}
    for pdef in fn.params:
        if isinstance(pdef.kind, ast.ScalarInt):
            if pdef.name not in fixes:
                raise CliError(f"int parameter '{pdef.name}' must be pinned with --fix {pdef.name}=<value>")
            int_vals[pdef.name] = int(fixes[pdef.name])

    rows = []
    for _ in range(count):
        row: dict = dict(int_vals)
        for pdef in fn.params:
            if isinstance(pdef.kind, ast.ScalarInt):
                continue
            if pdef.name in fixes:
                row[pdef.name] = fixes[pdef.name]
            elif isinstance(pdef.kind, ast.ArrayReal):
                n = _eval_length(pdef.kind.length, int_vals, f"parameter '{pdef.name}'")
                row[pdef.name] = [draw() for _ in range(n)]
            else:
                row[pdef.name] = draw()
        rows.append(row)
    return rows, seed


def _gather_inputs(args, fn: ast.FunctionDef) -> tuple[list[dict], int | None]:
    fixes = _parse_fixes(getattr(args, "fix", []) or [])
    if getattr(args, "inputs", None):
        return _read_inputs_csv(args.inputs, fn), None
    if getattr(args, "sample", None):
        return _sample_inputs(args.sample, fn, fixes, args.seed)
    if fixes:
        row = {}
        for pdef in fn.params:
            if pdef.name not in fixes:
                raise CliError(f"missing value for parameter '{pdef.name}' (use --fix or --inputs)")
            v = fixes[pdef.name]
            row[pdef.name] = int(v) if isinstance(pdef.kind, ast.ScalarInt) else v
        return [row], None
    raise CliError("no inputs: use --inputs <csv>, --sample <dist,n,seed>, or --fix name=value")


def _outdir(args) -> Path:
    out = Path(getattr(args, "out", ".") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    program = _load_program(args.file)
    fn = _pick_function(program, args.function)
    mapping = _parse_map_file(args.map)
    model = _parse_model(args.model, mapping)
    spec = _parse_precision_spec(args.precision_spec)
    rows, seed = _gather_inputs(args, fn)

    if args.dump_adjoint:
        adj = transform(fn, model, program=program)
        Path(args.dump_adjoint).write_text(emit(adj), encoding="utf-8")

    report = analyze(fn, rows, spec=spec, model=model, program=program, seed=seed)
    out = _outdir(args)
    if args.format == "csv":
        (out / "analyze.csv").write_text(analysis_csv(report), encoding="utf-8")
    else:
        write_json(out / "analyze.json", report.to_json())
    print(f"rows: {len(report.rows)}")
    print(f"total error: avg={report.total_avg:.6e} max={report.total_max:.6e} acc={report.total_acc:.6e}")
    return 0


def cmd_sensitivity(args) -> int:
    program = _load_program(args.file)
    fn = _pick_function(program, args.function)
    spec = _parse_precision_spec(args.precision_spec)
    rows, seed = _gather_inputs(args, fn)
    tracked = args.tracked.split(",") if args.tracked else None
    report = sensitivity(
        fn,
        rows,
        spec=spec,
        program=program,
        normalize=args.normalize,
        profile_loop=args.per_iteration,
        tracked=tracked,
    )
    out = _outdir(args)
    if args.format == "csv":
        (out / "sensitivity.csv").write_text(sensitivity_csv(report, normalize=args.normalize), encoding="utf-8")
    else:
        payload = sensitivity_json(report)
        if seed is not None:
            payload["seed"] = seed
        write_json(out / "sensitivity.json", payload)
    for name, s in sorted(report.per_variable.items(), key=lambda kv: -kv[1]):
        print(f"{name},{s!r}")
    return 0


def cmd_tune(args) -> int:
    program = _load_program(args.file)
    fn = _pick_function(program, args.function)
    mapping = _parse_map_file(args.map)
    model = _parse_model(args.model, mapping)
    rows, _ = _gather_inputs(args, fn)
    result = tune(fn, rows, threshold=args.threshold, model=model, program=program)
    out = _outdir(args)
    write_json(out / "tune.json", result.to_json())
    print(f"demoted: {', '.join(result.demoted) or '(none)'}")
    print(f"estimated error: {result.estimated_error:.6e}")
    print(f"actual error:    {result.actual_error:.6e}")
    print(f"accepted: {result.accepted}")
    return 0


def cmd_approx(args) -> int:
    program = _load_program(args.file)
    fn = _pick_function(program, args.function)
    mapping = _parse_map_file(args.map)
    if not mapping:
        raise CliError("approx requires --map <file> with 'map <variable> <function>' lines")
    rows, _ = _gather_inputs(args, fn)
    report = approx_analysis(fn, rows, mapping, program=program)
    out = _outdir(args)
    write_json(out / "approx.json", report.to_json())
    print(f"rows: {report.rows}")
    print(f"estimated: avg={report.estimated_avg:.6e} max={report.estimated_max:.6e} acc={report.estimated_acc:.6e}")
    print(f"actual:    avg={report.actual_avg:.6e} max={report.actual_max:.6e} acc={report.actual_acc:.6e}")
    return 0


def cmd_validate(args) -> int:
    program = _load_program(args.file)
    fn = _pick_function(program, args.function)
    mapping = _parse_map_file(args.map)
    model = _parse_model(args.model, mapping)
    spec = _parse_precision_spec(args.precision_spec)
    rows, _ = _gather_inputs(args, fn)
    report = validate(fn, rows, spec, model=model, program=program)
    out = _outdir(args)
    write_json(out / "validate.json", report.to_json())
    ratio = "inf" if report.ratio == float("inf") else f"{report.ratio:.4f}"
    print(f"estimated={report.estimated:.6e} actual={report.actual:.6e} ratio={ratio}")
    return 0


def cmd_dump_adjoint(args) -> int:
    program = _load_program(args.file)
    fn = _pick_function(program, args.function)
    mapping = _parse_map_file(args.map)
    model = _parse_model(args.model, mapping)
    adj = transform(fn, model, program=program)
    text = emit(adj)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_corpus(args) -> int:
    if args.action == "list":
        for name, k in KERNELS.items():
            print(f"{name:14s} entry={k.entry:16s} threshold={k.default_threshold:g}  {k.notes}")
        return 0

    try:
        kernel = get_kernel(args.kernel)
    except KeyError as exc:
        raise CliError(str(exc)) from None
    program, fn = kernel.load()
    seed = args.seed
    rows = kernel.analysis_inputs(seed=seed)
    out = _outdir(args)

    if kernel.name in ("arc_length", "simpsons"):
        result = tune(fn, rows, threshold=kernel.default_threshold, program=program)
        report = validate(fn, rows, result.spec, program=program)
        payload = {"seed": seed, "tuning": result.to_json(), "validation": report.to_json()}
        write_json(out / f"{kernel.name}_tuning.json", payload)
        print(f"demoted: {', '.join(result.demoted) or '(none)'}")
        print(f"estimated={report.estimated:.6e} actual={report.actual:.6e} ratio={report.ratio:.4f}")
    elif kernel.name == "kmeans":
        result = tune(fn, rows, threshold=kernel.default_threshold, program=program)
        configs = {
            "attributes": ["attributes"],
            "clusters": ["clusters"],
            "sum": ["sum"],
            "all3": ["attributes", "clusters", "sum"],
        }
        table = {}
        for label, names in configs.items():
            rep = validate(fn, rows, PrecisionSpec.demote(names), program=program)
            table[label] = {"estimated": rep.estimated, "actual": rep.actual}
            print(f"{label:10s} estimated={rep.estimated:.6e} actual={rep.actual:.6e}")
        payload = {"seed": seed, "tuning": result.to_json(), "configurations": table}
        write_json(out / "kmeans_table.json", payload)
        print(f"recommended demotions: {', '.join(result.demoted) or '(none)'}")
    elif kernel.name == "cg":
        cut, report = iteration_profile(
            fn, rows, list(kernel.tracked_vars), kernel.default_threshold, kernel.profile_loop, program=program
        )
        (out / "cg_profile.csv").write_text(sensitivity_csv(report, normalize=False), encoding="utf-8")
        (out / "cg_profile_normalized.csv").write_text(sensitivity_csv(report, normalize=True), encoding="utf-8")
        payload = {
            "seed": seed,
            "threshold": cut.threshold,
            "cutoff": cut.cutoff,
            "iterations": cut.n,
            "tracked": list(kernel.tracked_vars),
        }
        write_json(out / "cg_cutoff.json", payload)
        print(f"iterations={cut.n} threshold={cut.threshold:g} cutoff={cut.cutoff}")
    elif kernel.name == "black_scholes":
        base = approx_analysis(fn, rows, dict(kernel.approx_map_base), program=program)
        ext = approx_analysis(fn, rows, dict(kernel.approx_map_ext), program=program)
        payload = {"seed": seed, "without_fast_exp": base.to_json(), "with_fast_exp": ext.to_json()}
        write_json(out / "black_scholes_approx.json", payload)
        for tag, r in [("log+sqrt", base), ("log+sqrt+exp", ext)]:
            print(
                f"{tag:14s} est(avg/max/acc)=({r.estimated_avg:.3e},{r.estimated_max:.3e},{r.estimated_acc:.3e}) "
                f"act(avg/max/acc)=({r.actual_avg:.3e},{r.actual_max:.3e},{r.actual_acc:.3e})"
            )
    return 0


# ---------------------------------------------------------------------------


def _add_common(sp, inputs: bool = True, model: bool = True) -> None:
    sp.add_argument("file", help="FPL source file")
    sp.add_argument("--function", help="entry function (default: last definition)")
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help="sampler seed")
    if inputs:
        sp.add_argument("--inputs", help="input CSV (header = parameter names; arrays as name[i])")
        sp.add_argument("--sample", help="generate inputs: <uniform|normal>,<count>[,<seed>]")
        sp.add_argument("--fix", action="append", help="pin a parameter: name=value (repeatable)")
    if model:
        sp.add_argument(
            "--model",
            default="taylor-default",
            help="taylor-default | shadow-cast | approx-func | null | user:<file>",
        )
        sp.add_argument("--map", help="variable-to-function map file for approx-func")


def build_parser() -> _Parser:
    ap = _Parser(prog="fplerr", description="floating-point error analysis for FPL kernels")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("analyze", help="per-row gradients, per-variable errors, total E")
    _add_common(sp)
    sp.add_argument("--precision-spec", help="file or inline 'v=single,w=half'")
    sp.add_argument("--dump-adjoint", help="also write the synthesized adjoint text here")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("sensitivity", help="per-variable sensitivity profile")
    _add_common(sp, model=False)
    sp.add_argument("--precision-spec")
    sp.add_argument("--normalize", action="store_true")
    sp.add_argument("--per-iteration", metavar="LOOPVAR", help="profile per iteration of this loop")
    sp.add_argument("--tracked", help="comma-separated variables for the per-iteration series")
    sp.set_defaults(func=cmd_sensitivity)

    sp = sub.add_parser("tune", help="recommend a mixed-precision configuration")
    _add_common(sp)
    sp.add_argument("--threshold", type=float, required=True)
    sp.set_defaults(func=cmd_tune, model="shadow-cast")

    sp = sub.add_parser("approx", help="approximate-function substitution analysis")
    _add_common(sp, model=False)
    sp.add_argument("--map", required=True, help="file with 'map <variable> <function>' lines")
    sp.set_defaults(func=cmd_approx)

    sp = sub.add_parser("validate", help="estimated vs actual error of a configuration")
    _add_common(sp)
    sp.add_argument("--precision-spec", required=True)
    sp.set_defaults(func=cmd_validate, model="shadow-cast")

    sp = sub.add_parser("dump-adjoint", help="print or write the synthesized adjoint")
    sp.add_argument("file")
    sp.add_argument("--function")
    sp.add_argument("--model", default="taylor-default")
    sp.add_argument("--map")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_dump_adjoint)

    sp = sub.add_parser("corpus", help="list or run the shipped benchmark kernels")
    sp.add_argument("action", choices=["list", "run"])
    sp.add_argument("kernel", nargs="?")
    sp.add_argument("--out", default=".")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.set_defaults(func=cmd_corpus)

    return ap


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
        if args.cmd == "corpus" and args.action == "run" and not args.kernel:
            raise CliError("corpus run requires a kernel name")
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, TypecheckError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FRONTEND
    except TransformError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRANSFORM
    except RuntimeFault as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
