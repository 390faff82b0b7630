"""Fast approximate implementations of log, exp and sqrt.

These are deliberately cheap, deterministic approximations with measured
accuracy, used by the approximate-function error analysis.  Each function
documents its maximum relative error over its tested domain (measured on a
200k-point log-spaced grid; see tests/test_models.py for spot checks).
"""

from __future__ import annotations

import math
import struct

_LN2 = 0.6931471805599453


_SQRT_HALF = 0.7071067811865476


def fast_log(x: float) -> float:
    """Natural log via mantissa/exponent split and an atanh-series cut at z^3.

    ln(x) = e*ln2 + 2z + 2z^3/3 with z = (m-1)/(m+1) and the mantissa m
    normalized into [sqrt(1/2), sqrt(2)), so the exponent term vanishes near
    x = 1 and no cancellation occurs.  Max relative error ~= 1.7e-4.
    """
    if x <= 0.0 or not math.isfinite(x):
        raise ValueError(f"fast_log domain error: {x}")
    m, e = math.frexp(x)  # x = m * 2**e, m in [0.5, 1)
    if m < _SQRT_HALF:
        m *= 2.0
        e -= 1
    z = (m - 1.0) / (m + 1.0)
    zz = z * z
    return e * _LN2 + 2.0 * z * (1.0 + zz * (1.0 / 3.0))


def fast_exp(x: float) -> float:
    """exp via 2^n * e^f splitting, cubic polynomial on |f| <= ln2/2.

    Max relative error ~= 8.0e-4.  Saturates to 0/inf outside the binary64
    exponent range instead of raising.
    """
    if x != x:
        return x
    if x > 709.8:
        return math.inf
    if x < -745.0:
        return 0.0
    n = math.floor(x / _LN2 + 0.5)
    f = x - n * _LN2
    ef = 1.0 + f * (1.0 + f * (0.5 + f * (1.0 / 6.0)))
    return math.ldexp(ef, n)


def fast_sqrt(x: float) -> float:
    """sqrt via the binary32 bit-shift seed plus one Newton step.

    Max relative error ~= 9.6e-4 over positive normal binary32 range.
    """
    if x < 0.0:
        raise ValueError(f"fast_sqrt domain error: {x}")
    if x == 0.0 or not math.isfinite(x):
        return x
    i = struct.unpack("<I", struct.pack("<f", float(x)))[0]
    i = 0x1FBD1DF5 + (i >> 1)
    y = struct.unpack("<f", struct.pack("<I", i))[0]
    return 0.5 * (y + x / y)


# Exact/approximate implementation pairs available to the approximate-function
# analysis.  Every map entry must name one of these.
APPROX_IMPLS: dict[str, tuple] = {
    "log": (math.log, fast_log),
    "exp": (math.exp, fast_exp),
    "sqrt": (math.sqrt, fast_sqrt),
}
