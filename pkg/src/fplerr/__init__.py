"""fplerr: floating-point error estimation and mixed-precision tuning for FPL kernels.

The pipeline: parse + typecheck FPL source, synthesize an error-instrumented
reverse-mode adjoint, execute it under a per-variable precision assignment,
and turn the per-assignment error/sensitivity data into tuning and
validation reports.
"""

__version__ = "0.1.0"
