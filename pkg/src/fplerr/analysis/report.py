"""Report serialization: machine JSON and plot-ready CSV.

Output is deterministic for fixed inputs and seed: no timestamps, wall
times, or model identifiers appear in report files (equivalent models must
produce byte-identical reports).  The schema is documented in
docs/report-schema.md.
"""

from __future__ import annotations

import csv
import json
import io
from pathlib import Path

from .analyze import AnalysisReport
from .sensitivity import SensitivityReport


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def analysis_csv(report: AnalysisReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["row", "total_error"] + [f"err[{v}]" for v in report.variables]
    w.writerow(header)
    for i, row in enumerate(report.rows):
        w.writerow(
            [i, _fmt(row.total_error)] + [_fmt(row.errors.get(v, 0.0)) for v in report.variables]
        )
    w.writerow([])
    w.writerow(["aggregate", "avg", _fmt(report.total_avg)])
    w.writerow(["aggregate", "max", _fmt(report.total_max)])
    w.writerow(["aggregate", "acc", _fmt(report.total_acc)])
    return buf.getvalue()


def sensitivity_csv(report: SensitivityReport, normalize: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.per_iteration is not None:
        variables = sorted({v for row in report.per_iteration.values() for v in row})
        w.writerow(["iteration"] + variables)
        n = (max(report.per_iteration) + 1) if report.per_iteration else 0
        if normalize and report.normalized_series is not None:
            series = report.normalized_series
            for i in range(n):
                w.writerow([i] + [_fmt(series.get(v, [0.0] * n)[i] if i < len(series.get(v, [])) else 0.0) for v in variables])
        else:
            for i in range(n):
                row = report.per_iteration.get(i, {})
                w.writerow([i] + [_fmt(row.get(v, 0.0)) for v in variables])
        return buf.getvalue()
    w.writerow(["variable", "sensitivity"] + (["normalized"] if normalize else []))
    source = report.per_variable
    for name in source:
        row = [name, _fmt(source[name])]
        if normalize:
            row.append(_fmt((report.normalized or {}).get(name, 0.0)))
        w.writerow(row)
    return buf.getvalue()


def sensitivity_json(report: SensitivityReport) -> dict:
    payload: dict = {
        "inputs_used": report.inputs_used,
        "per_variable": dict(report.per_variable),
    }
    if report.normalized is not None:
        payload["normalized"] = dict(report.normalized)
    if report.per_iteration is not None:
        n = (max(report.per_iteration) + 1) if report.per_iteration else 0
        payload["per_iteration"] = [
            {"iteration": i, **report.per_iteration.get(i, {})} for i in range(n)
        ]
    if report.normalized_series is not None:
        payload["normalized_series"] = {k: list(v) for k, v in report.normalized_series.items()}
    return payload
