"""Bit-stable JSON and CSV writers: floats always carry 17 significant digits."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .iteration import IterationTrace


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _to_json(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_to_json(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, np.ndarray):
        return _to_json(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(report: dict) -> str:
    """One key per line at the top level so reports diff cleanly."""
    lines = [f"  {json.dumps(str(k))}: {_to_json(v)}" for k, v in report.items()]
    return "{\n" + ",\n".join(lines) + "\n}\n"


def write_json(path: Path, report: dict) -> None:
    _write(path, dumps(report))


def point_repr(x) -> float:
    """Scalar points as themselves, grid functions by their sup norm."""
    return float(x) if np.ndim(x) == 0 else float(np.max(np.abs(x)))


def trace_rows(trace: IterationTrace) -> list[list[str]]:
    rows = []
    for n, x in enumerate(trace.points):
        row = [str(n), fmt_float(point_repr(x))]
        if n < len(trace.gamma):
            row += [fmt_float(trace.gamma[n]), fmt_float(trace.exact_steps[n])]
            row.append(fmt_float(trace.f_gamma[n]) if n < len(trace.f_gamma) else "")
        else:
            row += ["", "", ""]
        rows.append(row)
    return rows


TRACE_HEADER = ["n", "x_repr", "gamma_n", "d_n", "F_gamma_n"]


def write_csv(path: Path, header: list[str], rows) -> None:
    text = ",".join(header) + "\n" + "".join(",".join(r) + "\n" for r in rows)
    _write(path, text)


def write_trace(path: Path, trace: IterationTrace) -> None:
    write_csv(path, TRACE_HEADER, trace_rows(trace))


def write_solution(path: Path, t, u) -> None:
    write_csv(path, ["t", "u"], ([fmt_float(a), fmt_float(b)] for a, b in zip(t, u)))


def read_csv(path: Path) -> list[dict[str, str]]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def _write(path: Path, text: str) -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
