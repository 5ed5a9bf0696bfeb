"""Problem files: a ``[kind]`` header followed by ``key = value`` lines.

Example::

    # F-perturbed certification of T x = x/2
    [certify]
    T = x/2
    D = abs(x-y) + (x-y)^4
    P = (x-y)^4
    F = ln(t)
    tau = 0.6931
    domain = [0, 1]

Values may be wrapped in double quotes. ``domain`` is ``[lo, hi]``; ``sample`` is a
bracketed list of constant expressions.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, ValidationError
from .expr import Expr
from .gauge import BUILTIN, FGauge
from .metric import Interval

KINDS = ("metric_audit", "gauge_audit", "certify", "iterate", "series", "bvp")

# key -> (type, required, default); types: expr:<vars>, gauge, float, int, interval, list
_COMMON = {"seed": ("int", False, 0)}
_SCALAR_METRIC = {
    "D": ("expr:xy", True, None),
    "P": ("expr:xy", False, None),
    "domain": ("interval", True, None),
}
SCHEMA: dict[str, dict[str, tuple]] = {
    "metric_audit": {
        **_SCALAR_METRIC,
        "sample": ("list", False, None),
        "n_sample": ("int", False, 41),
        "tol": ("float", False, 1e-10),
    },
    "gauge_audit": {
        "F": ("gauge", True, None),
        "k": ("float", False, None),
        "M": ("float", False, 10.0),
        "eps": ("float", False, 1e-2),
        "grid_min": ("float", False, 1e-12),
        "grid_max": ("float", False, 10.0),
        "grid_n": ("int", False, 200),
    },
    "certify": {
        **_SCALAR_METRIC,
        "T": ("expr:x", True, None),
        "F": ("gauge", False, "ln"),
        "tau": ("float", True, None),
        "grid_n": ("int", False, 200),
        "tol": ("float", False, 1e-12),
    },
    "iterate": {
        **_SCALAR_METRIC,
        "T": ("expr:x", True, None),
        "x0": ("float", True, None),
        "F": ("gauge", False, "ln"),
        "tau": ("float", False, None),
        "tol": ("float", False, 1e-12),
        "max_iters": ("int", False, 10_000),
        "n_starts": ("int", False, 10),
    },
    "series": {
        **_SCALAR_METRIC,
        "T": ("expr:x", True, None),
        "n_max": ("int", False, 10),
        "grid_n": ("int", False, 200),
        "ratio": ("float", False, 0.95),
    },
    "bvp": {
        "f": ("expr:su", True, None),
        "u0": ("expr:t", True, None),
        "tau": ("float", False, 0.2),
        "n_nodes": ("int", False, 201),
        "tol": ("float", False, 1e-10),
        "max_iters": ("int", False, 10_000),
        "u_range": ("interval", False, Interval(-2.0, 2.0)),
        "lipschitz_samples": ("int", False, 41),
        "n_pairs": ("int", False, 50),
    },
}

_RANGES = {
    "tau": lambda v: v > 0,
    "tol": lambda v: v > 0,
    "n_nodes": lambda v: v >= 5 and v % 2 == 1,
    "max_iters": lambda v: v >= 1,
    "grid_n": lambda v: v >= 2,
    "n_sample": lambda v: v >= 1,
    "n_max": lambda v: v >= 1,
    "n_starts": lambda v: v >= 0,
    "k": lambda v: 0 < v < 1,
    "M": lambda v: v > 0,
    "eps": lambda v: v > 0,
    "grid_min": lambda v: v > 0,
    "ratio": lambda v: 0 < v < 1,
    "seed": lambda v: v >= 0,
    "lipschitz_samples": lambda v: v >= 2,
    "n_pairs": lambda v: v >= 1,
}


@dataclass
class ProblemSpec:
    kind: str
    expressions: dict[str, Expr] = field(default_factory=dict)
    scalars: dict[str, float | int] = field(default_factory=dict)
    domain: Interval | None = None
    gauge: FGauge | None = None
    gauge_source: str | None = None
    extras: dict[str, object] = field(default_factory=dict)

    def get(self, key, default=None):
        for table in (self.scalars, self.expressions, self.extras):
            if key in table:
                return table[key]
        return default


_HEADER = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")


def _unquote(value: str) -> str:
    if len(value) >= 2 and value[0] == value[-1] == '"':
        return value[1:-1]
    return value


def _number(text: str, key: str, line: int, col: int) -> float:
    try:
        return float(Expr.parse(text, ())())
    except ParseError as exc:
        raise ParseError(f"{key}: {exc.msg}", line, col) from None
    except Exception:
        raise ValidationError(key, f"{key}: cannot evaluate {text!r}") from None


def _bracketed(text: str, key: str, line: int, col: int) -> list[str]:
    if not (text.startswith("[") and text.endswith("]")):
        raise ParseError(f"{key}: expected a bracketed list", line, col)
    inner = text[1:-1].strip()
    return [part.strip() for part in inner.split(",")] if inner else []


def parse_spec(text: str) -> ProblemSpec:
    kind = None
    raw: dict[str, tuple[str, int, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        m = _HEADER.match(stripped)
        if m:
            if kind is not None:
                raise ParseError("only one [kind] section is allowed", lineno, 1)
            kind = m.group(1)
            if kind not in KINDS:
                raise ValidationError("kind", f"unknown kind {kind!r}; expected one of {KINDS}")
            continue
        if "=" not in stripped:
            raise ParseError("expected 'key = value'", lineno, line.find(stripped) + 1)
        if kind is None:
            raise ParseError("missing [kind] header before the first key", lineno, 1)
        key, _, value = line.split("#", 1)[0].partition("=")
        key = key.strip()
        value_col = len(line.split("=", 1)[0]) + 2 + (len(value) - len(value.lstrip()))
        if value.strip().startswith('"'):
            value_col += 1
        if key in raw:
            raise ParseError(f"duplicate key {key!r}", lineno, 1)
        raw[key] = (_unquote(value.strip()), lineno, value_col)
    if kind is None:
        raise ParseError("missing [kind] header", 1, 1)

    schema = {**SCHEMA[kind], **_COMMON}
    for key in raw:
        if key not in schema:
            raise ValidationError(key, f"unknown key {key!r} for kind {kind}")
    spec = ProblemSpec(kind)
    for key, (typ, required, default) in schema.items():
        if key not in raw:
            if required:
                raise ValidationError(key)
            _store(spec, key, typ, default)
            continue
        value, lineno, col = raw[key]
        if typ.startswith("expr:"):
            try:
                spec.expressions[key] = Expr.parse(value, tuple(typ[5:]))
            except ParseError as exc:
                raise type(exc)(f"{key}: {exc.msg}", lineno, col + (exc.column or 1) - 1) from None
        elif typ == "gauge":
            _store(spec, key, typ, value, lineno, col)
        elif typ == "interval":
            parts = _bracketed(value, key, lineno, col)
            if len(parts) != 2:
                raise ParseError(f"{key}: expected [lo, hi]", lineno, col)
            lo, hi = (_number(p, key, lineno, col) for p in parts)
            if not lo < hi:
                raise ValidationError(key, f"{key}: need lo < hi")
            _store(spec, key, typ, Interval(lo, hi))
        elif typ == "list":
            spec.extras[key] = [_number(p, key, lineno, col) for p in _bracketed(value, key, lineno, col)]
        else:
            num = _number(value, key, lineno, col)
            if typ == "int":
                if num != int(num):
                    raise ValidationError(key, f"{key}: expected an integer, got {value!r}")
                num = int(num)
            spec.scalars[key] = num
        if key in _RANGES and key in spec.scalars and not _RANGES[key](spec.scalars[key]):
            raise ValidationError(key, f"{key} = {spec.scalars[key]!r} is out of range")
    return spec


def _store(spec: ProblemSpec, key, typ, value, lineno=None, col=None):
    if typ == "gauge":
        if value is None:
            return
        spec.gauge_source = value
        if value in BUILTIN:
            spec.gauge = BUILTIN[value]
        else:
            try:
                e = Expr.parse(value, ("t",))
            except ParseError as exc:
                raise type(exc)(f"{key}: {exc.msg}", lineno, (col or 1) + (exc.column or 1) - 1) from None
            spec.expressions[key] = e
            spec.gauge = FGauge(str(e), e)
    elif typ == "interval":
        if key == "domain":
            spec.domain = value
        else:
            spec.extras[key] = value
    elif typ.startswith("expr:") or typ == "list":
        return
    else:
        if value is not None:
            spec.scalars[key] = value


def load_spec(path) -> ProblemSpec:
    return parse_spec(Path(path).read_text())
