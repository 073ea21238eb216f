"""Flat ``key = value`` scenario files.

Lines hold either one assignment (spaces allowed around ``=``) or several
``key=value`` tokens separated by whitespace.  ``#`` starts a comment.
Numbers accept rationals such as ``1/1400``; lists are comma-separated.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ..errors import ConfigError

KINDS = ("simulate", "activation-curve", "mae", "averaged-phase-portrait", "pitchfork", "response", "control",
         "snapshots")


def _number(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a number: {text!r}") from None


def _int(text: str) -> int:
    v = _number(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(conv):
    def parse(text: str):
        items = [s for s in (p.strip() for p in text.split(",")) if s]
        if not items:
            raise ValueError("empty list")
        return [conv(s) for s in items]
    return parse


def _choice(*options):
    def parse(text: str):
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {t!r}")
        return t
    return parse


FLOAT, INT, BOOL = _number, _int, _bool
INTS, FLOATS = _list(_int), _list(_number)

# key -> (parser, default); None default means optional/derived
COMMON = {
    "n": (INT, 30),
    "epsilon": (FLOAT, 1.0 / 1400.0),
    "a": (FLOAT, 7.0),
    "d0": (FLOAT, 0.3),
    "dt": (FLOAT, 0.01),
    "horizon": (FLOAT, 3000.0),
    "seed": (INT, 0),
}

FORCING = {
    "f": (FLOAT, 2.5),
    "mu": (FLOAT, None),
    "mu_times_omega": (FLOAT, 0.5),
    "sigma": (FLOAT, 0.0),
}

SCHEMAS = {
    "simulate": {"mode": (INT, 6), "energy": (FLOAT, 1.221), "fidelity": (_choice("full", "two-mode"), "full"),
                 "sample_stride": (INT, 10)},
    "activation-curve": {"mode": (INTS, [6]), "energies": (FLOATS, None), "points": (INT, 24),
                         "grid_low": (FLOAT, 1.01), "grid_high": (FLOAT, 8.0), "tol": (FLOAT, 1e-3),
                         "fidelity": (_choice("full", "two-mode"), "full"), "random": (BOOL, False)},
    "mae": {"mode": (INTS, list(range(1, 15))), "tol": (FLOAT, 1e-3), "degree": (INT, 26)},
    "averaged-phase-portrait": {"mode": (INT, 6), "actions": (FLOATS, [0.0, 0.5, 1.0]), "x_max": (FLOAT, 20.0),
                                "y_max": (FLOAT, 0.3), "grid": (INT, 81), "degree": (INT, 26)},
    "pitchfork": {"mode": (INT, 6), "I_max": (FLOAT, 60.0), "points": (INT, 121), "degree": (INT, 26)},
    "response": {"mode": (INT, 6), "sigma_min": (FLOAT, -2.0), "sigma_max": (FLOAT, 3.0), "steps": (INT, 101),
                 "refine_tol": (FLOAT, 1e-3), "degree": (INT, 26), **FORCING},
    "control": {"mode": (INT, 6), "fidelity": (_choice("averaged", "reduced", "full"), "averaged"),
                "x0": (FLOAT, 12.59), "y0": (FLOAT, 0.0), "I0": (FLOAT, None), "I0_over_omega": (FLOAT, 0.54015),
                "beta0": (FLOAT, 0.0), "sample_stride": (INT, 10), "degree": (INT, 26), **FORCING},
    "snapshots": {"mode": (INT, 6), "energy": (FLOAT, 1.221), "times": (FLOATS, None), "count": (INT, 5)},
}

EXCLUSIVE = (("mu", "mu_times_omega"), ("I0", "I0_over_omega"))


@dataclass(frozen=True)
class Scenario:
    kind: str
    parameters: dict
    output_dir: Path = field(default=Path("."))

    def snapshot(self) -> dict:
        return {"kind": self.kind, "parameters": self.parameters, "output_dir": str(self.output_dir)}

    def config_hash(self) -> str:
        blob = json.dumps({"kind": self.kind, "parameters": self.parameters}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def __getitem__(self, key):
        return self.parameters[key]


def _tokens(line: str):
    if line.count("=") <= 1:
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"expected key = value, got {line!r}")
        return [(key.strip(), value.strip())]
    out = []
    for tok in line.split():
        key, sep, value = tok.partition("=")
        if not sep or not key:
            raise ValueError(f"cannot split {line!r} into key=value tokens")
        out.append((key, value))
    return out


def parse_config(text: str, kind: str | None = None, output_dir=".") -> Scenario:
    raw = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            pairs = _tokens(line)
        except ValueError as err:
            raise ConfigError(f"line {lineno}: {err}", line=lineno) from None
        for key, value in pairs:
            if key in raw:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}", line=lineno, key=key)
            raw[key] = value
            lines[key] = lineno
    file_kind = raw.pop("kind", None)
    if file_kind is not None and kind is not None and file_kind != kind:
        raise ConfigError(f"config is for kind {file_kind!r}, command asked for {kind!r}", key="kind")
    kind = kind or file_kind
    if kind is None:
        raise ConfigError("no scenario kind given", key="kind")
    if kind not in KINDS:
        raise ConfigError(f"unknown kind {kind!r}", key="kind")
    schema = {**COMMON, **SCHEMAS[kind]}
    params = {}
    for key, value in raw.items():
        if key not in schema:
            raise ConfigError(f"line {lines[key]}: unknown key {key!r} for kind {kind!r}", line=lines[key], key=key)
        try:
            params[key] = schema[key][0](value)
        except ValueError as err:
            raise ConfigError(f"line {lines[key]}: {key}: {err}", line=lines[key], key=key) from None
    for a, b in EXCLUSIVE:
        if a in params and b in params:
            raise ConfigError(f"keys {a!r} and {b!r} are mutually exclusive", key=a)
    for key, (_, default) in schema.items():
        if key in params:
            continue
        if any(key == b and a in params for a, b in EXCLUSIVE):
            continue
        if default is not None:
            params[key] = default
    _validate(kind, params)
    return Scenario(kind, params, Path(output_dir))


def _validate(kind: str, p: dict):
    def need(cond, key, msg):
        if not cond:
            raise ConfigError(f"{key}: {msg}", key=key)

    need(p["n"] >= 2, "n", "must be >= 2")
    need(p["epsilon"] > 0, "epsilon", "must be positive")
    need(p["a"] > 0, "a", "must be positive")
    need(0 < p["d0"] < 2, "d0", "must lie in (0, 2)")
    need(p["dt"] > 0, "dt", "must be positive")
    need(p["horizon"] >= p["dt"], "horizon", "must be at least one step")
    modes = p["mode"] if isinstance(p["mode"], list) else [p["mode"]]
    for m in modes:
        need(0 < m < p["n"], "mode", f"mode {m} outside 1..{p['n'] - 1}")
    if kind == "mae":
        need(all(1 <= m <= 14 for m in modes), "mode", "mae table covers modes 1..14")
    for key in ("sample_stride", "points", "grid", "steps", "count", "degree"):
        if key in p:
            need(p[key] >= (2 if key in ("steps", "points", "grid") else 1), key, "too small")
    for key in ("energy", "tol", "f", "mu", "mu_times_omega", "I0", "I0_over_omega"):
        if key in p:
            need(p[key] >= 0 if key not in ("tol",) else p[key] > 0, key, "must be non-negative")
    if "energies" in p:
        need(all(e >= 0 for e in p["energies"]), "energies", "must be non-negative")
    if "times" in p:
        need(all(0 <= t <= p["horizon"] for t in p["times"]), "times", "must lie within the horizon")
    if kind == "response":
        need(p["sigma_max"] > p["sigma_min"], "sigma_max", "must exceed sigma_min")
    if kind == "activation-curve":
        need(p["grid_high"] > p["grid_low"] > 0, "grid_high", "grid bounds must satisfy 0 < low < high")


def load_config(path, kind: str | None = None, output_dir=".") -> Scenario:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), kind, output_dir)
