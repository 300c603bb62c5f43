"""JSON run configurations for the command-line front end.

Angles may be written as multiples of pi (``"pi/16"``, ``"-3pi/4"``,
``"0.25 pi"``) and are parsed exactly; bare numbers are radians.  See
``config.schema.json`` for the full schema.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from importlib import resources

import jsonschema
import numpy as np

from .qcore import BeamConfig
from .simkit import ExperimentConfig, uniform_schedule

_ANGLE = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?P<num>\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*(?P<pi>pi|π)?"
    r"\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$"
)


class ConfigError(ValueError):
    """A configuration file or override violates the schema."""


def parse_angle_fraction(value) -> tuple[Fraction, bool]:
    """Return ``(coefficient, is_multiple_of_pi)`` for an angle literal."""
    if isinstance(value, bool):
        raise ConfigError(f"not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return Fraction(value), False
    m = _ANGLE.match(str(value))
    if not m or not (m["num"] or m["pi"]):
        raise ConfigError(f"cannot parse angle {value!r}")
    coef = Fraction(m["num"]) if m["num"] else Fraction(1)
    if m["den"]:
        den = Fraction(m["den"])
        if den == 0:
            raise ConfigError(f"zero denominator in angle {value!r}")
        coef /= den
    if m["sign"] == "-":
        coef = -coef
    return coef, bool(m["pi"])


def parse_angle(value) -> float:
    coef, is_pi = parse_angle_fraction(value)
    return float(coef) * np.pi if is_pi else float(coef)


def schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("config.schema.json").read_text())


def _line_of(text: str, path) -> int | None:
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return None
    needle = f'"{keys[-1]}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def validate(data: dict, text: str | None = None) -> dict:
    """Check ``data`` against the schema; errors carry line numbers when known."""
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.path)))
    if errors:
        msgs = []
        for e in errors:
            where = "/".join(map(str, e.path)) or "<root>"
            line = _line_of(text, e.path) if text else None
            loc = f"line {line}: " if line else ""
            msgs.append(f"{loc}{where}: {e.message}")
        raise ConfigError("invalid config:\n  " + "\n  ".join(msgs))
    try:
        for key in ("alpha", "chi"):
            if key in data:
                parse_angle(data[key])
        for a in data.get("alphas", []):
            parse_angle(a)
        sched = data.get("beta_schedule")
        if isinstance(sched, list):
            for b in sched:
                parse_angle(b)
        elif isinstance(sched, dict) and "start" in sched:
            parse_angle(sched["start"])
    except ConfigError as exc:
        raise ConfigError(f"invalid config: {exc}") from None
    return data


def load(path) -> tuple[dict, str]:
    """Read a config (or a run manifest) and return ``(config, raw_text)``."""
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}: {exc.msg}") from None
    if isinstance(data, dict) and "manifest_version" in data:
        data = data["config"]
        text = json.dumps(data, indent=2)
    return validate(data, text), text


def beam_config(data: dict, amp_tol: float = 1e-6) -> BeamConfig:
    """Beam settings from ``"beam": {"ratio": [4, 1]}`` or ``{"a1": .., "a2": ..}``.

    Explicit amplitudes are renormalized when within ``amp_tol`` of unit norm,
    so truncated decimals such as 0.70710678 are accepted.
    """
    beam = data.get("beam", {"ratio": [4, 1]})
    chi = parse_angle(data.get("chi", 0))
    if "ratio" in beam:
        p1, p2 = beam["ratio"]
        return BeamConfig.from_ratio(p1, p2, chi)
    a1, a2 = float(beam["a1"]), float(beam["a2"])
    norm = np.hypot(a1, a2)
    if abs(norm**2 - 1) > amp_tol:
        raise ConfigError(f"beam amplitudes not normalized: a1^2 + a2^2 = {norm**2!r}")
    return BeamConfig(a1 / norm, a2 / norm, chi)


def schedule(data: dict) -> tuple[float, ...]:
    sched = data.get("beta_schedule", {"n": 16})
    if isinstance(sched, list):
        return tuple(parse_angle(b) for b in sched)
    return uniform_schedule(int(sched.get("n", 16)), parse_angle(sched.get("start", "-pi")))


def experiment(data: dict, seed: int) -> ExperimentConfig:
    for key in ("alpha", "context"):
        if key not in data:
            raise ConfigError(f"invalid config: missing required field {key!r}")
    ctx = data["context"]
    stray = "selected_port" if ctx == "whichway" else "blocked_path"
    if stray in data:
        raise ConfigError(f"invalid config: {stray!r} does not apply to the {ctx} context")
    extra = {}
    if ctx == "whichway":
        extra["blocked_path"] = data.get("blocked_path", 2)
    else:
        extra["selected_port"] = data.get("selected_port", "+")
    return ExperimentConfig(
        cfg=beam_config(data),
        alpha=parse_angle(data["alpha"]),
        context=ctx,
        beta_schedule=schedule(data),
        shots_per_setting=int(data.get("shots", 10_000)),
        seed=seed,
        poisson_totals=bool(data.get("poisson_totals", True)),
        **extra,
    )
