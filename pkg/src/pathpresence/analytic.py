"""Closed-form feedback-compensation theory for the two-path interferometer.

Conventions match :mod:`pathpresence.qcore`: the coupling rotates the path-1
spin by ``+alpha`` about z, compensation rotates both paths by ``-beta``, and
the optimal compensation is ``beta = Re beta0`` with ``beta0 ~ omega_1 alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import constants

from .qcore import ATOL, BeamConfig, Port, _port_sign

Context = Literal["interference", "whichway"]

# magnitude of the neutron magnetic moment (J/T)
NEUTRON_MU = abs(constants.physical_constants["neutron mag. mom."][0])


class DivergentWeakValueError(ArithmeticError):
    """The requested exit port has zero amplitude, so its weak values diverge."""


@dataclass(frozen=True)
class WeakValue:
    value: complex
    path: int
    port: str


@dataclass(frozen=True)
class CompensationSolution:
    beta0: complex
    amplitude: complex

    @property
    def max_sigma_x(self) -> float:
        """Largest reachable <sigma_x> with a real compensation angle."""
        return float(1.0 / np.cosh(self.beta0.imag))


@dataclass(frozen=True)
class EstimateAssignment:
    est_plus: float
    est_minus: float

    def __post_init__(self):
        if not (np.isfinite(self.est_plus) and np.isfinite(self.est_minus)):
            raise ValueError("estimates must be finite")


@dataclass(frozen=True)
class PresenceRow:
    outcome: str
    probability: float
    presence_path1: float
    presence_path2: float


@dataclass(frozen=True)
class PresenceTable:
    context: str
    rows: tuple[PresenceRow, ...]
    average_path1: float
    average_path2: float
    variance_path1: float
    variance_path2: float
    initial: dict = field(default_factory=dict)

    @property
    def std_path1(self) -> float:
        return float(np.sqrt(self.variance_path1))

    @property
    def std_path2(self) -> float:
        return float(np.sqrt(self.variance_path2))


def _overlap(port: Port, cfg: BeamConfig) -> complex:
    """Path overlap ``<+-|psi>`` times sqrt(2)."""
    return cfg.a1 + _port_sign(port) * np.exp(-1j * cfg.chi) * cfg.a2


def _omega1(port: Port, cfg: BeamConfig) -> complex:
    overlap = _overlap(port, cfg)
    if abs(overlap) ** 2 / 2 < cfg.atol:
        raise DivergentWeakValueError(f"port {port!r} is dark; weak values diverge")
    return cfg.a1 / overlap


def weak_value(path: int, port: Port, cfg: BeamConfig) -> WeakValue:
    """Weak value of the path-``path`` projector post-selected on ``port``."""
    w1 = _omega1(port, cfg)
    if path == 1:
        return WeakValue(complex(w1), 1, port)
    if path == 2:
        return WeakValue(complex(1 - w1), 2, port)
    raise ValueError(f"path must be 1 or 2, got {path!r}")


def port_probability(port: Port, cfg: BeamConfig) -> float:
    return 0.5 + _port_sign(port) * cfg.a1 * cfg.a2 * np.cos(cfg.chi)


def compensation_solution(port: Port, alpha: float, cfg: BeamConfig) -> CompensationSolution:
    w1 = _omega1(port, cfg)
    w2 = 1 - w1
    half = alpha / 2
    if w1 == 0:
        return CompensationSolution(0j, complex(w2))
    beta0 = 2 * np.arctan(np.sin(half) / (w2 / w1 + np.cos(half)))
    amp2 = 1 - 4 * w1 * w2 * np.sin(alpha / 4) ** 2
    amplitude = np.sqrt(complex(amp2))
    # sign of A follows A cos(beta0/2) = w1 cos(alpha/2) + w2
    if abs(np.cos(beta0 / 2)) > 1e-8:
        ref = (w1 * np.cos(half) + w2) / np.cos(beta0 / 2)
    else:
        ref = w1 * np.sin(half) / np.sin(beta0 / 2)
    if (ref * np.conj(amplitude)).real < 0:
        amplitude = -amplitude
    return CompensationSolution(complex(beta0), complex(amplitude))


def series_beta0(port: Port, alpha: float, cfg: BeamConfig) -> complex:
    """First-order optimal compensation ``omega_1 * alpha``."""
    w1 = _omega1(port, cfg)
    return w1 * alpha if w1.imag else w1.real * alpha


def series_amplitude(port: Port, alpha: float, cfg: BeamConfig) -> complex:
    w1 = _omega1(port, cfg)
    return 1 - 0.5 * w1 * (1 - w1) * (alpha / 2) ** 2


def effective_port_probability(port: Port, alpha: float, cfg: BeamConfig) -> float:
    """Port detection probability including the back-action of the coupling.

    Equals ``p * |A|^2`` where ``|A|^2`` is the spin-state norm; at chi = 0
    this is ``p * A^2``.  Evaluated from the overlap so dark ports give 0.
    """
    s = _port_sign(port)
    phase = s * np.exp(-1j * cfg.chi) * cfg.a2
    up = cfg.a1 * np.exp(-0.5j * alpha) + phase
    down = cfg.a1 * np.exp(0.5j * alpha) + phase
    return float((abs(up) ** 2 + abs(down) ** 2) / 4)


def spin_expectations_analytic(
    port: Port, alpha: float, beta: float, cfg: BeamConfig
) -> tuple[float, float, float]:
    sol = compensation_solution(port, alpha, cfg)
    re, im = sol.beta0.real, sol.beta0.imag
    ch = np.cosh(im)
    return (
        float(np.cos(re - beta) / ch),
        float(np.sin(re - beta) / ch),
        float(np.tanh(im)),
    )


def spin_variances_analytic(
    port: Port, alpha: float, beta: float, cfg: BeamConfig
) -> tuple[float, float, float]:
    """Outcome variances ``p_+ (1 - s)^2 + p_- (-1 - s)^2`` per spin axis."""
    out = []
    for s in spin_expectations_analytic(port, alpha, beta, cfg):
        p_plus = (1 + s) / 2
        out.append(float(p_plus * (1 - s) ** 2 + (1 - p_plus) * (-1 - s) ** 2))
    return tuple(out)


def ozawa_error(alpha: float, est: EstimateAssignment, cfg: BeamConfig) -> float:
    """Squared measurement error of the path-1 projector for given estimates.

    A dark port carries zero weight and is skipped.
    """
    total = 0.0
    for port, e in (("+", est.est_plus), ("-", est.est_minus)):
        p = port_probability(port, cfg)
        if p < cfg.atol:
            continue
        total += p * abs(_omega1(port, cfg) - e) ** 2
    return float(total)


def ozawa_error_operator(est: EstimateAssignment, cfg: BeamConfig) -> float:
    """Same quantity evaluated as ``<psi| (Pi_1 - sum_f e_f |f><f|)^2 |psi>``."""
    from .qcore import exit_vector

    psi = np.array([cfg.a1, cfg.a2], dtype=complex)
    op = np.diag([1.0, 0.0]).astype(complex)
    for port, e in (("+", est.est_plus), ("-", est.est_minus)):
        v = exit_vector(port, cfg)
        op -= e * np.outer(v, v.conj())
    vec = op @ psi
    return float(np.real(np.vdot(vec, vec)))


def max_sigma_x_from_error(alpha: float, eps2: float) -> float:
    if eps2 < 0:
        raise ValueError("eps2 must be non-negative")
    return 1 - 0.5 * alpha**2 * eps2


def _require_real(cfg: BeamConfig):
    if abs(np.sin(cfg.chi)) > cfg.atol:
        raise ValueError("this quantity is defined for real weak values (chi = 0 or pi)")


def presence_table(cfg: BeamConfig, context: Context) -> PresenceTable:
    """Outcome probabilities and path presences in either measurement context."""
    _require_real(cfg)
    if context == "interference":
        rows = []
        for port in ("+", "-"):
            w1 = _omega1(port, cfg).real
            rows.append(PresenceRow(port, port_probability(port, cfg), w1, 1 - w1))
    elif context == "whichway":
        rows = [PresenceRow("1", cfg.p1, 1.0, 0.0), PresenceRow("2", cfg.p2, 0.0, 1.0)]
    else:
        raise ValueError(f"unknown context {context!r}")
    avg1 = sum(r.probability * r.presence_path1 for r in rows)
    avg2 = sum(r.probability * r.presence_path2 for r in rows)
    var1 = sum(r.probability * (r.presence_path1 - avg1) ** 2 for r in rows)
    var2 = sum(r.probability * (r.presence_path2 - avg2) ** 2 for r in rows)
    return PresenceTable(
        context,
        tuple(rows),
        avg1,
        avg2,
        var1,
        var2,
        initial={"a1": cfg.a1, "a2": cfg.a2, "p1": cfg.p1, "p2": cfg.p2},
    )


def mean_rotation(alpha: float, cfg: BeamConfig, context: Context) -> float:
    table = presence_table(cfg, context)
    return table.average_path1 * alpha


def averaged_sigma_x(
    alpha: float, beta: float, cfg: BeamConfig, context: Context
) -> tuple[float, float, float]:
    """Outcome-averaged <sigma_x> under a common compensation angle.

    Returns ``(value, mean_phase, visibility)`` with
    ``value = visibility * cos(beta - mean_phase)``.  Outcomes are weighted by
    their unperturbed probabilities (``p_+-`` or ``p_1,2``).
    """
    _require_real(cfg)
    if context == "whichway":
        p1, p2 = cfg.p1, cfg.p2
        mean_phase = np.arctan2(p1 * np.sin(alpha), p2 + p1 * np.cos(alpha))
        visibility = np.sqrt(max(0.0, 1 - 2 * p1 * p2 * (1 - np.cos(alpha))))
    elif context == "interference":
        weights, phases = [], []
        for port in ("+", "-"):
            p = port_probability(port, cfg)
            if p < cfg.atol:
                continue
            weights.append(p)
            phases.append(compensation_solution(port, alpha, cfg).beta0.real)
        weights, phases = np.array(weights), np.array(phases)
        mean_phase = np.arctan2(weights @ np.sin(phases), weights @ np.cos(phases))
        if len(phases) == 2:
            dp = (cfg.p1 - cfg.p2) ** 2
            visibility = np.sqrt(max(0.0, 1 - dp / 2 * (1 - np.cos(phases[0] - phases[1]))))
        else:
            visibility = 1.0
    else:
        raise ValueError(f"unknown context {context!r}")
    return float(visibility * np.cos(beta - mean_phase)), float(mean_phase), float(visibility)


def weak_measurement_estimate(sy: float, sz: float, alpha: float) -> complex:
    """Uncompensated weak-value estimate from the transverse spin components.

    With the rotation convention used here ``<sigma_y> ~ alpha Re(omega)``
    and ``<sigma_z> ~ alpha Im(omega)`` at ``beta = 0``.
    """
    if alpha == 0:
        raise ZeroDivisionError("weak-measurement estimate needs alpha != 0")
    if abs(sy) > 1 + ATOL or abs(sz) > 1 + ATOL:
        raise ValueError("spin components must lie in [-1, 1]")
    return complex(sy, sz) / alpha


def field_to_angle(bz: float, tau: float, mu: float = NEUTRON_MU) -> float:
    """Larmor precession angle ``-2 mu B tau / hbar`` in radians."""
    return -2 * mu * bz * tau / constants.hbar


def angle_to_field(angle: float, tau: float, mu: float = NEUTRON_MU) -> float:
    return -angle * constants.hbar / (2 * mu * tau)
