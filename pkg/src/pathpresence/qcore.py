"""State-vector mechanics on the path (x) spin space of a two-path interferometer.

The composite state is stored as a complex ``(2, 2)`` array ``amp[path, spin]``
with path index 0/1 for paths 1/2 and spin index 0/1 for ``|up>``/``|down>``
in the z basis.  Rotations follow ``U_z(theta) = exp(-i theta sigma_z / 2)``,
i.e. ``|up> -> exp(-i theta/2)|up>`` and ``|down> -> exp(+i theta/2)|down>``.

States coming out of :func:`project_exit` and :func:`block_path` are left
unnormalized on purpose: their squared norm is the probability of the event.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

ATOL = 1e-12
ZERO_NORM2 = 1e-24

Port = Literal["+", "-"]
Axis = Literal["x", "y", "z"]

SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

SX_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
SX_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


class UndefinedExpectationError(ValueError):
    """Raised when an expectation value is requested for a zero-norm state."""


@dataclass(frozen=True)
class BeamConfig:
    """Beam-splitter amplitudes and interferometer phase.

    ``a1`` and ``a2`` are real, non-negative and normalized; ``chi`` is the
    relative phase (radians) entering the exit states ``|1> +- e^{i chi}|2>``.
    """

    a1: float
    a2: float
    chi: float = 0.0
    atol: float = ATOL

    def __post_init__(self):
        for name in ("a1", "a2", "chi"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.a1 < 0 or self.a2 < 0:
            raise ValueError("beam amplitudes must be non-negative")
        if abs(self.a1**2 + self.a2**2 - 1.0) > self.atol:
            raise ValueError(
                f"beam amplitudes not normalized: a1^2 + a2^2 = {self.a1**2 + self.a2**2!r}"
            )

    @classmethod
    def from_ratio(cls, p1: float, p2: float, chi: float = 0.0) -> "BeamConfig":
        """Build a config from unnormalized path intensities, e.g. ``(4, 1)``."""
        total = p1 + p2
        return cls(np.sqrt(p1 / total), np.sqrt(p2 / total), chi)

    @property
    def p1(self) -> float:
        return self.a1**2

    @property
    def p2(self) -> float:
        return self.a2**2


@dataclass(frozen=True)
class CompositeState:
    amp: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amp, dtype=complex).reshape(2, 2)
        if not np.all(np.isfinite(amp)):
            raise ValueError("state amplitudes must be finite")
        amp.setflags(write=False)
        object.__setattr__(self, "amp", amp)

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amp) ** 2))

    @property
    def vector(self) -> np.ndarray:
        """Flat 4-vector in the ordering (1,up), (1,down), (2,up), (2,down)."""
        return self.amp.reshape(4)

    def spin_state(self) -> np.ndarray:
        """Unnormalized spin density matrix with the path traced out."""
        return self.amp.T @ self.amp.conj()

    def allclose(self, other: "CompositeState", atol: float = ATOL) -> bool:
        return bool(np.allclose(self.amp, other.amp, rtol=0, atol=atol))


def rotation_z(theta: float) -> np.ndarray:
    """2x2 spin rotation ``exp(-i theta sigma_z / 2)``."""
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def exit_vector(port: Port, cfg: BeamConfig) -> np.ndarray:
    """Path amplitudes of the exit state ``|+->``."""
    sign = _port_sign(port)
    return np.array([1.0, sign * np.exp(1j * cfg.chi)]) / np.sqrt(2)


def _port_sign(port: str) -> int:
    if port == "+":
        return 1
    if port == "-":
        return -1
    raise ValueError(f"port must be '+' or '-', got {port!r}")


def prepare_initial(cfg: BeamConfig) -> CompositeState:
    return CompositeState(np.outer([cfg.a1, cfg.a2], SX_PLUS))


def apply_coupling(state: CompositeState, alpha: float) -> CompositeState:
    amp = state.amp.copy()
    amp[0] = rotation_z(alpha) @ amp[0]
    return CompositeState(amp)


def apply_compensation(state: CompositeState, beta: float) -> CompositeState:
    return CompositeState(state.amp @ rotation_z(-beta).T)


def project_exit(state: CompositeState, port: Port, cfg: BeamConfig) -> CompositeState:
    e = exit_vector(port, cfg)
    projector = np.outer(e, e.conj())
    return CompositeState(projector @ state.amp)


def block_path(state: CompositeState, blocked: int) -> CompositeState:
    if blocked not in (1, 2):
        raise ValueError(f"blocked path must be 1 or 2, got {blocked!r}")
    amp = state.amp.copy()
    amp[blocked - 1] = 0
    return CompositeState(amp)


def spin_expectation(state: CompositeState, axis: Axis) -> float:
    """Expectation of a Pauli operator for the normalized spin state."""
    rho = state.spin_state()
    norm2 = float(np.real(np.trace(rho)))
    if norm2 < ZERO_NORM2:
        raise UndefinedExpectationError("spin expectation of a zero-norm state is undefined")
    return float(np.real(np.trace(SIGMA[axis] @ rho)) / norm2)


def spin_vector(state: CompositeState) -> tuple[float, float, float]:
    return tuple(spin_expectation(state, ax) for ax in "xyz")


def spin_x_probabilities(state: CompositeState) -> tuple[float, float]:
    """Unnormalized probabilities of the spin analyzer reading ``+x`` / ``-x``."""
    return (
        float(np.sum(np.abs(state.amp @ SX_PLUS.conj()) ** 2)),
        float(np.sum(np.abs(state.amp @ SX_MINUS.conj()) ** 2)),
    )


def pipeline(
    cfg: BeamConfig, alpha: float, beta: float, port: Port | None = None, blocked: int | None = None
) -> CompositeState:
    """Prepare, couple, optionally block or post-select, then compensate."""
    state = apply_coupling(prepare_initial(cfg), alpha)
    if blocked is not None:
        state = block_path(state, blocked)
    if port is not None:
        state = project_exit(state, port, cfg)
    return apply_compensation(state, beta)


def composed_operator(alpha: float, beta: float) -> np.ndarray:
    """4x4 matrix ``Pi_1 U_z(alpha - beta) + Pi_2 U_z(-beta)`` on the flat vector."""
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = rotation_z(alpha - beta)
    out[2:, 2:] = rotation_z(-beta)
    return out
