"""Seeded Monte Carlo generation of synthetic detector counts.

Every compensation setting produces counts in five bins: the two exit ports
times the two spin-analyzer outcomes, plus neutrons absorbed by a beam block.
Both ports are always simulated; port selection happens when the dataset is
read out (``FringeDataset.spin_counts``).

Random numbers come from Philox streams keyed by ``(seed, setting, block)``
so results do not depend on how the work is split across threads.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import qcore
from .qcore import BeamConfig

BINS = ("plus_x_plus", "plus_x_minus", "minus_x_plus", "minus_x_minus", "absorbed")
CSV_HEADER = ("beta_rad", "n_x_plus", "n_x_minus", "n_absorbed")
SHOT_BLOCK = 1 << 16
_TOTALS_STREAM = 0xFFFF_FFFF


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulated fringe scan.

    ``context`` is ``"whichway"`` (with ``blocked_path``) or
    ``"interference"`` (with ``selected_port``, used as the default readout).
    """

    cfg: BeamConfig
    alpha: float
    context: str
    beta_schedule: tuple[float, ...]
    shots_per_setting: int
    seed: int = 0
    poisson_totals: bool = False
    blocked_path: int | None = None
    selected_port: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "beta_schedule", tuple(float(b) for b in self.beta_schedule))
        if not self.beta_schedule:
            raise ValueError("beta_schedule must be nonempty")
        if int(self.shots_per_setting) < 1:
            raise ValueError("shots_per_setting must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.context == "whichway":
            if self.blocked_path not in (1, 2):
                raise ValueError("whichway context needs blocked_path in {1, 2}")
            if self.selected_port is not None:
                raise ValueError("whichway context has no exit port to select")
        elif self.context == "interference":
            if self.selected_port not in ("+", "-"):
                raise ValueError("interference context needs selected_port in {'+', '-'}")
            if self.blocked_path is not None:
                raise ValueError("interference context has both paths open; drop blocked_path")
        else:
            raise ValueError(f"unknown context {self.context!r}")

    @property
    def default_selection(self) -> str:
        return self.selected_port if self.context == "interference" else "both"

    @property
    def measured_path(self) -> int | None:
        """Path that stays open in the which-way context."""
        return None if self.blocked_path is None else 3 - self.blocked_path

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cfg"] = {"a1": self.cfg.a1, "a2": self.cfg.a2, "chi": self.cfg.chi}
        d["beta_schedule"] = list(self.beta_schedule)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["cfg"] = BeamConfig(**d["cfg"])
        d["beta_schedule"] = tuple(d["beta_schedule"])
        return cls(**d)


@dataclass(frozen=True)
class OutcomeDistribution:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (5,) or np.any(p < -1e-15):
            raise ValueError("outcome probabilities must be 5 non-negative numbers")
        p = np.clip(p, 0, None)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(BINS, map(float, self.probabilities)))


@dataclass(frozen=True)
class FringeDataset:
    config: ExperimentConfig
    betas: np.ndarray
    counts: np.ndarray = field(repr=False)  # shape (n_settings, 5), ordered as BINS

    def spin_counts(self, selection: str | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(N_x+, N_x-) per setting for port ``'+'``, ``'-'`` or ``'both'``."""
        sel = selection or self.config.default_selection
        c = self.counts
        if sel == "+":
            return c[:, 0], c[:, 1]
        if sel == "-":
            return c[:, 2], c[:, 3]
        if sel == "both":
            return c[:, 0] + c[:, 2], c[:, 1] + c[:, 3]
        raise ValueError(f"selection must be '+', '-' or 'both', got {sel!r}")

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def to_csv(self, selection: str | None = None) -> str:
        xp, xm = self.spin_counts(selection)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for b, p, m, a in zip(self.betas, xp, xm, self.counts[:, 4]):
            writer.writerow([repr(float(b)), int(p), int(m), int(a)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": self.config.to_dict(),
                "bins": list(BINS),
                "betas": [float(b) for b in self.betas],
                "counts": self.counts.astype(int).tolist(),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "FringeDataset":
        d = json.loads(text)
        return cls(
            ExperimentConfig.from_dict(d["config"]),
            np.asarray(d["betas"], dtype=float),
            np.asarray(d["counts"], dtype=np.int64),
        )

    @classmethod
    def from_csv(cls, text: str, config: ExperimentConfig) -> "FringeDataset":
        """Rebuild a dataset from the single-readout CSV.

        The CSV holds one readout only, so counts are placed in the bins of
        ``config``'s default selection (port '+' for pooled data).
        """
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows or tuple(rows[0].keys()) != CSV_HEADER:
            raise ValueError(f"CSV header must be {','.join(CSV_HEADER)}")
        betas = np.array([float(r["beta_rad"]) for r in rows])
        counts = np.zeros((len(rows), 5), dtype=np.int64)
        col = 2 if config.default_selection == "-" else 0
        for i, r in enumerate(rows):
            counts[i, col] = int(r["n_x_plus"])
            counts[i, col + 1] = int(r["n_x_minus"])
            counts[i, 4] = int(r["n_absorbed"])
        return cls(config, betas, counts)


def outcome_distribution(config: ExperimentConfig, beta: float) -> OutcomeDistribution:
    cfg = config.cfg
    state = qcore.apply_coupling(qcore.prepare_initial(cfg), config.alpha)
    absorbed = 0.0
    if config.context == "whichway":
        survived = qcore.block_path(state, config.blocked_path)
        absorbed = state.norm2 - survived.norm2
        state = survived
    probs = []
    for port in ("+", "-"):
        out = qcore.apply_compensation(qcore.project_exit(state, port, cfg), beta)
        probs.extend(qcore.spin_x_probabilities(out))
    probs.append(absorbed)
    return OutcomeDistribution(np.array(probs))


def _generator(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def _sample_setting(config: ExperimentConfig, index: int, beta: float) -> np.ndarray:
    p = outcome_distribution(config, beta).probabilities
    p = p / p.sum()
    n = int(config.shots_per_setting)
    if config.poisson_totals:
        n = int(_generator(config.seed, index, _TOTALS_STREAM).poisson(n))
    counts = np.zeros(5, dtype=np.int64)
    for block, start in enumerate(range(0, n, SHOT_BLOCK)):
        size = min(SHOT_BLOCK, n - start)
        counts += _generator(config.seed, index, block).multinomial(size, p)
    return counts


def sample_run(config: ExperimentConfig, workers: int | None = None) -> FringeDataset:
    betas = np.asarray(config.beta_schedule, dtype=float)
    jobs = list(enumerate(betas))
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda j: _sample_setting(config, j[0], j[1]), jobs))
    else:
        rows = [_sample_setting(config, i, b) for i, b in jobs]
    return FringeDataset(config, betas, np.vstack(rows))


def estimate_sigma_x(n_plus, n_minus) -> tuple[float, float]:
    """<sigma_x> from analyzer counts with its binomial standard error."""
    n_plus, n_minus = float(n_plus), float(n_minus)
    total = n_plus + n_minus
    if total <= 0:
        raise ValueError("cannot estimate <sigma_x> from zero counts")
    return (n_plus - n_minus) / total, 2 * np.sqrt(n_plus * n_minus / total**3)


def uniform_schedule(n: int = 16, start: float = -np.pi) -> tuple[float, ...]:
    """``n`` equally spaced compensation angles covering one full period."""
    return tuple(start + 2 * np.pi * np.arange(n) / n)


def standard_scan_configs(
    cfg: BeamConfig | None = None,
    alphas: Sequence[float] = (np.pi / 4, np.pi / 8, np.pi / 16),
    shots: int = 10_000,
    seed: int = 0,
) -> list[ExperimentConfig]:
    """Which-way (path 2 blocked) and interference (port +) scans for each alpha."""
    cfg = cfg or BeamConfig.from_ratio(4, 1)
    out = []
    for i, a in enumerate(alphas):
        common = dict(cfg=cfg, alpha=a, beta_schedule=uniform_schedule(), shots_per_setting=shots)
        out.append(ExperimentConfig(context="whichway", blocked_path=2, seed=seed + 2 * i, **common))
        out.append(ExperimentConfig(context="interference", selected_port="+", seed=seed + 2 * i + 1, **common))
    return out
