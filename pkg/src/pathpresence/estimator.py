"""Fringe fitting, compensation-angle optimization and path-presence scans."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from . import analytic, simkit
from .qcore import BeamConfig

GOLDEN = (math.sqrt(5) - 1) / 2


class FitError(ValueError):
    """Raised for schedules or counts that cannot constrain a fringe."""


class BracketError(ValueError):
    """Raised when the maximum lies on the edge of the search bracket."""


@dataclass(frozen=True)
class FringeFit:
    beta0: float
    visibility: float
    beta0_std: float
    visibility_std: float
    chi2_per_dof: float
    offset: float = 0.0
    offset_std: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PresencePoint:
    alpha: float
    label: str
    presence: float
    presence_std: float
    theory_exact: float
    theory_weak: float
    beta0: float
    beta0_std: float
    visibility: float

    def to_dict(self) -> dict:
        return asdict(self)


def wrap_angle(x: float) -> float:
    """Map an angle into (-pi, pi]."""
    y = math.remainder(x, 2 * math.pi)
    return math.pi if y == -math.pi else y


def fit_cosine(beta, y, sigma, offset: bool = False) -> FringeFit:
    """Weighted linear least squares for ``y = C cos(beta) + S sin(beta) [+ c]``.

    Reports ``beta0 = atan2(S, C)`` and ``visibility = hypot(C, S)`` with
    first-order propagated errors from the parameter covariance.
    """
    beta, y, sigma = (np.asarray(v, dtype=float) for v in (beta, y, sigma))
    if np.any(~np.isfinite(sigma)) or np.any(sigma <= 0):
        raise FitError("degenerate weights: every point needs a positive finite error")
    cols = [np.cos(beta), np.sin(beta)] + ([np.ones_like(beta)] if offset else [])
    X = np.column_stack(cols)
    k = X.shape[1]
    distinct = np.unique(np.round(np.mod(beta, 2 * np.pi), 12))
    if len(distinct) < k + 1 or np.linalg.matrix_rank(X) < k:
        raise FitError(f"underdetermined schedule: need at least {k + 1} distinct settings")
    w = 1 / sigma
    Xw, yw = X * w[:, None], y * w
    params, *_ = np.linalg.lstsq(Xw, yw, rcond=None)
    cov = np.linalg.inv(Xw.T @ Xw)
    resid = yw - Xw @ params
    dof = len(y) - k
    chi2 = float(resid @ resid / dof) if dof > 0 else float("nan")

    c, s = params[0], params[1]
    nu = math.hypot(c, s)
    if nu == 0:
        raise FitError("fitted fringe has zero visibility; phase undefined")
    g_beta = np.array([-s, c]) / nu**2
    g_nu = np.array([c, s]) / nu
    cov2 = cov[:2, :2]
    return FringeFit(
        beta0=wrap_angle(math.atan2(s, c)),
        visibility=nu,
        beta0_std=float(np.sqrt(g_beta @ cov2 @ g_beta)),
        visibility_std=float(np.sqrt(g_nu @ cov2 @ g_nu)),
        chi2_per_dof=chi2,
        offset=float(params[2]) if offset else 0.0,
        offset_std=float(np.sqrt(cov[2, 2])) if offset else 0.0,
    )


def _fit_sigma(n_plus: np.ndarray, n_minus: np.ndarray) -> np.ndarray:
    # binomial error with half-count pseudo-observations; plain binomial is 0 at full contrast
    n = n_plus + n_minus
    q = (n_plus + 0.5) / (n + 1)
    return 2 * np.sqrt(q * (1 - q) / n)


def sigma_x_points(dataset: simkit.FringeDataset, selection: str | None = None):
    """Per-setting ``(beta, <sigma_x>, fit error)`` for one readout."""
    n_plus, n_minus = (np.asarray(v, dtype=float) for v in dataset.spin_counts(selection))
    n = n_plus + n_minus
    if np.any(n <= 0):
        raise FitError("degenerate weights: a setting recorded zero analyzer counts")
    return dataset.betas, (n_plus - n_minus) / n, _fit_sigma(n_plus, n_minus)


def fit_fringe(
    dataset: simkit.FringeDataset, selection: str | None = None, offset: bool = False
) -> FringeFit:
    beta, y, sigma = sigma_x_points(dataset, selection)
    span = np.ptp(np.unwrap(np.sort(np.mod(beta, 2 * np.pi))))
    if len(np.unique(beta)) < 3 or span <= np.pi / 2:
        raise FitError("underdetermined schedule: need >= 3 settings spanning more than pi/2")
    return fit_cosine(beta, y, sigma, offset=offset)


def golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200
) -> tuple[float, float]:
    """Golden-section search for the maximum of a unimodal ``f`` on [lo, hi]."""
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    x = (a + b) / 2
    return x, f(x)


def _sinusoid_polish(f, x0: float, h: float = 0.25) -> float | None:
    """Locate the peak of ``c + a cos + b sin`` through three samples near ``x0``."""
    xs = np.array([x0 - h, x0, x0 + h])
    ys = np.array([f(x) for x in xs])
    X = np.column_stack([np.cos(xs), np.sin(xs), np.ones(3)])
    a, b, c = np.linalg.solve(X, ys)
    if math.hypot(a, b) == 0:
        return None
    x = math.atan2(b, a)
    x = x0 + math.remainder(x - x0, 2 * math.pi)
    check = x0 + 0.6 * h
    model = a * math.cos(check) + b * math.sin(check) + c
    if abs(model - f(check)) > 1e-9 * max(1.0, abs(model)):
        return None
    return x


def optimize_compensation(
    objective: Callable[[float], float],
    bracket: tuple[float, float] = (-math.pi, math.pi),
    sinusoidal: bool = True,
    scan_points: int = 64,
) -> tuple[float, float]:
    """Compensation angle maximizing ``objective`` (e.g. beta -> <sigma_x>).

    A coarse scan picks the best cell, golden-section search refines it and,
    for cosine fringes, a three-point sinusoid solve brings the location to
    machine precision (golden section alone stalls near sqrt(eps) at a
    quadratic peak).
    """
    lo, hi = bracket
    if not hi > lo:
        raise BracketError("bracket must satisfy lo < hi")
    grid = np.linspace(lo, hi, scan_points + 1)
    values = np.array([objective(x) for x in grid])
    i = int(np.argmax(values))
    if i in (0, scan_points) and not math.isclose(hi - lo, 2 * math.pi):
        raise BracketError("maximum sits on the bracket edge; bracket does not contain a maximum")
    step = grid[1] - grid[0]
    x, fx = golden_section_max(objective, grid[i] - step, grid[i] + step)
    if sinusoidal:
        polished = _sinusoid_polish(objective, x)
        if polished is not None:
            fp = objective(polished)
            if fp >= fx - 1e-15:
                x, fx = polished, fp
    return x, fx


def _unwrap_to(beta0: float, hint: float) -> float:
    return beta0 + 2 * math.pi * round((hint - beta0) / (2 * math.pi))


def _outcomes(context: str):
    if context == "interference":
        return [("port+", dict(selected_port="+")), ("port-", dict(selected_port="-"))]
    if context == "whichway":
        return [("path1", dict(blocked_path=2)), ("path2", dict(blocked_path=1))]
    raise ValueError(f"unknown context {context!r}")


def _theory(label: str, alpha: float, cfg: BeamConfig) -> tuple[float, float]:
    if label.startswith("path"):
        v = 1.0 if label == "path1" else 0.0
        return v, v
    port = label[-1]
    exact = analytic.compensation_solution(port, alpha, cfg).beta0.real / alpha
    return exact, analytic.weak_value(1, port, cfg).value.real


def derive_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([seed, *key]).generate_state(1, np.uint64)[0])


def presence_scan(
    alphas: Sequence[float],
    cfg: BeamConfig,
    context: str,
    counts: int,
    schedule: Sequence[float] | None = None,
    seed: int = 0,
    poisson_totals: bool = False,
    workers: int | None = None,
) -> list[PresencePoint]:
    """Simulate, fit and report ``beta0 / alpha`` per alpha and outcome."""
    if any(a == 0 for a in alphas):
        raise ValueError("alpha = 0 gives no presence (division by zero)")
    schedule = tuple(schedule or simkit.uniform_schedule())
    jobs = []
    for i, alpha in enumerate(alphas):
        for j, (label, ctx) in enumerate(_outcomes(context)):
            config = simkit.ExperimentConfig(
                cfg=cfg,
                alpha=alpha,
                context=context,
                beta_schedule=schedule,
                shots_per_setting=counts,
                seed=derive_seed(seed, i, j),
                poisson_totals=poisson_totals,
                **ctx,
            )
            jobs.append((alpha, label, config))

    def run(job):
        alpha, label, config = job
        fit = fit_fringe(simkit.sample_run(config), selection=config.selected_port or "both")
        exact, weak = _theory(label, alpha, cfg)
        beta0 = _unwrap_to(fit.beta0, weak * alpha)
        return PresencePoint(
            alpha=alpha,
            label=label,
            presence=beta0 / alpha,
            presence_std=fit.beta0_std / abs(alpha),
            theory_exact=exact,
            theory_weak=weak,
            beta0=beta0,
            beta0_std=fit.beta0_std,
            visibility=fit.visibility,
        )

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(run, jobs))
    return [run(j) for j in jobs]


def expected_beta0_std(config: simkit.ExperimentConfig, selection: str | None = None) -> float:
    """Fisher-information prediction of the fitted beta0 error for ``config``.

    Uses exact outcome probabilities in place of counts, so it is the error a
    typical run will report.
    """
    sel = selection or config.default_selection
    n = config.shots_per_setting
    betas = np.asarray(config.beta_schedule)
    ys, sig = [], []
    for b in betas:
        p = simkit.outcome_distribution(config, b).probabilities
        if sel == "+":
            pp, pm = p[0], p[1]
        elif sel == "-":
            pp, pm = p[2], p[3]
        else:
            pp, pm = p[0] + p[2], p[1] + p[3]
        m = n * (pp + pm)
        ys.append((pp - pm) / (pp + pm))
        sig.append(_fit_sigma(np.array(m * pp / (pp + pm)), np.array(m * pm / (pp + pm))))
    return fit_cosine(betas, ys, np.array(sig, dtype=float).ravel()).beta0_std
