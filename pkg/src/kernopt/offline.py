"""Offline plug-in maximization over a finite competitor set.

Pipeline: draw an i.i.d. design, fit ridge regression, return the
competitor maximizing the plug-in estimate.  The amplification experiment
sweeps the misspecification level and reads off the slope of the uniform
error, which the operator-norm analysis caps at Lambda + 1.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .krr import Dataset, KRRModel, TargetFunction, fit, normalized_tau
from .lebesgue import (
    abel_bound_1d,
    abel_bound_multi,
    effective_dimension,
    product_effective_dimension,
)

DEFAULT_EPS_GRID = (0.0, 0.025, 0.05, 0.1, 0.2)

ROW_COLUMNS = (
    "eps",
    "n",
    "tau",
    "rep",
    "uniform_err",
    "simple_regret",
    "d_eff",
    "abel_bound",
    "sqrt_bound",
)


@dataclass(frozen=True)
class CompetitorSet:
    """Finite candidate list with the true objective recorded per point."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        vals = np.asarray(self.values, dtype=float).ravel()
        if pts.shape[0] == 0:
            raise ValueError("competitor set must be nonempty")
        if pts.shape[0] != vals.size:
            raise ValueError("one value per competitor point required")
        if np.any(np.abs(pts) > 1.0):
            raise ValueError("competitor points must lie in [-1, 1]^m")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def best_index(self) -> int:
        # argmax returns the first maximizer, so ties go to the lowest index
        return int(np.argmax(self.values))

    @property
    def best_value(self) -> float:
        return float(self.values[self.best_index])


def competitors_from_target(target: TargetFunction, points) -> CompetitorSet:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return CompetitorSet(pts, target(pts))


def random_competitors(target: TargetFunction, size: int, rng) -> CompetitorSet:
    if size < 1:
        raise ValueError("competitor set must be nonempty")
    rng = np.random.default_rng(rng)
    pts = rng.uniform(-1.0, 1.0, size=(size, target.kernel.dim))
    return competitors_from_target(target, pts)


@dataclass(frozen=True)
class OfflineConfig:
    """One regression problem: design size, ridge level, noise, target."""

    n: int
    tau: float
    delta: float
    seed: object
    target: TargetFunction
    noise_scale: float = 0.0
    competitor_size: int = 64
    sampler: object = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("sample size must be at least 1")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.noise_scale < 0:
            raise ValueError("noise scale must be nonnegative")


def sample_dataset(cfg: OfflineConfig) -> Dataset:
    """Inputs i.i.d. from the design law, labels f(x) + Gaussian(0, R^2)."""
    rng = np.random.default_rng(cfg.seed)
    m = cfg.target.kernel.dim
    if cfg.sampler is None:
        X = rng.uniform(-1.0, 1.0, size=(cfg.n, m))
    else:
        X = np.atleast_2d(np.asarray(cfg.sampler(rng, cfg.n, m), dtype=float))
    y = cfg.target(X) + cfg.noise_scale * rng.standard_normal(cfg.n)
    return Dataset(X, y)


def _plugin_choice(model: KRRModel, comp: CompetitorSet):
    preds = model.predict(comp.points)
    chosen = int(np.argmax(preds))
    regret = comp.best_value - float(comp.values[chosen])
    return comp.points[chosen], regret


def plugin_maximize(data: Dataset, kernel, tau: float, comp: CompetitorSet):
    """Fit at level tau and return (chosen point, simple regret)."""
    model = fit(data, kernel, normalized_tau(tau))
    return _plugin_choice(model, comp)


def uniform_error(model: KRRModel, target: TargetFunction, grid) -> float:
    """sup over the grid of |plug-in estimate - f|."""
    pts = np.atleast_2d(np.asarray(grid, dtype=float))
    if pts.shape[1] != target.kernel.dim:
        pts = np.asarray(grid, dtype=float).reshape(-1, target.kernel.dim)
    return float(np.max(np.abs(model.predict(pts) - target(pts))))


def measurement_grid(m: int, size: int = 256) -> np.ndarray:
    """Uniform product grid used to approximate the sup norm."""
    per_dim = size if m == 1 else max(9, round(size ** (1.0 / m)))
    axis = np.linspace(-1.0, 1.0, per_dim)
    if m == 1:
        return axis.reshape(-1, 1)
    mesh = np.meshgrid(*([axis] * m), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


# ---------------------------------------------------------------------------
# Misspecification amplification


@dataclass(frozen=True)
class AmplificationConfig:
    target: TargetFunction
    tau: float
    noise_scale: float
    eps_grid: tuple = DEFAULT_EPS_GRID
    n_grid: tuple = (100, 400, 1600)
    reps: int = 20
    competitor_size: int = 64
    error_grid_size: int = 256
    seed: int = 0

    def __post_init__(self):
        if 0.0 not in tuple(self.eps_grid):
            raise ValueError("the eps grid must include 0")
        if self.reps < 1:
            raise ValueError("at least one repetition required")
        if self.target.perturbation is None:
            raise ValueError("a perturbation is required to sweep eps")


@dataclass(frozen=True)
class AmplificationResult:
    rows: tuple
    summary: tuple
    slope: float
    slope_stderr: float
    intercept: float
    largest_n: int

    def to_csv(self) -> str:
        lines = [",".join(ROW_COLUMNS)]
        for row in self.rows:
            lines.append(",".join(repr(row[c]) for c in ROW_COLUMNS))
        return "\n".join(lines) + "\n"


def _ols_with_stderr(x: np.ndarray, y: np.ndarray):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xbar = x.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    slope = float(np.sum((x - xbar) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * xbar)
    resid = y - (intercept + slope * x)
    dof = x.size - 2
    if dof > 0 and sxx > 0:
        stderr = math.sqrt(float(np.sum(resid**2)) / dof / sxx)
    else:
        stderr = 0.0
    return slope, intercept, stderr


def _certified_bounds(kernel, tau: float):
    spec = kernel.coordinate_spectra[0]
    if kernel.dim == 1:
        value, tail = effective_dimension(spec, tau)
        abel = abel_bound_1d(spec, tau)
    else:
        value, tail = product_effective_dimension(kernel, tau)
        abel = abel_bound_multi(kernel, tau)
    return float(value + tail), float(abel), math.sqrt(value + tail)


def amplification_experiment(cfg: AmplificationConfig) -> AmplificationResult:
    """Sweep (eps, n), record per-rep errors, fit the eps slope at max n."""
    kernel = cfg.target.kernel
    grid = measurement_grid(kernel.dim, cfg.error_grid_size)
    d_eff, abel, sqrt_bound = _certified_bounds(kernel, cfg.tau)

    rows = []
    summary = []
    means = {}
    for i_eps, eps in enumerate(cfg.eps_grid):
        target = dataclasses.replace(cfg.target, eps=float(eps))
        for i_n, n in enumerate(cfg.n_grid):
            errs = np.empty(cfg.reps)
            regrets = np.empty(cfg.reps)
            for rep in range(cfg.reps):
                cell = np.random.SeedSequence(
                    cfg.seed, spawn_key=(i_eps, i_n, rep)
                )
                data_ss, comp_ss = cell.spawn(2)
                data = sample_dataset(
                    OfflineConfig(
                        n=int(n),
                        tau=cfg.tau,
                        delta=0.5,
                        seed=data_ss,
                        target=target,
                        noise_scale=cfg.noise_scale,
                    )
                )
                model = fit(data, kernel, normalized_tau(cfg.tau))
                comp = random_competitors(target, cfg.competitor_size, comp_ss)
                _, regret = _plugin_choice(model, comp)
                err = uniform_error(model, target, grid)
                errs[rep] = err
                regrets[rep] = regret
                rows.append(
                    {
                        "eps": float(eps),
                        "n": int(n),
                        "tau": cfg.tau,
                        "rep": rep,
                        "uniform_err": err,
                        "simple_regret": regret,
                        "d_eff": d_eff,
                        "abel_bound": abel,
                        "sqrt_bound": sqrt_bound,
                    }
                )
            means[(float(eps), int(n))] = float(errs.mean())
            summary.append(
                {
                    "eps": float(eps),
                    "n": int(n),
                    "mean_uniform_err": float(errs.mean()),
                    "p90_uniform_err": float(np.percentile(errs, 90)),
                    "mean_simple_regret": float(regrets.mean()),
                    "p90_simple_regret": float(np.percentile(regrets, 90)),
                }
            )
    largest_n = int(max(cfg.n_grid))
    eps_arr = np.array(sorted(cfg.eps_grid), dtype=float)
    mean_arr = np.array([means[(float(e), largest_n)] for e in eps_arr])
    slope, intercept, stderr = _ols_with_stderr(eps_arr, mean_arr)
    return AmplificationResult(
        rows=tuple(rows),
        summary=tuple(summary),
        slope=slope,
        slope_stderr=stderr,
        intercept=intercept,
        largest_n=largest_n,
    )
