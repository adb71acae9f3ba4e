"""Domain-splitting UCB with misspecification-inflated exploration bonuses.

One run holds a dyadic partition of [-1,1]^m.  Each cell carries its own
ridge model (raw-lambda convention, rank-one appends); the bonus adds the
norm bound and an eps term growing with the cell's sample count, so the
policy abandons over-sampled cells instead of shrinking their intervals
below the misspecification floor.  Cells split once their sample count
reaches side^(-b), with the side normalized to 1 at the root.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .krr import KRRModel, TargetFunction, Dataset, fit, raw_lambda
from .offline import CompetitorSet

LOG_COLUMNS = ("t", "region_id", "depth", "reward", "inst_regret",
               "cum_regret", "beta", "sigma", "gain", "split_flag")
CENSUS_COLUMNS = ("region_id", "depth", "rho", "T_A")


@dataclass(frozen=True)
class OnlineParams:
    """Run-level knobs; the split exponent defaults to the decay exponent."""

    horizon: int
    noise_scale: float
    norm_bound: float
    eps: float = 0.0
    delta: float = 0.1
    lam: float = 1.0
    split_exponent: float | None = None
    decay_alpha: float | None = None
    decay_s: float | None = None
    decay_scale: float | None = None
    basis_sup: float | None = None
    grid_points: int = 9

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.noise_scale < 0 or self.norm_bound < 0 or self.eps < 0:
            raise ValueError("scale parameters must be nonnegative")
        if self.grid_points < 1:
            raise ValueError("at least one candidate per dimension required")
        b = self.split_exponent
        if b is None:
            b = self.decay_alpha
        if b is None or b <= 0:
            raise ValueError("a positive split exponent is required")
        object.__setattr__(self, "split_exponent", float(b))


def reference_slope(m: int, alpha: float) -> float:
    """Exponent of the regret growth the splitting policy aims for."""
    return (2.0 * m + alpha) / (2.0 * m + 2.0 * alpha)


# ---------------------------------------------------------------------------
# Regions


@dataclass
class Region:
    """Dyadic cell owning a local model and a fixed candidate grid."""

    depth: int
    coords: tuple
    model: KRRModel

    @property
    def side(self) -> float:
        # normalized side: 1 at the root, halving per split
        return 2.0 ** -self.depth

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def key(self) -> tuple:
        return (self.depth, self.coords)

    @property
    def region_id(self) -> str:
        return f"{self.depth}:" + "-".join(str(c) for c in self.coords)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        width = 2.0 * self.side
        lo = -1.0 + width * np.asarray(self.coords, dtype=float)
        return lo, lo + width

    def contains(self, x) -> bool:
        lo, hi = self.bounds()
        x = np.asarray(x, dtype=float).ravel()
        return bool(np.all(x >= lo - 1e-12) and np.all(x <= hi + 1e-12))

    @property
    def grid(self) -> np.ndarray:
        return self.model.grid_points

    def split_threshold(self, b: float) -> float:
        return self.side ** (-b)


def _candidate_grid(lo: np.ndarray, hi: np.ndarray, points: int) -> np.ndarray:
    axes = [np.linspace(lo[d], hi[d], points) for d in range(lo.size)]
    if lo.size == 1:
        return axes[0].reshape(-1, 1)
    mesh = np.meshgrid(*axes, indexing="ij")
    # lexicographic candidate order (first coordinate slowest)
    return np.stack([g.ravel() for g in mesh], axis=1)


def make_region(kernel, lam: float, depth: int, coords, grid_points: int,
                X=None, y=None) -> Region:
    coords = tuple(int(c) for c in coords)
    if len(coords) != kernel.dim:
        raise ValueError("one lattice coordinate per dimension required")
    if any(not 0 <= c < 2**depth for c in coords):
        raise ValueError("lattice coordinates outside the domain")
    width = 2.0 * 2.0**-depth
    lo = -1.0 + width * np.asarray(coords, dtype=float)
    grid = _candidate_grid(lo, lo + width, grid_points)
    if X is None or len(X) == 0:
        model = KRRModel(kernel, raw_lambda(lam), grid=grid)
    else:
        model = fit(Dataset(X, y), kernel, raw_lambda(lam), grid=grid)
    return Region(depth, coords, model)


def split(region: Region, params: OnlineParams) -> list[Region]:
    """Retire the region into 2^m children refit on the inherited samples."""
    if region.n < region.split_threshold(params.split_exponent):
        raise ValueError("sample count below the split threshold")
    kernel = region.model.kernel
    lam = region.model.reg.value
    m = kernel.dim
    X = region.model.training_inputs()
    y = region.model.training_labels()
    lo, hi = region.bounds()
    mid = (lo + hi) / 2.0
    upper = X >= mid  # midpoint samples go to the upper child
    per_dim = round(region.grid.shape[0] ** (1.0 / m)) if m > 1 \
        else region.grid.shape[0]
    children = []
    for corner in itertools.product((0, 1), repeat=m):
        mask = np.all(upper == np.array(corner, dtype=bool), axis=1)
        coords = tuple(2 * c + bit for c, bit in zip(region.coords, corner))
        children.append(
            make_region(kernel, lam, region.depth + 1, coords, per_dim,
                        X[mask], y[mask])
        )
    return children


# ---------------------------------------------------------------------------
# Bonus and UCB


def bonus_terms(gain, count, m: int, t: int, p: OnlineParams):
    """(noise term, norm term, eps term); gain and count may be arrays."""
    if t < 1:
        raise ValueError("rounds are 1-based")
    inside = p.split_exponent * m * np.log(4.0 * t / p.delta) + 1.0 + gain
    noise = p.noise_scale / math.sqrt(p.lam) * np.sqrt(inside)
    eps_term = p.eps * np.sqrt(np.asarray(count) / p.lam)
    return noise, p.norm_bound, eps_term


def beta_components(region: Region, t: int, p: OnlineParams):
    """(noise term, norm term, eps term) of the exploration bonus."""
    gain = region.model.information_gain()
    noise, norm, eps_term = bonus_terms(gain, region.n,
                                        region.model.kernel.dim, t, p)
    return float(noise), norm, float(eps_term)


def beta(region: Region, t: int, p: OnlineParams) -> float:
    return float(sum(beta_components(region, t, p)))


def ucb(region: Region, x, t: int, p: OnlineParams) -> float:
    x = region.model.kernel._as_points(x)
    if x.shape[0] != 1:
        raise ValueError("ucb takes a single point")
    if not region.contains(x[0]):
        raise ValueError("point outside the region")
    mean = float(region.model.predict(x)[0])
    sd = float(region.model.posterior_std(x)[0])
    return mean + beta(region, t, p) * sd


# ---------------------------------------------------------------------------
# Logs


@dataclass(frozen=True)
class RoundRecord:
    t: int
    region_id: str
    depth: int
    point: tuple
    reward: float
    inst_regret: float
    cum_regret: float
    beta: float
    beta_noise: float
    beta_norm: float
    beta_eps: float
    sigma: float
    gain: float
    split_flag: int
    ucb_value: float


@dataclass(frozen=True)
class CensusRow:
    region_id: str
    depth: int
    side: float
    samples: int


@dataclass(frozen=True)
class RegretLog:
    records: tuple
    census: tuple
    dim: int
    split_exponent: float

    @property
    def horizon(self) -> int:
        return len(self.records)

    @property
    def final_regret(self) -> float:
        return self.records[-1].cum_regret if self.records else 0.0

    def regret_curve(self) -> np.ndarray:
        return np.array([r.cum_regret for r in self.records])

    @property
    def region_count(self) -> int:
        return len(self.census)

    @property
    def max_depth(self) -> int:
        return max(row.depth for row in self.census)

    def census_total(self) -> int:
        return sum(row.samples for row in self.census)

    def to_csv(self) -> str:
        cols = (LOG_COLUMNS[:3]
                + tuple(f"x{d + 1}" for d in range(self.dim))
                + LOG_COLUMNS[3:])
        lines = [",".join(cols)]
        for r in self.records:
            vals = [str(r.t), r.region_id, str(r.depth)]
            vals += [repr(v) for v in r.point]
            vals += [repr(r.reward), repr(r.inst_regret), repr(r.cum_regret),
                     repr(r.beta), repr(r.sigma), repr(r.gain),
                     str(r.split_flag)]
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"

    def census_csv(self) -> str:
        lines = [",".join(CENSUS_COLUMNS)]
        for row in self.census:
            lines.append(",".join(
                [row.region_id, str(row.depth), repr(row.side),
                 str(row.samples)]
            ))
        return "\n".join(lines) + "\n"


def region_count_bound(n: int, m: int, b: float) -> int:
    """Cap on the number of cells ever created over an n-round run."""
    if n < 1:
        raise ValueError("horizon must be at least 1")
    return math.ceil(9.0**m * n ** (m / (m + b)))


def census_check(log: RegretLog) -> bool:
    bound = region_count_bound(log.horizon, log.dim, log.split_exponent)
    return log.region_count <= bound


# ---------------------------------------------------------------------------
# Environment and run loop


@dataclass(frozen=True)
class BanditEnvironment:
    """Simulator: true objective, the benchmark point, seeded noise."""

    target: TargetFunction
    competitors: CompetitorSet
    noise_scale: float
    seed: object

    def __post_init__(self):
        if self.noise_scale < 0:
            raise ValueError("noise scale must be nonnegative")
        vals = self.target(self.competitors.points)
        if not np.allclose(vals, self.competitors.values, atol=1e-9):
            raise ValueError("competitor values must match the target")

    @property
    def best_value(self) -> float:
        return self.competitors.best_value


class _Fleet:
    """Per-region posterior rows stacked for one-shot argmax per round."""

    def __init__(self, grid_size: int):
        self.cap = 16
        self.G = grid_size
        self.mean = np.zeros((self.cap, grid_size))
        self.std = np.zeros((self.cap, grid_size))
        self.gain = np.zeros(self.cap)
        self.count = np.zeros(self.cap, dtype=int)
        self.active: list[Region] = []

    def _grow(self, need: int) -> None:
        if need <= self.cap:
            return
        cap = self.cap
        while cap < need:
            cap *= 2
        for name in ("mean", "std"):
            arr = np.zeros((cap, self.G))
            arr[: len(self.active)] = getattr(self, name)[: len(self.active)]
            setattr(self, name, arr)
        gain = np.zeros(cap)
        gain[: len(self.active)] = self.gain[: len(self.active)]
        self.gain = gain
        count = np.zeros(cap, dtype=int)
        count[: len(self.active)] = self.count[: len(self.active)]
        self.count = count
        self.cap = cap

    def refresh(self, i: int) -> None:
        region = self.active[i]
        self.mean[i], self.std[i] = region.model.grid_posterior()
        self.gain[i] = region.model.information_gain()
        self.count[i] = region.n

    def add(self, region: Region) -> None:
        self._grow(len(self.active) + 1)
        self.active.append(region)
        self.refresh(len(self.active) - 1)

    def replace(self, i: int, region: Region) -> None:
        self.active[i] = region
        self.refresh(i)

    def select(self, t: int, p: OnlineParams):
        """Argmax of mean + beta*std; ties by point then region key."""
        R = len(self.active)
        m = self.active[0].model.kernel.dim
        noise, norm, eps_term = bonus_terms(self.gain[:R], self.count[:R],
                                            m, t, p)
        betas = noise + norm + eps_term
        values = self.mean[:R] + betas[:, None] * self.std[:R]
        top = float(values.max())
        ties = np.argwhere(values == top)
        if ties.shape[0] == 1:
            ri, gi = int(ties[0, 0]), int(ties[0, 1])
        else:
            ri, gi = min(
                ((int(a), int(b)) for a, b in ties),
                key=lambda ij: (
                    tuple(self.active[ij[0]].grid[ij[1]]),
                    self.active[ij[0]].key,
                ),
            )
        return ri, gi, top, float(noise[ri]), float(eps_term[ri]), \
            float(betas[ri])


def _run(env: BanditEnvironment, p: OnlineParams,
         allow_splits: bool) -> RegretLog:
    kernel = env.target.kernel
    m = kernel.dim
    root = make_region(kernel, p.lam, 0, (0,) * m, p.grid_points)
    fleet = _Fleet(p.grid_points**m)
    fleet.add(root)
    retired: list[CensusRow] = []
    rng = np.random.default_rng(env.seed)
    best_val = env.best_value
    records = []
    cum = 0.0
    for t in range(1, p.horizon + 1):
        ri, gi, top, noise_term, eps_term, beta_val = fleet.select(t, p)
        region = fleet.active[ri]
        x = region.grid[gi]
        fx = float(env.target(x.reshape(1, -1))[0])
        y = fx + env.noise_scale * float(rng.standard_normal())
        sigma = float(fleet.std[ri, gi])
        gain_val = float(fleet.gain[ri])
        region.model.append(x.reshape(1, -1), y)
        inst = best_val - fx
        cum += inst
        split_flag = 0
        if allow_splits and region.n >= region.split_threshold(
            p.split_exponent
        ):
            split_flag = 1
            retired.append(CensusRow(region.region_id, region.depth,
                                     region.side, region.n))
            children = split(region, p)
            fleet.replace(ri, children[0])
            for child in children[1:]:
                fleet.add(child)
        else:
            fleet.refresh(ri)
        records.append(RoundRecord(
            t=t,
            region_id=region.region_id,
            depth=region.depth,
            point=tuple(float(v) for v in x),
            reward=y,
            inst_regret=inst,
            cum_regret=cum,
            beta=beta_val,
            beta_noise=noise_term,
            beta_norm=p.norm_bound,
            beta_eps=eps_term,
            sigma=sigma,
            gain=gain_val,
            split_flag=split_flag,
            ucb_value=top,
        ))
    census = retired + [
        CensusRow(r.region_id, r.depth, r.side, r.n) for r in fleet.active
    ]
    return RegretLog(records=tuple(records), census=tuple(census), dim=m,
                     split_exponent=p.split_exponent)


def run_pi_misspec_gpucb(env: BanditEnvironment,
                         p: OnlineParams) -> RegretLog:
    """Splitting policy: per-cell models, end-of-round split resolution."""
    return _run(env, p, allow_splits=True)


def run_global_eps_ucb(env: BanditEnvironment, p: OnlineParams) -> RegretLog:
    """Baseline: one global cell, same bonus rule, never splits."""
    return _run(env, p, allow_splits=False)
