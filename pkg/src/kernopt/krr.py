"""Kernel ridge regression with posterior variance and confidence bounds.

Predictions solve (K + cI) w = y through a lower Cholesky factor that
supports O(n^2) row appends for the sequential (online) use case under the
raw-lambda convention.  A tracked candidate grid keeps that case's
predictions and variances at O(n * grid) per step.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .spectra import MercerKernel

_CONVENTIONS = ("normalized", "raw")


class NumericalDegeneracyError(RuntimeError):
    """Cholesky factorization failed despite a positive ridge."""


class SampleSizeGateError(ValueError):
    """The effective-dimension bound's sample-size condition is not met."""


@dataclass(frozen=True)
class RegularizationSpec:
    """Ridge amount, either per-sample (normalized tau) or total (raw lambda).

    The normalized convention with n points resolves to the same linear
    system as raw lambda = n * tau.
    """

    convention: str
    value: float

    def __post_init__(self):
        if self.convention not in _CONVENTIONS:
            raise ValueError(f"convention must be one of {_CONVENTIONS}")
        if not self.value > 0:
            raise ValueError("regularization must be positive")

    def ridge(self, n: int) -> float:
        if self.convention == "normalized":
            return self.value * max(n, 1)
        return self.value


def normalized_tau(tau: float) -> RegularizationSpec:
    return RegularizationSpec("normalized", tau)


def raw_lambda(lam: float) -> RegularizationSpec:
    return RegularizationSpec("raw", lam)


@dataclass(frozen=True)
class Dataset:
    inputs: np.ndarray
    labels: np.ndarray
    noise_scale: float = 0.0

    def __post_init__(self):
        X = np.asarray(self.inputs, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)  # a flat array means scalar inputs
        y = np.atleast_1d(np.asarray(self.labels, dtype=float))
        if X.shape[0] != y.shape[0]:
            raise ValueError("inputs and labels must have equal length")
        if np.any(np.abs(X) > 1.0 + 1e-12):
            raise ValueError("inputs must lie in [-1, 1]^m")
        if self.noise_scale < 0:
            raise ValueError("noise scale must be nonnegative")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "labels", y)

    def __len__(self) -> int:
        return self.labels.size


class KRRModel:
    """Sequentially extendable KRR state.

    Appends mutate the model (single writer); predictions only read.  Under
    the normalized convention the ridge changes with n, so appends fall back
    to a full refactorization; the raw convention extends the factor one row
    at a time with a dense rebuild only if positivity is lost to round-off.
    """

    def __init__(self, kernel: MercerKernel, reg: RegularizationSpec,
                 grid: np.ndarray | None = None):
        self.kernel = kernel
        self.reg = reg
        self.clamp_count = 0
        self._n = 0
        self._cap = 16
        m = kernel.dim
        self._x = np.empty((self._cap, m))
        self._y = np.empty(self._cap)
        self._L = np.zeros((self._cap, self._cap))
        self._u = np.empty(self._cap)
        self._logdiag = 0.0
        self._w = None
        if grid is not None:
            grid = kernel._as_points(grid)
            self._grid = grid
            self._grid_diag = kernel.diag(grid)
            self._z = np.empty((self._cap, grid.shape[0]))
        else:
            self._grid = None

    # -- state ---------------------------------------------------------------

    @property
    def n(self) -> int:
        return self._n

    @property
    def ridge(self) -> float:
        return self.reg.ridge(self._n)

    def training_inputs(self) -> np.ndarray:
        return self._x[: self._n].copy()

    def training_labels(self) -> np.ndarray:
        return self._y[: self._n].copy()

    def factor(self) -> np.ndarray:
        return self._L[: self._n, : self._n].copy()

    # -- fitting -------------------------------------------------------------

    def _grow(self, need: int) -> None:
        if need <= self._cap:
            return
        cap = self._cap
        while cap < need:
            cap *= 2
        x = np.empty((cap, self._x.shape[1]))
        x[: self._n] = self._x[: self._n]
        y = np.empty(cap)
        y[: self._n] = self._y[: self._n]
        L = np.zeros((cap, cap))
        L[: self._n, : self._n] = self._L[: self._n, : self._n]
        u = np.empty(cap)
        u[: self._n] = self._u[: self._n]
        self._x, self._y, self._L, self._u = x, y, L, u
        if self._grid is not None:
            z = np.empty((cap, self._z.shape[1]))
            z[: self._n] = self._z[: self._n]
            self._z = z
        self._cap = cap

    def _refactor(self) -> None:
        n = self._n
        X = self._x[:n]
        K = self.kernel.pairwise(X, X)
        K[np.diag_indices(n)] += self.reg.ridge(n)
        try:
            L = cholesky(K, lower=True)
        except np.linalg.LinAlgError as exc:
            raise NumericalDegeneracyError(str(exc)) from exc
        self._L[:n, :n] = L
        self._u[:n] = solve_triangular(L, self._y[:n], lower=True)
        self._logdiag = float(np.sum(np.log(np.diag(L))))
        if self._grid is not None:
            kg = self.kernel.pairwise(X, self._grid)
            self._z[:n] = solve_triangular(L, kg, lower=True)
        self._w = None

    def append(self, x, y: float) -> None:
        x = self.kernel._as_points(x)
        if x.shape[0] != 1:
            raise ValueError("append takes a single point")
        self._grow(self._n + 1)
        n = self._n
        self._x[n] = x[0]
        self._y[n] = float(y)
        self._n = n + 1
        if self.reg.convention == "normalized" or n == 0:
            self._refactor()
            return
        lam = self.reg.value
        L = self._L[:n, :n]
        k_vec = self.kernel.pairwise(self._x[:n], x)[:, 0]
        ell = solve_triangular(L, k_vec, lower=True)
        kxx = float(self.kernel.diag(x)[0]) + lam
        d2 = kxx - float(ell @ ell)
        if d2 <= 1e-12 * kxx:
            self._refactor()
            return
        d = math.sqrt(d2)
        self._L[n, :n] = ell
        self._L[n, n] = d
        self._u[n] = (float(y) - float(ell @ self._u[:n])) / d
        self._logdiag += math.log(d)
        if self._grid is not None:
            kg = self.kernel.pairwise(x, self._grid)[0]
            self._z[n] = (kg - ell @ self._z[:n]) / d
        self._w = None

    # -- queries -------------------------------------------------------------

    def _weights(self) -> np.ndarray:
        if self._w is None:
            n = self._n
            self._w = solve_triangular(
                self._L[:n, :n].T, self._u[:n], lower=False
            )
        return self._w

    def predict(self, X) -> np.ndarray:
        X = self.kernel._as_points(X)
        if self._n == 0:
            return np.zeros(X.shape[0])
        psi = self.kernel.pairwise(X, self._x[: self._n])
        return psi @ self._weights()

    def posterior_std(self, X) -> np.ndarray:
        X = self.kernel._as_points(X)
        kxx = self.kernel.diag(X)
        if self._n == 0:
            return np.sqrt(kxx)
        psi = self.kernel.pairwise(self._x[: self._n], X)
        ell = solve_triangular(self._L[: self._n, : self._n], psi, lower=True)
        var = kxx - np.sum(ell * ell, axis=0)
        return self._clamp_to_std(var)

    def _clamp_to_std(self, var: np.ndarray) -> np.ndarray:
        neg = var < 0
        if np.any(neg):
            self.clamp_count += int(np.count_nonzero(neg))
            if np.any(var < -1e-10):
                warnings.warn(
                    "posterior variance fell below -1e-10 before clamping",
                    RuntimeWarning,
                )
            var = np.where(neg, 0.0, var)
        return np.sqrt(var)

    def grid_posterior(self) -> tuple[np.ndarray, np.ndarray]:
        """(mean, std) over the tracked grid, O(n * grid) from cached solves."""
        if self._grid is None:
            raise ValueError("no tracked grid on this model")
        if self._n == 0:
            return np.zeros(self._grid.shape[0]), np.sqrt(self._grid_diag)
        z = self._z[: self._n]
        mean = z.T @ self._u[: self._n]
        var = self._grid_diag - np.sum(z * z, axis=0)
        return mean, self._clamp_to_std(var)

    @property
    def grid_points(self) -> np.ndarray:
        if self._grid is None:
            raise ValueError("no tracked grid on this model")
        return self._grid

    def information_gain(self) -> float:
        """(1/2) log det(I + K/lambda); raw convention only."""
        if self.reg.convention != "raw":
            raise ValueError("information gain uses the raw-lambda convention")
        if self._n == 0:
            return 0.0
        return self._logdiag - 0.5 * self._n * math.log(self.reg.value)


def fit(data: Dataset, kernel: MercerKernel, reg: RegularizationSpec,
        grid: np.ndarray | None = None) -> KRRModel:
    model = KRRModel(kernel, reg, grid=grid)
    n = len(data)
    if n == 0:
        return model
    model._grow(n)
    model._x[:n] = kernel._as_points(data.inputs)
    model._y[:n] = data.labels
    model._n = n
    model._refactor()
    return model


# ---------------------------------------------------------------------------
# Confidence-bound right-hand sides


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")


def fundleb_rhs(sigma: float, n: int, tau: float, R: float, delta: float,
                norm_bound: float, lambda_bound: float, kappa: float,
                eps: float) -> float:
    """Fixed-x error bound: noise + complexity + Lebesgue-amplified bias."""
    _check_delta(delta)
    if min(sigma, R, norm_bound, lambda_bound, kappa, eps) < 0 or n < 1:
        raise ValueError("scales must be nonnegative and n >= 1")
    if tau <= 0:
        raise ValueError("tau must be positive")
    o_n = (4.0 * kappa**2 / (3.0 * n)) * math.log(2.0 / delta) + kappa**2 * (
        1.0 + math.sqrt(math.log(2.0 / delta))
    ) / math.sqrt(n)
    noise = 2.0 * R * sigma * math.sqrt(math.log(4.0 / delta)) / math.sqrt(n * tau)
    return noise + sigma * norm_bound + (lambda_bound + 1.0 + o_n) * eps


def fundlebtwo_gate(n: int, d_eff: float, delta: float) -> bool:
    _check_delta(delta)
    return n >= 64.0 * d_eff * math.log(576.0 * d_eff / delta)


def fundlebtwo_rhs(n: int, tau: float, R: float, delta: float,
                   norm_bound: float, d_eff: float, lambda_bound: float,
                   kappa: float, eps: float) -> float:
    """Effective-dimension form of the fixed-x bound; gated on sample size."""
    _check_delta(delta)
    if not fundlebtwo_gate(n, d_eff, delta):
        raise SampleSizeGateError(
            "n < 64 * d_eff * log(576 * d_eff / delta): bound not applicable"
        )
    o_n = (4.0 * kappa**2 / (3.0 * n)) * math.log(3.0 / delta) + kappa**2 * (
        1.0 + math.sqrt(math.log(3.0 / delta))
    ) / math.sqrt(n)
    lead = (
        2.0 * R * math.sqrt(math.log(6.0 / delta))
        + math.sqrt(n * tau) * norm_bound
    ) * math.sqrt(2.0 * d_eff / n)
    return lead + (lambda_bound + 1.0 + o_n) * eps


# ---------------------------------------------------------------------------
# Targets


def cosine_perturbation(q: int):
    """Unit-sup-norm perturbation cos(pi q x_1); pick q beyond the f_star
    support (and beyond the kernel truncation to isolate amplification)."""
    if q < 1:
        raise ValueError("frequency must be positive")

    def g(X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.cos(np.pi * q * X[:, 0])

    return g


@dataclass(frozen=True)
class TargetFunction:
    """f = f_star + eps * g with f_star a finite Mercer-basis expansion.

    ``coefficients`` maps multi-indices (one flat basis index per
    coordinate, 1-based) to reals; plain integers are accepted for m = 1.
    The RKHS norm uses the kernel's eigenvalues, so coefficients are only
    allowed on indices with positive eigenvalue inside the truncation.
    """

    kernel: MercerKernel
    coefficients: dict
    eps: float = 0.0
    perturbation: object = None
    norm_bound: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("misspecification level must be nonnegative")
        if self.eps > 0 and self.perturbation is None:
            raise ValueError("eps > 0 requires a perturbation")
        m = self.kernel.dim
        mercer = [s.mercer_values() for s in self.kernel.coordinate_spectra]
        clean = {}
        sq = 0.0
        for key, coeff in self.coefficients.items():
            mi = (int(key),) if np.isscalar(key) else tuple(int(i) for i in key)
            if len(mi) != m:
                raise ValueError("multi-index length must equal the dimension")
            mu = 1.0
            for d, i in enumerate(mi):
                if not 1 <= i <= mercer[d].size:
                    raise ValueError("coefficient outside the truncation")
                mu *= mercer[d][i - 1]
            if mu <= 0.0 and coeff != 0.0:
                raise ValueError("coefficient on a zero eigenvalue")
            if coeff != 0.0:
                clean[mi] = float(coeff)
                sq += coeff * coeff / mu
        object.__setattr__(self, "coefficients", clean)
        object.__setattr__(self, "norm_bound", math.sqrt(sq))

    def f_star(self, X) -> np.ndarray:
        X = self.kernel._as_points(X)
        if not self.coefficients:
            return np.zeros(X.shape[0])
        multi = list(self.coefficients.keys())
        feats = self.kernel.basis.eval_multi(multi, X)
        return feats @ np.array(list(self.coefficients.values()))

    def __call__(self, X) -> np.ndarray:
        X = self.kernel._as_points(X)
        out = self.f_star(X)
        if self.eps > 0:
            out = out + self.eps * np.asarray(self.perturbation(X), dtype=float)
        return out

    def with_norm(self, target_norm: float) -> "TargetFunction":
        """Rescale the expansion so the RKHS norm equals ``target_norm``."""
        if self.norm_bound == 0.0:
            raise ValueError("cannot rescale the zero expansion")
        factor = target_norm / self.norm_bound
        coeffs = {k: v * factor for k, v in self.coefficients.items()}
        return TargetFunction(self.kernel, coeffs, self.eps, self.perturbation)
