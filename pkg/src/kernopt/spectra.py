"""Fourier-diagonal kernels on [-1, 1]^m built from eigenvalue sequences.

The basis is the real Fourier system, orthonormal under the uniform
probability measure on [-1, 1]: position 1 is the constant function, then
cosine/sine pairs by increasing frequency,

    phi_1(x) = 1,  phi_{2j}(x) = sqrt(2) cos(pi j x),
    phi_{2j+1}(x) = sqrt(2) sin(pi j x).

A kernel is a diagonal operator in this basis.  When the same eigenvalue is
assigned to both members of a frequency pair the kernel is stationary:

    k(x, y) = v_0 + sum_j 2 v_j cos(pi j (x - y)).

Sequences therefore come in two indexings: "frequency" (one value per
frequency, shared by the pair; what the stationary constructions produce)
and "flat" (one value per basis position; what index-by-index constructions
such as the adversarial spectrum produce).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

SUP_PHI = math.sqrt(2.0)  # sup-norm of every non-constant basis function

_INDEXINGS = ("flat", "frequency")


def _check_domain(x: np.ndarray) -> None:
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise ValueError("point outside [-1, 1]^m")


# ---------------------------------------------------------------------------
# Eigenvalue sequences


@dataclass(frozen=True)
class EigenSequence:
    """Truncated nonnegative eigenvalue sequence with optional tail certificate.

    ``values[i]`` is the eigenvalue at flat index i+1 ("flat") or at
    frequency i ("frequency").  When ``tail_exponent`` is set, entries
    beyond the truncation are certified to satisfy
    ``mu_index <= tail_constant * index**(-tail_exponent)``; without it the
    sequence is exactly finitely supported and every tail term is zero.
    """

    values: np.ndarray
    indexing: str = "flat"
    tail_exponent: float | None = None
    tail_constant: float | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("eigenvalue sequence must be non-empty and 1-D")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("eigenvalues must be finite and nonnegative")
        if self.indexing not in _INDEXINGS:
            raise ValueError(f"indexing must be one of {_INDEXINGS}")
        if (self.tail_exponent is None) != (self.tail_constant is None):
            raise ValueError("tail_exponent and tail_constant come together")
        if self.tail_exponent is not None:
            if self.tail_exponent <= 0 or self.tail_constant < 0:
                raise ValueError("tail certificate needs s > 0 and C1 >= 0")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size

    @property
    def truncation(self) -> int:
        return self.values.size

    def _last_index(self) -> int:
        # Largest index covered by the stored values, in native indexing.
        if self.indexing == "frequency":
            return self.values.size - 1
        return self.values.size

    def tail_sum(self) -> float:
        """Certified upper bound on the sum of entries beyond the truncation."""
        if self.tail_exponent is None:
            return 0.0
        s, c1 = self.tail_exponent, self.tail_constant
        if s <= 1.0:
            return math.inf
        t = max(self._last_index(), 1)
        return c1 * t ** (1.0 - s) / (s - 1.0)

    def tail_log_weighted_sum(self) -> float:
        """Certified upper bound on sum of mu_i * log(e + i) beyond truncation."""
        if self.tail_exponent is None:
            return 0.0
        s, c1 = self.tail_exponent, self.tail_constant
        if s <= 1.0:
            return math.inf
        t = max(self._last_index(), 1)
        # integrate x^-s log(e+x) by parts; the remainder integral is bounded
        # by the plain power tail
        return c1 * t ** (1.0 - s) * (math.log(math.e + t) + 1.0 / (s - 1.0)) / (s - 1.0)

    def tail_index_bound(self, index: int) -> float:
        """Certified bound on the entry at a native index beyond the truncation."""
        if index <= self._last_index():
            raise ValueError("index inside the truncation")
        if self.tail_exponent is None:
            return 0.0
        return self.tail_constant * float(index) ** (-self.tail_exponent)

    # -- Mercer (flat) view -------------------------------------------------

    def mercer_values(self) -> np.ndarray:
        """Flat eigenvalue array of the induced 1-D kernel."""
        if self.indexing == "flat":
            return self.values
        v = self.values
        out = np.empty(2 * (v.size - 1) + 1)
        out[0] = v[0]
        out[1::2] = v[1:]
        out[2::2] = v[1:]
        return out

    def mercer_tail_sum(self) -> float:
        """Certified bound on the flat eigenvalue sum beyond the truncation."""
        if self.indexing == "frequency":
            return 2.0 * self.tail_sum()
        return self.tail_sum()

    def trace_interval(self) -> tuple[float, float]:
        """(truncated trace, truncated trace + certified tail) of the kernel."""
        lo = float(self.mercer_values().sum())
        return lo, lo + self.mercer_tail_sum()

    def to_flat(self) -> "EigenSequence":
        """Flat-indexed view.  For frequency sequences the per-index tail
        constant inflates to C1 * 3^s (valid for flat indices >= 3, i.e.
        everywhere beyond any stored truncation)."""
        if self.indexing == "flat":
            return self
        tail_e = self.tail_exponent
        tail_c = None if tail_e is None else self.tail_constant * 3.0 ** tail_e
        return EigenSequence(self.mercer_values(), "flat", tail_e, tail_c)

    def scaled(self, factor: float) -> "EigenSequence":
        if factor < 0:
            raise ValueError("scale factor must be nonnegative")
        tail_c = None if self.tail_constant is None else self.tail_constant * factor
        return replace(self, values=self.values * factor, tail_constant=tail_c)


def matern_periodic_spectrum(
    nu: float,
    count: int,
    normalize_trace: bool = True,
    include_constant: bool = True,
) -> EigenSequence:
    """Periodic Matern-type spectrum: value (1 + j^2)^(-nu - 1/2) at frequency j.

    ``count`` is the number of stored frequencies (j = 0 .. count-1).  With
    ``normalize_trace`` the values are scaled so that truncated trace plus
    the certified tail equals 1 exactly, giving sup bound kappa = 1.
    ``include_constant=False`` zeroes the j = 0 mode before normalizing.
    """
    if nu <= 0:
        raise ValueError("nu must be positive")
    if count < 1:
        raise ValueError("count must be at least 1")
    j = np.arange(count, dtype=float)
    vals = (1.0 + j * j) ** (-(nu + 0.5))
    if not include_constant:
        vals[0] = 0.0
    s = 2.0 * nu + 1.0
    spec = EigenSequence(vals, "frequency", tail_exponent=s, tail_constant=1.0)
    if normalize_trace:
        total = spec.trace_interval()[1]
        spec = spec.scaled(1.0 / total)
    return spec


def monotone_envelope(spec: EigenSequence) -> EigenSequence:
    """Smallest non-increasing sequence dominating the input (suffix maximum).

    When a tail certificate is present the suffix maximum is floored at the
    certified sup of the tail, C1 * (T+1)^(-s), so the output dominates the
    full sequence, not just the stored part.  The certificate carries over:
    a suffix max of values <= C1 i^-s is itself <= C1 i^-s.
    """
    vals = spec.values
    env = np.maximum.accumulate(vals[::-1])[::-1]
    if spec.tail_exponent is not None:
        tail_sup = spec.tail_index_bound(spec._last_index() + 1)
        env = np.maximum(env, tail_sup)
    return replace(spec, values=env)


def adversarial_spectrum(s: float, seed: int, count: int) -> EigenSequence:
    """Sparse random spectrum, nonzero only next to powers of two.

    mu_i = log2(i)^-s * U_i   when log2(i) is a positive integer,
    mu_i = log2(i+1)^-s * U_i when log2(i+1) is a positive integer,
    mu_i = 0 otherwise, with U_i i.i.d. Bernoulli(1/2) from the seed.
    Flat-indexed and exactly finitely supported at the truncation.
    """
    if s <= 1.0:
        raise ValueError("s must exceed 1 (eigenvalue sum diverges otherwise)")
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    u = rng.integers(0, 2, size=count).astype(float)
    i = np.arange(1, count + 1)
    vals = np.zeros(count)
    lg = np.log2(i.astype(float))
    lg_next = np.log2((i + 1).astype(float))
    is_pow = (i & (i - 1) == 0) & (i >= 2)
    next_pow = ((i + 1) & i == 0) & (i + 1 >= 2)
    vals[is_pow] = lg[is_pow] ** (-s)
    vals[next_pow & ~is_pow] = lg_next[next_pow & ~is_pow] ** (-s)
    vals *= u
    return EigenSequence(vals, "flat")


# ---------------------------------------------------------------------------
# Basis


@dataclass(frozen=True)
class FourierBasis:
    """Real Fourier basis on [-1,1]^m; flat index -> (frequency, phase)."""

    dim: int = 1

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    @staticmethod
    def index_info(i: int) -> tuple[int, str]:
        """(frequency, phase) of flat index i >= 1."""
        if i < 1:
            raise ValueError("flat indices start at 1")
        if i == 1:
            return 0, "const"
        return i // 2, "cos" if i % 2 == 0 else "sin"

    @staticmethod
    def eval_flat(indices: np.ndarray, x: np.ndarray) -> np.ndarray:
        """phi_i(x) for 1-D x; returns array of shape (len(x), len(indices))."""
        indices = np.asarray(indices, dtype=int)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        _check_domain(x)
        out = np.empty((x.size, indices.size))
        for col, i in enumerate(indices):
            freq, phase = FourierBasis.index_info(int(i))
            if phase == "const":
                out[:, col] = 1.0
            elif phase == "cos":
                out[:, col] = SUP_PHI * np.cos(np.pi * freq * x)
            else:
                out[:, col] = SUP_PHI * np.sin(np.pi * freq * x)
        return out

    @staticmethod
    def features(x: np.ndarray, t: int) -> np.ndarray:
        """Feature matrix [phi_1(x) .. phi_t(x)] for 1-D x, shape (len(x), t)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        _check_domain(x)
        out = np.empty((x.size, t))
        out[:, 0] = 1.0
        if t > 1:
            n_cos = (t - 1 + 1) // 2  # flat 2j present iff 2j <= t
            freqs = np.arange(1, n_cos + 1, dtype=float)
            ang = np.pi * x[:, None] * freqs[None, :]
            cos = SUP_PHI * np.cos(ang)
            sin = SUP_PHI * np.sin(ang)
            out[:, 1::2] = cos[:, : out[:, 1::2].shape[1]]
            if t > 2:
                out[:, 2::2] = sin[:, : out[:, 2::2].shape[1]]
        return out

    def eval_multi(self, multi_indices, X: np.ndarray) -> np.ndarray:
        """Product-basis values; rows of X are points, shape (n, len(multi))."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise ValueError("point dimension mismatch")
        out = np.ones((X.shape[0], len(multi_indices)))
        for col, mi in enumerate(multi_indices):
            if len(mi) != self.dim:
                raise ValueError("multi-index length mismatch")
            for d, i in enumerate(mi):
                out[:, col] *= self.eval_flat(np.array([i]), X[:, d])[:, 0]
        return out


# ---------------------------------------------------------------------------
# Kernels


def _coord_sup_bound(spec: EigenSequence) -> float:
    """Sup bound on the 1-D kernel factor induced by one coordinate spectrum."""
    if spec.indexing == "frequency":
        # stationary: |v0 + sum 2 v_j cos| <= trace
        return spec.trace_interval()[1]
    mu = spec.values
    # phi_1^2 = 1, every other |phi_i(x) phi_i(y)| <= 2
    return float(mu[0] + 2.0 * mu[1:].sum()) + 2.0 * spec.tail_sum()


def _pairwise_1d(spec: EigenSequence, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gram matrix of the 1-D kernel induced by ``spec``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    _check_domain(x)
    _check_domain(y)
    # Eigenvalues split as sqrt factors into both sides so each Gram entry
    # is a sum of commuted identical products: k(x,y) = k(y,x) exactly.
    if spec.indexing == "frequency":
        v = spec.values
        k = np.full((x.size, y.size), v[0])
        if v.size > 1:
            freqs = np.arange(1, v.size, dtype=float)
            ax = np.pi * x[:, None] * freqs[None, :]
            ay = np.pi * y[:, None] * freqs[None, :]
            root = np.sqrt(2.0 * v[1:])
            k += (np.cos(ax) * root) @ (np.cos(ay) * root).T
            k += (np.sin(ax) * root) @ (np.sin(ay) * root).T
        return k
    mu = spec.values
    root = np.sqrt(mu)
    fx = FourierBasis.features(x, mu.size)
    fy = FourierBasis.features(y, mu.size)
    return (fx * root) @ (fy * root).T


def _diag_1d(spec: EigenSequence, x: np.ndarray) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    _check_domain(x)
    if spec.indexing == "frequency":
        v = spec.values
        return np.full(x.size, v[0] + 2.0 * v[1:].sum())
    mu = spec.values
    fx = FourierBasis.features(x, mu.size)
    return (fx * fx) @ mu


@dataclass(frozen=True)
class MercerKernel:
    """Kernel diagonal in the Fourier basis; product over coordinates for m > 1.

    ``coordinate_spectra`` holds one EigenSequence per coordinate (the same
    object repeated for the usual isotropic product construction).
    """

    coordinate_spectra: tuple[EigenSequence, ...]
    basis: FourierBasis = field(default=None)  # filled in __post_init__

    def __post_init__(self):
        if not self.coordinate_spectra:
            raise ValueError("need at least one coordinate spectrum")
        if self.basis is None:
            object.__setattr__(self, "basis", FourierBasis(len(self.coordinate_spectra)))
        if self.basis.dim != len(self.coordinate_spectra):
            raise ValueError("basis dimension mismatch")

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def spectrum(self) -> EigenSequence:
        if len(self.coordinate_spectra) != 1:
            raise ValueError("scalar spectrum only defined for m = 1")
        return self.coordinate_spectra[0]

    def trace_interval(self) -> tuple[float, float]:
        lo, hi = 1.0, 1.0
        for spec in self.coordinate_spectra:
            a, b = spec.trace_interval()
            lo *= a
            hi *= b
        return lo, hi

    @property
    def kappa(self) -> float:
        """Sup bound on |k|; at least 1 by convention."""
        bound = 1.0
        for spec in self.coordinate_spectra:
            bound *= _coord_sup_bound(spec)
        return max(1.0, bound)

    def pairwise(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Gram matrix between row-point arrays X (n,m) and Y (p,m)."""
        X = self._as_points(X)
        Y = self._as_points(Y)
        k = np.ones((X.shape[0], Y.shape[0]))
        for d, spec in enumerate(self.coordinate_spectra):
            k *= _pairwise_1d(spec, X[:, d], Y[:, d])
        return k

    def diag(self, X: np.ndarray) -> np.ndarray:
        X = self._as_points(X)
        out = np.ones(X.shape[0])
        for d, spec in enumerate(self.coordinate_spectra):
            out *= _diag_1d(spec, X[:, d])
        return out

    def tail_eval_bound(self) -> float:
        """Certificate on |truncated k - full k| from the tail, any arguments."""
        full = [_coord_sup_bound(s) for s in self.coordinate_spectra]
        bound = 0.0
        for d, spec in enumerate(self.coordinate_spectra):
            others = math.prod(full[:d] + full[d + 1 :]) if len(full) > 1 else 1.0
            # paired tails enter as |2 v_j cos| <= 2 v_j (= the flat tail sum);
            # flat tails pay the sup |phi phi| <= 2 on top
            factor = 1.0 if spec.indexing == "frequency" else 2.0
            bound += factor * spec.mercer_tail_sum() * others
        return bound

    def _as_points(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 0:
            X = X.reshape(1, 1)
        elif X.ndim == 1:
            # a single point for m > 1, or a batch of scalars for m = 1
            X = X.reshape(-1, 1) if self.dim == 1 else X.reshape(1, -1)
        if X.shape[1] != self.dim:
            raise ValueError("point dimension mismatch")
        return X

    def stationary_profile(self) -> "StationaryProfile":
        """Displacement profile; only paired (frequency-indexed) kernels have one."""
        if any(s.indexing != "frequency" for s in self.coordinate_spectra):
            raise ValueError("profile requires paired spectra in every coordinate")
        specs = self.coordinate_spectra

        def fn(u: np.ndarray) -> np.ndarray:
            U = np.atleast_2d(np.asarray(u, dtype=float))
            if U.shape[1] != len(specs):
                raise ValueError("displacement dimension mismatch")
            out = np.ones(U.shape[0])
            for d, spec in enumerate(specs):
                v = spec.values
                coord = np.full(U.shape[0], v[0])
                if v.size > 1:
                    freqs = np.arange(1, v.size, dtype=float)
                    coord = coord + np.cos(np.pi * U[:, d : d + 1] * freqs) @ (2.0 * v[1:])
                out *= coord
            return out

        return StationaryProfile(fn=fn, dim=self.dim, kappa=self.kappa, length_scale=1.0)


def mercer_kernel_1d(spec: EigenSequence) -> MercerKernel:
    return MercerKernel((spec,))


def kernel_eval(kernel: MercerKernel, x, y) -> tuple[float, float]:
    """Pointwise kernel value with its truncation-tail certificate."""
    k = kernel.pairwise(np.atleast_1d(x), np.atleast_1d(y))
    return float(k[0, 0]), kernel.tail_eval_bound()


def product_kernel(base: EigenSequence, m: int) -> MercerKernel:
    """Isotropic product kernel: multi-index eigenvalue = product of factors."""
    if m < 1:
        raise ValueError("m must be at least 1")
    flat = base.mercer_values()
    if np.any(np.diff(flat) > 1e-15):
        raise ValueError("product construction requires a non-increasing base")
    return MercerKernel((base,) * m)


# ---------------------------------------------------------------------------
# Stationary profiles and periodization


@dataclass(frozen=True)
class StationaryProfile:
    """Displacement profile of a stationary kernel.

    ``fn`` maps displacement rows (n, m) to values (n,); it must accept any
    real displacement (periodization evaluates shifted copies).  ``decay``,
    when given, maps a sup-norm radius r to a bound on sup_{|u| >= r} |fn(u)|
    and must be non-increasing; periodization requires it.
    """

    fn: object
    dim: int
    kappa: float
    length_scale: float = 1.0
    decay: object = None

    def __post_init__(self):
        if self.dim < 1 or self.kappa < 1.0 or self.length_scale <= 0:
            raise ValueError("need dim >= 1, kappa >= 1, positive length scale")

    def __call__(self, u) -> np.ndarray:
        U = np.asarray(u, dtype=float)
        if U.ndim <= 1 and self.dim == 1:
            U = np.atleast_1d(U).reshape(-1, 1)
        return self.fn(U)


def periodize(
    profile: StationaryProfile, half_period: float, truncation: int
) -> tuple[StationaryProfile, float]:
    """Wrap a decaying profile onto the lattice (2L Z)^m.

    Returns the periodized profile and the wrap-around discrepancy bound:
    the sum over nonzero truncated-lattice shifts of the sup of |profile|
    over the displacement cell [-2, 2]^m, computed from the decay bound.
    """
    if half_period < 1.0:
        raise ValueError("half period must be at least 1")
    if truncation < 1:
        raise ValueError("lattice truncation must be at least 1")
    if profile.decay is None:
        raise ValueError("periodization needs a decay bound on the profile")
    m = profile.dim
    L = float(half_period)

    def shell_term(r: int) -> float:
        count = (2 * r + 1) ** m - (2 * r - 1) ** m
        return count * float(profile.decay(2.0 * L * r - 2.0))

    # Summability certificate: shell bounds beyond the truncation must be
    # dominated by a geometric sequence (probed ratio below 0.99), which
    # covers compactly supported, Gaussian and exponential profiles; slowly
    # decaying power-law bounds are rejected as uncertifiable.
    probe_end = truncation + max(64, truncation)
    terms = [shell_term(r) for r in range(1, probe_end + 1)]
    if not all(math.isfinite(t) and t >= 0 for t in terms):
        raise ValueError("profile decay bound does not certify summability")
    for prev_t, next_t in zip(terms[truncation - 1 :], terms[truncation:]):
        if prev_t == 0.0:
            ok = next_t == 0.0
        else:
            ok = next_t <= 0.99 * prev_t
        if not ok:
            raise ValueError("profile decay bound does not certify summability")
    discrepancy = float(sum(terms[:truncation]))

    offsets = np.arange(-truncation, truncation + 1, dtype=float) * 2.0 * L
    grids = np.meshgrid(*([offsets] * m), indexing="ij")
    shifts = np.stack([g.ravel() for g in grids], axis=1)

    def fn(u: np.ndarray) -> np.ndarray:
        U = np.atleast_2d(np.asarray(u, dtype=float))
        out = np.zeros(U.shape[0])
        for shift in shifts:
            out += profile.fn(U + shift)
        return out

    wrapped = StationaryProfile(
        fn=fn,
        dim=m,
        kappa=profile.kappa + discrepancy,
        length_scale=profile.length_scale,
        decay=None,
    )
    return wrapped, discrepancy
