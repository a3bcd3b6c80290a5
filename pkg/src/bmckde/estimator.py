"""Kernel density estimation on tree-indexed samples with local GL bandwidth selection.

The selection rule at a point ``x`` is

    h_hat = argmin_h  A(x, h) + (b/a) V(x, h),
    A(x, h) = max_h' ((nu_h'(x) - K_h * nu_h'(x))^2 - V(x, h'))_+,
    V(x, h) = kappa log(T) / (T |h|),

with ``T`` the number of observations and ``kappa`` the (calibrated) product
of the GL constant ``a`` and the unknown variance constant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, DensityMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .kernel import Bandwidth, GaussianKernel, Kernel, TabulatedKernel, as_bandwidth, kernel_from_spec
from .tree import TreeSample, tree_size

# keeps the (observations x pairs) work array near 32 MB
_CUTOFF = 40.0
_CHUNK_ELEMS = 4_000_000


def _values(sample) -> np.ndarray:
    if isinstance(sample, TreeSample):
        return sample.values
    v = np.asarray(sample, dtype=float)
    return v[:, None] if v.ndim == 1 else v


def _points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return x.reshape(1, 1) if dim == 1 else _bad_dim(dim)
    if dim == 1 and (x.ndim == 1):
        return x[:, None]
    if x.ndim == 1 and x.size == dim:
        return x[None, :]
    if x.ndim == 2 and x.shape[1] == dim:
        return x
    return _bad_dim(dim)


def _is_single(x, dim):
    return np.ndim(x) == (0 if dim == 1 else 1)


def _bad_dim(dim):
    raise ValueError(f"evaluation points must have dimension {dim}")


def log_ratio(size: int) -> float:
    """``log(T) / T``, the scale of the variance majorant (zero for a single observation)."""
    if size < 1:
        raise ValueError("no observations")
    return math.log(size) / size


# ---------------------------------------------------------------------------
# bandwidth grid


@dataclass(frozen=True)
class BandwidthGrid:
    """Finite bandwidth collection, sorted by decreasing ``|h|``.

    Every entry satisfies ``|h| >= log(T) / T``.
    """

    entries: np.ndarray
    h_max: float
    alpha: float
    size: int

    def __post_init__(self):
        e = np.atleast_2d(np.asarray(self.entries, dtype=float))
        if e.shape[0] == 0:
            raise ValueError("empty bandwidth grid")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def prods(self) -> np.ndarray:
        return np.prod(self.entries, axis=1)

    @property
    def dim(self) -> int:
        return self.entries.shape[1]

    def __len__(self):
        return self.entries.shape[0]

    def __getitem__(self, i) -> Bandwidth:
        return Bandwidth(tuple(self.entries[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @classmethod
    def from_bandwidths(cls, bandwidths, size: int) -> "BandwidthGrid":
        """Grid from explicit entries (deduplicated, filtered, sorted)."""
        rows = [as_bandwidth(b).h for b in bandwidths]
        entries = np.array(sorted(set(rows), key=lambda r: (-math.prod(r), tuple(-v for v in r))))
        keep = np.prod(entries, axis=1) >= log_ratio(size)
        if not keep.any():
            raise ValueError("no bandwidth satisfies |h| >= log(T)/T")
        return cls(entries[keep], float(entries.max()), float("nan"), size)


def grid_for_size(h_max: float, alpha: float, size: int, dim: int = 1) -> BandwidthGrid:
    if not h_max > 0:
        raise ValueError("h_max must be positive")
    if not alpha > 1:
        raise ValueError("alpha must be > 1")
    lr = log_ratio(size)
    if lr == 0:
        raise ValueError("a generated grid needs at least two observations; pass explicit bandwidths")
    k_max = math.floor((h_max / lr) ** (1.0 / alpha))
    if k_max < 1:
        raise ValueError(f"h_max={h_max} is too small: no bandwidth satisfies |h| >= log(T)/T")
    axis = h_max * np.arange(1, k_max + 1, dtype=float) ** (-alpha)
    entries = np.array(list(itertools.product(axis, repeat=dim)))
    entries = entries[np.prod(entries, axis=1) >= lr]
    if entries.shape[0] == 0:
        raise ValueError("empty bandwidth grid")
    # decreasing |h|; lexicographic on -h for equal products keeps the order stable
    order = np.lexsort(tuple(-entries[:, j] for j in reversed(range(dim))) + (-np.prod(entries, axis=1),))
    return BandwidthGrid(entries[order], float(h_max), float(alpha), int(size))


def build_bandwidth_grid(h_max: float, alpha: float, n: int, d: int = 1) -> BandwidthGrid:
    """``{h_max k^-alpha : k = 1..floor((T h_max / log T)^(1/alpha))}^d`` for ``T = |T_n|``."""
    return grid_for_size(h_max, alpha, tree_size(n), d)


# ---------------------------------------------------------------------------
# estimators at fixed bandwidth


def kde_eval(sample, K: Kernel, h, x):
    """``nu_h(x) = T^-1 sum_u K_h(x - X_u)`` (exact sum over all nodes)."""
    data = _values(sample)
    bw = as_bandwidth(h, data.shape[1])
    pts = _points(x, data.shape[1])
    hv = np.asarray(bw.h)
    out = np.empty(pts.shape[0])
    for i, p in enumerate(pts):
        out[i] = np.mean(np.prod(K.profile((p - data) / hv), axis=1)) / bw.prod
    return float(out[0]) if _is_single(x, data.shape[1]) else out


def _conv_profile(K, t, h, hp):
    if isinstance(K, TabulatedKernel):
        return K.conv_profile_fast(t, h, hp)
    return K.conv_profile(t, h, hp)


def smoothed_kde_eval(sample, K: Kernel, h, hp, x):
    """``K_h * nu_hp(x) = T^-1 sum_u (K_h * K_hp)(x - X_u)``."""
    data = _values(sample)
    d = data.shape[1]
    bw, bwp = as_bandwidth(h, d), as_bandwidth(hp, d)
    pts = _points(x, d)
    out = np.empty(pts.shape[0])
    for i, p in enumerate(pts):
        diff = p - data
        val = np.ones(data.shape[0])
        for j in range(d):
            val *= K.conv_profile(diff[:, j], bw.h[j], bwp.h[j])
        out[i] = val.mean()
    return float(out[0]) if _is_single(x, d) else out


def variance_term(kappa: float, n: int, h) -> float:
    """``kappa log|T_n| / (|T_n| |h|)`` for a tree of depth ``n``."""
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    prod = h.prod if isinstance(h, Bandwidth) else float(np.prod(h))
    return kappa * log_ratio(tree_size(n)) / prod


# ---------------------------------------------------------------------------
# pairwise terms and the GL criterion


@dataclass(frozen=True)
class PairwiseTerms:
    """Everything the criterion needs at one point.

    ``nu[k] = nu_{h_k}(x)``; ``smoothed[i, k] = K_{h_i} * nu_{h_k}(x)``;
    ``scaled[i, k] = T / log T * |h_k| * (nu[k] - smoothed[i, k])**2``.
    """

    x: np.ndarray
    nu: np.ndarray
    smoothed: np.ndarray
    prods: np.ndarray
    size: int

    @property
    def sq_diff(self) -> np.ndarray:
        return (self.nu[None, :] - self.smoothed) ** 2

    @property
    def scaled(self) -> np.ndarray:
        lr = log_ratio(self.size)
        if lr == 0:
            # a single observation: the majorant vanishes whatever kappa is
            return np.zeros_like(self.smoothed)
        return self.sq_diff * self.prods[None, :] / lr


def _gaussian_sums(diff, sigmas):
    """Mean over rows of ``prod_j phi(diff_j / s_j) / s_j`` for each row ``s`` of ``sigmas``.

    Observations farther than ``_CUTOFF * max_j s_j`` contribute exp(-800) or
    less, which is exactly zero in double precision, so they are skipped.
    """
    n, d = diff.shape
    sq = diff * diff
    r2 = sq.sum(axis=1)
    order = np.argsort(r2, kind="stable")
    sq, r2 = sq[order], r2[order]
    inv = 1.0 / sigmas**2  # (P, d)
    lognorm = -np.sum(np.log(sigmas), axis=1) - 0.5 * d * math.log(2.0 * math.pi)
    s_order = np.argsort(sigmas.max(axis=1), kind="stable")
    out = np.empty(sigmas.shape[0])
    start = 0
    while start < s_order.size:
        # widest sigma of the chunk decides how many observations matter
        m = max(1, int(np.searchsorted(r2, (_CUTOFF * sigmas[s_order[start]].max()) ** 2, side="right")))
        step = max(1, _CHUNK_ELEMS // m)
        idx = s_order[start : start + step]
        m = max(1, int(np.searchsorted(r2, (_CUTOFF * sigmas[idx[-1]].max()) ** 2, side="right")))
        if m * idx.size > _CHUNK_ELEMS:
            idx = idx[: max(1, _CHUNK_ELEMS // m)]
            m = max(1, int(np.searchsorted(r2, (_CUTOFF * sigmas[idx[-1]].max()) ** 2, side="right")))
        e = sq[:m] @ inv[idx].T  # (m, chunk)
        out[idx] = np.exp(-0.5 * e).sum(axis=0) / n * np.exp(lognorm[idx])
        start += idx.size
    return out


def pairwise_terms(sample, K: Kernel, grid: BandwidthGrid, x) -> PairwiseTerms:
    data = _values(sample)
    n, d = data.shape
    if grid.dim != d:
        raise ValueError("grid and sample dimensions differ")
    p = _points(x, d)[0]
    diff = p - data
    hs = grid.entries
    g = hs.shape[0]
    iu, ju = np.triu_indices(g)
    if isinstance(K, GaussianKernel):
        nu = _gaussian_sums(diff, hs)
        sig = np.sqrt(hs[iu] ** 2 + hs[ju] ** 2)
        upper = _gaussian_sums(diff, sig)
    else:
        nu = np.array([np.mean(np.prod(K.profile(diff / h), axis=1)) / np.prod(h) for h in hs])
        upper = np.empty(iu.size)
        for k, (i, j) in enumerate(zip(iu, ju)):
            val = np.ones(n)
            for a in range(d):
                val *= _conv_profile(K, diff[:, a], hs[i, a], hs[j, a])
            upper[k] = val.mean()
    sm = np.empty((g, g))
    sm[iu, ju] = upper
    sm[ju, iu] = upper
    return PairwiseTerms(p, nu, sm, np.prod(hs, axis=1), n)


def _bias_proxy(terms: PairwiseTerms, kappa: float) -> np.ndarray:
    # (scaled - kappa) * log(T)/(T |h'|) == sq_diff - V(h'); written this way so that
    # kappa >= max(scaled) gives exactly zero in floating point
    lr = log_ratio(terms.size)
    if lr == 0:
        return np.max(terms.sq_diff, axis=1)
    w = terms.scaled - kappa
    a = np.max(w * (lr / terms.prods)[None, :], axis=1)
    return np.maximum(a, 0.0)


def bias_proxy_A(sample, K: Kernel, grid: BandwidthGrid, x, kappa: float, terms: PairwiseTerms | None = None):
    """``A(x, h)`` for every grid entry, as an array aligned with ``grid``."""
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    terms = terms or pairwise_terms(sample, K, grid, x)
    return _bias_proxy(terms, kappa)


@dataclass
class GLState:
    """Per-point record of the selection: one row per grid bandwidth."""

    x: np.ndarray
    kappa: float
    b_over_a: float
    bandwidths: np.ndarray
    nu_hat: np.ndarray
    V: np.ndarray
    A: np.ndarray
    criterion: np.ndarray
    index: int

    @property
    def selected(self) -> Bandwidth:
        return Bandwidth(tuple(self.bandwidths[self.index]))

    @property
    def estimate(self) -> float:
        return float(self.nu_hat[self.index])

    @property
    def min_criterion(self) -> float:
        return float(self.criterion[self.index])


def _select(terms: PairwiseTerms, grid: BandwidthGrid, kappa: float, b_over_a: float) -> GLState:
    A = _bias_proxy(terms, kappa)
    V = kappa * log_ratio(terms.size) / terms.prods
    crit = A + b_over_a * V
    # grid is sorted by decreasing |h|: the first minimiser is the largest bandwidth
    idx = int(np.argmin(crit))
    return GLState(terms.x, float(kappa), float(b_over_a), grid.entries, terms.nu, V, A, crit, idx)


def select_bandwidth_gl(sample, K: Kernel, grid: BandwidthGrid, x, kappa: float, b_over_a: float = 2.0, terms=None) -> GLState:
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    if b_over_a < 1:
        raise ValueError("b/a must be >= 1")
    terms = terms or pairwise_terms(sample, K, grid, x)
    return _select(terms, grid, kappa, b_over_a)


def adaptive_estimate(sample, K: Kernel, grid: BandwidthGrid, x_grid, kappa: float, b_over_a: float = 2.0):
    """Local selection at every point: list of ``(x, h_hat, nu_{h_hat}(x))``."""
    d = _values(sample).shape[1]
    out = []
    for p in _points(x_grid, d):
        st = select_bandwidth_gl(sample, K, grid, p, kappa, b_over_a)
        out.append((p if d > 1 else float(p[0]), st.selected, st.estimate))
    return out


# ---------------------------------------------------------------------------
# scikit-learn style estimators


def _check_sample(X):
    if isinstance(X, TreeSample):
        return X.values
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return check_array(X, dtype=np.float64)


class FixedBandwidthKDE(DensityMixin, BaseEstimator):
    """Kernel density estimate with a single fixed bandwidth.

    Parameters
    ----------
    bandwidth : float or sequence of float
        Per-axis bandwidth (a scalar is broadcast to every axis).
    kernel : "gaussian", dict or Kernel
        Kernel specification, see :func:`bmckde.kernel.kernel_from_spec`.
    """

    def __init__(self, bandwidth=0.1, kernel="gaussian"):
        self.bandwidth = bandwidth
        self.kernel = kernel

    def fit(self, X, y=None):
        self.sample_ = _check_sample(X)
        self.n_features_in_ = self.sample_.shape[1]
        self.kernel_ = kernel_from_spec(self.kernel, self.n_features_in_)
        self.bandwidth_ = as_bandwidth(self.bandwidth, self.n_features_in_)
        return self

    def predict(self, X):
        check_is_fitted(self, "sample_")
        pts = _points(X, self.n_features_in_)
        return np.atleast_1d(kde_eval(self.sample_, self.kernel_, self.bandwidth_, pts))

    def score_samples(self, X):
        with np.errstate(divide="ignore"):
            return np.log(self.predict(X))


@dataclass
class AdaptiveResult:
    """Output of :meth:`GLDensityEstimator.estimate`."""

    x: np.ndarray
    nu_hat: np.ndarray
    bandwidths: np.ndarray
    kappa: np.ndarray
    states: list = field(default_factory=list)
    traces: list = field(default_factory=list)

    @property
    def h_prod(self) -> np.ndarray:
        return np.prod(self.bandwidths, axis=1)


class GLDensityEstimator(DensityMixin, BaseEstimator):
    """Kernel density estimator with pointwise Goldenshluger-Lepski bandwidths.

    Parameters
    ----------
    kernel : "gaussian", dict or Kernel
    h_max, alpha : float
        Grid ``{h_max k^-alpha}^d`` truncated at ``|h| >= log(T)/T``.
    kappa : float or None
        Penalty constant. ``None`` calibrates it by bandwidth-jump detection.
    m, s_max : int
        Size of the kappa grid and number of zoom iterations of the calibration.
    b_over_a : float
        Ratio of the penalty weights in the criterion and inside ``A``.
    reuse_kappa : bool
        Calibrate once at the middle of the evaluation points and reuse that
        kappa everywhere, instead of calibrating at each point.
    bandwidths : sequence, optional
        Explicit grid; overrides ``h_max``/``alpha``.
    n_jobs : int or None
        Evaluation points are processed in parallel with joblib.
    """

    def __init__(
        self,
        kernel="gaussian",
        h_max=1.0,
        alpha=1.7,
        kappa=None,
        m=20,
        s_max=2,
        b_over_a=2.0,
        reuse_kappa=False,
        bandwidths=None,
        n_jobs=None,
    ):
        self.kernel = kernel
        self.h_max = h_max
        self.alpha = alpha
        self.kappa = kappa
        self.m = m
        self.s_max = s_max
        self.b_over_a = b_over_a
        self.reuse_kappa = reuse_kappa
        self.bandwidths = bandwidths
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        from .calibration import CalibrationConfig

        self.sample_ = _check_sample(X)
        n, d = self.sample_.shape
        self.n_features_in_ = d
        self.kernel_ = kernel_from_spec(self.kernel, d)
        if self.bandwidths is not None:
            self.grid_ = BandwidthGrid.from_bandwidths(self.bandwidths, n)
        else:
            self.grid_ = grid_for_size(self.h_max, self.alpha, n, d)
        if self.kappa is not None and self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        self.calibration_ = CalibrationConfig(m=self.m, s_max=self.s_max, b_over_a=self.b_over_a)
        return self

    def _one(self, x, kappa):
        from .calibration import calibrate_terms

        terms = pairwise_terms(self.sample_, self.kernel_, self.grid_, x)
        if kappa is None:
            trace = calibrate_terms(terms, self.grid_, self.calibration_)
            return trace.final_state, trace
        return _select(terms, self.grid_, kappa, self.b_over_a), None

    def estimate(self, X) -> AdaptiveResult:
        check_is_fitted(self, "sample_")
        pts = _points(X, self.n_features_in_)
        kappa = self.kappa
        if kappa is None and self.reuse_kappa:
            mid = pts[len(pts) // 2] if len(pts) % 2 else 0.5 * (pts[len(pts) // 2 - 1] + pts[len(pts) // 2])
            kappa = self._one(mid, None)[1].final_kappa
        if self.n_jobs in (None, 1) or len(pts) < 2:
            results = [self._one(p, kappa) for p in pts]
        else:
            results = Parallel(n_jobs=self.n_jobs)(delayed(self._one)(p, kappa) for p in pts)
        states = [r[0] for r in results]
        return AdaptiveResult(
            x=pts,
            nu_hat=np.array([s.estimate for s in states]),
            bandwidths=np.array([s.bandwidths[s.index] for s in states]),
            kappa=np.array([s.kappa for s in states]),
            states=states,
            traces=[r[1] for r in results],
        )

    def predict(self, X):
        return self.estimate(X).nu_hat

    def score_samples(self, X):
        with np.errstate(divide="ignore"):
            return np.log(self.predict(X))
