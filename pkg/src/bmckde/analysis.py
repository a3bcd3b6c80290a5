"""Risk and concentration diagnostics, rate regression, splitting-rate recovery."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy import integrate
from sklearn.base import BaseEstimator, clone
from sklearn.utils.validation import check_is_fitted

from .estimator import FixedBandwidthKDE, GLDensityEstimator, _check_sample, _values
from .kernel import Bandwidth, Kernel, as_bandwidth
from .models import simulate_tree
from .tree import TreeSample, tree_size


# ---------------------------------------------------------------------------
# theoretical constants


@dataclass(frozen=True)
class ErgodicityParams:
    """Geometric ergodicity constants ``(M, rho)`` and density sup-norms.

    ``M`` and ``rho`` are not identifiable from data; they only enter bound
    evaluations, never the estimator.
    """

    M: float
    rho: float
    sup_Q: float
    sup_nu: float
    sup_P: float
    sup_P0: float
    sup_P1: float

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be positive")
        if not 0 < self.rho < 0.5:
            raise ValueError("rho must lie in (0, 1/2)")
        for name in ("sup_Q", "sup_nu", "sup_P", "sup_P0", "sup_P1"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def for_model(cls, model, M: float = 2.0, rho: float = 0.4, step: float = 1e-4) -> "ErgodicityParams":
        """Grid-maximised sup-norms of ``model`` with a conservative ``(M, rho)``."""
        return cls(M=M, rho=rho, **model.sup_norms(step=step))


def variance_constant(K: Kernel, params: ErgodicityParams) -> float:
    """Constant ``C(P, nu)`` of the variance bound ``C / (T |h|)``."""
    l2 = K.norms.L2sq
    qn = params.sup_Q + params.sup_nu
    c_p = 2.0 * l2 * qn + params.sup_P + params.sup_nu * (l2 + params.sup_P0 + params.sup_P1)
    c_i = (1.0 + 1.0 / (1.0 - 2.0 * params.rho**2)) * qn**2 + params.M**2 + c_p
    return c_i / (math.sqrt(2.0) - 1.0) ** 2


@dataclass(frozen=True)
class BernsteinConstants:
    c_rho_M: float
    c_prime_rho: float
    c_conv: float
    c_plain: float
    L1: float = 1.0
    sup: float = 1.0

    @classmethod
    def from_params(cls, K: Kernel, params: ErgodicityParams) -> "BernsteinConstants":
        nm = K.norms
        qn = params.sup_Q + params.sup_nu
        c_rho_m = params.M * (1.0 + params.rho) / (1.0 - 2.0 * params.rho)
        c_prime = 3.0 + 2.0 / (1.0 - 2.0 * params.rho)
        c_conv = 8.0 * max(2.0 * nm.L1**2 * nm.L2sq * qn, max(qn, params.M * nm.L1 * nm.sup) ** 2)
        c_plain = 8.0 * max(params.M * nm.sup, qn * nm.L1, qn * nm.L2sq)
        return cls(c_rho_m, c_prime, c_conv, c_plain, nm.L1, nm.sup)


def bernstein_bound(
    delta: float,
    n: int,
    h,
    K: Kernel,
    constants: BernsteinConstants,
    convolved: bool = False,
    hp=None,
) -> float:
    """Right-hand side of the Bernstein-type deviation bound (not clamped at 1).

    ``convolved=True`` bounds the deviation of ``K_h * K_hp`` averages and
    scales with ``|hp|``; otherwise the plain kernel average scaled by ``|h|``.
    The kernel norms used are those of ``K``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    nm = K.norms
    size = tree_size(n)
    if convolved:
        if hp is None:
            raise ValueError("the convolved bound needs hp")
        c, lin, vol = constants.c_conv, nm.L1 * nm.sup, as_bandwidth(hp).prod
    else:
        c, lin, vol = constants.c_plain, nm.sup, as_bandwidth(h).prod
    cc = c * constants.c_prime_rho
    denom = 4.0 * constants.c_rho_M * lin * delta / 3.0 + cc
    return 2.0 * math.exp(delta * cc / denom) * math.exp(-(delta**2) * size * vol / (2.0 * denom))


# ---------------------------------------------------------------------------
# Monte-Carlo harness


def replication_seeds(seed: int, R: int) -> np.ndarray:
    """Independent tree seeds for replications ``0..R-1`` (order-stable)."""
    return np.random.SeedSequence(int(seed)).generate_state(int(R), dtype=np.uint64)


def smoothed_true_density(model, K: Kernel, h, x) -> float:
    """``(K_h * nu)(x)`` by adaptive quadrature against the model's invariant density."""
    if not hasattr(model, "invariant_density"):
        raise ValueError(f"{type(model).__name__} has no closed-form invariant density")
    if K.dim != 1:
        raise ValueError("only one-dimensional models are supported")
    hv = as_bandwidth(h, 1).h[0]
    lo, hi = model.state_space
    val, _ = integrate.quad(
        lambda t: K.profile((x - t) / hv) / hv * model.invariant_density(t), lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200
    )
    return float(val)


def _run(fn, args, n_jobs):
    if n_jobs in (None, 1):
        return [fn(*a) for a in args]
    return Parallel(n_jobs=n_jobs)(delayed(fn)(*a) for a in args)


def _kde_at(model, n, tree_seed, K, h, x):
    return float(FixedBandwidthKDE(h, K).fit(simulate_tree(model, n, int(tree_seed))).predict([x])[0])


def kde_replications(model, K: Kernel, h, x: float, n: int, R: int, seed: int, n_jobs=None) -> np.ndarray:
    """``nu_h(x)`` on ``R`` independent trees."""
    seeds = replication_seeds(seed, R)
    return np.array(_run(_kde_at, [(model, n, s, K, h, x) for s in seeds], n_jobs))


def empirical_deviation_probability(model, K: Kernel, h, x: float, delta, n: int, R: int, seed: int, n_jobs=None):
    """Fraction of ``R`` trees with ``|nu_h(x) - K_h * nu(x)| > delta``.

    ``delta`` may be a sequence; the same trees serve every value.
    """
    if R < 100:
        raise ValueError("at least 100 replications are required")
    target = smoothed_true_density(model, K, h, x)
    dev = np.abs(kde_replications(model, K, h, x, n, R, seed, n_jobs) - target)
    deltas = np.atleast_1d(np.asarray(delta, dtype=float))
    out = np.array([np.mean(dev > d) for d in deltas])
    return float(out[0]) if np.ndim(delta) == 0 else out


@dataclass
class RiskReport:
    x: np.ndarray
    bias_sq: np.ndarray
    variance: np.ndarray
    mse: np.ndarray
    R: int
    n: int
    metadata: dict = field(default_factory=dict)
    estimates: np.ndarray | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "bias_sq", "variance", "mse", "R", "n"])
        for row in zip(self.x, self.bias_sq, self.variance, self.mse):
            w.writerow([repr(float(v)) for v in row] + [self.R, self.n])
        return buf.getvalue()


def _fit_predict(estimator, model, n, tree_seed, x_grid):
    est = clone(estimator)
    return np.asarray(est.fit(simulate_tree(model, n, int(tree_seed))).predict(x_grid), dtype=float)


def pointwise_risk(model, estimator, x_grid, n: int, R: int, seed: int, reference=None, n_jobs=None) -> RiskReport:
    """Monte-Carlo bias, variance and MSE of ``estimator`` at each point of ``x_grid``.

    ``estimator`` is cloned and fitted on each replication. ``reference`` is
    the target density (defaults to the model's invariant density).
    """
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    truth_fn = reference if reference is not None else getattr(model, "invariant_density", None)
    if truth_fn is None:
        raise ValueError("no reference density: pass `reference` for this model")
    truth = np.asarray(truth_fn(x_grid), dtype=float)
    seeds = replication_seeds(seed, R)
    est = np.array(_run(_fit_predict, [(estimator, model, n, s, x_grid) for s in seeds], n_jobs))
    mean = est.mean(axis=0)
    bias_sq = (mean - truth) ** 2
    variance = est.var(axis=0)
    mse = np.mean((est - truth) ** 2, axis=0)
    meta = {"model": getattr(model, "name", type(model).__name__), "n": n, "R": R, "seed": seed, "estimator": repr(estimator)}
    return RiskReport(x_grid, bias_sq, variance, mse, R, n, meta, est)


def rate_regression(risks: Sequence[tuple]) -> float:
    """Least-squares slope of ``log(mse)`` against ``log(T / log T)``."""
    depths = [int(n) for n, _ in risks]
    if len(set(depths)) < 3:
        raise ValueError("need at least three distinct depths")
    mse = np.array([float(v) for _, v in risks])
    if np.any(mse <= 0) or not np.all(np.isfinite(mse)):
        raise ValueError("mse values must be positive and finite")
    size = np.array([tree_size(n) for n in depths], dtype=float)
    slope, _ = np.polyfit(np.log(size / np.log(size)), np.log(mse), 1)
    return float(slope)


def rates_csv(risks: Sequence[tuple], slope: float) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "tree_size", "mse", "log_t", "log_mse"])
    for n, mse in risks:
        t = tree_size(n)
        w.writerow([n, t, repr(float(mse)), repr(math.log(t / math.log(t))), repr(math.log(mse))])
    buf.write(f"slope={slope!r}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# splitting rate


def splitting_rate_formula(x, tau: float, density_at_half, mass_between, threshold: float = 0.0):
    """``(tau x / 2) nu(x/2) / max(mass(x/2, x), threshold)``."""
    x = np.asarray(x, dtype=float)
    denom = np.maximum(np.asarray(mass_between, dtype=float), threshold)
    return tau * x / 2.0 * np.asarray(density_at_half, dtype=float) / denom


def default_threshold(size: int) -> float:
    return 1.0 / math.log(size)


def estimate_splitting_rate(sample, K: Kernel, bandwidth_mode, x, tau: float = 2.0, threshold: float | None = None):
    """Plug-in splitting-rate estimate from observed birth sizes.

    ``bandwidth_mode`` is a fixed bandwidth (number or :class:`Bandwidth`) or a
    density estimator with ``fit``/``predict`` such as :class:`GLDensityEstimator`.
    """
    data = _values(sample)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(bandwidth_mode, (int, float, Bandwidth)):
        dens = FixedBandwidthKDE(bandwidth_mode, K)
    else:
        dens = clone(bandwidth_mode).set_params(kernel=K)
    dens.fit(data)
    nu_half = dens.predict(xs / 2.0)
    col = data[:, 0]
    frac = np.array([np.mean((col >= v / 2.0) & (col < v)) for v in xs])
    thr = default_threshold(len(col)) if threshold is None else threshold
    out = splitting_rate_formula(xs, tau, nu_half, frac, thr)
    return float(out[0]) if np.ndim(x) == 0 else out


class SplittingRateEstimator(BaseEstimator):
    """scikit-learn style wrapper around :func:`estimate_splitting_rate`.

    ``density`` defaults to a calibrated :class:`GLDensityEstimator`.
    """

    def __init__(self, tau=2.0, threshold=None, density=None, kernel="gaussian"):
        self.tau = tau
        self.threshold = threshold
        self.density = density
        self.kernel = kernel

    def fit(self, X, y=None):
        data = _check_sample(X)
        if data.shape[1] != 1:
            raise ValueError("birth sizes are one-dimensional")
        self.sample_ = data
        dens = GLDensityEstimator() if self.density is None else self.density
        if isinstance(dens, (int, float, Bandwidth)):
            dens = FixedBandwidthKDE(dens)
        self.density_ = clone(dens).set_params(kernel=self.kernel).fit(data)
        self.threshold_ = default_threshold(len(data)) if self.threshold is None else float(self.threshold)
        return self

    def predict(self, X):
        check_is_fitted(self, "density_")
        xs = np.atleast_1d(np.asarray(X, dtype=float)).ravel()
        nu_half = self.density_.predict(xs / 2.0)
        col = self.sample_[:, 0]
        frac = np.array([np.mean((col >= v / 2.0) & (col < v)) for v in xs])
        return splitting_rate_formula(xs, self.tau, nu_half, frac, self.threshold_)
