"""Reference bifurcating Markov chain models.

Two models are provided, both with conditionally independent children
(the T-transition is ``P(x, .) (x) P(x, .)``, so the tagged-branch chain
has transition ``P``):

* :class:`BetaBarModel` -- a bifurcating autoregressive chain on [0, 1]
  whose invariant law is Beta(2, 2).
* :class:`GrowthFragModel` -- birth sizes of exponentially growing cells
  that split in two at a size-dependent rate ``B``.

All simulation is driven by counter-based uniforms (see :mod:`bmckde._rng`),
so a tree is a deterministic function of ``(seed, depth)`` and a deeper tree
extends a shallower one with the same seed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special, stats

from . import _rng
from .tree import TreeSample, generation_slice, tree_size

# 1 / B(2, 3) == 1 / B(3, 2)
_BETA_NORM = 12.0


def _as_rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


# ---------------------------------------------------------------------------
# Beta-BAR model


def beta_mixture_density(x, y):
    """Transition density of the Beta-BAR chain.

    ``(1 - x) Beta(2,3)(y) + x Beta(3,2)(y)`` for ``x, y`` in [0, 1].
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any((x < 0) | (x > 1)) or np.any((y < 0) | (y > 1)):
        raise ValueError("beta_mixture_density is defined on [0, 1] x [0, 1]")
    out = (1.0 - x) * _BETA_NORM * y * (1.0 - y) ** 2 + x * _BETA_NORM * y**2 * (1.0 - y)
    return out if out.ndim else float(out)


def _beta_child(x, u_select, u_draw):
    # mixture weight 1 - x on Beta(2,3), x on Beta(3,2); inverse-CDF draw
    low = u_select < 1.0 - x
    a = np.where(low, 2.0, 3.0)
    b = np.where(low, 3.0, 2.0)
    return special.betaincinv(a, b, u_draw)


def sample_beta_transition(x, rng=None, size=None):
    """Draw ``X_child`` given ``X_parent = x`` for the Beta-BAR chain."""
    rng = _as_rng(rng)
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("parent state must lie in [0, 1]")
    shape = x.shape if size is None else tuple(np.atleast_1d(size))
    u = rng.random((2,) + shape)
    out = _beta_child(np.broadcast_to(x, shape), u[0], u[1])
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class BetaBarModel:
    """Bifurcating autoregressive chain on [0, 1] with Beta(2, 2) invariant law.

    Conditionally on the parent ``x`` each child is drawn independently from
    ``(1 - x) Beta(2,3) + x Beta(3,2)``, whose mean is ``x / 5 + 2 / 5``.
    """

    name: str = field(default="beta-bar", init=False)
    dim: int = field(default=1, init=False)

    @property
    def state_space(self):
        return (0.0, 1.0)

    @staticmethod
    def link(x):
        return np.asarray(x) / 5.0 + 2.0 / 5.0

    def transition_density(self, x, y):
        return beta_mixture_density(x, y)

    def invariant_density(self, x):
        return stats.beta.pdf(x, 2, 2)

    def invariant_cdf(self, x):
        return stats.beta.cdf(x, 2, 2)

    def sample_root(self, u):
        return special.betaincinv(2.0, 2.0, u[:, 0])

    def sample_children(self, parents, u):
        return _beta_child(parents, u[:, 0], u[:, 1])

    def sup_norms(self, step=1e-4):
        """Sup norms of the transition densities and of the invariant density.

        Dense grid maximisation with the given step; ``P`` is the joint
        density of the two children, ``P0 = P1 = Q`` its marginals.
        """
        grid = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
        sup_q = 0.0
        for chunk in np.array_split(grid, max(1, grid.size // 500)):
            sup_q = max(sup_q, float(beta_mixture_density(chunk[:, None], grid[None, :]).max()))
        sup_nu = float(self.invariant_density(grid).max())
        return {
            "sup_Q": sup_q,
            "sup_nu": sup_nu,
            "sup_P": sup_q**2,
            "sup_P0": sup_q,
            "sup_P1": sup_q,
        }


def simulate_bar(model: Optional[BetaBarModel] = None, n: int = 10, seed: int = 0, **kwargs) -> TreeSample:
    return simulate_tree(model or BetaBarModel(), n, seed, **kwargs)


# ---------------------------------------------------------------------------
# Growth-fragmentation model


def tent(x):
    x = np.asarray(x, dtype=float)
    return np.where((x >= -1) & (x < 0), 1.0 + x, np.where((x >= 0) & (x <= 1), 1.0 - x, 0.0))


def splitting_rate_tent(x):
    """Splitting rate ``x / (5 - x) + 3 T(2 (x - 7/2))`` on (0, 5).

    The first term diverges at the boundary size 5, so no cell reaches it.
    """
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x >= 5)):
        raise ValueError("the tent splitting rate is defined on (0, 5)")
    out = x / (5.0 - x) + 3.0 * tent(2.0 * (x - 3.5))
    return out if out.ndim else float(out)


class constant_rate:
    """Splitting rate ``B(x) = value`` (picklable)."""

    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.value)
        return out if out.ndim else float(out)

    def __repr__(self):
        return f"constant_rate({self.value!r})"


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class GrowthFragModel:
    """Birth sizes in a growth-fragmentation population.

    A cell born at size ``x`` grows at exponential rate ``tau`` and splits at
    rate ``B(size)``; both daughters are born at half the splitting size.
    Sizes live in ``S = (0, s_max)``, birth sizes in ``S / 2``. Set
    ``s_max = inf`` for rates that do not confine sizes (e.g. constant ``B``).
    """

    splitting_rate: Callable = splitting_rate_tent
    tau: float = 2.0
    s_max: float = 5.0
    root_law: tuple = (0.5, 2.0)
    breakpoints: tuple = (3.0, 3.5, 4.0)
    name: str = field(default="growth-frag", init=False)
    dim: int = field(default=1, init=False)

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.s_max > 0:
            raise ValueError("s_max must be positive")
        lo, hi = self.root_law
        if not 0 < lo < hi <= self.s_max / 2:
            raise ValueError("root_law must be an interval inside (0, s_max / 2]")

    @property
    def state_space(self):
        return (0.0, self.s_max / 2)

    def hazard_rate(self, z):
        """Integrand of the cumulative hazard in birth-size units, ``B(2z) / (tau z)``."""
        z = np.asarray(z, dtype=float)
        return self.splitting_rate(2.0 * z) / (self.tau * z)

    @cached_property
    def _table(self):
        return _HazardTable(self)

    def cumulative_hazard(self, a, b):
        """``int_a^b B(2z) / (tau z) dz`` (vectorised)."""
        t = self._table
        return t.lam(np.asarray(b, float)) - t.lam(np.asarray(a, float))

    def transition_density(self, x, y):
        return gf_transition_density(self, x, y)

    def sample_root(self, u):
        lo, hi = self.root_law
        return lo + (hi - lo) * u[:, 0]

    def sample_children(self, parents, u):
        e = -np.log1p(-u[:, 0])
        return self._table.invert(parents / 2.0, e)

    @cached_property
    def _stationary(self):
        return _stationary_survival(self)

    def stationary_survival(self, y):
        """Survival function ``P(X >= y)`` of the invariant birth-size law."""
        grid, surv = self._stationary
        return np.interp(y, grid, surv, left=1.0, right=0.0)

    def stationary_density(self, y):
        """Invariant birth-size density ``g(y) (S(y) - S(2y))``.

        Differentiating the survival fixed point gives ``S' = -g (S(y) - S(2y))``,
        so no numerical differentiation is needed.
        """
        y = np.asarray(y, dtype=float)
        top = self.s_max / 2
        inside = (y > 0) & (y < top)
        yy = np.where(inside, y, 0.5 * top)
        with np.errstate(invalid="ignore"):
            val = self.hazard_rate(yy) * (self.stationary_survival(yy) - self.stationary_survival(2 * yy))
        out = np.where(inside, val, 0.0)
        return out if out.ndim else float(out)


class _HazardTable:
    """Tabulated cumulative hazard with Gauss-Legendre refinement between nodes.

    ``lam(z)`` is exact to quadrature accuracy at every point, not just on the
    table: the table only brackets, a 24-point rule integrates from the
    bracketing node.
    """

    def __init__(self, model: GrowthFragModel):
        self.model = model
        self.g = model.hazard_rate
        top = model.s_max / 2
        z_lo = 1e-8
        if math.isinf(top):
            pts = np.geomspace(z_lo, 1e16, 1501)
        else:
            core = np.concatenate(
                [np.geomspace(z_lo, top / 2, 121), np.linspace(top / 200, top * 0.99, 200)]
            )
            edge = top - (top / 2) * 0.7 ** np.arange(0, 91)
            kinks = np.asarray(model.breakpoints, float) / 2.0
            pts = np.concatenate([core, edge, kinks])
            pts = pts[(pts >= z_lo) & (pts < top)]
        pts = np.unique(pts)
        pieces = np.empty(pts.size - 1)
        # quad reports roundoff on the short intervals next to a divergent
        # boundary; the values there are still accurate to ~1e-10
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for i, (a, b) in enumerate(zip(pts[:-1], pts[1:])):
                pieces[i] = integrate.quad(lambda z: float(self.g(z)), a, b, epsabs=1e-10, epsrel=1e-12, limit=200)[0]
        self.z = pts
        self.cum = np.concatenate([[0.0], np.cumsum(pieces)])
        self.top = top
        gap = top - pts[-1]
        self.divergent = (not math.isinf(top)) and float(self.g(pts[-1])) * gap > 1e-3

    def _partial(self, a, b):
        # int_a^b g, a and b within one table interval
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        nodes = mid[..., None] + half[..., None] * _GL_NODES
        return half * np.sum(self.g(nodes) * _GL_WEIGHTS, axis=-1)

    def lam(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z < self.z[0]):
            raise ValueError(f"size below the tabulated range ({self.z[0]:g})")
        k = np.clip(np.searchsorted(self.z, z, side="right") - 1, 0, self.z.size - 1)
        at_top = z >= self.top
        zz = np.where(at_top, self.z[k], z)
        out = self.cum[k] + self._partial(self.z[k], zz)
        return np.where(at_top, np.inf, out)

    def invert(self, lower, e):
        """Solve ``int_lower^y g = e`` for ``y`` (vectorised safeguarded Newton)."""
        lower = np.asarray(lower, dtype=float)
        target = self.lam(lower) + e
        k = np.searchsorted(self.cum, target, side="right") - 1
        beyond = k >= self.z.size - 1
        if np.any(beyond) and not self.divergent:
            raise RuntimeError(
                "cumulative hazard root not bracketed: the splitting rate does not "
                "diverge at the upper size boundary"
            )
        k = np.minimum(k, self.z.size - 2)
        lo = np.maximum(self.z[k], lower)
        hi = self.z[k + 1].copy()
        base_z = self.z[k]
        base = self.cum[k]
        y = 0.5 * (lo + hi)
        # converged entries are frozen so that each result depends only on its
        # own inputs, never on the rest of the batch
        active = np.ones(y.shape, dtype=bool)
        for _ in range(60):
            f = base + self._partial(base_z, y) - target
            lo = np.where(active & (f < 0), y, lo)
            hi = np.where(active & (f >= 0), y, hi)
            with np.errstate(divide="ignore", invalid="ignore"):
                y_new = y - f / self.g(y)
            bad = ~((y_new > lo) & (y_new < hi)) | ~np.isfinite(y_new)
            y_new = np.where(bad, 0.5 * (lo + hi), y_new)
            done = np.abs(y_new - y) <= 4 * np.finfo(float).eps * np.abs(y)
            y = np.where(active, y_new, y)
            active &= ~done
            if not np.any(active):
                break
        if np.any(beyond):
            y = np.where(beyond, np.nextafter(self.top, 0.0), y)
        return np.maximum(y, lower)


def gf_transition_density(model: GrowthFragModel, x, y):
    """Density of a daughter's birth size ``y`` given the mother's birth size ``x``.

    ``B(2y) / (tau y) * exp(-int_{x/2}^y B(2z) / (tau z) dz)`` on ``y >= x/2``.
    The hazard integral comes from the tabulated antiderivative refined by
    Gauss-Legendre quadrature; plain adaptive quadrature loses accuracy to
    roundoff when ``y`` approaches a divergent boundary.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    inside = (y >= x / 2) & (y < model.s_max / 2) & (x > 0)
    lo = np.where(inside, x / 2, 1.0)
    hi = np.where(inside, y, 1.0)
    with np.errstate(over="ignore", invalid="ignore"):
        val = np.where(inside, model.hazard_rate(hi) * np.exp(-model.cumulative_hazard(lo, hi)), 0.0)
    return val if val.ndim else float(val)


def sample_gf_transition(model: GrowthFragModel, x, rng=None, size=None):
    """Daughter birth size by inversion of the cumulative hazard.

    Draws ``E ~ Exp(1)`` and returns ``y`` with ``int_{x/2}^y B(2z)/(tau z) dz = E``.
    """
    rng = _as_rng(rng)
    x = np.asarray(x, dtype=float)
    shape = x.shape if size is None else tuple(np.atleast_1d(size))
    e = rng.exponential(size=shape)
    out = model._table.invert(np.broadcast_to(x, shape) / 2.0, e)
    return out if out.ndim else float(out)


def _stationary_survival(model: GrowthFragModel, n_grid: int = 2**15, tol: float = 1e-14, max_iter: int = 10_000):
    """Stationary survival ``S(y) = P(X >= y)`` of the birth-size chain.

    Stationarity plus an integration by parts gives the fixed-point equation

        S(y) = exp(-L(y)) [exp(L(0)) + 1/2 int_0^{min(2y, top)} S(x) g(x/2) exp(L(x/2)) dx]

    with ``g`` the hazard integrand and ``L`` its antiderivative. Every term
    is bounded, unlike the density itself which may blow up at ``top``.
    """
    top = model.s_max / 2
    if math.isinf(top):
        raise ValueError("stationary law requires a finite size boundary")
    table = model._table
    y = np.linspace(0.0, top, n_grid + 1)
    y_eval = np.maximum(y, table.z[0])
    lam_y = np.empty_like(y)
    lam_y[:-1] = table.lam(y_eval[:-1])
    lam_y[-1] = np.inf
    lam0 = float(table.lam(np.array(table.z[0])))
    half = np.maximum(y / 2.0, table.z[0])
    weight = 0.5 * model.hazard_rate(half) * np.exp(table.lam(half))
    idx = np.minimum(2 * np.arange(y.size), n_grid)
    decay = np.exp(-lam_y)
    dy = y[1] - y[0]
    surv = 1.0 - y / top
    for _ in range(max_iter):
        f = surv * weight
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * dy)])
        new = decay * (math.exp(lam0) + cum[idx])
        new[-1] = 0.0
        delta = np.max(np.abs(new - surv))
        surv = new
        if delta < tol:
            break
    else:
        raise RuntimeError("stationary fixed point did not converge")
    return y, surv


def simulate_growth_frag(model: Optional[GrowthFragModel] = None, n: int = 15, seed: int = 0, **kwargs) -> TreeSample:
    return simulate_tree(model or GrowthFragModel(), n, seed, **kwargs)


# ---------------------------------------------------------------------------
# generic simulation


def simulate_tree(model, n: int, seed: int, chunk_size: Optional[int] = None) -> TreeSample:
    """Simulate ``(X_u, u in T_n)``.

    Node ``v`` consumes only the uniforms of its own counter block, so the
    result is identical for any ``chunk_size`` (the unit a parallel schedule
    would distribute).
    """
    size = tree_size(n)
    values = np.empty(size)
    values[0] = model.sample_root(_rng.node_uniforms(seed, _rng.STREAM_TREE, 0, 1))[0]
    for m in range(n):
        parents = values[generation_slice(m)]
        sl = generation_slice(m + 1)
        parent_of_child = np.repeat(parents, 2)
        step = chunk_size or (sl.stop - sl.start)
        for start in range(sl.start, sl.stop, step):
            stop = min(start + step, sl.stop)
            u = _rng.node_uniforms(seed, _rng.STREAM_TREE, start, stop)
            values[start:stop] = model.sample_children(parent_of_child[start - sl.start : stop - sl.start], u)
    return TreeSample(n, values[:, None])


@dataclass(frozen=True)
class TaggedBranchPath:
    """A trajectory ``(Y_0, ..., Y_m)`` of the tagged-branch chain."""

    values: np.ndarray

    def __len__(self):
        return len(self.values)


def simulate_tagged_paths(model, m: int, seed: int, n_paths: int) -> np.ndarray:
    """``n_paths`` independent tagged-branch trajectories, shape ``(n_paths, m + 1)``.

    For both reference models the children are i.i.d. given the parent, so the
    tagged-branch transition equals the child transition.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    out = np.empty((n_paths, m + 1))
    # path p, step k uses counter block p * (m + 1) + k
    blocks = _rng.node_uniforms(seed, _rng.STREAM_TAGGED, 0, n_paths * (m + 1)).reshape(n_paths, m + 1, -1)
    out[:, 0] = model.sample_root(blocks[:, 0])
    for k in range(1, m + 1):
        out[:, k] = model.sample_children(out[:, k - 1], blocks[:, k])
    return out


def simulate_tagged_branch(model, m: int, seed: int) -> TaggedBranchPath:
    return TaggedBranchPath(simulate_tagged_paths(model, m, seed, 1)[0])


def model_from_name(name: str, **params):
    if name == "beta-bar":
        if params:
            raise ValueError(f"beta-bar takes no parameters, got {sorted(params)}")
        return BetaBarModel()
    if name == "growth-frag":
        return GrowthFragModel(**params)
    raise ValueError(f"unknown model {name!r} (expected 'beta-bar' or 'growth-frag')")
