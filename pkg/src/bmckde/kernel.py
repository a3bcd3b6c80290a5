"""Product kernels, per-axis bandwidth scaling and kernel-kernel convolution.

A kernel on R^d is a product of one-dimensional even profiles. The Gaussian
kernel has closed-form norms and convolutions; a tabulated profile (values on
``[0, R]``, linearly interpolated, zero beyond ``R``) is handled by quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import integrate

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Bandwidth:
    """Per-axis bandwidth vector; ``prod`` is the volume factor ``|h|``."""

    h: tuple

    def __post_init__(self):
        h = tuple(float(v) for v in np.atleast_1d(self.h))
        if not h or any(not (v > 0 and math.isfinite(v)) for v in h):
            raise ValueError(f"bandwidth components must be positive and finite, got {h}")
        object.__setattr__(self, "h", h)

    @property
    def dim(self) -> int:
        return len(self.h)

    @property
    def prod(self) -> float:
        return math.prod(self.h)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.h, dtype=dtype)


def as_bandwidth(h, dim: int | None = None) -> Bandwidth:
    bw = h if isinstance(h, Bandwidth) else Bandwidth(h)
    if dim is not None and bw.dim != dim:
        if bw.dim == 1:
            return Bandwidth(bw.h * dim)
        raise ValueError(f"bandwidth has {bw.dim} components, data has {dim}")
    return bw


class KernelNorms(NamedTuple):
    L1: float
    L2sq: float
    sup: float


class Kernel:
    """Base class: subclasses provide the 1-d ``profile`` and its convolutions."""

    dim: int = 1
    order: int = 2

    def profile(self, t):
        raise NotImplementedError

    def profile_norms(self) -> KernelNorms:
        raise NotImplementedError

    def conv_profile(self, t, h: float, hp: float):
        """One-dimensional ``(K_h * K_hp)(t)``."""
        raise NotImplementedError

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.dim == 1 and (t.ndim == 0 or t.shape[-1] != 1):
            return self.profile(t)
        return np.prod(self.profile(t), axis=-1)

    @property
    def norms(self) -> KernelNorms:
        n1 = self.profile_norms()
        d = self.dim
        return KernelNorms(n1.L1**d, n1.L2sq**d, n1.sup**d)

    @property
    def support_radius(self) -> float:
        return math.inf


class GaussianKernel(Kernel):
    """Standard Gaussian product kernel (order 2: first non-vanishing moment is the second)."""

    def __init__(self, dim: int = 1):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = int(dim)

    def __repr__(self):
        return f"GaussianKernel(dim={self.dim})"

    def __eq__(self, other):
        return isinstance(other, GaussianKernel) and other.dim == self.dim

    def __hash__(self):
        return hash(("gaussian", self.dim))

    def profile(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-0.5 * t * t) / _SQRT_2PI

    def profile_norms(self):
        return KernelNorms(1.0, 1.0 / (2.0 * math.sqrt(math.pi)), 1.0 / _SQRT_2PI)

    def conv_profile(self, t, h, hp):
        s = np.sqrt(np.asarray(h, float) ** 2 + np.asarray(hp, float) ** 2)
        t = np.asarray(t, dtype=float)
        return np.exp(-0.5 * (t / s) ** 2) / (_SQRT_2PI * s)


class TabulatedKernel(Kernel):
    """Even profile given by values on ``0 = t_0 < ... < t_k = R``.

    Linear interpolation inside ``[-R, R]`` and zero outside. The profile must
    integrate to one.
    """

    def __init__(self, t, values, dim: int = 1):
        t = np.asarray(t, dtype=float)
        values = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != values.shape or t.size < 2:
            raise ValueError("table needs matching 1-d arrays with at least two points")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("table abscissae must start at 0 and increase strictly")
        self.t = t
        self.values = values
        self.dim = int(dim)
        self._norms = self._compute_norms()
        total = 2.0 * integrate.quad(self.profile, 0.0, t[-1], points=t[1:-1] if t.size > 2 else None, limit=max(50, 4 * t.size))[0]
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"kernel profile integrates to {total:.8g}, expected 1")

    @classmethod
    def from_file(cls, path, dim: int = 1) -> "TabulatedKernel":
        with open(path) as fh:
            lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
        try:
            float(lines[0].replace(",", " ").split()[0])
        except ValueError:
            lines = lines[1:]
        data = np.array([[float(v) for v in ln.replace(",", " ").split()] for ln in lines])
        if data.ndim != 2 or data.shape[1] != 2:
            raise ValueError(f"{path}: kernel table must have two columns (t, K(t))")
        return cls(data[:, 0], data[:, 1], dim=dim)

    @classmethod
    def uniform(cls, dim: int = 1) -> "TabulatedKernel":
        """Uniform density on [-1/2, 1/2]."""
        return cls([0.0, 0.5], [1.0, 1.0], dim=dim)

    def __repr__(self):
        return f"TabulatedKernel(<{self.t.size} points on [0, {self.t[-1]:g}]>, dim={self.dim})"

    @property
    def support_radius(self):
        return float(self.t[-1])

    def profile(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        out = np.interp(a, self.t, self.values)
        return np.where(a <= self.t[-1], out, 0.0)

    def _compute_norms(self):
        r = self.t[-1]
        pts = self.t[1:-1] if self.t.size > 2 else None
        lim = max(50, 4 * self.t.size)
        l1 = 2.0 * integrate.quad(lambda s: abs(self.profile(s)), 0.0, r, points=pts, limit=lim)[0]
        l2 = 2.0 * integrate.quad(lambda s: self.profile(s) ** 2, 0.0, r, points=pts, limit=lim)[0]
        return KernelNorms(l1, l2, float(np.max(np.abs(self.values))))

    def profile_norms(self):
        return self._norms

    def conv_profile(self, t, h, hp):
        return np.vectorize(self._conv_scalar, otypes=[float])(t, h, hp)

    def _conv_scalar(self, t, h, hp):
        r = self.t[-1]
        lo = max(-r * hp, t - r * h)
        hi = min(r * hp, t + r * h)
        if hi <= lo:
            return 0.0
        # kinks of both scaled profiles
        knots = np.concatenate([self.t * hp, -self.t * hp, t - self.t * h, t + self.t * h])
        knots = np.unique(knots[(knots > lo) & (knots < hi)])
        val, _ = integrate.quad(
            lambda s: self.profile((t - s) / h) * self.profile(s / hp),
            lo,
            hi,
            points=knots if knots.size else None,
            epsabs=1e-10,
            limit=max(50, 4 * knots.size + 50),
        )
        return val / (h * hp)

    @lru_cache(maxsize=4096)
    def _conv_table(self, ratio: float):
        # (K * K_ratio)(s) on a symmetric grid; (K_h * K_hp)(t) = table(t/h) / h with ratio = hp/h
        r = self.t[-1] * (1.0 + ratio)
        s = np.linspace(0.0, r, 1025)
        vals = np.array([self._conv_scalar(v, 1.0, ratio) for v in s])
        return s, vals

    def conv_profile_fast(self, t, h, hp):
        s, vals = self._conv_table(float(hp) / float(h))
        a = np.abs(np.asarray(t, float)) / h
        return np.where(a <= s[-1], np.interp(a, s, vals), 0.0) / h


def kernel_from_spec(spec, dim: int = 1) -> Kernel:
    """``"gaussian"`` or ``{"table": path}``."""
    if isinstance(spec, Kernel):
        return spec
    if spec is None or spec == "gaussian":
        return GaussianKernel(dim)
    if isinstance(spec, dict) and set(spec) == {"table"}:
        return TabulatedKernel.from_file(spec["table"], dim=dim)
    raise ValueError(f"unknown kernel specification {spec!r}")


def _axis_values(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if x.shape[-1] != dim:
        if dim == 1:
            x = x[..., None]
        else:
            raise ValueError(f"points must have trailing dimension {dim}")
    return x


def scaled_kernel_eval(K: Kernel, h, x):
    """``K_h(x) = K(x_1/h_1, ..., x_d/h_d) / |h|``."""
    bw = as_bandwidth(h, K.dim)
    x = _axis_values(x, K.dim)
    hv = np.asarray(bw.h)
    out = np.prod(K.profile(x / hv), axis=-1) / bw.prod
    return out if out.ndim else float(out)


def convolved_kernel_eval(K: Kernel, h, hp, x):
    """``(K_h * K_hp)(x)``, axis by axis."""
    bw = as_bandwidth(h, K.dim)
    bwp = as_bandwidth(hp, K.dim)
    x = _axis_values(x, K.dim)
    out = np.ones(x.shape[:-1])
    for j in range(K.dim):
        out = out * K.conv_profile(x[..., j], bw.h[j], bwp.h[j])
    return out if out.ndim else float(out)


def kernel_norms(K: Kernel) -> KernelNorms:
    return K.norms
