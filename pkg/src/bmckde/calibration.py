"""Data-driven choice of the penalty constant by bandwidth-jump detection.

For a grid of penalty constants the selected bandwidth is recomputed; the
constant where ``1 / |h_hat|`` drops the most is located, the kappa grid is
zoomed onto that interval, and the bandwidth selected just after the jump is
returned.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .estimator import BandwidthGrid, GLState, PairwiseTerms, _select, pairwise_terms
from .kernel import Bandwidth, Kernel


@dataclass(frozen=True)
class CalibrationConfig:
    m: int = 20
    s_max: int = 2
    b_over_a: float = 2.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError("m must be an integer >= 2")
        if int(self.s_max) != self.s_max or self.s_max < 1:
            raise ValueError("s_max must be an integer >= 1")
        if not self.b_over_a >= 1:
            raise ValueError("b/a must be >= 1")


@dataclass
class CalibrationIteration:
    kappas: np.ndarray
    h_prods: np.ndarray
    indices: np.ndarray
    j_jump: int  # 0-based: the jump is between kappas[j_jump] and kappas[j_jump + 1]

    @property
    def inv_h_prods(self) -> np.ndarray:
        return 1.0 / self.h_prods


@dataclass
class CalibrationTrace:
    kappa_max: float
    iterations: list = field(default_factory=list)
    final_kappa: float = float("nan")
    final_state: GLState | None = None

    @property
    def bandwidth(self) -> Bandwidth:
        return self.final_state.selected

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "j", "kappa", "h_prod", "inv_h_prod", "is_jump"])
        for s, it in enumerate(self.iterations, start=1):
            for j, (k, hp) in enumerate(zip(it.kappas, it.h_prods), start=1):
                w.writerow([s, j, repr(float(k)), repr(float(hp)), repr(float(1.0 / hp)), int(j - 1 == it.j_jump)])
        return buf.getvalue()


def kappa_max_terms(terms: PairwiseTerms) -> float:
    return float(np.max(terms.scaled))


def kappa_max(sample, K: Kernel, grid: BandwidthGrid, x) -> float:
    """``T / log T * max_{h, h'} |h'| (nu_h'(x) - K_h * nu_h'(x))^2``."""
    return kappa_max_terms(pairwise_terms(sample, K, grid, x))


def calibrate_terms(terms: PairwiseTerms, grid: BandwidthGrid, config: CalibrationConfig = CalibrationConfig()) -> CalibrationTrace:
    k_hi = kappa_max_terms(terms)
    k_lo = 0.0
    trace = CalibrationTrace(kappa_max=k_hi)
    m = int(config.m)
    for _ in range(int(config.s_max)):
        kappas = k_lo + np.arange(m) / (m - 1) * (k_hi - k_lo)
        states = [_select(terms, grid, k, config.b_over_a) for k in kappas]
        idx = np.array([s.index for s in states])
        prods = grid.prods[idx]
        jumps = np.abs(np.diff(1.0 / prods))
        # np.argmax keeps the first maximiser: ties go to the earliest jump
        j = int(np.argmax(jumps))
        trace.iterations.append(CalibrationIteration(kappas, prods, idx, j))
        k_lo, k_hi = kappas[j], kappas[j + 1]
        trace.final_kappa = float(kappas[j + 1])
        trace.final_state = states[j + 1]
    return trace


def calibrate_and_select(sample, K: Kernel, grid: BandwidthGrid, x, config: CalibrationConfig = CalibrationConfig()):
    """Run the calibration at ``x``; returns ``(trace, selected bandwidth)``."""
    trace = calibrate_terms(pairwise_terms(sample, K, grid, x), grid, config)
    return trace, trace.bandwidth
