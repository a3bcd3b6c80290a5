"""Run configuration: a TOML file with a fixed set of sections and keys.

Grammar (every key optional, unknown keys are errors)::

    model = "beta-bar"          # or "growth-frag"
    kernel = "gaussian"         # or { table = "profile.csv" }
    depth = 10
    seed = 42
    jobs = 1
    output_dir = "results"

    [growth_frag]   tau = 2.0, s_max = 5.0, root_law = [0.5, 2.0]
    [grid]          h_max = 1.0, alpha = 1.7, bandwidths = [..]   (explicit list overrides)
    [eval]          lo, hi, points = 101                          (defaults: state space)
    [calibration]   m = 20, s_max = 2, b_over_a = 2.0, kappa, reuse_kappa = false,
                    x                                             (calibrate point, default mid of eval)
    [estimate]      input = "tree.csv", diagnostics = false
    [risk]          R = 200, bandwidth                            (absent: adaptive)
    [rates]         depths = [8, ..., 13], R = 30, x = 0.5, bandwidth
    [bernstein]     R = 2000, h = 0.1, x = 0.5, deltas = [...], M = 2.0, rho = 0.4
    [splitting_rate] lo = 1.0, hi = 4.5, points = 36, threshold, bandwidth
"""

from __future__ import annotations

import copy
import math
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` holds one message per failure."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


DEFAULTS = {
    "model": "beta-bar",
    "kernel": "gaussian",
    "depth": 10,
    "seed": 42,
    "jobs": 1,
    "output_dir": "results",
    "growth_frag": {"tau": 2.0, "s_max": 5.0, "root_law": [0.5, 2.0]},
    "grid": {"h_max": 1.0, "alpha": 1.7, "bandwidths": None},
    "eval": {"lo": None, "hi": None, "points": 101},
    "calibration": {"m": 20, "s_max": 2, "b_over_a": 2.0, "kappa": None, "reuse_kappa": False, "x": None},
    "estimate": {"input": None, "diagnostics": False},
    "risk": {"R": 200, "bandwidth": None},
    "rates": {"depths": [8, 9, 10, 11, 12, 13], "R": 30, "x": 0.5, "bandwidth": None},
    "bernstein": {"R": 2000, "h": 0.1, "x": 0.5, "deltas": [0.02, 0.03, 0.04, 0.05, 0.075, 0.1, 0.125, 0.15, 0.2], "M": 2.0, "rho": 0.4},
    "splitting_rate": {"lo": 1.0, "hi": 4.5, "points": 36, "threshold": None, "bandwidth": None},
}


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def merge(base: dict, override: dict, problems: list, prefix: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        name = f"{prefix}{key}"
        if key not in base:
            problems.append(f"unknown key '{name}'")
            continue
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                problems.append(f"'{name}' must be a section")
                continue
            out[key] = merge(base[key], val, problems, prefix=f"{name}.")
        else:
            out[key] = val
    return out


def validate(cfg: dict) -> list:
    p = []
    if cfg["model"] not in ("beta-bar", "growth-frag"):
        p.append(f"model must be 'beta-bar' or 'growth-frag', got {cfg['model']!r}")
    k = cfg["kernel"]
    if not (k == "gaussian" or (isinstance(k, dict) and set(k) == {"table"} and isinstance(k["table"], str))):
        p.append("kernel must be \"gaussian\" or { table = <path> }")
    if not _int(cfg["depth"]) or not 0 <= cfg["depth"] <= 40:
        p.append("depth must be an integer in 0..40")
    if not _int(cfg["seed"]) or cfg["seed"] < 0:
        p.append("seed must be a non-negative integer")
    if not _int(cfg["jobs"]) or cfg["jobs"] == 0:
        p.append("jobs must be a non-zero integer")
    if not isinstance(cfg["output_dir"], str):
        p.append("output_dir must be a string")
    gf = cfg["growth_frag"]
    if not _num(gf["tau"]) or gf["tau"] <= 0:
        p.append("growth_frag.tau must be positive")
    if not (_num(gf["s_max"]) or gf["s_max"] == math.inf) or gf["s_max"] <= 0:
        p.append("growth_frag.s_max must be positive")
    rl = gf["root_law"]
    if not (isinstance(rl, list) and len(rl) == 2 and all(_num(v) for v in rl) and 0 < rl[0] < rl[1]):
        p.append("growth_frag.root_law must be [lo, hi] with 0 < lo < hi")
    elif _num(gf["s_max"]) and rl[1] > gf["s_max"] / 2:
        p.append("growth_frag.root_law must lie inside (0, s_max / 2]")
    g = cfg["grid"]
    if not _num(g["h_max"]) or g["h_max"] <= 0:
        p.append("grid.h_max must be positive")
    if not _num(g["alpha"]) or g["alpha"] <= 1:
        p.append("grid.alpha must be > 1")
    if g["bandwidths"] is not None and not (
        isinstance(g["bandwidths"], list) and g["bandwidths"] and all(_num(v) and v > 0 for v in g["bandwidths"])
    ):
        p.append("grid.bandwidths must be a non-empty list of positive numbers")
    e = cfg["eval"]
    for key in ("lo", "hi"):
        if e[key] is not None and not _num(e[key]):
            p.append(f"eval.{key} must be a number")
    if _num(e["lo"]) and _num(e["hi"]) and e["hi"] < e["lo"]:
        p.append("eval.hi must be >= eval.lo")
    if not _int(e["points"]) or e["points"] < 1:
        p.append("eval.points must be a positive integer")
    c = cfg["calibration"]
    if not _int(c["m"]) or c["m"] < 2:
        p.append("calibration.m must be an integer >= 2")
    if not _int(c["s_max"]) or c["s_max"] < 1:
        p.append("calibration.s_max must be an integer >= 1")
    if not _num(c["b_over_a"]) or c["b_over_a"] < 1:
        p.append("calibration.b_over_a must be >= 1")
    if c["kappa"] is not None and (not _num(c["kappa"]) or c["kappa"] < 0):
        p.append("calibration.kappa must be a non-negative number")
    if c["x"] is not None and not _num(c["x"]):
        p.append("calibration.x must be a number")
    if not isinstance(c["reuse_kappa"], bool):
        p.append("calibration.reuse_kappa must be true or false")
    est = cfg["estimate"]
    if est["input"] is not None and not isinstance(est["input"], str):
        p.append("estimate.input must be a path")
    if not isinstance(est["diagnostics"], bool):
        p.append("estimate.diagnostics must be true or false")
    for sec in ("risk", "rates", "bernstein"):
        if not _int(cfg[sec]["R"]) or cfg[sec]["R"] < 1:
            p.append(f"{sec}.R must be a positive integer")
    if cfg["bernstein"]["R"] < 100 if _int(cfg["bernstein"]["R"]) else False:
        p.append("bernstein.R must be >= 100")
    for sec in ("risk", "rates", "splitting_rate"):
        bw = cfg[sec]["bandwidth"]
        if bw is not None and (not _num(bw) or bw <= 0):
            p.append(f"{sec}.bandwidth must be a positive number")
    r = cfg["rates"]
    d = r["depths"]
    if not (isinstance(d, list) and all(_int(v) and 1 <= v <= 40 for v in d) and len(set(d)) >= 3):
        p.append("rates.depths must list at least three distinct depths in 1..40")
    if not _num(r["x"]):
        p.append("rates.x must be a number")
    b = cfg["bernstein"]
    if not _num(b["h"]) or b["h"] <= 0:
        p.append("bernstein.h must be positive")
    if not _num(b["x"]):
        p.append("bernstein.x must be a number")
    if not (isinstance(b["deltas"], list) and b["deltas"] and all(_num(v) and v > 0 for v in b["deltas"])):
        p.append("bernstein.deltas must be a non-empty list of positive numbers")
    if not _num(b["M"]) or b["M"] <= 0:
        p.append("bernstein.M must be positive")
    if not _num(b["rho"]) or not 0 < b["rho"] < 0.5:
        p.append("bernstein.rho must lie in (0, 1/2)")
    s = cfg["splitting_rate"]
    if not (_num(s["lo"]) and _num(s["hi"]) and 0 < s["lo"] <= s["hi"]):
        p.append("splitting_rate.lo/hi must satisfy 0 < lo <= hi")
    if not _int(s["points"]) or s["points"] < 1:
        p.append("splitting_rate.points must be a positive integer")
    if s["threshold"] is not None and (not _num(s["threshold"]) or s["threshold"] <= 0):
        p.append("splitting_rate.threshold must be positive")
    return p


def load(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then the file at ``path``, then ``overrides``; validated."""
    problems: list = []
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError([f"cannot read config {path}: {exc.strerror}"]) from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError([f"{path}: {exc}"]) from exc
        cfg = merge(cfg, data, problems)
    if overrides:
        cfg = merge(cfg, overrides, problems)
    if problems:
        raise ConfigError(problems)
    problems = validate(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg
