"""Command line interface: ``bmckde <subcommand> [options]``.

Every run writes its CSV artifacts, an SVG plot and ``run.json`` (the fully
resolved configuration, package versions and seeds) into the output
directory. Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import tempfile

import numpy as np

from . import __version__
from . import config as cfgmod
from ._svg import Series, line_plot
from .analysis import (
    BernsteinConstants,
    ErgodicityParams,
    bernstein_bound,
    empirical_deviation_probability,
    pointwise_risk,
    rate_regression,
    rates_csv,
    replication_seeds,
    SplittingRateEstimator,
)
from .calibration import CalibrationConfig, calibrate_terms
from .estimator import FixedBandwidthKDE, GLDensityEstimator, BandwidthGrid, grid_for_size, pairwise_terms
from .kernel import kernel_from_spec
from .models import GrowthFragModel, model_from_name, simulate_tree, splitting_rate_tent
from .tree import TreeSample

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _r(v) -> str:
    return repr(float(v))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_r(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path``, then rename it into place."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# building blocks from the resolved configuration


def build_model(cfg, name=None):
    name = name or cfg["model"]
    if name == "beta-bar":
        return model_from_name(name)
    gf = cfg["growth_frag"]
    return model_from_name(name, tau=float(gf["tau"]), s_max=float(gf["s_max"]), root_law=tuple(float(v) for v in gf["root_law"]))


def build_kernel(cfg):
    return kernel_from_spec(cfg["kernel"], 1)


def eval_grid(cfg, model) -> np.ndarray:
    e = cfg["eval"]
    lo, hi = model.state_space
    lo = lo if e["lo"] is None else e["lo"]
    hi = hi if e["hi"] is None else e["hi"]
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise cfgmod.ConfigError(["eval.lo and eval.hi are required when the state space is unbounded"])
    if e["points"] == 1:
        return np.array([0.5 * (lo + hi)])
    return np.linspace(lo, hi, e["points"])


def adaptive_estimator(cfg, kernel, n_jobs=None) -> GLDensityEstimator:
    g, c = cfg["grid"], cfg["calibration"]
    return GLDensityEstimator(
        kernel=kernel,
        h_max=g["h_max"],
        alpha=g["alpha"],
        kappa=c["kappa"],
        m=c["m"],
        s_max=c["s_max"],
        b_over_a=c["b_over_a"],
        reuse_kappa=c["reuse_kappa"],
        bandwidths=g["bandwidths"],
        n_jobs=n_jobs,
    )


def _estimator_for(cfg, kernel, bandwidth, n_jobs=None):
    if bandwidth is None:
        return adaptive_estimator(cfg, kernel, n_jobs)
    return FixedBandwidthKDE(bandwidth, kernel)


def _truth(model):
    if hasattr(model, "invariant_density"):
        return model.invariant_density
    if isinstance(model, GrowthFragModel) and math.isfinite(model.s_max):
        return model.stationary_density
    return None


def _sample(cfg, model) -> TreeSample:
    path = cfg["estimate"]["input"]
    if path is None:
        return simulate_tree(model, cfg["depth"], cfg["seed"])
    try:
        with open(path) as fh:
            return TreeSample.from_csv(fh.read())
    except OSError as exc:
        raise cfgmod.ConfigError([f"cannot read tree {path}: {exc.strerror}"]) from exc


# ---------------------------------------------------------------------------
# subcommands; each returns {filename: text} plus the seeds used


def cmd_simulate(cfg, args):
    model = build_model(cfg)
    tree = simulate_tree(model, cfg["depth"], cfg["seed"])
    vals = tree.values[:, 0]
    lo, hi = float(vals.min()), float(vals.max())
    edges = np.linspace(lo, hi if hi > lo else lo + 1.0, 41)
    counts, _ = np.histogram(vals, bins=edges, density=True)
    xs = np.repeat(edges, 2)[1:-1]
    series = [Series("histogram", xs, np.repeat(counts, 2), color=COLORS[0])]
    truth = _truth(model)
    if truth is not None:
        grid = np.linspace(edges[0], edges[-1], 201)
        series.append(Series("invariant density", grid, truth(grid), color="black", dash="6,3"))
    svg = line_plot(series, title=f"{model.name} tree, depth {cfg['depth']}", xlabel="x", ylabel="density")
    return {"tree.csv": tree.to_csv(), "simulate.svg": svg}, {"tree": cfg["seed"]}


def cmd_estimate(cfg, args):
    model = build_model(cfg)
    tree = _sample(cfg, model)
    kernel = build_kernel(cfg)
    xs = eval_grid(cfg, model)
    est = adaptive_estimator(cfg, kernel, n_jobs=cfg["jobs"]).fit(tree)
    res = est.estimate(xs)
    files = {
        "estimate.csv": _csv(
            ["x", "h_selected_prod", "kappa", "nu_hat"],
            [(float(x), float(h), float(k), float(v)) for x, h, k, v in zip(res.x[:, 0], res.h_prod, res.kappa, res.nu_hat)],
        )
    }
    if cfg["estimate"]["diagnostics"]:
        rows = []
        for x, st in zip(res.x[:, 0], res.states):
            for hp, a, v, c in zip(np.prod(st.bandwidths, axis=1), st.A, st.V, st.criterion):
                rows.append((float(x), float(hp), float(a), float(v), float(c)))
        files["diagnostics.csv"] = _csv(["x", "h_prod", "A", "V", "criterion"], rows)
    series = [Series("adaptive estimate", res.x[:, 0], res.nu_hat, color=COLORS[0], markers=len(xs) < 3)]
    truth = _truth(model)
    if truth is not None and cfg["estimate"]["input"] is None:
        series.append(Series("true density", xs, truth(xs), color="black", dash="6,3"))
    files["estimate.svg"] = line_plot(series, title="Adaptive kernel estimate", xlabel="x", ylabel="density")
    return files, {"tree": cfg["seed"] if cfg["estimate"]["input"] is None else None}


def cmd_calibrate(cfg, args):
    model = build_model(cfg)
    tree = _sample(cfg, model)
    kernel = build_kernel(cfg)
    x = cfg["calibration"]["x"]
    if x is None:
        xs = eval_grid(cfg, model)
        x = 0.5 * (xs[0] + xs[-1])
    g = cfg["grid"]
    grid = (
        BandwidthGrid.from_bandwidths(g["bandwidths"], tree.size)
        if g["bandwidths"] is not None
        else grid_for_size(g["h_max"], g["alpha"], tree.size, 1)
    )
    c = cfg["calibration"]
    trace = calibrate_terms(pairwise_terms(tree, kernel, grid, x), grid, CalibrationConfig(c["m"], c["s_max"], c["b_over_a"]))
    series = [
        Series(f"iteration {s}", it.kappas, it.inv_h_prods, color=COLORS[(s - 1) % len(COLORS)], markers=True)
        for s, it in enumerate(trace.iterations, start=1)
    ]
    svg = line_plot(series, title=f"Bandwidth jump at x = {x:g}", xlabel="kappa", ylabel="1 / |h|")
    return {"trace.csv": trace.to_csv(), "calibrate.svg": svg}, {"tree": cfg["seed"] if cfg["estimate"]["input"] is None else None}


def cmd_risk(cfg, args):
    model = build_model(cfg)
    truth = _truth(model)
    if truth is None:
        raise cfgmod.ConfigError(["risk needs a known density: growth-frag requires a finite s_max"])
    kernel = build_kernel(cfg)
    xs = eval_grid(cfg, model)
    r = cfg["risk"]
    est = _estimator_for(cfg, kernel, r["bandwidth"])
    rep = pointwise_risk(model, est, xs, cfg["depth"], r["R"], cfg["seed"], reference=truth, n_jobs=cfg["jobs"])
    svg = line_plot(
        [
            Series("mse", xs, rep.mse, color=COLORS[0]),
            Series("bias^2", xs, rep.bias_sq, color=COLORS[1], dash="4,2"),
            Series("variance", xs, rep.variance, color=COLORS[2], dash="1,2"),
        ],
        title=f"Pointwise risk, depth {cfg['depth']}, R = {r['R']}",
        xlabel="x",
        ylabel="risk",
    )
    return {"risk.csv": rep.to_csv(), "risk.svg": svg}, {"replications": _seed_list(cfg["seed"], r["R"])}


def cmd_rates(cfg, args):
    model = build_model(cfg)
    truth = _truth(model)
    if truth is None:
        raise cfgmod.ConfigError(["rates needs a known density: growth-frag requires a finite s_max"])
    kernel = build_kernel(cfg)
    r = cfg["rates"]
    est = _estimator_for(cfg, kernel, r["bandwidth"])
    risks = []
    for n in sorted(set(r["depths"])):
        rep = pointwise_risk(model, est, [r["x"]], n, r["R"], cfg["seed"], reference=truth, n_jobs=cfg["jobs"])
        risks.append((n, float(rep.mse[0])))
    slope = rate_regression(risks)
    sizes = np.array([2.0 ** (n + 1) - 1 for n, _ in risks])
    lx = np.log(sizes / np.log(sizes))
    ly = np.log([m for _, m in risks])
    icpt = float(np.mean(ly) - slope * np.mean(lx))
    svg = line_plot(
        [
            Series("log mse", lx, ly, color=COLORS[0], markers=True),
            Series(f"fit, slope {slope:.3f}", lx, icpt + slope * lx, color="black", dash="6,3"),
        ],
        title=f"MSE at x = {r['x']:g}",
        xlabel="log(T / log T)",
        ylabel="log MSE",
    )
    return {"rates.csv": rates_csv(risks, slope), "rates.svg": svg}, {"replications": _seed_list(cfg["seed"], r["R"])}


def _splitting(cfg, n, seed, jobs):
    model = build_model(cfg, "growth-frag")
    s = cfg["splitting_rate"]
    tree = simulate_tree(model, n, seed)
    kernel = build_kernel(cfg)
    dens = _estimator_for(cfg, kernel, s["bandwidth"], n_jobs=jobs)
    xs = np.linspace(s["lo"], s["hi"], s["points"]) if s["points"] > 1 else np.array([s["lo"]])
    b_hat = SplittingRateEstimator(tau=model.tau, threshold=s["threshold"], density=dens, kernel=kernel).fit(tree).predict(xs)
    b_true = np.array([float(model.splitting_rate(v)) if 0 < v < model.s_max else math.nan for v in xs])
    return xs, b_hat, b_true


def _splitting_outputs(cfg, xs, b_hat, b_true, stem, title):
    text = _csv(["x", "B_hat", "B_true"], [(float(a), float(b), float(c)) for a, b, c in zip(xs, b_hat, b_true)])
    svg = line_plot(
        [Series("estimate", xs, b_hat, color=COLORS[0]), Series("true rate", xs, b_true, color="black", dash="6,3")],
        title=title,
        xlabel="x",
        ylabel="B(x)",
    )
    return {f"{stem}.csv": text, f"{stem}.svg": svg}


def cmd_splitting_rate(cfg, args):
    xs, b_hat, b_true = _splitting(cfg, cfg["depth"], cfg["seed"], cfg["jobs"])
    return _splitting_outputs(cfg, xs, b_hat, b_true, "splitting_rate", f"Splitting rate, depth {cfg['depth']}"), {"tree": cfg["seed"]}


def cmd_bernstein_check(cfg, args):
    model = build_model(cfg)
    if not hasattr(model, "invariant_density"):
        raise cfgmod.ConfigError(["bernstein-check needs a model with a closed-form invariant density (beta-bar)"])
    kernel = build_kernel(cfg)
    b = cfg["bernstein"]
    deltas = np.array(sorted(b["deltas"]), dtype=float)
    probs = empirical_deviation_probability(model, kernel, b["h"], b["x"], deltas, cfg["depth"], b["R"], cfg["seed"], n_jobs=cfg["jobs"])
    params = ErgodicityParams.for_model(model, M=b["M"], rho=b["rho"])
    consts = BernsteinConstants.from_params(kernel, params)
    bounds = np.array([bernstein_bound(d, cfg["depth"], b["h"], kernel, consts) for d in deltas])
    text = _csv(
        ["delta", "empirical_prob", "bound", "bound_clamped"],
        [(float(d), float(p), float(u), float(min(u, 1.0))) for d, p, u in zip(deltas, probs, bounds)],
    )
    svg = line_plot(
        [
            Series("empirical", deltas, probs, color=COLORS[0], markers=True),
            Series("bound (min 1)", deltas, np.minimum(bounds, 1.0), color="black", dash="6,3"),
        ],
        title=f"Deviation probabilities, h = {b['h']:g}, x = {b['x']:g}",
        xlabel="delta",
        ylabel="P(|deviation| > delta)",
    )
    return {"bernstein.csv": text, "bernstein.svg": svg}, {"replications": _seed_list(cfg["seed"], b["R"])}


def cmd_reproduce(cfg, args):
    if args.which == "fig1":
        cfg.update(model="beta-bar", kernel="gaussian", depth=10)
        model = build_model(cfg)
        xs = eval_grid(cfg, model)
        seeds = [int(s) for s in replication_seeds(cfg["seed"], 10)]
        curves = []
        for s in seeds:
            tree = simulate_tree(model, 10, s)
            curves.append(adaptive_estimator(cfg, build_kernel(cfg), n_jobs=cfg["jobs"]).fit(tree).predict(xs))
        truth = model.invariant_density(xs)
        header = ["x"] + [f"run_{i}" for i in range(1, 11)] + ["true"]
        rows = [(float(x), *[float(c[i]) for c in curves], float(truth[i])) for i, x in enumerate(xs)]
        series = [Series("estimates" if i == 0 else "", xs, c, color=COLORS[i]) for i, c in enumerate(curves)]
        series.append(Series("Beta(2,2)", xs, truth, color="black", width=2.5))
        svg = line_plot(series, title="Ten adaptive estimates, Beta-BAR, n = 10", xlabel="x", ylabel="density")
        return {"fig1.csv": _csv(header, rows), "fig1.svg": svg}, {"trees": seeds}
    cfg.update(model="growth-frag", depth=15, kernel="gaussian")
    xs, b_hat, b_true = _splitting(cfg, 15, cfg["seed"], cfg["jobs"])
    return _splitting_outputs(cfg, xs, b_hat, b_true, "fig2", "Splitting rate estimate, n = 15"), {"tree": cfg["seed"]}


def _seed_list(seed, R):
    return [int(s) for s in replication_seeds(seed, R)]


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "calibrate": cmd_calibrate,
    "risk": cmd_risk,
    "rates": cmd_rates,
    "splitting-rate": cmd_splitting_rate,
    "bernstein-check": cmd_bernstein_check,
    "reproduce": cmd_reproduce,
}


# ---------------------------------------------------------------------------
# argument parsing


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


# (flag, config path, type, help)
COMMON = [
    ("--model", ("model",), str, "beta-bar or growth-frag"),
    ("--depth", ("depth",), int, "tree depth n (the tree has 2^(n+1) - 1 nodes)"),
    ("--seed", ("seed",), int, "master seed"),
    ("--kernel", ("kernel",), str, "'gaussian' or the path of a tabulated kernel profile"),
    ("--jobs", ("jobs",), int, "parallel workers (outputs do not depend on it)"),
    ("--h-max", ("grid", "h_max"), float, "largest bandwidth of the grid"),
    ("--alpha", ("grid", "alpha"), float, "grid exponent, h_k = h_max k^-alpha"),
    ("--bandwidths", ("grid", "bandwidths"), _floats, "explicit bandwidth grid, comma separated"),
    ("--lo", ("eval", "lo"), float, "left end of the evaluation grid"),
    ("--hi", ("eval", "hi"), float, "right end of the evaluation grid"),
    ("--points", ("eval", "points"), int, "number of evaluation points"),
    ("--tau", ("growth_frag", "tau"), float, "growth rate of the growth-fragmentation model"),
    ("--s-max", ("growth_frag", "s_max"), float, "size boundary of the growth-fragmentation model"),
    ("--m", ("calibration", "m"), int, "size of the kappa grid"),
    ("--zoom", ("calibration", "s_max"), int, "number of zoom iterations of the calibration"),
    ("--b-over-a", ("calibration", "b_over_a"), float, "penalty ratio b/a"),
    ("--kappa", ("calibration", "kappa"), float, "fixed penalty constant (skips calibration)"),
]

SPECIFIC = {
    "estimate": [
        ("--input", ("estimate", "input"), str, "tree CSV to read instead of simulating"),
        ("--diagnostics", ("estimate", "diagnostics"), "flag", "also write diagnostics.csv"),
        ("--reuse-kappa", ("calibration", "reuse_kappa"), "flag", "calibrate once and reuse kappa at every x"),
    ],
    "calibrate": [
        ("--input", ("estimate", "input"), str, "tree CSV to read instead of simulating"),
        ("--x", ("calibration", "x"), float, "evaluation point"),
    ],
    "risk": [
        ("--R", ("risk", "R"), int, "replications"),
        ("--bandwidth", ("risk", "bandwidth"), float, "fixed bandwidth (default: adaptive)"),
    ],
    "rates": [
        ("--depths", ("rates", "depths"), _ints, "comma-separated depths"),
        ("--R", ("rates", "R"), int, "replications per depth"),
        ("--x", ("rates", "x"), float, "evaluation point"),
        ("--bandwidth", ("rates", "bandwidth"), float, "fixed bandwidth (default: adaptive)"),
    ],
    "splitting-rate": [
        ("--x-lo", ("splitting_rate", "lo"), float, "left end of the x grid"),
        ("--x-hi", ("splitting_rate", "hi"), float, "right end of the x grid"),
        ("--x-points", ("splitting_rate", "points"), int, "number of x points"),
        ("--threshold", ("splitting_rate", "threshold"), float, "denominator floor (default 1/log T)"),
        ("--bandwidth", ("splitting_rate", "bandwidth"), float, "fixed bandwidth (default: adaptive)"),
    ],
    "bernstein-check": [
        ("--R", ("bernstein", "R"), int, "replications (>= 100)"),
        ("--h", ("bernstein", "h"), float, "bandwidth"),
        ("--x", ("bernstein", "x"), float, "evaluation point"),
        ("--deltas", ("bernstein", "deltas"), _floats, "comma-separated deviation levels"),
        ("--M", ("bernstein", "M"), float, "ergodicity constant M"),
        ("--rho", ("bernstein", "rho"), float, "ergodicity rate rho in (0, 1/2)"),
    ],
    "reproduce": [
        ("--x-lo", ("splitting_rate", "lo"), float, "left end of the fig2 x grid"),
        ("--x-hi", ("splitting_rate", "hi"), float, "right end of the fig2 x grid"),
        ("--x-points", ("splitting_rate", "points"), int, "number of fig2 x points"),
        ("--threshold", ("splitting_rate", "threshold"), float, "denominator floor for fig2"),
    ],
}


def _dest(path):
    return "opt_" + "__".join(path)


def _add(p, spec):
    for flag, path, typ, hlp in spec:
        if typ == "flag":
            p.add_argument(flag, dest=_dest(path), action="store_const", const=True, default=None, help=hlp)
        else:
            p.add_argument(flag, dest=_dest(path), type=typ, default=None, metavar=flag.lstrip('-').upper().replace('-', '_'), help=hlp)


HELP = {
    "simulate": "simulate a tree and write its node values",
    "estimate": "adaptive density estimate on an evaluation grid",
    "calibrate": "trace the penalty calibration at one point",
    "risk": "Monte-Carlo pointwise risk of the estimator",
    "rates": "log-log risk against tree size",
    "splitting-rate": "plug-in splitting rate of the growth-fragmentation model",
    "bernstein-check": "empirical deviation probabilities against the concentration bound",
    "reproduce": "regenerate fig1 or fig2",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bmckde", description="Adaptive density estimation for bifurcating Markov chains.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", help="TOML run configuration")
        p.add_argument("--output-dir", dest="output_dir", help="artifact directory (env BMCKDE_OUTPUT_DIR)")
        if name == "reproduce":
            p.add_argument("which", choices=["fig1", "fig2"])
        _add(p, COMMON + SPECIFIC.get(name, []))
    return parser


def _overrides(args) -> dict:
    out: dict = {}
    for key, val in vars(args).items():
        if not key.startswith("opt_") or val is None:
            continue
        path = key[4:].split("__")
        if path == ["kernel"] and val != "gaussian":
            val = {"table": val}
        node = out
        for part in path[:-1]:
            node = node.setdefault(part, {})
        node[path[-1]] = val
    env_dir = os.environ.get("BMCKDE_OUTPUT_DIR")
    if args.output_dir is not None:
        out["output_dir"] = args.output_dir
    elif env_dir:
        out["output_dir"] = env_dir
    return out


def _resolve_table(cfg, config_path, overrides):
    # table paths in a config file are relative to that file
    k = cfg["kernel"]
    from_file = isinstance(k, dict) and "kernel" not in overrides
    if from_file and config_path and not os.path.isabs(k["table"]):
        cfg["kernel"] = {"table": os.path.normpath(os.path.join(os.path.dirname(os.path.abspath(config_path)), k["table"]))}
    return cfg


def run_record(command, args, cfg, seeds) -> str:
    import joblib
    import scipy
    import sklearn

    rec = {
        "command": command,
        "args": {"which": args.which} if command == "reproduce" else {},
        "config": cfg,
        "seeds": seeds,
        "versions": {
            "bmckde": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "scikit-learn": sklearn.__version__,
            "joblib": joblib.__version__,
        },
    }
    return json.dumps(rec, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, float) and not math.isfinite(o):
        return repr(o)
    raise TypeError(type(o).__name__)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = _overrides(args)
        cfg = cfgmod.load(args.config, overrides)
        cfg = _resolve_table(cfg, args.config, overrides)
        files, seeds = COMMANDS[args.command](cfg, args)
    except cfgmod.ConfigError as exc:
        for msg in exc.problems:
            print(f"bmckde: config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"bmckde: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"bmckde: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = cfg["output_dir"]
    for name, text in sorted(files.items()):
        write_atomic(os.path.join(out, name), text)
    write_atomic(os.path.join(out, "run.json"), run_record(args.command, args, cfg, seeds))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
