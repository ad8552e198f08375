"""Command-line interface: run, stability, sweep, presets.

Exit codes: 0 success, 2 config error, 3 solver failure, 4 invariant
violation.  Failures print one machine-parsable line on stderr of the form
``error code=<n> reason=<tag> detail="..."``.

Environment overrides (take precedence over flags):
  TPG_OUT      output directory (same as --out)
  TPG_THREADS  sweep worker count (same as --threads)
"""

import argparse
import concurrent.futures
import copy
import os
import sys

import numpy as np
import yaml

from . import diagnostics as diag
from . import stability
from .config import build_initial_state, build_model, load_config, parse_config
from .errors import (ConfigError, LinearSolveDiverged, NoRootInBracket,
                     NonFiniteFlux, NonFiniteRhs, NonFiniteState,
                     PositivityBreached, TpgError, WindowTooShort)
from .grid import Field, integrate
from .models import PRESET_PARAMS, hypothesis_check
from .snapshots import write_snapshot
from .stepper import run as run_sim

SOLVER_ERRORS = (NonFiniteState, NonFiniteRhs, NonFiniteFlux,
                 PositivityBreached, LinearSolveDiverged)


def _fail(code, reason, detail=""):
    detail = str(detail).replace('"', "'")
    sys.stderr.write(f'error code={code} reason={reason} detail="{detail}"\n')
    return code


def _prepare(cfg):
    """Model, initial state, hypothesis report, bounds, steady state."""
    model = build_model(cfg)
    s0 = build_initial_state(cfg)
    hb, violations = hypothesis_check(model)
    wbar = integrate(s0.w) / s0.grid.area
    try:
        ss = stability.trivial_steady_state(model, wbar)
    except NoRootInBracket:
        ss = None
    bounds = None
    if not any(v.hypothesis == "H3" for v in violations):
        try:
            bounds = stability.theorem1_bounds(model, hb, s0)
        except ValueError:
            bounds = None
    return model, s0, hb, violations, bounds, ss


def cmd_run(args):
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.directory = args.out
        model, s0, hb, violations, bounds, ss = _prepare(cfg)
    except ConfigError as e:
        return _fail(2, e.reason, e.detail)
    except OSError as e:
        return _fail(2, "io", e)

    outdir = cfg.directory
    os.makedirs(outdir, exist_ok=True)
    snap_times = []

    def on_sample(state):
        if "snapshots" in cfg.formats:
            idx = len(snap_times)
            for comp in ("u", "v", "w"):
                write_snapshot(
                    os.path.join(outdir, f"snap_{idx:05d}_{comp}.bin"),
                    getattr(state, comp), state.t, comp)
            snap_times.append(state.t)

    try:
        series, final = run_sim(s0, model, cfg.stepper,
                                out_dt=cfg.cadence, on_sample=on_sample)
    except SOLVER_ERRORS as e:
        return _fail(3, type(e).__name__, e)

    try:
        window = max(cfg.stepper.t_end / 5.0, 4 * cfg.cadence)
        regime = diag.classify_regime(series, window,
                                      ubar=ss.ubar if ss else None)
    except WindowTooShort:
        regime = "unresolved"
    series.to_csv(os.path.join(outdir, "diagnostics.csv"))
    if "heatmaps" in cfg.formats:
        _write_heatmaps(final, outdir)

    report = None
    if bounds is not None:
        report = diag.verify_bounds(series, bounds)

    manifest = {
        "config": cfg.raw,
        "regime": regime,
        "steady_state": (
            {"ubar": ss.ubar, "wbar": ss.wbar} if ss else None),
        "hypothesis_violations": [
            {"hypothesis": v.hypothesis, "rule": v.rule,
             "point": list(v.point), "value": float(v.value), "note": v.note}
            for v in violations],
        "mass_bounds": (
            {"C1": bounds[0], "C2": bounds[1], "C3": bounds[2],
             "check": report.summary()} if bounds is not None else None),
        "final_time": final.t,
    }
    with open(os.path.join(outdir, "manifest.yaml"), "w") as fh:
        yaml.safe_dump(manifest, fh, sort_keys=False)

    if report is not None and not report.passed:
        return _fail(4, "mass-bounds", report.summary())
    print(f"regime={regime} out={outdir}")
    return 0


def _write_heatmaps(state, outdir):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    for comp in ("u", "v", "w"):
        f = getattr(state, comp)
        fig, ax = plt.subplots(figsize=(5, 4))
        im = ax.imshow(f.values.T, origin="lower", cmap="viridis",
                       extent=(0, f.grid.length_x, 0, f.grid.length_y))
        ax.set_title(f"{comp}(x, y) at t={state.t:.4g}  "
                     f"[min={f.min():.4g}, max={f.max():.4g}]")
        fig.colorbar(im, ax=ax)
        fig.savefig(os.path.join(outdir, f"final_{comp}.png"), dpi=120)
        plt.close(fig)


def cmd_stability(args):
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.directory = args.out
        model, s0, hb, violations, bounds, ss = _prepare(cfg)
        if ss is None:
            raise NoRootInBracket(0.0)
    except NoRootInBracket as e:
        return _fail(2, "NoRootInBracket", e)
    except ConfigError as e:
        return _fail(2, e.reason, e.detail)
    except OSError as e:
        return _fail(2, "io", e)

    e = stability.jacobian_entries(model, ss)
    k2 = stability.default_k2_grid(cfg.grid)
    gr = stability.growth_rates(model, ss, k2)
    verdict = stability.proposition1_verdict(model, ss)
    report = stability.StabilityReport(
        steady=ss, entries=e, k2_grid=gr.k2, sigma_max=gr.sigma_max,
        verdict=verdict, bounds=bounds)
    text = report.to_text()
    os.makedirs(cfg.directory, exist_ok=True)
    path = os.path.join(cfg.directory, "stability.txt")
    with open(path, "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return 0


def _parse_axis(spec):
    try:
        name, rng = spec.split("=", 1)
        start, stop, count = rng.split(":")
        count = int(count)
        if count < 1:
            raise ValueError("count must be >= 1")
        return name, np.linspace(float(start), float(stop), count)
    except ValueError as e:
        raise ConfigError("bad-axis", f"{spec!r}: {e}") from e


def _sweep_point(raw_cfg, overrides):
    """Worker: run one sweep point, return a result row dict."""
    data = copy.deepcopy(raw_cfg)
    data.setdefault("model", {}).setdefault("params", {}).update(overrides)
    row = dict(overrides)
    try:
        cfg = parse_config(data)
        model, s0, hb, violations, bounds, ss = _prepare(cfg)
        verdict = (stability.proposition1_verdict(model, ss)
                   if ss else "no-steady-state")
        series, final = run_sim(s0, model, cfg.stepper, out_dt=cfg.cadence)
        try:
            window = max(cfg.stepper.t_end / 5.0, 4 * cfg.cadence)
            regime = diag.classify_regime(series, window,
                                          ubar=ss.ubar if ss else None)
        except WindowTooShort:
            regime = "unresolved"
        row.update(status="ok", verdict=verdict, regime=regime,
                   amp_u=series.amp_u[-1], amp_v=series.amp_v[-1],
                   amp_w=series.amp_w[-1])
    except (ConfigError, TpgError) as e:
        row.update(status=f"failed:{type(e).__name__}", verdict="", regime="",
                   amp_u="", amp_v="", amp_w="")
    return row


def cmd_sweep(args):
    try:
        with open(args.config) as fh:
            raw = yaml.safe_load(fh)
        parse_config(raw)  # validate the base config up front
        if not args.axis:
            raise ConfigError("bad-axis", "at least one --axis is required")
        if len(args.axis) > 2:
            raise ConfigError("bad-axis", "at most two axes are supported")
        axes = [_parse_axis(a) for a in args.axis]
    except ConfigError as e:
        return _fail(2, e.reason, e.detail)
    except OSError as e:
        return _fail(2, "io", e)

    points = [{}]
    for name, values in axes:
        points = [{**p, name: float(v)} for p in points for v in values]

    threads = args.threads
    if threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(_sweep_point, [raw] * len(points), points))
    else:
        rows = [_sweep_point(raw, p) for p in points]

    outdir = args.out or "out"
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, "sweep.csv")
    names = [n for n, _ in axes]
    header = names + ["status", "verdict", "regime", "amp_u", "amp_v", "amp_w"]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(row[k]) for k in header) + "\n")
    print(f"sweep points={len(rows)} out={path}")
    if all(str(r["status"]).startswith("failed") for r in rows):
        return _fail(3, "all-points-failed", f"{len(rows)} points")
    return 0


def cmd_presets(args):
    for name, params in PRESET_PARAMS.items():
        print(f"{name}: {', '.join(params)}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="tpg",
        description="Target-partaker-guardian reaction-advection-diffusion "
                    "simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a run config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(func=cmd_run)

    p_st = sub.add_parser("stability", help="stability report for a config")
    p_st.add_argument("--config", required=True)
    p_st.add_argument("--out", default=None)
    p_st.set_defaults(func=cmd_stability)

    p_sw = sub.add_parser("sweep", help="parameter sweep over a config")
    p_sw.add_argument("--config", required=True)
    p_sw.add_argument("--out", default=None)
    p_sw.add_argument("--threads", type=int, default=1)
    p_sw.add_argument("--axis", action="append", default=[],
                      metavar="NAME=START:STOP:COUNT")
    p_sw.set_defaults(func=cmd_sweep)

    p_pr = sub.add_parser("presets", help="list built-in presets")
    p_pr.set_defaults(func=cmd_presets)

    args = parser.parse_args(argv)
    if os.environ.get("TPG_OUT") and hasattr(args, "out"):
        args.out = os.environ["TPG_OUT"]
    if os.environ.get("TPG_THREADS") and hasattr(args, "threads"):
        args.threads = int(os.environ["TPG_THREADS"])
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
