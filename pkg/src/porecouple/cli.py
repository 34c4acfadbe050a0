"""Command-line front end: ``porecouple <command> [options]``."""

import argparse
import csv
import glob
import json
import os
import sys
import time

import numpy as np

from .cases import RunConfig
from .dns import extract_profile
from .errors import ConfigurationError, DecayError, GeometryError, PoreCoupleError, SolverError
from .grid import write_field_csv
from .pipeline import (EffectiveParameters, conservation_summary, effective_parameters,
                       interface_conditions, run_macro, run_reference, validate)
from .svgplot import write_chart

EXIT = {ConfigurationError: 2, DecayError: 3, GeometryError: 4, SolverError: 5}
PARAMS_FILE = "effective_params.json"
MODEL_ORDER = ("dns", "new", "classical-sigma0", "classical-sigmad")


def _config(args):
    over = {"out": args.out, "mode": getattr(args, "mode", None),
            "interface": getattr(args, "interface", None), "alpha": getattr(args, "alpha", None),
            "stripe_l": getattr(args, "stripe_l", None)}
    if args.config:
        cfg = RunConfig.from_json(args.config, **over)
    else:
        cfg = RunConfig.for_preset(args.preset or "case1", **over)
    os.makedirs(cfg.out, exist_ok=True)
    return cfg


def _dump(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _load_params(cfg):
    path = os.path.join(cfg.out, PARAMS_FILE)
    if not os.path.exists(path):
        raise ConfigurationError(f"{path} not found; run 'porecouple effective-params' first")
    return EffectiveParameters.read(path)


def _write_traces(cfg, params):
    for j, tr in enumerate(params.traces, start=1):
        with open(os.path.join(cfg.out, f"cell_traces_j{j}.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["x", "w1", "dw1_dy2", "w2", "pi", "dw1_dy1"])
            xs = np.arange(tr.nx) * tr.dx
            for k in range(tr.nx):
                w.writerow([repr(float(xs[k])), *(repr(float(a[k])) for a in
                                                  (tr.w1, tr.dw1_dy2, tr.w2, tr.pi, tr.dw1_dy1))])


def cmd_effective_params(args):
    cfg = _config(args)
    params = effective_parameters(cfg)
    params.write(os.path.join(cfg.out, PARAMS_FILE))
    _write_traces(cfg, params)
    print(json.dumps(params.document()["flags"], sort_keys=True))
    return 0


def _macro_report(sol, params):
    tr = sol.interface_traces()
    h = sol.ff_grid.dx
    return {"mode": sol.mode, "permeability": params.K.as_dict(),
            "boundary_layer": params.constants.as_dict() if sol.mode == "new" else None,
            "conservation": conservation_summary(sol),
            "interface_flux": {"normal": float(tr["v2"].sum() * h),
                               "tangential": float(np.asarray(tr["v1_ff"])[:sol.ff_grid.nx].sum() * h)},
            "interface_y": sol.ff_grid.origin[1]}


def cmd_run_macro(args):
    cfg = _config(args)
    params = _load_params(cfg)
    sol = run_macro(cfg, params, interface_conditions(cfg, params))
    tag = sol.mode
    write_field_csv(os.path.join(cfg.out, f"macro_{tag}_ff.csv"), sol.ff_grid, sol.ff)
    with open(os.path.join(cfg.out, f"macro_{tag}_pm.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["i", "j", "x", "y", "p"])
        X, Y = sol.pm_grid.p_coords()
        for (j, i), p in np.ndenumerate(sol.pm_pressure):
            w.writerow([i, j, repr(float(X[j, i])), repr(float(Y[j, i])), repr(float(p))])
    os.makedirs(os.path.join(cfg.out, "profiles"), exist_ok=True)
    for q, axis in cfg.case_spec().axes():
        extract_profile(sol, None, axis, q).to_csv(
            os.path.join(cfg.out, "profiles", f"{q}_x1_{axis.x1:g}__{tag}.csv"))
    report = _macro_report(sol, params)
    _dump(os.path.join(cfg.out, "report.json"), report)
    print(json.dumps(report["conservation"]))
    return 0


def cmd_run_dns(args):
    cfg = _config(args)
    t = time.time()
    ref = run_reference(cfg)
    write_field_csv(os.path.join(cfg.out, "dns_average.csv"), ref.grid, ref.field)
    os.makedirs(os.path.join(cfg.out, "profiles"), exist_ok=True)
    for q, axis in cfg.case_spec().axes():
        extract_profile(ref.field, ref.grid, axis, q).to_csv(
            os.path.join(cfg.out, "profiles", f"{q}_x1_{axis.x1:g}__dns.csv"))
    _dump(os.path.join(cfg.out, "report.json"),
          {"shifts": list(ref.shifts), "seconds": time.time() - t,
           "residuals": [r.relative_residual for r in ref.reports]})
    return 0


def _plot_dir(out):
    groups = {}
    for path in sorted(glob.glob(os.path.join(out, "profiles", "*__*.csv"))):
        key, model = os.path.basename(path)[:-4].split("__", 1)
        with open(path) as f:
            rows = list(csv.reader(f))
        data = np.array(rows[1:], float) if len(rows) > 1 else np.zeros((0, 2))
        groups.setdefault(key, {})[model] = data
    os.makedirs(os.path.join(out, "plots"), exist_ok=True)
    written = []
    for key, models in groups.items():
        order = [m for m in MODEL_ORDER if m in models] + sorted(set(models) - set(MODEL_ORDER))
        series = [(m, models[m][:, 0], models[m][:, 1]) for m in order]
        path = os.path.join(out, "plots", f"{key}.svg")
        write_chart(path, series, title=key.replace("_x1_", " at x1 = "), xlabel="x2",
                    ylabel=key.split("_")[0], swap_axes=True)
        written.append(path)
    return written


def cmd_plot(args):
    cfg = _config(args)
    written = _plot_dir(cfg.out)
    if not written:
        raise ConfigurationError(f"no profiles found under {cfg.out}/profiles")
    for p in written:
        print(p)
    return 0


def cmd_validate(args):
    cfg = _config(args)
    params = _load_params(cfg)
    res = validate(cfg, params)
    os.makedirs(os.path.join(cfg.out, "profiles"), exist_ok=True)
    for key, group in res["profiles"].items():
        for model, prof in group.items():
            prof.to_csv(os.path.join(cfg.out, "profiles", f"{key}__{model}.csv"))
    report = {"case": cfg.case, "rel_l2": res["table"],
              "conservation": {k: conservation_summary(s) for k, s in res["solutions"].items()}}
    _dump(os.path.join(cfg.out, "report.json"), report)
    if cfg.plots:
        _plot_dir(cfg.out)
    for k, v in res["table"].items():
        print(f"{k:40s} rel_l2 = {v['rel_l2']:.4f}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="porecouple",
                                description="Stokes-Darcy coupling with boundary-layer interface conditions")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--preset", choices=("case1", "case2", "case3"))
        sp.add_argument("--out", help="output directory")

    for name, fn, extra in (
            ("effective-params", cmd_effective_params, ("stripe_l",)),
            ("run-macro", cmd_run_macro, ("mode", "interface", "alpha")),
            ("run-dns", cmd_run_dns, ()),
            ("validate", cmd_validate, ("alpha",)),
            ("plot", cmd_plot, ())):
        sp = sub.add_parser(name)
        common(sp)
        if "mode" in extra:
            sp.add_argument("--mode", choices=("new", "classical"))
            sp.add_argument("--interface", choices=("sigma0", "sigmad"))
        if "alpha" in extra:
            sp.add_argument("--alpha", type=float)
        if "stripe_l" in extra:
            sp.add_argument("--stripe-l", dest="stripe_l", type=int)
        sp.set_defaults(func=fn)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PoreCoupleError as exc:
        code = next((c for t, c in EXIT.items() if isinstance(exc, t)), 1)
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
