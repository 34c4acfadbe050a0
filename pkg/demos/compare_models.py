"""Compare the three macroscale models against the averaged pore-scale reference.

    python3 demos/compare_models.py case2 [out_dir]

Writes profile CSVs and SVG overlays under out_dir and prints the rel_l2 table.
Set PORECOUPLE_WORKERS to solve ensemble samples in parallel.
"""

import os
import sys

from porecouple.cases import RunConfig
from porecouple.cli import _plot_dir
from porecouple.pipeline import effective_parameters, validate


def main(case="case2", out="demo_out"):
    cfg = RunConfig.for_preset(case, out=out)
    params = effective_parameters(cfg)
    res = validate(cfg, params)
    os.makedirs(os.path.join(out, "profiles"), exist_ok=True)
    for key, group in res["profiles"].items():
        for model, prof in group.items():
            prof.to_csv(os.path.join(out, "profiles", f"{key}__{model}.csv"))
    _plot_dir(out)
    models = ("new", "classical-sigma0", "classical-sigmad")
    print(f"{'profile':14s}" + "".join(f"{m:>20s}" for m in models))
    for key in res["profiles"]:
        print(f"{key:14s}" + "".join(f"{res['table'][f'{key}/{m}']['rel_l2']:20.4f}" for m in models))


if __name__ == "__main__":
    main(*sys.argv[1:3])
