"""End-to-end stages shared by the CLI, demos and acceptance tests."""

from dataclasses import dataclass
from typing import Any
import json

import numpy as np

from .boundary_layers import BoundaryLayerConstants, compute_constants
from .cell_problems import PermeabilityTensor, interface_traces, permeability, solve_cell_problems
from .dns import EnsembleSpec, compare_profiles, ensemble_average, extract_profile
from .errors import ConfigurationError
from .geometry import SigmaD, resolve_interface
from .macro import Classical, New, build_macro_grids, solve_coupled

ZERO_FLAG = 1e-10  # relative size below which an entry is reported as symmetry-zero


@dataclass
class EffectiveParameters:
    K: PermeabilityTensor
    constants: BoundaryLayerConstants
    shape: str
    traces: Any = None

    def document(self):
        entries = {"k11": self.K.k11, "k12": self.K.k12, "k21": self.K.k21, "k22": self.K.k22}
        entries.update(self.constants.values())
        scale_k = max(abs(self.K.k11), abs(self.K.k22))
        scale_c = max(abs(v) for v in self.constants.values().values())
        flags = {}
        for k, v in entries.items():
            scale = scale_k if k.startswith("k") else scale_c
            flags[k] = "symmetry-zero" if abs(v) <= ZERO_FLAG * scale else "nonzero"
        return {"shape": self.shape, "epsilon": self.K.epsilon,
                "permeability": self.K.as_dict(), "boundary_layer": self.constants.as_dict(),
                "plateau_check": self.constants.plateau_check, "flags": flags}

    def write(self, path):
        with open(path, "w") as f:
            json.dump(self.document(), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def read(cls, path):
        with open(path) as f:
            d = json.load(f)
        try:
            p = d["permeability"]
            b = d["boundary_layer"]
            K = PermeabilityTensor(p["k11"], p["k12"], p["k21"], p["k22"], d["epsilon"])
            C = BoundaryLayerConstants(b["N1_bl"], b["Ns_bl"], (b["M1_bl_1"], b["M1_bl_2"]),
                                       (b["Momega_bl_1"], b["Momega_bl_2"]), b["l"],
                                       b["decay_gamma_estimate"], b["resolution"],
                                       d.get("plateau_check", {}))
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"malformed effective-parameter document: {exc}") from exc
        return cls(K, C, d.get("shape", "?"))


def effective_parameters(cfg):
    geo = cfg.geometry()
    s1, s2 = solve_cell_problems(geo, cfg.cell_resolution)
    K = permeability(s1, s2, cfg.epsilon)
    tr = (interface_traces(s1), interface_traces(s2))
    if cfg.stripe_resolution != cfg.cell_resolution:
        # traces live on the cell grid; the stripe grid must match it
        raise ConfigurationError("stripe_resolution must equal cell_resolution")
    C, _ = compute_constants(geo, cfg.stripe_resolution, tr, K, l=cfg.stripe_l)
    return EffectiveParameters(K, C, cfg.shape, tr)


def interface_conditions(cfg, params, mode=None, interface=None):
    mode = mode or cfg.mode
    if mode == "new":
        return New(params.constants)
    loc = cfg.location() if interface is None else interface
    return Classical(cfg.alpha, loc)


def sigma_y(ics, cfg):
    """Interface ordinate; Sigma_d is snapped to the macroscale grid."""
    if isinstance(ics, Classical) and isinstance(ics.location, SigmaD):
        y = resolve_interface(ics.location, cfg.layout(), cfg.geometry().shape)
        r = cfg.macro_resolution
        return round(y * r) / r, y
    return 0.0, 0.0


def run_macro(cfg, params, ics):
    case = cfg.case_spec()
    y, _ = sigma_y(ics, cfg)
    ff, pm = build_macro_grids(case.ff_top, case.pm_bottom, case.width, cfg.macro_resolution, y,
                               case.macro_bc.periodic)
    return solve_coupled(ff, pm, ics, case.macro_bc, params.K)


def run_reference(cfg, workers=None):
    case = cfg.case_spec()
    domain = (0.0, case.width, case.pm_bottom, case.ff_top)
    return ensemble_average(domain, cfg.layout(), case.shape, case.dns_bc, cfg.dns_resolution,
                            EnsembleSpec(cfg.n_samples), workers=workers)


MODELS = (("new", "new", None), ("classical-sigma0", "classical", "sigma0"),
          ("classical-sigmad", "classical", "sigmad"))


def validate(cfg, params, reference=None, workers=None):
    """Macro runs for all three models against the averaged reference."""
    from .geometry import Sigma0, SigmaD

    case = cfg.case_spec()
    ref = reference if reference is not None else run_reference(cfg, workers)
    sols, profiles, table = {}, {}, {}
    for tag, mode, where in MODELS:
        loc = None if where is None else (SigmaD() if where == "sigmad" else Sigma0())
        ics = interface_conditions(cfg, params, mode, loc)
        sols[tag] = run_macro(cfg, params, ics)
    for q, axis in case.axes():
        key = f"{q}_x1_{axis.x1:g}"
        a = extract_profile(ref.field, ref.grid, axis, q)
        profiles[key] = {"dns": a}
        for tag, s in sols.items():
            b = extract_profile(s, None, axis, q)
            profiles[key][tag] = b
            table[f"{key}/{tag}"] = compare_profiles(a, b)
    return {"solutions": sols, "reference": ref, "profiles": profiles, "table": table}


def conservation_summary(sol):
    return {"max_div_ff": float(np.abs(sol.ff_divergence()).max()),
            "max_div_pm": float(np.abs(sol.pm_divergence()).max()),
            "relative_residual": sol.report.relative_residual}
