"""Boundary-layer problems on the cut-off stripe (0,1) x (-l, l).

Two families are solved, both Stokes problems with prescribed jumps across
S = (0,1) x {0}:

* ``t``:      [[t]] = 0,               [[(grad t - s I) e2]] = e1
* ``beta^j``: [[beta]] = k_2j e2 - w^j, [[(grad beta - omega I) e2]] = -(grad w^j - pi^j) e2

Truncation: zero velocity at y2 = -l, symmetry (d u/d y2 = 0, v = 0) at
y2 = +l, pressure normalised on the deepest fluid row.  All three problems
share one matrix.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ConfigurationError, DecayError
from .geometry import StripeSpec, build_stripe
from .grid import build_grid, discrete_divergence
from .stokes import BoundarySpec, Dirichlet, JumpData, Periodic, Symmetry, assemble_stokes, solve_systems

PLATEAU_TOL = 1e-3


@dataclass
class BoundaryLayerSolution:
    kind: str  # "t", "beta1" or "beta2"
    grid: object
    field: object
    jump: JumpData
    report: object = None

    def divergence(self):
        """Discrete divergence with the lifted normal velocity above S."""
        g = self.grid
        div = discrete_divergence(g, self.field)
        jS = g.interface_row
        div[jS] += np.where(g.cell_mask[jS], self.jump.g2 / g.dy, 0.0) * -1.0
        return div

    # y1-averages -------------------------------------------------------
    def mean_u(self):
        g = self.grid
        return self.field.u[:, :g.nx].mean(axis=1)

    def mean_p(self):
        return self.field.p.mean(axis=1)

    def first_row_values(self):
        """(int u(.,+0), int p(.,+0)) from the first row above S."""
        jS = self.grid.interface_row
        return float(self.mean_u()[jS]), float(self.mean_p()[jS])

    def plateau_values(self, y=None):
        g = self.grid
        l = -g.origin[1]
        y = 0.5 * l if y is None else y
        j = int(np.clip(round((y - g.origin[1]) / g.dy - 0.5), 0, g.ny - 1))
        return float(self.mean_u()[j]), float(self.mean_p()[j])

    def row_max(self, y):
        """max |velocity| over the u-row nearest y and the v-row nearest y."""
        g = self.grid
        ju = int(np.clip(round((y - g.origin[1]) / g.dy - 0.5), 0, g.ny - 1))
        jv = int(np.clip(round((y - g.origin[1]) / g.dy), 0, g.ny))
        return float(max(np.abs(self.field.u[ju]).max(), np.abs(self.field.v[jv]).max()))


@dataclass
class BoundaryLayerConstants:
    N1_bl: float
    Ns_bl: float
    M1_bl: tuple
    Momega_bl: tuple
    l_used: int
    decay_gamma_estimate: float
    resolution: int = 0
    plateau_check: dict = field(default_factory=dict)

    # second components vanish by construction
    N2_bl = 0.0
    M2_bl = (0.0, 0.0)

    def as_dict(self):
        return {"N1_bl": self.N1_bl, "Ns_bl": self.Ns_bl,
                "M1_bl_1": self.M1_bl[0], "M1_bl_2": self.M1_bl[1],
                "Momega_bl_1": self.Momega_bl[0], "Momega_bl_2": self.Momega_bl[1],
                "l": self.l_used, "resolution": self.resolution,
                "decay_gamma_estimate": self.decay_gamma_estimate}

    def values(self):
        return {"N1_bl": self.N1_bl, "Ns_bl": self.Ns_bl, "M1_bl_1": self.M1_bl[0],
                "M1_bl_2": self.M1_bl[1], "Momega_bl_1": self.Momega_bl[0],
                "Momega_bl_2": self.Momega_bl[1]}

    @classmethod
    def zeros(cls):
        return cls(0.0, 0.0, (0.0, 0.0), (0.0, 0.0), 0, float("nan"))


def stripe_grid(spec, resolution):
    stripe = build_stripe(spec)
    l = float(spec.l)
    return build_grid((0.0, 1.0, -l, l), resolution, geometry=stripe.is_solid,
                      periodic_x=True, interface_y=0.0)


def _bc(jump):
    return BoundarySpec(Periodic(), Periodic(), Dirichlet(), Symmetry(), jump=jump)


def _deepest_row(grid):
    rows = np.nonzero(grid.cell_mask.any(axis=1))[0]
    sel = np.zeros_like(grid.cell_mask)
    sel[rows[0]] = grid.cell_mask[rows[0]]
    return sel


def t_jump(nx):
    jd = JumpData.zeros(nx)
    jd.h1 = np.ones(nx)
    return jd


def beta_jump(traces, k2j):
    return JumpData(g1=-traces.w1, g2=k2j - traces.w2, h1=-traces.dw1_dy2,
                    h2=traces.dw1_dy1 + traces.pi)


def _solve(spec, resolution, jumps, kinds):
    grid = stripe_grid(spec, resolution)
    for jd in jumps:
        if np.shape(jd.g1) != (grid.nx,):
            raise ConfigurationError("trace resolution does not match the stripe grid")
    systems = [assemble_stokes(grid, _bc(jd)) for jd in jumps]
    res = solve_systems(systems, gauge_cells=_deepest_row(grid))
    return [BoundaryLayerSolution(k, grid, r.field, jd, r.report)
            for k, jd, r in zip(kinds, jumps, res)]


def solve_t_bl(spec, resolution):
    nx = int(round(resolution))
    return _solve(spec, resolution, [t_jump(nx)], ["t"])[0]


def solve_beta_bl(spec, resolution, j, traces, k2j):
    return _solve(spec, resolution, [beta_jump(traces, k2j)], [f"beta{j}"])[0]


def solve_all(spec, resolution, traces, K):
    """t, beta^1 and beta^2 with one factorisation.  ``traces`` = (tr1, tr2)."""
    nx = int(round(resolution))
    jumps = [t_jump(nx), beta_jump(traces[0], K.k21), beta_jump(traces[1], K.k22)]
    return _solve(spec, resolution, jumps, ["t", "beta1", "beta2"])


def decay_profile(sol, depths=(1, 2, 3)):
    return [sol.row_max(-float(m)) for m in depths]


def estimate_gamma(sol, depths=(1, 2, 3)):
    r = np.array(decay_profile(sol, depths))
    r = np.maximum(r, 1e-300)
    slopes = -np.diff(np.log(r)) / np.diff(np.asarray(depths, float))
    return float(np.mean(slopes))


def extract_constants(t_sol, beta_sols, check=True):
    """Constants from first-row quadrature, cross-checked at y2 = l/2."""
    sols = [t_sol] + list(beta_sols)
    g = t_sol.grid
    for s in sols:
        if s.grid.cell_mask.shape != g.cell_mask.shape:
            raise ConfigurationError("boundary-layer solutions live on different grids")
    first = [s.first_row_values() for s in sols]
    plateau = [s.plateau_values() for s in sols]
    # constants that vanish by symmetry are compared against the overall scale
    floor = max(1e-8 * max(abs(x) for pair in first for x in pair), 1e-300)
    disagreement = 0.0
    for (u0, p0), (u1, p1) in zip(first, plateau):
        for a, b in ((u0, u1), (p0, p1)):
            disagreement = max(disagreement, abs(a - b) / max(abs(a), floor))
    if check and disagreement > PLATEAU_TOL:
        raise DecayError(f"first-row and plateau constants disagree by {disagreement:.2e}; "
                         "enlarge the stripe or refine the grid")
    (N1, Ns), (M11, Mw1), (M12, Mw2) = first
    return BoundaryLayerConstants(
        N1_bl=N1, Ns_bl=Ns, M1_bl=(M11, M12), Momega_bl=(Mw1, Mw2), l_used=int(round(-g.origin[1])),
        decay_gamma_estimate=estimate_gamma(t_sol), resolution=int(round(1 / g.dx)),
        plateau_check={"max_relative_disagreement": disagreement})


def compute_constants(geometry, resolution, traces, K, l=4):
    spec = StripeSpec(geometry, l)
    sols = solve_all(spec, resolution, traces, K)
    return extract_constants(sols[0], sols[1:]), sols


def constants_close(a, b, rel=1e-5, floor=1e-12):
    """Per-constant comparison |a - b| <= rel |a| + floor."""
    out = {}
    for k, va in a.values().items():
        vb = b.values()[k]
        out[k] = (abs(va - vb), abs(va - vb) <= rel * abs(va) + floor)
    return out
