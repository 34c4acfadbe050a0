"""Monolithic Stokes-Darcy solver.

Free flow: MAC Stokes on Omega_ff = (0, L) x (y_S, top).
Porous medium: cell-centred Darcy  div(-K^eps grad p) = 0  on
(0, L) x (bottom, y_S), full-tensor fluxes with the four-corner stencil for
the mixed derivatives.

Interface unknowns on Sigma (y = y_S):
  v_S  normal velocity, shared by both subdomains (ff v-row 0);
  u_S  tangential ff velocity at u abscissae;
  p_S  Darcy pressure on Sigma at cell-centre abscissae.
Their rows are: a half-cell momentum balance carrying the normal-stress
condition (v_S), the tangential condition (u_S), and Darcy's law for the
normal flux (p_S).
"""

from dataclasses import dataclass, field
from typing import Any
import math

import numpy as np
import scipy.sparse as sp

from .boundary_layers import BoundaryLayerConstants
from .errors import ConfigurationError
from .geometry import Sigma0, SigmaD
from .grid import build_grid, discrete_divergence
from .linalg import attach_mean_zero_gauge, finalize, solve
from .stokes import (BoundarySpec, CoupledInterface, Dirichlet, Periodic, PressureDirichlet,
                     FIXED, FREE, assemble_stokes)


# ------------------------------------------------------------ conditions
@dataclass(frozen=True)
class Classical:
    """Mass balance, normal-force balance and Beavers-Joseph."""

    alpha: float = 1.0
    location: Any = field(default_factory=Sigma0)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigurationError("the Beavers-Joseph parameter must be positive")

    @property
    def tag(self):
        return "classical-sigmad" if isinstance(self.location, SigmaD) else "classical-sigma0"


@dataclass(frozen=True)
class New:
    """Conditions with boundary-layer constants; always placed on Sigma_0."""

    constants: BoundaryLayerConstants

    location = Sigma0()
    tag = "new"


@dataclass(frozen=True)
class NoFlux:
    pass


@dataclass
class MacroBC:
    ff_left: Any = field(default_factory=Periodic)
    ff_right: Any = field(default_factory=Periodic)
    ff_top: Any = field(default_factory=Dirichlet)
    pm_left: Any = field(default_factory=Periodic)
    pm_right: Any = field(default_factory=Periodic)
    pm_bottom: Any = field(default_factory=NoFlux)

    def __post_init__(self):
        if isinstance(self.ff_left, Periodic) != isinstance(self.pm_left, Periodic):
            raise ConfigurationError("both subdomains must be periodic together")

    @property
    def periodic(self):
        return isinstance(self.ff_left, Periodic)

    def has_pressure_condition(self):
        return any(isinstance(s, PressureDirichlet) for s in
                   (self.ff_left, self.ff_right, self.ff_top, self.pm_left, self.pm_right, self.pm_bottom))

    def scaled(self, c):
        """Same boundary table with every datum multiplied by c."""
        def sc(s):
            if isinstance(s, Dirichlet):
                vel = s.velocity
                if callable(vel):
                    return Dirichlet(lambda x, y, f=vel: tuple(c * np.asarray(a) for a in f(x, y)))
                return Dirichlet(tuple(c * a for a in vel))
            if isinstance(s, PressureDirichlet):
                pr = s.pressure
                if callable(pr):
                    return PressureDirichlet(lambda x, y, f=pr: c * np.asarray(f(x, y)))
                return PressureDirichlet(c * pr)
            return s
        return MacroBC(*(sc(s) for s in (self.ff_left, self.ff_right, self.ff_top,
                                          self.pm_left, self.pm_right, self.pm_bottom)))


# ----------------------------------------------------------- expressions
class Expr:
    """Sparse affine expression sum_k c_k x_k + const."""

    __slots__ = ("t", "c")

    def __init__(self, terms=None, const=0.0):
        self.t = dict(terms or {})
        self.c = float(const)

    @staticmethod
    def var(k, coef=1.0):
        return Expr({int(k): coef})

    def __add__(self, o):
        r = Expr(self.t, self.c)
        if isinstance(o, Expr):
            for k, v in o.t.items():
                r.t[k] = r.t.get(k, 0.0) + v
            r.c += o.c
        else:
            r.c += float(o)
        return r

    __radd__ = __add__

    def __sub__(self, o):
        return self + (-1.0) * o

    def __rsub__(self, o):
        return (-1.0) * self + o

    def __mul__(self, a):
        return Expr({k: a * v for k, v in self.t.items()}, a * self.c)

    __rmul__ = __mul__

    def __truediv__(self, a):
        return self * (1.0 / a)


def lagrange_derivative_weights(nodes, z=0.0):
    """Weights w_k with f'(z) ~ sum_k w_k f(nodes_k) (exact for degree < len(nodes))."""
    t = np.asarray(nodes, float)
    n = t.size
    V = np.vander(t - z, n, increasing=True).T  # rows: powers 0..n-1
    rhs = np.zeros(n)
    rhs[1] = 1.0
    return np.linalg.solve(V, rhs)


def _deriv(pairs):
    """pairs = [(offset, Expr)] -> Expr of the derivative at offset 0."""
    w = lagrange_derivative_weights([o for o, _ in pairs])
    out = Expr()
    for wk, (_, e) in zip(w, pairs):
        out = out + wk * e
    return out


def _const(v):
    return Expr(const=float(v))


# -------------------------------------------------------------- system
@dataclass
class CoupledSystem:
    ff_grid: Any
    pm_grid: Any
    ics: Any
    bc: MacroBC
    K: Any
    ff: Any  # StokesSystem of the free flow
    us_id: np.ndarray
    pm_id: np.ndarray
    ps_id: np.ndarray
    n: int
    A: Any = None
    rhs: Any = None
    flux_x: Any = None  # (matrix, const) for pm vertical-face fluxes
    flux_y: Any = None
    row_kind: dict = field(default_factory=dict)


@dataclass
class CoupledSolution:
    mode: str
    ff_grid: Any
    pm_grid: Any
    ff: Any
    pm_pressure: np.ndarray
    pm_flux_x: np.ndarray
    pm_flux_y: np.ndarray
    u_sigma: np.ndarray
    p_sigma: np.ndarray
    report: Any
    system: CoupledSystem
    x: np.ndarray

    @property
    def v_sigma(self):
        return self.ff.v[0].copy()

    def pm_divergence(self):
        h = self.pm_grid.dx
        return np.diff(self.pm_flux_x, axis=1) / h + np.diff(self.pm_flux_y, axis=0) / self.pm_grid.dy

    def ff_divergence(self):
        return discrete_divergence(self.ff_grid, self.ff)

    def recompute_pm_velocity(self):
        return darcy_velocity(self.system, self.pm_pressure, self.p_sigma, self.v_sigma)

    def interface_traces(self):
        """Traces on Sigma from both sides."""
        sysm = self.system
        tang_pm = self.pm_flux_x[-1]  # one-sided: first Darcy row below Sigma
        return {
            "x_u": self.ff_grid.x_nodes, "x_c": self.ff_grid.x_centers,
            "v2": self.v_sigma,
            "v1_ff": self.u_sigma, "v1_pm": tang_pm,
            "p_ff": 1.5 * self.ff.p[0] - 0.5 * self.ff.p[1], "p_pm": self.p_sigma,
        }

    def rows_residual(self, kind):
        """|A x - b| restricted to a family of interface rows."""
        rows = self.system.row_kind[kind]
        r = self.system.A @ self.x[:self.system.A.shape[1]] - self.system.rhs
        return np.abs(r[rows])


def build_macro_grids(domain_ff_top, domain_pm_bottom, width, resolution, y_sigma, periodic):
    ff = build_grid((0.0, width, y_sigma, domain_ff_top), resolution, periodic_x=periodic)
    pm = build_grid((0.0, width, domain_pm_bottom, y_sigma), resolution, periodic_x=periodic)
    return ff, pm


def _pm_values(side, x, y):
    return side.values(np.asarray(x, float), np.asarray(y, float))


def assemble_coupled(ff_grid, pm_grid, ics, bc, K):
    """Assemble the monolithic system.  ``K`` carries epsilon (K^eps = eps^2 K)."""
    if (ff_grid.nx != pm_grid.nx or not math.isclose(ff_grid.dx, pm_grid.dx)
            or not math.isclose(ff_grid.dy, pm_grid.dy) or not math.isclose(ff_grid.dx, ff_grid.dy)
            or not math.isclose(ff_grid.origin[0], pm_grid.origin[0])
            or not math.isclose(ff_grid.origin[1], pm_grid.bounds[3], abs_tol=1e-12)):
        raise ConfigurationError("free-flow and porous grids are not conforming on the interface")
    if ff_grid.periodic_x != bc.periodic or pm_grid.periodic_x != bc.periodic:
        raise ConfigurationError("grid periodicity does not match the boundary table")
    if not (ff_grid.cell_mask.all() and pm_grid.cell_mask.all()):
        raise ConfigurationError("macroscale grids must be free of obstacles")
    nx, h = ff_grid.nx, ff_grid.dx
    per = bc.periodic
    eps = K.epsilon
    e2 = eps**2
    k11, k12, k21, k22 = K.k11, K.k12, K.k21, K.k22
    x0, x1 = 0.0, ff_grid.bounds[1]
    yS = ff_grid.origin[1]
    npy = pm_grid.ny
    if npy < 3 or ff_grid.ny < 2:
        raise ConfigurationError("subdomains need at least three cell rows")

    # extra unknowns: u_S, p_pm, p_S
    nuS = nx if per else nx + 1
    probe = assemble_stokes(ff_grid, BoundarySpec(bc.ff_left, bc.ff_right,
                                                  CoupledInterface(np.zeros(nx + 1, np.int64)), bc.ff_top))
    nf = probe.n_flow
    us_id = nf + np.arange(nx + 1)
    if per:
        us_id[nx] = us_id[0]
    pm_id = (nf + nuS + np.arange(npy * nx)).reshape(npy, nx)
    ps_id = nf + nuS + npy * nx + np.arange(nx)
    n = int(ps_id[-1]) + 1
    ffs = assemble_stokes(ff_grid, BoundarySpec(bc.ff_left, bc.ff_right, CoupledInterface(us_id), bc.ff_top),
                          n_extra=n - nf)
    T = ffs.trip
    rhs = ffs.rhs
    row_kind = {}

    def put(row, e):
        ks = np.fromiter(e.t.keys(), np.int64, len(e.t))
        vs = np.fromiter(e.t.values(), float, len(e.t))
        T.add(np.full(ks.size, row), ks, vs)
        rhs[row] -= e.c

    # -- accessors -----------------------------------------------------
    def ff_u(j, i):
        st = ffs.ustate[j, i]
        if st == FREE:
            return Expr.var(ffs.uid[j, i])
        return _const(ffs.ufix[j, i] if st == FIXED else 0.0)

    def ff_v(j, i):
        st = ffs.vstate[j, i]
        if st == FREE:
            return Expr.var(ffs.vid[j, i])
        return _const(ffs.vfix[j, i] if st == FIXED else 0.0)

    def P(j, i):
        return Expr.var(pm_id[j, i % nx] if per else pm_id[j, i])

    def PS(i):
        return Expr.var(ps_id[i % nx] if per else ps_id[i])

    xc = pm_grid.x_centers
    yc = pm_grid.y_centers

    def side_kind(lo):
        return bc.pm_left if lo else bc.pm_right

    # cell-centred x-derivative of the pm pressure in row j (or on Sigma)
    def dpdx_cell(get, i, y):
        if per or 0 < i < nx - 1:
            return (get(i + 1) - get(i - 1)) / (2 * h)
        lo = i == 0
        s = side_kind(lo)
        sgn = 1.0 if lo else -1.0
        if isinstance(s, PressureDirichlet):
            xb = x0 if lo else x1
            pairs = [(-sgn * 0.5 * h, _const(_pm_values(s, xb, y))), (0.0, get(i)), (sgn * h, get(i + int(sgn)))]
        else:
            pairs = [(0.0, get(i)), (sgn * h, get(i + int(sgn))), (2 * sgn * h, get(i + 2 * int(sgn)))]
        return _deriv(pairs)

    # cell-centred y-derivative in column i at row j
    def dpdy_cell(j, i):
        if 0 < j < npy - 1:
            return (P(j + 1, i) - P(j - 1, i)) / (2 * h)
        if j == npy - 1:
            return _deriv([(-h, P(j - 1, i)), (0.0, P(j, i)), (0.5 * h, PS(i))])
        if isinstance(bc.pm_bottom, PressureDirichlet):
            pb = _pm_values(bc.pm_bottom, xc[i], pm_grid.origin[1])
            return _deriv([(-0.5 * h, _const(pb)), (0.0, P(0, i)), (h, P(1, i))])
        return _deriv([(0.0, P(0, i)), (h, P(1, i)), (2 * h, P(2, i))])

    def dpdy_sigma(i):
        return _deriv([(0.0, PS(i)), (-0.5 * h, P(npy - 1, i)), (-1.5 * h, P(npy - 2, i))])

    def dpdx_sigma_at_u(i):
        """x-derivative of p_S at the u abscissa x_i."""
        if per or 0 < i < nx:
            return (PS(i) - PS(i - 1)) / h
        lo = i == 0
        s = side_kind(lo)
        sgn = 1.0 if lo else -1.0
        first = 0 if lo else nx - 1
        step = 1 if lo else -1
        pairs = [(sgn * 0.5 * h, PS(first)), (sgn * 1.5 * h, PS(first + step))]
        if isinstance(s, PressureDirichlet):
            pairs.insert(0, (0.0, _const(_pm_values(s, x0 if lo else x1, yS))))
        else:
            pairs.append((sgn * 2.5 * h, PS(first + 2 * step)))
        return _deriv(pairs)

    def dpdy_sigma_at_u(i):
        if per or 0 < i < nx:
            return 0.5 * (dpdy_sigma(i - 1) + dpdy_sigma(i))
        return dpdy_sigma(0 if i == 0 else nx - 1)

    def dudy(i):
        """d u / d y on Sigma at x_i from u_S and the first two ff rows."""
        return (-8.0 * Expr.var(us_id[i]) + 9.0 * ff_u(0, i) - ff_u(1, i)) / (3 * h)

    # -- pm fluxes -------------------------------------------------------
    fx_rows, fx_const = [], []
    fy_rows, fy_const = [], []

    def flux_x(j, i):
        if per or 0 < i < nx:
            gx = (P(j, i) - P(j, i - 1)) / h
            gy = 0.5 * (dpdy_cell(j, i) + dpdy_cell(j, (i - 1) % nx if per else i - 1))
            return -e2 * (k11 * gx + k12 * gy)
        lo = i == 0
        s = side_kind(lo)
        if not isinstance(s, PressureDirichlet):
            return Expr()
        sgn = 1.0 if lo else -1.0
        xb = x0 if lo else x1
        c = i if lo else i - 1
        gx = _deriv([(0.0, _const(_pm_values(s, xb, yc[j]))), (sgn * 0.5 * h, P(j, c)),
                     (sgn * 1.5 * h, P(j, c + int(sgn)))])
        d = 0.5 * h
        gy = (_pm_values(s, xb, yc[j] + d) - _pm_values(s, xb, yc[j] - d)) / (2 * d)
        return -e2 * (k11 * gx + k12 * _const(gy))

    def flux_y(j, i):
        if j == npy:
            return ff_v(0, i)
        if j == 0:
            s = bc.pm_bottom
            if not isinstance(s, PressureDirichlet):
                return Expr()
            yb = pm_grid.origin[1]
            gy = _deriv([(0.0, _const(_pm_values(s, xc[i], yb))), (0.5 * h, P(0, i)), (1.5 * h, P(1, i))])
            d = 0.5 * h
            gx = (_pm_values(s, xc[i] + d, yb) - _pm_values(s, xc[i] - d, yb)) / (2 * d)
            return -e2 * (k21 * _const(gx) + k22 * gy)
        gy = (P(j, i) - P(j - 1, i)) / h
        gx = 0.5 * (dpdx_cell(lambda q, jj=j: P(jj, q), i, yc[j])
                    + dpdx_cell(lambda q, jj=j - 1: P(jj, q), i, yc[j - 1]))
        return -e2 * (k21 * gx + k22 * gy)

    FX = [[flux_x(j, i) for i in range(nx + 1)] for j in range(npy)]
    FY = [[flux_y(j, i) for i in range(nx)] for j in range(npy + 1)]

    # -- Darcy cell rows (scaled by 1/eps^2) ------------------------------
    rows = []
    for j in range(npy):
        for i in range(nx):
            e = (FX[j][i + 1] - FX[j][i] + FY[j + 1][i] - FY[j][i]) / (h * e2)
            put(pm_id[j, i], e)
            rows.append(pm_id[j, i])
    row_kind["darcy"] = np.array(rows)

    # -- p_S rows: v_S = -(K^eps grad p) . e2 on Sigma ---------------------
    rows = []
    for i in range(nx):
        gx = dpdx_cell(PS, i, yS)
        e = ff_v(0, i) / e2 + (k21 * gx + k22 * dpdy_sigma(i))
        put(ps_id[i], e)
        rows.append(ps_id[i])
    row_kind["darcy_normal"] = np.array(rows)

    # -- u_S rows: tangential condition ----------------------------------
    new = isinstance(ics, New)
    rows = []
    for i in range(nx if per else nx + 1):
        row = us_id[i]
        rows.append(row)
        lateral = None if (per or 0 < i < nx) else (bc.ff_left if i == 0 else bc.ff_right)
        if isinstance(lateral, Dirichlet):
            val = lateral.values(np.array(x0 if i == 0 else x1), np.array(yS))[0]
            put(row, Expr.var(row) - float(val))
            continue
        gx, gy = dpdx_sigma_at_u(i), dpdy_sigma_at_u(i)
        if new:
            c = ics.constants
            e = Expr.var(row) + eps * c.N1_bl * dudy(i) - e2 * (c.M1_bl[0] * gx + c.M1_bl[1] * gy)
        else:
            e = Expr.var(row) - (eps * math.sqrt(k11) / ics.alpha) * dudy(i) + e2 * (k11 * gx + k12 * gy)
        put(row, e)
    row_kind["tangential"] = np.array(rows)

    # -- v_S rows: half-cell momentum balance with the normal-stress condition
    Ns = ics.constants.Ns_bl if new else 0.0
    rows = []
    for i in range(nx):
        row = ffs.vid[0, i]
        rows.append(row)
        vS = Expr.var(row)
        e = (2.0 / h**2) * (vS - ff_v(1, i))
        e = e + (2.0 / h) * (Expr.var(ffs.pid[0, i]) - PS(i))
        dudy_c = 0.5 * (dudy(i) + dudy(i + 1 if not per else (i + 1) % nx))
        e = e + (2.0 * Ns / h) * dudy_c
        # - d2 v_S / dx2 along Sigma
        nbrs = []
        for step, side in ((-1, bc.ff_left), (1, bc.ff_right)):
            k = i + step
            if per:
                nbrs.append((h, Expr.var(ffs.vid[0, k % nx])))
            elif 0 <= k < nx:
                nbrs.append((h, Expr.var(ffs.vid[0, k])))
            elif isinstance(side, Dirichlet):
                xb = x0 if step < 0 else x1
                nbrs.append((0.5 * h, _const(side.values(np.array(xb), np.array(yS))[1])))
            else:
                nbrs.append((h, vS))
        (a, S), (b, N) = nbrs
        e = e - 2.0 * (S / (a * (a + b)) - vS / (a * b) + N / (b * (a + b)))
        put(row, e)
    row_kind["normal_stress"] = np.array(rows)

    A, rhs = ffs.finalize()
    # flux operators for a bit-exact Darcy velocity
    def op(E):
        flat = [e for r in E for e in r]
        r, c, v = [], [], []
        const = np.zeros(len(flat))
        for k, e in enumerate(flat):
            for col, val in e.t.items():
                r.append(k)
                c.append(col)
                v.append(val)
            const[k] = e.c
        M = sp.csr_matrix((v, (r, c)), shape=(len(flat), n))
        return M, const, (len(E), len(E[0]))

    sysm = CoupledSystem(ff_grid, pm_grid, ics, bc, K, ffs, us_id, pm_id, ps_id, n,
                         A=A, rhs=rhs, flux_x=op(FX), flux_y=op(FY), row_kind=row_kind)
    return sysm


def darcy_velocity(sysm, pm_pressure, p_sigma, v_sigma):
    """Face fluxes -K^eps grad p from the pm pressures and v_S."""
    x = np.zeros(sysm.n)
    x[sysm.pm_id] = pm_pressure
    x[sysm.ps_id] = p_sigma
    x[sysm.ff.vid[0]] = v_sigma
    out = []
    for M, c, shape in (sysm.flux_x, sysm.flux_y):
        out.append((M @ x + c).reshape(shape))
    return out[0], out[1]


def solve_coupled(ff_grid, pm_grid, ics, bc, K, tol=1e-10):
    sysm = assemble_coupled(ff_grid, pm_grid, ics, bc, K)
    A, b = sysm.A, sysm.rhs
    gauged = not bc.has_pressure_condition()
    if gauged:
        idx = sysm.ff.pid[ff_grid.cell_mask]
        A, b = attach_mean_zero_gauge(A, b, idx, np.full(idx.size, ff_grid.dx * ff_grid.dy))
    x, report = solve(A, b, tol=tol)
    ffield = sysm.ff.to_field(x)
    pm_p = x[sysm.pm_id]
    p_s = x[sysm.ps_id]
    u_s = x[sysm.us_id]
    fxv, fyv = darcy_velocity(sysm, pm_p, p_s, ffield.v[0])
    return CoupledSolution(ics.tag, ff_grid, pm_grid, ffield, pm_p, fxv, fyv, u_s, p_s, report, sysm, x)

