"""Steady Stokes equations  -lap(v) + grad(p) = f,  div(v) = 0  on a MAC grid.

Momentum is discretised on free faces, continuity on fluid cells.  The
continuity rows carry ``-div`` so that the interior operator is symmetric.

Wall treatment
  * face between a fluid and a solid cell: fixed value 0 (normal no-slip);
  * tangential neighbour inside the solid: linear ghost ``-u0`` (zero at the
    solid face);
  * Dirichlet domain side: three-point Lagrange stencil through the wall
    value half a cell away (exact for quadratics);
  * symmetry / traction sides: homogeneous Neumann for the tangential
    component;
  * traction (``PressureDirichlet``/``OutflowTraction``): the boundary-normal
    face is an unknown with a half-cell momentum balance carrying p_b.

Interface jump data on a horizontal face row S is imposed by lifting: only
right-hand sides change.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError
from .grid import StokesField, discrete_divergence
from .linalg import attach_mean_zero_gauge, finalize, solve_many

INACTIVE, FIXED, FREE = 0, 1, 2


# ----------------------------------------------------------------- sides
@dataclass(frozen=True)
class Dirichlet:
    """Prescribed velocity; ``velocity`` is a pair or a callable (x, y) -> (u, v)."""

    velocity: Union[tuple, Callable] = (0.0, 0.0)

    def values(self, x, y):
        if callable(self.velocity):
            u, v = self.velocity(x, y)
        else:
            u, v = self.velocity
        return (np.broadcast_to(np.asarray(u, float), np.shape(x)).copy(),
                np.broadcast_to(np.asarray(v, float), np.shape(x)).copy())


@dataclass(frozen=True)
class Periodic:
    pass


@dataclass(frozen=True)
class Symmetry:
    """Zero normal velocity and zero normal derivative of the tangential one."""


@dataclass(frozen=True)
class PressureDirichlet:
    """Traction (grad v - p I) n = -p_b n with p_b a constant or callable (x, y)."""

    pressure: Union[float, Callable] = 0.0

    def values(self, x, y):
        if callable(self.pressure):
            return np.broadcast_to(np.asarray(self.pressure(x, y), float), np.shape(x)).copy()
        return np.full(np.shape(x), float(self.pressure))


@dataclass(frozen=True)
class OutflowTraction(PressureDirichlet):
    """(grad v - p I) n = 0."""

    pressure: float = 0.0


@dataclass(frozen=True, eq=False)
class CoupledInterface:
    """Lower side owned by an external coupling (macroscale model).

    The normal faces on this side become unknowns whose rows are left for the
    caller; the tangential wall value is the external unknown ``ext_index[i]``
    located half a cell below the first u row.
    """

    ext_index: Any = None


@dataclass
class JumpData:
    """Jumps across S (upper minus lower limit).

    ``g1``/``h1`` are sampled at u-face abscissae ``x_i`` (i = 0..nx-1),
    ``g2``/``h2`` at cell-centre abscissae.  ``g`` is the velocity jump and
    ``h`` the jump of (grad v - p I) e2.
    """

    g1: np.ndarray
    g2: np.ndarray
    h1: np.ndarray
    h2: np.ndarray

    @classmethod
    def zeros(cls, nx):
        z = np.zeros(nx)
        return cls(z, z.copy(), z.copy(), z.copy())

    def is_zero(self):
        return not any(np.any(a) for a in (self.g1, self.g2, self.h1, self.h2))


@dataclass
class BoundarySpec:
    left: Any = field(default_factory=Dirichlet)
    right: Any = field(default_factory=Dirichlet)
    bottom: Any = field(default_factory=Dirichlet)
    top: Any = field(default_factory=Dirichlet)
    jump: Optional[JumpData] = None

    def __post_init__(self):
        for a, b in ((self.left, self.right), (self.bottom, self.top)):
            if isinstance(a, Periodic) != isinstance(b, Periodic):
                raise ConfigurationError("periodicity must be set on both opposite sides")
        for s in (self.left, self.right, self.top):
            if isinstance(s, CoupledInterface):
                raise ConfigurationError("a coupled interface is only supported on the bottom side")

    @property
    def periodic_x(self):
        return isinstance(self.left, Periodic)

    @property
    def periodic_y(self):
        return isinstance(self.bottom, Periodic)

    def has_pressure_condition(self):
        return any(isinstance(s, (PressureDirichlet, CoupledInterface))
                   for s in (self.left, self.right, self.bottom, self.top))


# -------------------------------------------------------------- assembly
class _Triplets:
    def __init__(self):
        self.r, self.c, self.v = [], [], []

    def add(self, r, c, v):
        r = np.asarray(r, np.int64).ravel()
        c = np.broadcast_to(np.asarray(c, np.int64), r.shape).ravel()
        v = np.broadcast_to(np.asarray(v, float), r.shape).ravel()
        keep = (c >= 0) & (v != 0.0)
        self.r.append(r[keep])
        self.c.append(c[keep])
        self.v.append(v[keep])

    def matrix(self, n):
        if not self.r:
            return sp.csr_matrix((n, n))
        r, c, v = (np.concatenate(a) for a in (self.r, self.c, self.v))
        return finalize(sp.coo_matrix((v, (r, c)), shape=(n, n)))


def _face_layout(C, periodic_n, lo, hi):
    """Status/value arrays for faces normal to the local i-axis."""
    m, n = C.shape
    Lf = np.zeros((m, n + 1), bool)
    Rf = np.zeros((m, n + 1), bool)
    Lf[:, 1:] = C
    Rf[:, :-1] = C
    if periodic_n:
        Lf[:, 0] = C[:, -1]
        Rf[:, -1] = C[:, 0]
    active = Lf | Rf
    state = np.where(active, FIXED, INACTIVE)
    state[Lf & Rf] = FREE
    if not periodic_n:
        for col, kind in ((0, lo), (n, hi)):
            if isinstance(kind, (PressureDirichlet, CoupledInterface)):
                state[active[:, col], col] = FREE
    return state


@dataclass
class StokesSystem:
    """Assembled Stokes system plus the bookkeeping needed to read it back."""

    grid: Any
    bc: BoundarySpec
    uid: np.ndarray
    vid: np.ndarray
    pid: np.ndarray
    ustate: np.ndarray
    vstate: np.ndarray
    ufix: np.ndarray
    vfix: np.ndarray
    n_flow: int
    n_total: int
    A: Any = None
    rhs: Any = None
    open_rows: Any = None
    trip: Any = None

    @property
    def pressure_indices(self):
        return self.pid[self.pid >= 0]

    def to_field(self, x):
        g = self.grid
        u = np.where(self.ustate == FIXED, self.ufix, 0.0)
        v = np.where(self.vstate == FIXED, self.vfix, 0.0)
        m = self.uid >= 0
        u[m] = x[self.uid[m]]
        m = self.vid >= 0
        v[m] = x[self.vid[m]]
        p = np.zeros((g.ny, g.nx))
        m = self.pid >= 0
        p[m] = x[self.pid[m]]
        return StokesField(u, v, p)

    def finalize(self):
        self.A = self.trip.matrix(self.n_total)
        return self.A, self.rhs


def _momentum(T, rhs, ids, state, fixval, pids, C, dn, dt, periodic_n, periodic_t,
              sides, force, wall_lo, wall_hi, ext_lo, pb_lo, pb_hi, open_mask):
    """Momentum rows of one velocity component in local orientation.

    Arrays have shape (m, n+1) for faces and (m, n) for cells; the local
    i-axis is the component direction.  ``sides`` = (lo_n, hi_n, lo_t, hi_t).
    """
    lo_n, hi_n, lo_t, hi_t = sides
    m, n = C.shape
    ncol = n if periodic_n else n + 1
    J, I = np.nonzero((state[:, :ncol] == FREE) & ~open_mask[:, :ncol])
    rows = ids[J, I]
    diag = np.zeros(J.size)
    b = force[J, I].astype(float).copy()

    # normal direction ------------------------------------------------
    interior = (I > 0) & (I < n) if not periodic_n else np.ones(I.size, bool)
    k = np.nonzero(interior)[0]
    im = (I[k] - 1) % n if periodic_n else I[k] - 1
    ip = I[k] + 1
    diag[k] += 2.0 / dn**2
    coef = np.full(k.size, -1.0 / dn**2)
    for nb in (im, ip):
        st = state[J[k], nb]
        fr = st == FREE
        T.add(rows[k][fr], ids[J[k][fr], nb[fr]], coef[fr])
        fx = st == FIXED
        b[k[fx]] -= coef[fx] * fixval[J[k][fx], nb[fx]]
        ghost = st == INACTIVE
        diag[k[ghost]] += -coef[ghost]  # ghost = -u0
    # pressure gradient (p_i - p_{i-1}) / dn
    cl = (I[k] - 1) % n
    cr = I[k] % n
    T.add(rows[k], pids[J[k], cr], np.full(k.size, 1.0 / dn))
    T.add(rows[k], pids[J[k], cl], np.full(k.size, -1.0 / dn))

    # half-cell rows on traction sides
    for col, kind, sigma, inner, cell, pb in ((0, lo_n, -1.0, 1, 0, pb_lo), (n, hi_n, 1.0, n - 1, n - 1, pb_hi)):
        if periodic_n or not isinstance(kind, PressureDirichlet):
            continue
        k = np.nonzero(I == col)[0]
        if k.size == 0:
            continue
        diag[k] += 2.0 / dn**2
        jn = J[k]
        inn = np.full(k.size, inner)
        st = state[jn, inn]
        fr = st == FREE
        T.add(rows[k][fr], ids[jn[fr], inn[fr]], -2.0 / dn**2)
        fx = st == FIXED
        b[k[fx]] += 2.0 / dn**2 * fixval[jn[fx], inn[fx]]
        T.add(rows[k], pids[jn, cell], np.full(k.size, -sigma * 2.0 / dn))
        b[k] -= sigma * 2.0 / dn * pb[jn]

    # tangential direction: three-point stencil with per-side (dist, idx, self, const)
    sides_data = []
    for step, kind, wall, ext in ((-1, lo_t, wall_lo, ext_lo), (+1, hi_t, wall_hi, None)):
        jn = J + step
        dist = np.full(J.size, dt)
        idx = np.full(J.size, -1, np.int64)
        selfc = np.zeros(J.size)
        const = np.zeros(J.size)
        if periodic_t:
            jn = jn % m
            outside = np.zeros(J.size, bool)
        else:
            outside = (jn < 0) | (jn >= m)
        inside = ~outside
        jj, ii = jn[inside], I[inside]
        st = state[jj, ii]
        sub = np.nonzero(inside)[0]
        idx[sub[st == FREE]] = ids[jj[st == FREE], ii[st == FREE]]
        const[sub[st == FIXED]] = fixval[jj[st == FIXED], ii[st == FIXED]]
        selfc[sub[st == INACTIVE]] = -1.0
        o = np.nonzero(outside)[0]
        if o.size:
            if isinstance(kind, Dirichlet):
                dist[o] = 0.5 * dt
                const[o] = wall[I[o]]
            elif isinstance(kind, CoupledInterface):
                dist[o] = 0.5 * dt
                idx[o] = np.asarray(kind.ext_index, np.int64)[I[o]]
            elif isinstance(kind, (Symmetry, PressureDirichlet)):
                selfc[o] = 1.0
            else:
                raise ConfigurationError(f"unsupported side {kind!r}")
        sides_data.append((dist, idx, selfc, const))
    (a, iS, sS, kS), (bb, iN, sN, kN) = sides_data
    cS = -2.0 / (a * (a + bb))
    cN = -2.0 / (bb * (a + bb))
    c0 = 2.0 / (a * bb)
    diag += c0 + cS * sS + cN * sN
    T.add(rows, iS, cS)
    T.add(rows, iN, cN)
    b -= cS * kS + cN * kN

    T.add(rows, rows, diag)
    np.add.at(rhs, rows, b)


def assemble_stokes(grid, bc, body_force=None, n_extra=0):
    """Assemble the Stokes system; returns a :class:`StokesSystem`.

    ``system.A`` and ``system.rhs`` hold the matrix and right-hand side.
    With a ``CoupledInterface`` bottom, ``n_extra`` unknowns are reserved
    after the flow unknowns and the bottom v rows are left empty for the
    caller (``system.open_rows``); call ``system.finalize()`` afterwards.
    """
    if bc.periodic_x != grid.periodic_x or bc.periodic_y != grid.periodic_y:
        raise ConfigurationError("boundary periodicity does not match the grid")
    if bc.jump is not None and grid.interface_row is None:
        raise ConfigurationError("jump data given but the grid has no interface row")
    nx, ny, dx, dy = grid.nx, grid.ny, grid.dx, grid.dy
    C = grid.cell_mask
    x0, x1, y0, y1 = grid.bounds
    Xu, Yu = grid.u_coords()
    Xv, Yv = grid.v_coords()

    ustate = _face_layout(C, grid.periodic_x, bc.left, bc.right)
    vstate = _face_layout(C.T, grid.periodic_y, bc.bottom, bc.top).T
    ufix = np.zeros(ustate.shape)
    vfix = np.zeros(vstate.shape)
    # Dirichlet data on the normal faces of each side
    for side, col, sl in ((bc.left, 0, np.s_[:, 0]), (bc.right, nx, np.s_[:, nx])):
        if isinstance(side, Dirichlet):
            ufix[sl] = side.values(Xu[sl], Yu[sl])[0]
    for side, sl in ((bc.bottom, np.s_[0, :]), (bc.top, np.s_[ny, :])):
        if isinstance(side, Dirichlet):
            vfix[sl] = side.values(Xv[sl], Yv[sl])[1]
    ufix[ustate != FIXED] = 0.0
    vfix[vstate != FIXED] = 0.0

    # numbering
    uid = np.full(ustate.shape, -1, np.int64)
    vid = np.full(vstate.shape, -1, np.int64)
    pid = np.full(C.shape, -1, np.int64)
    ucols = nx if grid.periodic_x else nx + 1
    vrows = ny if grid.periodic_y else ny + 1
    mu = ustate[:, :ucols] == FREE
    uid[:, :ucols][mu] = np.arange(mu.sum())
    if grid.periodic_x:
        uid[:, nx] = uid[:, 0]
    off = int(mu.sum())
    mv = vstate[:vrows] == FREE
    vid[:vrows][mv] = off + np.arange(mv.sum())
    if grid.periodic_y:
        vid[ny] = vid[0]
    off += int(mv.sum())
    pid[C] = off + np.arange(C.sum())
    n_flow = off + int(C.sum())
    n_total = n_flow + n_extra

    T = _Triplets()
    rhs = np.zeros(n_total)
    fu, fv = _force_arrays(grid, body_force)

    coupled = isinstance(bc.bottom, CoupledInterface)
    open_u = np.zeros(ustate.shape, bool)
    open_v = np.zeros(vstate.shape, bool)
    if coupled:
        open_v[0, :] = vstate[0, :] == FREE

    def wall(side, comp, X, Y):
        if isinstance(side, Dirichlet):
            return side.values(X, Y)[comp]
        return np.zeros(np.shape(X))

    def pres(side, X, Y):
        if isinstance(side, PressureDirichlet):
            return side.values(X, Y)
        return np.zeros(np.shape(X))

    xn, yn, xc, yc = grid.x_nodes, grid.y_nodes, grid.x_centers, grid.y_centers
    ext = bc.bottom.ext_index if coupled else None
    # u: local = global orientation
    _momentum(T, rhs, uid, ustate, ufix, pid, C, dx, dy, grid.periodic_x, grid.periodic_y,
              (bc.left, bc.right, bc.bottom, bc.top), fu,
              wall(bc.bottom, 0, xn, np.full_like(xn, y0)), wall(bc.top, 0, xn, np.full_like(xn, y1)),
              ext, pres(bc.left, np.full_like(yc, x0), yc), pres(bc.right, np.full_like(yc, x1), yc),
              open_u)
    # v: transposed orientation
    _momentum(T, rhs, vid.T, vstate.T, vfix.T, pid.T, C.T, dy, dx, grid.periodic_y, grid.periodic_x,
              (bc.bottom, bc.top, bc.left, bc.right), fv.T,
              wall(bc.left, 1, np.full_like(yn, x0), yn), wall(bc.right, 1, np.full_like(yn, x1), yn),
              None, pres(bc.bottom, xc, np.full_like(xc, y0)), pres(bc.top, xc, np.full_like(xc, y1)),
              open_v.T)

    # continuity: -(u_E - u_W)/dx - (v_N - v_S)/dy = 0
    J, I = np.nonzero(C)
    rows = pid[J, I]
    for ids, st, fix, jj, ii, coef in (
            (uid, ustate, ufix, J, I + 1, -1.0 / dx), (uid, ustate, ufix, J, I, 1.0 / dx),
            (vid, vstate, vfix, J + 1, I, -1.0 / dy), (vid, vstate, vfix, J, I, 1.0 / dy)):
        s = st[jj, ii]
        fr = s == FREE
        T.add(rows[fr], ids[jj[fr], ii[fr]], coef)
        fx = s == FIXED
        np.add.at(rhs, rows[fx], -coef * fix[jj[fx], ii[fx]])

    sysm = StokesSystem(grid, bc, uid, vid, pid, ustate, vstate, ufix, vfix, n_flow, n_total,
                        trip=T, rhs=rhs)
    if bc.jump is not None and not bc.jump.is_zero():
        _apply_jump(sysm, bc.jump)
    if coupled:
        sysm.open_rows = vid[0][open_v[0]]
        return sysm
    sysm.finalize()
    return sysm


def _force_arrays(grid, f):
    fu = np.zeros((grid.ny, grid.nx + 1))
    fv = np.zeros((grid.ny + 1, grid.nx))
    if f is None:
        return fu, fv
    if isinstance(f, StokesField):
        return np.asarray(f.u, float), np.asarray(f.v, float)
    if isinstance(f, tuple) and len(f) == 2 and all(np.ndim(c) == 0 for c in f):
        return fu + f[0], fv + f[1]
    if callable(f):
        Xu, Yu = grid.u_coords()
        Xv, Yv = grid.v_coords()
        return np.asarray(f(Xu, Yu)[0], float) + fu, np.asarray(f(Xv, Yv)[1], float) + fv
    raise ConfigurationError("body force must be None, a pair of constants, a callable or a StokesField")


def _apply_jump(sysm, jd):
    """Lifting of jump data across the face row S (right-hand side only).

    The second-order corrections eliminate the jumps of u_yy and p_y through
    the momentum equation on both sides, so the body force is assumed
    continuous across S (it vanishes in the boundary-layer problems).
    """
    g = sysm.grid
    if not g.periodic_x:
        raise ConfigurationError("jump data requires a laterally periodic grid")
    nx, dx, dy = g.nx, g.dx, g.dy
    jS = g.interface_row
    if not 1 <= jS <= g.ny - 1:
        raise ConfigurationError("interface row must be an interior face row")
    g1, g2, h1, h2 = (np.asarray(a, float) for a in (jd.g1, jd.g2, jd.h1, jd.h2))
    for a in (g1, g2, h1, h2):
        if a.shape != (nx,):
            raise ConfigurationError("jump profiles must have one value per column")
    d2 = lambda a: (np.roll(a, -1) - 2 * a + np.roll(a, 1)) / dx**2
    jump_uyy = -2.0 * d2(g1) - (h2 - np.roll(h2, 1)) / dx  # [[u_yy]] at u abscissae
    rhs = sysm.rhs
    ua, ub = sysm.uid[jS, :nx], sysm.uid[jS - 1, :nx]
    va, vs = sysm.vid[jS + 1], sysm.vid[jS]
    if np.any(ua < 0) or np.any(ub < 0) or np.any(vs < 0) or np.any(va < 0):
        raise ConfigurationError("the interface rows must be free of solid")
    q = jump_uyy * dy**2 / 8.0
    np.add.at(rhs, ua, (g1 - 0.5 * dy * h1 + q) / dy**2)
    np.add.at(rhs, ub, -(g1 + 0.5 * dy * h1 + q) / dy**2)
    np.add.at(rhs, vs, -g2 / dy**2 - h2 / dy + 0.5 * d2(g2))
    np.add.at(rhs, va, g2 / dy**2)
    pa = sysm.pid[jS]
    ok = pa >= 0
    np.add.at(rhs, pa[ok], -g2[ok] / dy)


@dataclass
class StokesResult:
    field: StokesField
    report: Any
    system: StokesSystem
    multiplier: float = 0.0


def default_gauge(grid):
    return np.ones(grid.n_fluid) * grid.dx * grid.dy


def _gauged(sysm, gauge_cells):
    grid = sysm.grid
    if sysm.bc.has_pressure_condition():
        return sysm.A, sysm.rhs, False
    sel = grid.cell_mask if gauge_cells is None else (np.asarray(gauge_cells, bool) & grid.cell_mask)
    idx = sysm.pid[sel]
    A, b = attach_mean_zero_gauge(sysm.A, sysm.rhs, idx, np.full(idx.size, grid.dx * grid.dy))
    return A, b, True


def solve_systems(systems, gauge_cells=None, method="direct", tol=1e-10):
    """Solve assembled systems that share one matrix (different data only)."""
    A0 = systems[0].A
    for s in systems[1:]:
        if s.A.shape != A0.shape or (s.A != A0).nnz:
            raise ConfigurationError("systems passed to solve_systems must share their matrix")
    rhs = []
    for s in systems:
        A, b, gauged = _gauged(s, gauge_cells)
        rhs.append(b)
    sols = solve_many(A, rhs, method=method, tol=tol)
    return [StokesResult(s.to_field(x[:s.n_total]), rep, s, float(x[-1]) if gauged else 0.0)
            for s, (x, rep) in zip(systems, sols)]


def solve_stokes(grid, bc, body_force=None, gauge_cells=None, method="direct", tol=1e-10):
    """Assemble, attach the mean-zero pressure gauge when needed, and solve.

    ``gauge_cells`` optionally restricts the gauge to a boolean cell mask
    (e.g. the deepest fluid row of a boundary-layer stripe).
    """
    return solve_systems([assemble_stokes(grid, bc, body_force)], gauge_cells, method, tol)[0]


def max_divergence(grid, fld):
    return float(np.max(np.abs(discrete_divergence(grid, fld)))) if grid.n_fluid else 0.0
