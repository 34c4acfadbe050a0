"""Pore-resolved reference runs, ensemble averaging and profile tools."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional
import csv
import os

import numpy as np

from .errors import ConfigurationError, DomainError, PoreCoupleError
from .geometry import solid_indicator
from .grid import StokesField, build_grid
from .stokes import solve_stokes

MIN_CELLS_PER_EPS = 16
MIN_THROAT_CELLS = 3


@dataclass(frozen=True)
class EnsembleSpec:
    n_samples: int = 8
    shifts: Optional[tuple] = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigurationError("ensemble needs at least one sample")
        s = self.resolved()
        if len(set(s)) != len(s):
            raise ConfigurationError("ensemble shifts must be distinct")
        if any(not 0.0 <= x < 1.0 for x in s):
            raise ConfigurationError("shifts must lie in [0, 1)")

    def resolved(self):
        if self.shifts is None:
            return tuple(k / self.n_samples for k in range(self.n_samples))
        if len(self.shifts) != self.n_samples:
            raise ConfigurationError("n_samples does not match the number of shifts")
        return tuple(float(x) for x in self.shifts)


@dataclass
class DnsResult:
    grid: Any
    field: StokesField
    report: Any = None
    shift: float = 0.0


def _min_throat(mask):
    """Shortest fluid run between two solid cells along rows and columns."""
    best = np.inf
    for m in (mask, mask.T):
        for row in m:
            solid = np.nonzero(~row)[0]
            if solid.size >= 2:
                gaps = np.diff(solid) - 1
                gaps = gaps[gaps > 0]
                if gaps.size:
                    best = min(best, gaps.min())
    return best


def check_resolution(layout, shape, resolution):
    n = resolution * layout.epsilon
    if n < MIN_CELLS_PER_EPS - 1e-9 or abs(n - round(n)) > 1e-9:
        raise ConfigurationError(
            f"pore-scale runs need an integer number >= {MIN_CELLS_PER_EPS} of cells per epsilon")
    n = int(round(n))
    c = (np.arange(2 * n) + 0.5) / n
    Y1, Y2 = np.meshgrid(c, c)
    fluid = ~shape.contains(np.mod(Y1, 1.0), np.mod(Y2, 1.0))
    if _min_throat(fluid) < MIN_THROAT_CELLS:
        raise ConfigurationError("pore throats are resolved by fewer than three cells")


def dns_grid(domain, layout, shape, resolution, periodic_x):
    return build_grid(domain, resolution, geometry=solid_indicator(layout, shape), periodic_x=periodic_x)


def default_gauge(grid):
    """Fluid cells above x2 = 0 (mean free-flow pressure)."""
    return grid.cell_mask & (grid.p_coords()[1] > 0)


def run_dns(domain, layout, shape, bc, resolution, method="direct", check=True):
    """One pore-resolved Stokes solve over the whole coupled domain."""
    if check:
        check_resolution(layout, shape, resolution)
    g = dns_grid(domain, layout, shape, resolution, bc.periodic_x)
    gauge = None
    if not bc.has_pressure_condition():
        gauge = default_gauge(g)
        if not gauge.any():
            gauge = g.cell_mask
    res = solve_stokes(g, bc, gauge_cells=gauge, method=method)
    return DnsResult(g, res.field, res.report, layout.horizontal_shift)


@dataclass
class AveragedField:
    grid: Any
    field: StokesField
    fluid_count: np.ndarray
    shifts: tuple
    reports: list = field(default_factory=list)


def _sample(args):
    domain, layout, shape, bc, resolution, s, method = args
    try:
        return run_dns(domain, layout.shifted(s), shape, bc, resolution, method)
    except PoreCoupleError as exc:
        raise type(exc)(f"sample with shift {s}: {exc}") from exc


def workers_from_env(default=1):
    try:
        return max(1, int(os.environ.get("PORECOUPLE_WORKERS", default)))
    except ValueError:
        return default


def ensemble_average(domain, layout, shape, bc, resolution, spec=EnsembleSpec(), method="direct",
                     workers=None):
    """Pointwise sample mean on the shared grid.

    Velocities average with zero inside the solid (superficial mean).  The
    pressure averages over the samples in which the cell is fluid; cells that
    are solid in every sample keep 0.
    """
    shifts = spec.resolved()
    check_resolution(layout, shape, resolution)
    jobs = [(domain, layout, shape, bc, resolution, s, method) for s in shifts]
    workers = workers_from_env() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
            runs = list(ex.map(_sample, jobs))
    else:
        runs = [_sample(j) for j in jobs]
    return average_runs(runs)


def average_runs(runs):
    g = runs[0].grid
    n = len(runs)
    u = sum(r.field.u for r in runs) / n
    v = sum(r.field.v for r in runs) / n
    cnt = sum(r.grid.cell_mask.astype(int) for r in runs)
    psum = sum(np.where(r.grid.cell_mask, r.field.p, 0.0) for r in runs)
    p = np.where(cnt > 0, psum / np.maximum(cnt, 1), 0.0)
    return AveragedField(g, StokesField(u, v, p), cnt, tuple(r.shift for r in runs),
                         [r.report for r in runs])


# ------------------------------------------------------------- profiles
@dataclass(frozen=True)
class AlongX1:
    x2: float


@dataclass(frozen=True)
class AlongX2:
    x1: float


QUANTITIES = ("v1", "v2", "p")


@dataclass
class Profile:
    axis: Any
    quantity: str
    coords: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.coords = np.asarray(self.coords, float)
        self.values = np.asarray(self.values, float)
        if self.coords.shape != self.values.shape or self.coords.ndim != 1:
            raise ConfigurationError("profile coordinates and values must be matching 1-d arrays")
        if np.any(np.diff(self.coords) <= 0):
            raise ConfigurationError("profile coordinates must increase strictly")

    @property
    def samples(self):
        return list(zip(self.coords.tolist(), self.values.tolist()))

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["coordinate", self.quantity])
            for c, v in zip(self.coords, self.values):
                w.writerow([repr(float(c)), repr(float(v))])


def _staggered(grid, fld, quantity):
    """(array, x-coords, y-coords) of one staggered component."""
    if quantity == "v1":
        return fld.u, grid.x_nodes, grid.y_centers
    if quantity == "v2":
        return fld.v, grid.x_centers, grid.y_nodes
    if quantity == "p":
        return fld.p, grid.x_centers, grid.y_centers
    raise ConfigurationError(f"unknown quantity {quantity!r}")


def _interp_weights(xs, x):
    """Index/weight pair for linear interpolation, constant beyond the ends."""
    if x <= xs[0]:
        return 0, 0, 1.0
    if x >= xs[-1]:
        n = len(xs) - 1
        return n, n, 1.0
    k = int(np.searchsorted(xs, x)) - 1
    t = (x - xs[k]) / (xs[k + 1] - xs[k])
    return k, k + 1, 1.0 - t


def _line(arr, xs, ys, axis):
    if isinstance(axis, AlongX2):
        a, b, w = _interp_weights(xs, axis.x1)
        return ys, w * arr[:, a] + (1.0 - w) * arr[:, b]
    if isinstance(axis, AlongX1):
        a, b, w = _interp_weights(ys, axis.x2)
        return xs, w * arr[a] + (1.0 - w) * arr[b]
    raise ConfigurationError("axis must be AlongX1 or AlongX2")


def _check_inside(bounds, axis):
    x0, x1, y0, y1 = bounds
    if isinstance(axis, AlongX2) and not x0 <= axis.x1 <= x1:
        raise DomainError(f"x1 = {axis.x1} lies outside the domain")
    if isinstance(axis, AlongX1) and not y0 <= axis.x2 <= y1:
        raise DomainError(f"x2 = {axis.x2} lies outside the domain")


def extract_profile(fld, grid, axis, quantity):
    """Linear interpolation of a staggered field onto a line, native spacing.

    ``fld`` may also be a coupled macroscale solution (``grid`` is then
    ignored); the two subdomains are stacked along x2.
    """
    from .macro import CoupledSolution

    if isinstance(fld, CoupledSolution):
        return coupled_profile(fld, axis, quantity)
    _check_inside(grid.bounds, axis)
    arr, xs, ys = _staggered(grid, fld, quantity)
    c, v = _line(arr, xs, ys, axis)
    return Profile(axis, quantity, c, v)


def coupled_profile(sol, axis, quantity):
    fg, pg = sol.ff_grid, sol.pm_grid
    x0, x1, _, top = fg.bounds
    bottom = pg.bounds[2]
    _check_inside((x0, x1, bottom, top), axis)
    if quantity == "v1":
        pm = (sol.pm_flux_x, pg.x_nodes, pg.y_centers)
    elif quantity == "v2":
        pm = (sol.pm_flux_y, pg.x_centers, pg.y_nodes)
    elif quantity == "p":
        pm = (sol.pm_pressure, pg.x_centers, pg.y_centers)
    else:
        raise ConfigurationError(f"unknown quantity {quantity!r}")
    ff = _staggered(fg, sol.ff, quantity)
    if isinstance(axis, AlongX1):
        yS = fg.origin[1]
        arr, xs, ys = ff if axis.x2 >= yS else pm
        c, v = _line(arr, xs, ys, axis)
        return Profile(axis, quantity, c, v)
    cp, vp = _line(*pm, axis)
    cf, vf = _line(*ff, axis)
    if quantity == "v2":  # the interface value is shared; keep one copy
        cp, vp = cp[:-1], vp[:-1]
    return Profile(axis, quantity, np.concatenate([cp, cf]), np.concatenate([vp, vf]))


def compare_profiles(a, b):
    """b interpolated onto a's coordinates over the overlap."""
    if type(a.axis) is not type(b.axis) or a.quantity != b.quantity:
        raise ConfigurationError("profiles differ in axis or quantity")
    lo, hi = max(a.coords[0], b.coords[0]), min(a.coords[-1], b.coords[-1])
    tol = 1e-12
    m = (a.coords >= lo - tol) & (a.coords <= hi + tol)
    if hi < lo or not m.any():
        raise DomainError("profiles do not overlap")
    ai = a.values[m]
    bi = np.interp(a.coords[m], b.coords, b.values)
    d = ai - bi
    return {"rel_l2": float(np.linalg.norm(d) / max(np.linalg.norm(ai), 1e-14)),
            "max_abs": float(np.abs(d).max())}
