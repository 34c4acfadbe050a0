"""Staggered (MAC) grids, field containers and CSV export.

Arrays are indexed ``[j, i]`` (row = y, column = x):

* ``p``  lives at cell centres,        shape ``(ny, nx)``
* ``u``  lives on vertical faces,      shape ``(ny, nx + 1)``, at ``(x0 + i dx, y0 + (j + 1/2) dy)``
* ``v``  lives on horizontal faces,   shape ``(ny + 1, nx)``, at ``(x0 + (i + 1/2) dx, y0 + j dy)``
"""

from dataclasses import dataclass, field
import csv

import numpy as np

from .errors import ConfigurationError

_DIV_TOL = 1e-9


def _as_count(length, resolution, what):
    n = length * resolution
    k = int(round(n))
    if k < 1 or abs(n - k) > _DIV_TOL * max(1.0, abs(n)):
        raise ConfigurationError(f"{what} = {length} is not a whole number of cells at resolution {resolution}")
    return k


@dataclass
class StaggeredGrid:
    nx: int
    ny: int
    dx: float
    dy: float
    origin: tuple
    cell_mask: np.ndarray  # True = fluid
    periodic_x: bool = False
    periodic_y: bool = False
    interface_row: int = None  # index of a horizontal face row (v-row)
    u_face_mask: np.ndarray = field(init=False)
    v_face_mask: np.ndarray = field(init=False)

    def __post_init__(self):
        self.cell_mask = np.asarray(self.cell_mask, bool)
        if self.cell_mask.shape != (self.ny, self.nx):
            raise ConfigurationError("cell mask has the wrong shape")
        if self.interface_row is not None and not 0 <= self.interface_row <= self.ny:
            raise ConfigurationError("interface row outside the grid")
        c = self.cell_mask
        u = np.zeros((self.ny, self.nx + 1), bool)
        u[:, 1:-1] = c[:, :-1] | c[:, 1:]
        if self.periodic_x:
            u[:, 0] = u[:, -1] = c[:, 0] | c[:, -1]
        else:
            u[:, 0], u[:, -1] = c[:, 0], c[:, -1]
        v = np.zeros((self.ny + 1, self.nx), bool)
        v[1:-1] = c[:-1] | c[1:]
        if self.periodic_y:
            v[0] = v[-1] = c[0] | c[-1]
        else:
            v[0], v[-1] = c[0], c[-1]
        self.u_face_mask = u
        self.v_face_mask = v
        for a in (self.cell_mask, self.u_face_mask, self.v_face_mask):
            a.setflags(write=False)

    # coordinates -----------------------------------------------------
    @property
    def x_nodes(self):
        return self.origin[0] + self.dx * np.arange(self.nx + 1)

    @property
    def y_nodes(self):
        return self.origin[1] + self.dy * np.arange(self.ny + 1)

    @property
    def x_centers(self):
        return self.origin[0] + self.dx * (np.arange(self.nx) + 0.5)

    @property
    def y_centers(self):
        return self.origin[1] + self.dy * (np.arange(self.ny) + 0.5)

    @property
    def bounds(self):
        x0, y0 = self.origin
        return (x0, x0 + self.nx * self.dx, y0, y0 + self.ny * self.dy)

    def u_coords(self):
        return np.meshgrid(self.x_nodes, self.y_centers)

    def v_coords(self):
        return np.meshgrid(self.x_centers, self.y_nodes)

    def p_coords(self):
        return np.meshgrid(self.x_centers, self.y_centers)

    @property
    def interface_y(self):
        if self.interface_row is None:
            return None
        return self.origin[1] + self.interface_row * self.dy

    @property
    def n_fluid(self):
        return int(self.cell_mask.sum())


@dataclass
class StokesField:
    u: np.ndarray
    v: np.ndarray
    p: np.ndarray

    def copy(self):
        return StokesField(self.u.copy(), self.v.copy(), self.p.copy())

    def __add__(self, other):
        return StokesField(self.u + other.u, self.v + other.v, self.p + other.p)

    def __mul__(self, c):
        return StokesField(c * self.u, c * self.v, c * self.p)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, grid):
        return cls(np.zeros((grid.ny, grid.nx + 1)), np.zeros((grid.ny + 1, grid.nx)),
                   np.zeros((grid.ny, grid.nx)))

    def check_shape(self, grid):
        if (self.u.shape != (grid.ny, grid.nx + 1) or self.v.shape != (grid.ny + 1, grid.nx)
                or self.p.shape != (grid.ny, grid.nx)):
            raise ConfigurationError("field does not match the grid")


def build_grid(domain, resolution, geometry=None, periodic_x=False, periodic_y=False, interface_y=None):
    """Build a uniform staggered grid over ``domain = (x0, x1, y0, y1)``.

    ``geometry`` is an optional vectorised predicate ``solid(x, y)``; cells are
    classified by sampling it at their centres.  Every domain edge and the
    optional ``interface_y`` must fall on a grid line.
    """
    x0, x1, y0, y1 = map(float, domain)
    nx = _as_count(x1 - x0, resolution, "domain width")
    ny = _as_count(y1 - y0, resolution, "domain height")
    h = 1.0 / resolution
    row = None
    if interface_y is not None:
        row = _as_count(interface_y - y0, resolution, "interface offset") if interface_y != y0 else 0
        if not 0 <= row <= ny:
            raise ConfigurationError("interface lies outside the domain")
    mask = np.ones((ny, nx), bool)
    if geometry is not None:
        X, Y = np.meshgrid(x0 + h * (np.arange(nx) + 0.5), y0 + h * (np.arange(ny) + 0.5))
        mask = ~np.asarray(geometry(X, Y), bool)
    return StaggeredGrid(nx, ny, h, h, (x0, y0), mask, periodic_x, periodic_y, row)


def discrete_divergence(grid, fld):
    """(u_E - u_W)/dx + (v_N - v_S)/dy on fluid cells, 0 on solid cells."""
    fld.check_shape(grid)
    div = np.diff(fld.u, axis=1) / grid.dx + np.diff(fld.v, axis=0) / grid.dy
    return np.where(grid.cell_mask, div, 0.0)


def write_field_csv(path, grid, fld):
    """One line per entity: kind, i, j, x, y, value."""
    Xu, Yu = grid.u_coords()
    Xv, Yv = grid.v_coords()
    Xp, Yp = grid.p_coords()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "i", "j", "x", "y", "value"])
        for kind, vals, X, Y in (("u", fld.u, Xu, Yu), ("v", fld.v, Xv, Yv), ("p", fld.p, Xp, Yp)):
            jj, ii = np.indices(vals.shape)
            for row in zip(jj.ravel(), ii.ravel(), X.ravel(), Y.ravel(), vals.ravel()):
                j, i, x, y, val = row
                w.writerow([kind, int(i), int(j), repr(float(x)), repr(float(y)), repr(float(val))])


def read_field_csv(path, grid):
    fld = StokesField.zeros(grid)
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            getattr(fld, rec["kind"])[int(rec["j"]), int(rec["i"])] = float(rec["value"])
    return fld
