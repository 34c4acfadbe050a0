"""Periodic unit-cell Stokes problems and the permeability tensor.

For j = 1, 2 the cell problem reads  -lap(w^j) + grad(pi^j) = e_j  in Y_f,
div w^j = 0, w^j = 0 on the inclusion, both periodic, pi^j of zero mean.
The permeability is k_ij = integral of w_i^j over Y_f.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ConfigurationError, GeometryError
from .grid import StokesField, build_grid
from .stokes import BoundarySpec, Periodic, assemble_stokes, solve_systems

MIN_RESOLUTION = 32


@dataclass
class CellSolution:
    j: int
    grid: object
    w: StokesField
    report: object = None

    @property
    def pi(self):
        return self.w.p

    def integral(self):
        """(int w_1, int w_2) by midpoint sums over each periodic face set."""
        g = self.grid
        a = g.dx * g.dy
        return float(self.w.u[:, :g.nx].sum() * a), float(self.w.v[:g.ny].sum() * a)


@dataclass(frozen=True)
class PermeabilityTensor:
    k11: float
    k12: float
    k21: float
    k22: float
    epsilon: float = 1.0

    @property
    def matrix(self):
        return np.array([[self.k11, self.k12], [self.k21, self.k22]])

    @property
    def scaled(self):
        """K^eps = eps^2 K."""
        return self.epsilon**2 * self.matrix

    def with_epsilon(self, eps):
        return PermeabilityTensor(self.k11, self.k12, self.k21, self.k22, eps)

    def eigenvalues(self):
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.T))

    def symmetry_defect(self):
        return abs(self.k12 - self.k21) / max(abs(self.k11), abs(self.k22))

    def is_positive_definite(self):
        return bool(np.all(self.eigenvalues() > 0))

    def as_dict(self):
        return {"k11": self.k11, "k12": self.k12, "k21": self.k21, "k22": self.k22,
                "epsilon": self.epsilon, "K_eps": self.scaled.tolist()}


def cell_grid(geometry, resolution):
    if resolution < MIN_RESOLUTION:
        raise ConfigurationError(f"cell problems need resolution >= {MIN_RESOLUTION}")
    g = build_grid((0.0, 1.0, 0.0, 1.0), resolution, geometry=geometry.is_solid,
                   periodic_x=True, periodic_y=True)
    _check_discrete_cell(g.cell_mask)
    return g


def _check_discrete_cell(fluid):
    if fluid.all():
        raise GeometryError("unit cell has no solid: the periodic cell problem is singular")
    if not fluid.any():
        raise GeometryError("unit cell has no fluid")
    n0, n1 = fluid.shape
    labels, nlab = ndimage.label(np.tile(fluid, (3, 3)))
    core = labels[n0:2 * n0, n1:2 * n1][fluid]
    if np.unique(core).size != 1:
        raise GeometryError("fluid part of the discretised cell is not connected")


def _systems(grid, js):
    bc = BoundarySpec(Periodic(), Periodic(), Periodic(), Periodic())
    forces = {1: (1.0, 0.0), 2: (0.0, 1.0)}
    return [assemble_stokes(grid, bc, forces[j]) for j in js]


def solve_cell_problem(geometry, resolution, j):
    """Solve the cell problem with body force e_j (j = 1 or 2)."""
    if j not in (1, 2):
        raise ConfigurationError("j must be 1 or 2")
    return solve_cell_problems(geometry, resolution, (j,))[0]


def solve_cell_problems(geometry, resolution, js=(1, 2)):
    """Both cell problems share one matrix, so they share one factorisation."""
    grid = cell_grid(geometry, resolution)
    res = solve_systems(_systems(grid, js))
    return [CellSolution(j, grid, r.field, r.report) for j, r in zip(js, res)]


def permeability(sol1, sol2, epsilon=1.0):
    """k_ij = int w_i^j from the solutions for j = 1 and j = 2."""
    if sol1.grid.cell_mask.shape != sol2.grid.cell_mask.shape:
        raise ConfigurationError("cell solutions live on different grids")
    (k11, k21), (k12, k22) = sol1.integral(), sol2.integral()
    return PermeabilityTensor(k11, k12, k21, k22, epsilon)


@dataclass
class Traces:
    """Cell-solution traces on the lower/upper cell edge (y2 = 0 = 1).

    ``w1``, ``dw1_dy2`` are sampled at u-face abscissae (i = 0..nx-1);
    ``w2``, ``pi`` and ``dw1_dy1`` at cell-centre abscissae.
    """

    w1: np.ndarray
    w2: np.ndarray
    dw1_dy2: np.ndarray
    dw1_dy1: np.ndarray
    pi: np.ndarray
    dx: float

    @property
    def nx(self):
        return self.w1.size


def interface_traces(sol):
    """Second-order traces on the cell edge.

    The edge is interior to the periodic cell, so values are obtained by
    centred interpolation across it; w_2 lives on the edge already.
    """
    g = sol.grid
    u, v, p = sol.w.u[:, :g.nx], sol.w.v, sol.w.p
    w1 = 0.5 * (u[0] + u[-1])
    dw1_dy2 = (u[0] - u[-1]) / g.dy
    dw1_dy1 = (np.roll(w1, -1) - w1) / g.dx
    return Traces(w1=w1, w2=v[0].copy(), dw1_dy2=dw1_dy2, dw1_dy1=dw1_dy1,
                  pi=0.5 * (p[0] + p[-1]), dx=g.dx)
