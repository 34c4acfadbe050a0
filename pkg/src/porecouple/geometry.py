"""Inclusion shapes, periodic porous layouts, boundary-layer stripes and
interface locations.

Everything downstream is Cartesian, so a shape only has to answer one
question: is a point of the unit cell Y = (0,1)^2 solid or fluid.  Shapes are
described by a level function that is negative inside the solid.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, GeometryError

SOLID_TOL = 1e-9


class InclusionShape:
    """Base class. Subclasses implement ``level(y1, y2)`` (< 0 inside)."""

    def level(self, y1, y2):
        raise NotImplementedError

    def contains(self, y1, y2, tol=SOLID_TOL):
        """Solid indicator on unit-cell coordinates (vectorised)."""
        return self.level(np.asarray(y1, float), np.asarray(y2, float)) <= tol


@dataclass(frozen=True)
class Circle(InclusionShape):
    radius: float
    center: tuple = (0.5, 0.5)

    def __post_init__(self):
        if not 0.0 < self.radius < 0.5:
            raise GeometryError(f"circle radius must lie in (0, 0.5), got {self.radius}")

    def level(self, y1, y2):
        return np.hypot(y1 - self.center[0], y2 - self.center[1]) - self.radius


class Ellipse(InclusionShape):
    """The tilted ellipse used for the anisotropic medium.

    Boundary curve: e(t) = (0.5, 0.5) + cos(pi/4) * (0.2 cos t + 0.4 sin t,
    -0.2 cos t + 0.4 sin t).  Coefficients are fixed; use ``Custom`` for
    anything else.
    """

    center = np.array([0.5, 0.5])

    def __init__(self):
        c = math.cos(0.25 * math.pi)
        self._A = c * np.array([[0.2, 0.4], [-0.2, 0.4]])
        self._Ainv = np.linalg.inv(self._A)

    def __repr__(self):
        return "Ellipse()"

    def __eq__(self, other):
        return isinstance(other, Ellipse)

    def __hash__(self):
        return hash("Ellipse")

    def curve(self, t):
        t = np.asarray(t, float)
        pts = self._A @ np.vstack([np.cos(t), np.sin(t)])
        return self.center[0] + pts[0], self.center[1] + pts[1]

    def level(self, y1, y2):
        d1 = y1 - self.center[0]
        d2 = y2 - self.center[1]
        a = self._Ainv
        z1 = a[0, 0] * d1 + a[0, 1] * d2
        z2 = a[1, 0] * d1 + a[1, 1] * d2
        return np.hypot(z1, z2) - 1.0


class Custom(InclusionShape):
    """Shape given by a user level/signed-distance callback (negative = solid)."""

    def __init__(self, level_fn, name="custom"):
        self._fn = level_fn
        self.name = name

    def __repr__(self):
        return f"Custom({self.name!r})"

    def level(self, y1, y2):
        return np.asarray(self._fn(y1, y2), float)


def check_shape(shape, n_samples=360):
    """Raise GeometryError unless the solid sits strictly inside (0,1)^2."""
    if isinstance(shape, Ellipse):
        t = np.linspace(0.0, 2 * math.pi, max(n_samples, 360), endpoint=False)
        e1, e2 = shape.curve(t)
        if not (np.all((e1 > 0) & (e1 < 1)) and np.all((e2 > 0) & (e2 < 1))):
            raise GeometryError("ellipse leaves the unit cell")
        return
    s = (np.arange(n_samples) + 0.5) / n_samples
    edge = np.concatenate([s, s, np.zeros_like(s), np.ones_like(s)])
    other = np.concatenate([np.zeros_like(s), np.ones_like(s), s, s])
    if np.any(shape.contains(edge, other)) or np.any(shape.contains(other, edge)):
        raise GeometryError(f"{shape!r} touches the unit-cell boundary")


class UnitCellGeometry:
    """Unit cell Y = (0,1)^2 split into fluid part and the solid inclusion."""

    def __init__(self, shape, check=True, n_check=128):
        self.shape = shape
        if check:
            check_shape(shape)
            self._check_connected(n_check)

    def is_fluid(self, y1, y2):
        return ~self.shape.contains(y1, y2)

    def is_solid(self, y1, y2):
        return self.shape.contains(y1, y2)

    def porosity(self, n=512):
        s = (np.arange(n) + 0.5) / n
        Y1, Y2 = np.meshgrid(s, s)
        return float(np.mean(self.is_fluid(Y1, Y2)))

    def _check_connected(self, n):
        from scipy import ndimage

        s = (np.arange(n) + 0.5) / n
        Y1, Y2 = np.meshgrid(s, s)
        fluid = self.is_fluid(Y1, Y2)
        # tile 2x2 so that periodic connections are seen as ordinary ones
        labels, nlab = ndimage.label(np.tile(fluid, (2, 2)))
        if nlab == 0:
            raise GeometryError("unit cell has no fluid")
        core = labels[:n, :n][fluid]
        if np.unique(core).size != 1:
            raise GeometryError("fluid part of the unit cell is not connected")
        if not (fluid[0].any() and fluid[-1].any() and fluid[:, 0].any() and fluid[:, -1].any()):
            raise GeometryError("fluid part does not reach every cell edge")


@dataclass(frozen=True)
class PorousLayout:
    """Periodic arrangement of ``n_cols x n_rows`` scaled unit cells.

    The porous slab is (0, n_cols*eps) x (-n_rows*eps, 0); the interface
    Sigma_0 is the line x2 = 0.  ``horizontal_shift`` moves every inclusion by
    ``shift * eps`` to the right.
    """

    n_cols: int
    n_rows: int
    epsilon: float
    horizontal_shift: float = 0.0

    def __post_init__(self):
        if self.n_cols < 1 or self.n_rows < 1 or self.epsilon <= 0:
            raise GeometryError("layout needs positive counts and epsilon")
        if not 0.0 <= self.horizontal_shift < 1.0:
            raise GeometryError("horizontal_shift must lie in [0, 1)")

    @property
    def width(self):
        return self.n_cols * self.epsilon

    @property
    def depth(self):
        return self.n_rows * self.epsilon

    def shifted(self, shift):
        return PorousLayout(self.n_cols, self.n_rows, self.epsilon, shift)

    def to_cell(self, x1, x2):
        """Fold macroscale points into unit-cell coordinates."""
        y1 = np.mod(np.asarray(x1, float) / self.epsilon - self.horizontal_shift, 1.0)
        y2 = np.mod(np.asarray(x2, float) / self.epsilon, 1.0)
        return y1, y2

    def in_slab(self, x1, x2, tol=1e-12):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        return (x1 >= -tol) & (x1 <= self.width + tol) & (x2 >= -self.depth - tol) & (x2 <= tol)


def is_solid(p, layout, shape):
    """True iff macroscale point ``p`` lies in an inclusion of ``layout``."""
    x1, x2 = float(p[0]), float(p[1])
    if not layout.in_slab(x1, x2):
        raise DomainError(f"point {p} lies outside the porous slab")
    y1, y2 = layout.to_cell(x1, x2)
    return bool(shape.contains(y1, y2))


def solid_indicator(layout, shape):
    """Vectorised solid predicate over the whole plane (False outside the slab)."""

    def solid(x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        y1, y2 = layout.to_cell(x1, x2)
        return layout.in_slab(x1, x2) & (x2 < 0) & shape.contains(y1, y2)

    return solid


class Sigma0:
    """Interface on top of the periodicity cells (x2 = 0)."""

    def __repr__(self):
        return "Sigma0"


class SigmaD:
    """Interface touching the top of the first row of inclusions."""

    def __repr__(self):
        return "SigmaD"


def _top_of_solid(shape, y1, tol=1e-12):
    """Largest y2 in (0,1) with (y1, y2) solid, or -inf if the line misses."""
    ys = np.linspace(1.0, 0.0, 2001)
    hit = np.nonzero(shape.contains(np.full_like(ys, y1), ys, tol=0.0))[0]
    if hit.size == 0:
        return -np.inf
    k = hit[0]
    lo, hi = ys[k], ys[k - 1]  # lo solid, hi fluid
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if shape.contains(y1, mid, tol=0.0):
            lo = mid
        else:
            hi = mid
    return lo


def top_of_inclusion(shape, n_lines=721):
    """Maximal solid y2 inside the unit cell, found by bisection along
    vertical lines followed by a bounded 1-D maximisation over y1."""
    xs = np.linspace(0.0, 1.0, n_lines)
    tops = np.array([_top_of_solid(shape, x) for x in xs])
    k = int(np.argmax(tops))
    if not np.isfinite(tops[k]):
        raise GeometryError("shape has no solid part")
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, n_lines - 1)]
    res = minimize_scalar(lambda x: -_top_of_solid(shape, x), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    return max(tops[k], -res.fun)


def resolve_interface(loc, layout, shape):
    """Macroscale x2-coordinate of an interface location."""
    if isinstance(loc, Sigma0) or loc is Sigma0:
        return 0.0
    if isinstance(loc, SigmaD) or loc is SigmaD:
        return -layout.epsilon * (1.0 - top_of_inclusion(shape))
    raise GeometryError(f"unknown interface location {loc!r}")


@dataclass(frozen=True)
class StripeSpec:
    """Cut-off boundary-layer stripe (0,1) x (-l, l) with the interface S at
    y2 = 0; inclusions only below S."""

    geometry: UnitCellGeometry
    l: int = 4

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 2:
            raise GeometryError("stripe half-height l must be an integer >= 2")


@dataclass(frozen=True)
class Stripe:
    spec: StripeSpec
    interface_y: float = 0.0

    @property
    def bounds(self):
        return (0.0, 1.0, -float(self.spec.l), float(self.spec.l))

    def is_solid(self, y1, y2):
        y1 = np.asarray(y1, float)
        y2 = np.asarray(y2, float)
        inside = self.spec.geometry.is_solid(np.mod(y1, 1.0), np.mod(y2, 1.0))
        return (y2 < 0) & inside

    def is_fluid(self, y1, y2):
        return ~self.is_solid(y1, y2)


def build_stripe(spec):
    """Fluid predicate and interface descriptor for the cut-off stripe."""
    return Stripe(spec)
