"""Validation presets and the JSON run configuration."""

from dataclasses import asdict, dataclass, field
from typing import Any
import json
import math

import numpy as np

from .errors import ConfigurationError
from .geometry import Circle, Ellipse, PorousLayout, Sigma0, SigmaD, UnitCellGeometry
from .macro import MacroBC, NoFlux
from .stokes import BoundarySpec, Dirichlet, Periodic, PressureDirichlet, Symmetry
from .dns import AlongX2


def p_b(x, y):
    """Boundary pressure of the non-periodic cases."""
    return 1e-6 - np.asarray(x, float) + 0.0 * np.asarray(y, float)


def inflow(x, y):
    x = np.asarray(x, float)
    return np.sin(np.pi * x) ** 2, np.zeros_like(x + 0.0 * np.asarray(y, float))


# four cross-sections per case: (quantity, x1)
PROFILES = (("v1", 0.1), ("v1", 0.2), ("v2", 0.1), ("p", 0.2))


@dataclass
class CaseSpec:
    name: str
    shape: Any
    macro_bc: MacroBC
    dns_bc: BoundarySpec
    width: float = 1.0
    ff_top: float = 0.5
    pm_bottom: float = -0.5
    profiles: tuple = PROFILES

    def axes(self):
        return [(q, AlongX2(x)) for q, x in self.profiles]


def _case1():
    return CaseSpec("case1", Circle(0.25),
                    MacroBC(ff_top=Dirichlet(inflow)),
                    BoundarySpec(Periodic(), Periodic(), Symmetry(), Dirichlet(inflow)))


def _closed_sides(shape, name):
    pb = PressureDirichlet(p_b)
    return CaseSpec(name, shape,
                    MacroBC(ff_left=Dirichlet(), ff_right=pb, ff_top=pb,
                            pm_left=NoFlux(), pm_right=pb, pm_bottom=NoFlux()),
                    BoundarySpec(Dirichlet(), pb, Symmetry(), pb))


PRESETS = {
    "case1": _case1,
    "case2": lambda: _closed_sides(Circle(0.25), "case2"),
    "case3": lambda: _closed_sides(Ellipse(), "case3"),
}


def preset(name):
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# ------------------------------------------------------------ run config
@dataclass
class RunConfig:
    case: str = "case1"
    shape: str = "circle"
    radius: float = 0.25
    epsilon: float = 0.1
    n_cols: int = 10
    n_rows: int = 5
    cell_resolution: int = 32
    stripe_resolution: int = 32
    stripe_l: int = 4
    macro_resolution: int = 320
    dns_resolution: int = 320
    n_samples: int = 8
    mode: str = "new"
    alpha: float = 1.0
    interface: str = "sigma0"
    out: str = "out"
    plots: bool = True

    def __post_init__(self):
        if self.case == "case3":
            self.shape = "ellipse"
        if self.shape not in ("circle", "ellipse"):
            raise ConfigurationError(f"unknown shape {self.shape!r}")
        if self.mode not in ("new", "classical"):
            raise ConfigurationError("mode must be 'new' or 'classical'")
        if self.interface not in ("sigma0", "sigmad"):
            raise ConfigurationError("interface must be 'sigma0' or 'sigmad'")
        if self.mode == "new" and self.interface != "sigma0":
            raise ConfigurationError("the new conditions are posed on sigma0")
        if not self.alpha > 0:
            raise ConfigurationError("alpha must be positive")
        if self.case not in PRESETS:
            raise ConfigurationError(f"unknown case {self.case!r}")
        for name in ("macro_resolution", "dns_resolution"):
            r = getattr(self, name)
            if not float(r).is_integer() or r <= 0:
                raise ConfigurationError(f"{name} must be a positive integer")
            for length in (1.0, 0.5):
                if not math.isclose(r * length, round(r * length)):
                    raise ConfigurationError(f"{name} does not divide the domain")
        if not math.isclose(self.n_cols * self.epsilon, 1.0) or not math.isclose(self.n_rows * self.epsilon, 0.5):
            raise ConfigurationError("the layout must fill (0,1) x (-0.5,0)")
        if not math.isclose(self.dns_resolution * self.epsilon, round(self.dns_resolution * self.epsilon)):
            raise ConfigurationError("dns_resolution * epsilon must be an integer")

    def geometry(self):
        shape = Ellipse() if self.shape == "ellipse" else Circle(self.radius)
        return UnitCellGeometry(shape)

    def layout(self):
        return PorousLayout(self.n_cols, self.n_rows, self.epsilon)

    def location(self):
        return SigmaD() if self.interface == "sigmad" else Sigma0()

    def case_spec(self):
        c = preset(self.case)
        c.shape = self.geometry().shape
        return c

    @classmethod
    def from_json(cls, path_or_dict, **overrides):
        if isinstance(path_or_dict, dict):
            data = dict(path_or_dict)
        else:
            with open(path_or_dict) as f:
                data = json.load(f)
        if not isinstance(data, dict):
            raise ConfigurationError("configuration must be a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        known = set(cls.__dataclass_fields__)
        bad = set(data) - known
        if bad:
            raise ConfigurationError(f"unknown configuration keys: {sorted(bad)}")
        return cls(**data)

    @classmethod
    def for_preset(cls, name, **overrides):
        base = {"case": name}
        if name == "case3":
            base["shape"] = "ellipse"
        return cls.from_json(base, **overrides)

    def to_dict(self):
        return asdict(self)
