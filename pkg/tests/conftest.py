import numpy as np
import pytest

from porecouple.boundary_layers import compute_constants
from porecouple.cell_problems import interface_traces, permeability, solve_cell_problems
from porecouple.geometry import Circle, Ellipse, UnitCellGeometry


def _params(shape, res=32, eps=0.1, l=4):
    geo = UnitCellGeometry(shape)
    s1, s2 = solve_cell_problems(geo, res)
    K = permeability(s1, s2, eps)
    tr = (interface_traces(s1), interface_traces(s2))
    C, sols = compute_constants(geo, res, tr, K, l=l)
    return {"geometry": geo, "cells": (s1, s2), "K": K, "traces": tr, "constants": C, "bl": sols}


@pytest.fixture(scope="session")
def circle32():
    return _params(Circle(0.25))


@pytest.fixture(scope="session")
def ellipse32():
    return _params(Ellipse())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def validation_run():
    """Full-size validation per preset, computed once per session with its wall time."""
    import time
    from porecouple.cases import RunConfig
    from porecouple.pipeline import effective_parameters, validate

    cache = {}

    def run(case):
        if case not in cache:
            t = time.perf_counter()
            cfg = RunConfig.for_preset(case)
            params = effective_parameters(cfg)
            res = validate(cfg, params)
            cache[case] = (res, time.perf_counter() - t)
        return cache[case]

    return run
