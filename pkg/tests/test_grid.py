import math

import numpy as np
import pytest

from porecouple.errors import ConfigurationError
from porecouple.geometry import Circle, UnitCellGeometry
from porecouple.grid import StokesField, build_grid, discrete_divergence, read_field_csv, write_field_csv


def test_plain_rectangle():
    g = build_grid((0, 1, 0, 0.5), 100)
    assert (g.nx, g.ny) == (100, 50)
    assert g.cell_mask.all() and g.cell_mask.shape == (50, 100)
    assert g.u_face_mask.shape == (50, 101) and g.v_face_mask.shape == (51, 100)


def test_circle_solid_count():
    n = 64
    g = build_grid((0, 1, 0, 1), n, geometry=UnitCellGeometry(Circle(0.25)).is_solid)
    brute = sum(math.hypot((i + 0.5) / n - 0.5, (j + 0.5) / n - 0.5) <= 0.25
                for i in range(n) for j in range(n))
    solid = int((~g.cell_mask).sum())
    assert solid == brute
    assert abs(solid - round(math.pi * 0.25**2 * n * n)) <= 2 * math.pi * 0.25 * n


def test_interface_must_fall_on_face_row():
    eps = 0.1
    with pytest.raises(ConfigurationError):
        build_grid((0, 1, -0.5, 0.5), 100, interface_y=-0.25 * eps)
    g = build_grid((0, 1, -0.5, 0.5), 40, interface_y=-0.25 * eps)
    assert g.interface_row == 19


def test_non_divisible_domain_rejected():
    with pytest.raises(ConfigurationError):
        build_grid((0, 1, 0, 0.33), 10)


def test_face_masks_consistent(rng):
    mask = rng.random((12, 9)) > 0.4
    for px in (False, True):
        g = build_grid((0, 0.9, 0, 1.2), 10, geometry=lambda x, y: ~mask[(np.round(y * 10 - 0.5)).astype(int),
                                                                           (np.round(x * 10 - 0.5)).astype(int)],
                       periodic_x=px)
        c = g.cell_mask
        for j in range(g.ny):
            for i in range(g.nx + 1):
                left = c[j, i - 1] if i > 0 else (c[j, -1] if px else False)
                right = c[j, i] if i < g.nx else (c[j, 0] if px else False)
                assert g.u_face_mask[j, i] == (left or right)
        for j in range(g.ny + 1):
            for i in range(g.nx):
                lo = c[j - 1, i] if j > 0 else False
                hi = c[j, i] if j < g.ny else False
                assert g.v_face_mask[j, i] == (lo or hi)


def test_divergence_uniform_and_linear():
    g = build_grid((0, 1, 0, 1), 16)
    f = StokesField.zeros(g)
    f.u[:] = 1.0
    assert np.abs(discrete_divergence(g, f)).max() == 0.0
    Xu, _ = g.u_coords()
    f.u[:] = Xu
    assert np.allclose(discrete_divergence(g, f), 1.0, atol=1e-12)


def test_area_converges_first_order():
    exact = math.pi * 0.25**2
    errs = []
    for n in (32, 64, 128, 256):
        g = build_grid((0, 1, 0, 1), n, geometry=UnitCellGeometry(Circle(0.25)).is_solid)
        errs.append(abs((~g.cell_mask).sum() / n**2 - exact))
    # O(h): err * n stays bounded by the perimeter
    assert max(e * n for e, n in zip(errs, (32, 64, 128, 256))) <= 2 * math.pi * 0.25
    assert errs[-1] < errs[0]


def test_field_csv_roundtrip(tmp_path, rng):
    g = build_grid((0, 1, 0, 0.5), 8)
    f = StokesField(rng.random(g.u_face_mask.shape), rng.random(g.v_face_mask.shape), rng.random((g.ny, g.nx)))
    p = tmp_path / "f.csv"
    write_field_csv(p, g, f)
    back = read_field_csv(p, g)
    assert np.array_equal(back.u, f.u) and np.array_equal(back.v, f.v) and np.array_equal(back.p, f.p)
    assert p.read_text().splitlines()[0] == "kind,i,j,x,y,value"
