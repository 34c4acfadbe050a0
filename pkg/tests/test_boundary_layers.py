import dataclasses

import numpy as np
import pytest

from porecouple.boundary_layers import (BoundaryLayerConstants, compute_constants, constants_close,
                                        decay_profile, extract_constants, solve_beta_bl, solve_t_bl)
from porecouple.cell_problems import Traces
from porecouple.errors import ConfigurationError, DecayError
from porecouple.geometry import StripeSpec


def test_t_vertical_velocity_has_zero_row_means(circle32):
    t = circle32["bl"][0]
    g = t.grid
    means = t.field.v.mean(axis=1)
    assert np.abs(means).max() <= 1e-12


def test_t_decays_into_medium(circle32):
    t = circle32["bl"][0]
    C = circle32["constants"]
    l = C.l_used
    assert t.row_max(-l + 0.5) <= 1e-4 * abs(C.N1_bl)


def test_decay_is_monotone(circle32, ellipse32):
    for P in (circle32, ellipse32):
        for s in P["bl"]:
            r = decay_profile(s, depths=(2, 3))
            assert r[1] <= r[0] + 1e-10


def test_beta_mass_consistency(circle32, ellipse32):
    for P in (circle32, ellipse32):
        K = P["K"]
        for j, s in enumerate(P["bl"][1:], start=1):
            g = s.grid
            jS = g.interface_row
            k2j = K.k21 if j == 1 else K.k22
            w2 = P["traces"][j - 1].w2
            means = s.field.v.mean(axis=1)
            # stored row jS carries the lower limit; the upper limit adds the jump
            assert np.abs(means[:jS + 1]).max() <= 1e-8
            assert np.abs(means[jS + 1:-1] - (k2j - w2.mean())).max() <= 1e-8


def test_zero_data_zero_solution(circle32):
    spec = StripeSpec(circle32["geometry"], 2)
    z = np.zeros(32)
    tr = Traces(z, z, z, z, z, 1 / 32)
    s = solve_beta_bl(spec, 32, 1, tr, 0.0)
    assert not np.any(s.field.u) and not np.any(s.field.v) and not np.any(s.field.p)


def test_trace_grid_mismatch(circle32):
    spec = StripeSpec(circle32["geometry"], 2)
    z = np.zeros(16)
    with pytest.raises(ConfigurationError):
        solve_beta_bl(spec, 32, 1, Traces(z, z, z, z, z, 1 / 16), 0.0)


def test_slip_coefficient_positive(circle32):
    eps = 1 / 20
    assert -eps * circle32["constants"].N1_bl > 0


def test_second_components_vanish(circle32):
    C = circle32["constants"]
    assert C.N2_bl == 0.0 and C.M2_bl == (0.0, 0.0)


def test_circle_gray_entries(circle32):
    C = circle32["constants"]
    for v in (C.Ns_bl, C.M1_bl[1], C.Momega_bl[0]):
        assert abs(v) <= 1e-4


def test_ellipse_constants_nonzero(ellipse32):
    C = ellipse32["constants"]
    for v in C.values().values():
        assert abs(v) > 1e-4


def test_plateau_property(circle32, ellipse32):
    for P in (circle32, ellipse32):
        for s in P["bl"]:
            g = s.grid
            l = -g.origin[1]
            yc = g.y_centers
            m = s.mean_u()[(yc >= 0.5 * l) & (yc <= l)]
            ref = m[0]
            scale = max(abs(ref), 1e-8 * max(abs(x) for x in P["constants"].values().values()))
            assert np.abs(m - ref).max() <= 1e-4 * scale


def test_truncation_stability(circle32):
    geo, K, tr = circle32["geometry"], circle32["K"], circle32["traces"]
    C6, _ = compute_constants(geo, 32, tr, K, l=6)
    C4 = circle32["constants"]
    for name, (diff, ok) in constants_close(C4, C6, rel=1e-5).items():
        assert ok, (name, diff)
    assert C6.l_used == 6


def test_t_problem_alone_matches(circle32):
    t = solve_t_bl(StripeSpec(circle32["geometry"], 4), 32)
    assert t.first_row_values()[0] == pytest.approx(circle32["constants"].N1_bl, rel=1e-12)


def test_decay_failure_detected(circle32):
    t, b1, b2 = circle32["bl"]
    bad = dataclasses.replace(t, field=t.field.copy())
    g = bad.grid
    # corrupt the plateau row so that the two extractions disagree
    j = int(round((0.5 * -g.origin[1] - g.origin[1]) / g.dy - 0.5))
    bad.field.u[j] *= 1.5
    with pytest.raises(DecayError):
        extract_constants(bad, (b1, b2))
    extract_constants(bad, (b1, b2), check=False)


def test_constants_document_keys(circle32):
    d = circle32["constants"].as_dict()
    for k in ("N1_bl", "Ns_bl", "M1_bl_1", "M1_bl_2", "Momega_bl_1", "Momega_bl_2", "l", "resolution"):
        assert k in d
    z = BoundaryLayerConstants.zeros()
    assert all(v == 0.0 for v in z.values().values())
