import numpy as np
import pytest
from scipy.ndimage import uniform_filter1d

from porecouple.cases import RunConfig
from porecouple.dns import (AlongX1, AlongX2, DnsResult, EnsembleSpec, Profile, average_runs, compare_profiles,
                            ensemble_average, extract_profile, run_dns)
from porecouple.errors import ConfigurationError, DomainError
from porecouple.geometry import Circle, Custom, PorousLayout
from porecouple.grid import StokesField, build_grid
from porecouple.stokes import BoundarySpec, Dirichlet, Periodic, PressureDirichlet, Symmetry, max_divergence, solve_stokes

EPS = 0.1
LAYOUT = PorousLayout(2, 3, EPS)
DOMAIN = (0.0, 0.2, -0.3, 0.2)
SHEAR = BoundarySpec(Periodic(), Periodic(), Symmetry(), Dirichlet((1.0, 0.0)))


def inflow(x, y):
    return np.sin(2 * np.pi * x / 0.2) ** 2, np.zeros_like(x)


@pytest.fixture(scope="module")
def shear_run():
    return run_dns(DOMAIN, LAYOUT, Circle(0.25), SHEAR, 160)


def test_no_inclusions_matches_free_flow():
    empty = Custom(lambda y1, y2: np.ones_like(y1), "empty")
    bc = BoundarySpec(Dirichlet(), PressureDirichlet(0.0), Symmetry(), Dirichlet(inflow))
    a = run_dns(DOMAIN, LAYOUT, empty, bc, 80, check=False)
    b = solve_stokes(build_grid(DOMAIN, 80), bc)
    for x, y in ((a.field.u, b.field.u), (a.field.v, b.field.v), (a.field.p, b.field.p)):
        assert np.abs(x - y).max() <= 1e-12


def test_conservation_with_inflow():
    bc = BoundarySpec(Periodic(), Periodic(), Symmetry(), Dirichlet(inflow))
    r = run_dns(DOMAIN, LAYOUT, Circle(0.25), bc, 160)
    assert max_divergence(r.grid, r.field) <= 1e-9
    flux = r.field.v.sum(axis=1) * r.grid.dx  # net vertical flux on every horizontal grid line
    assert np.abs(flux - flux[-1]).max() <= 1e-9


def test_deep_velocity_is_small(shear_run):
    g, f = shear_run.grid, shear_run.field
    _, yu = g.u_coords()
    deep = np.abs(f.u[yu < -0.2]).max()
    assert deep <= 10 * EPS**2 * np.abs(f.u).max()


def test_single_sample_ensemble_equals_run_dns(shear_run):
    avg = ensemble_average(DOMAIN, LAYOUT, Circle(0.25), SHEAR, 160, EnsembleSpec(1))
    assert np.array_equal(avg.field.u, shear_run.field.u)
    assert np.array_equal(avg.field.v, shear_run.field.v)
    assert np.array_equal(avg.field.p, shear_run.field.p)


def test_average_is_linear(rng):
    g = build_grid((0, 1, 0, 1), 8)
    runs = []
    for _ in range(3):
        f = StokesField(rng.normal(size=g.u_face_mask.shape), rng.normal(size=g.v_face_mask.shape), rng.normal(size=g.cell_mask.shape))
        runs.append(DnsResult(g, f))
    base = average_runs(runs).field
    shifted = average_runs([DnsResult(g, StokesField(r.field.u + 2.5, r.field.v + 2.5, r.field.p + 2.5))
                            for r in runs]).field
    assert np.allclose(shifted.u, base.u + 2.5, rtol=0, atol=1e-14)
    assert np.allclose(shifted.p, base.p + 2.5, rtol=0, atol=1e-14)


def test_ensemble_damps_horizontal_oscillation():
    cfg = RunConfig.for_preset("case1", dns_resolution=160)
    case = cfg.case_spec()
    dom = (0.0, 1.0, -0.5, 0.5)
    single = run_dns(dom, cfg.layout(), case.shape, case.dns_bc, 160)
    avg = ensemble_average(dom, cfg.layout(), case.shape, case.dns_bc, 160, EnsembleSpec(8))
    line = AlongX1(-EPS / 2)
    n = int(round(EPS * 160))

    def amplitude(fld, grid):
        # periodic line: drop the duplicated end node, remove the one-period moving mean
        v = extract_profile(fld, grid, line, "v1").values[:-1]
        return np.ptp(v - uniform_filter1d(v, n, mode="wrap"))

    a0, a1 = amplitude(single.field, single.grid), amplitude(avg.field, avg.grid)
    assert a1 <= 0.2 * a0


def test_failing_sample_reports_shift():
    with pytest.raises(ConfigurationError):
        ensemble_average(DOMAIN, LAYOUT, Circle(0.25), SHEAR, 80, EnsembleSpec(2))


def test_under_resolution():
    with pytest.raises(ConfigurationError):
        run_dns(DOMAIN, LAYOUT, Circle(0.25), SHEAR, 150)
    with pytest.raises(ConfigurationError):
        run_dns(DOMAIN, LAYOUT, Circle(0.25), SHEAR, 155)  # not an integer per epsilon


def test_throat_check():
    fat = Circle(0.45)  # gap of 0.1 eps: under three cells at 16 per eps
    with pytest.raises(ConfigurationError):
        run_dns(DOMAIN, LAYOUT, fat, SHEAR, 160)


def test_ensemble_spec():
    assert EnsembleSpec(4).resolved() == (0.0, 0.25, 0.5, 0.75)
    with pytest.raises(ConfigurationError):
        EnsembleSpec(0)
    with pytest.raises(ConfigurationError):
        EnsembleSpec(2, (0.1, 0.1))
    with pytest.raises(ConfigurationError):
        EnsembleSpec(1, (1.0,))


# ------------------------------------------------------------- profiles
def test_constant_profile():
    g = build_grid((0, 1, 0, 1), 10)
    f = StokesField(np.full(g.u_face_mask.shape, 3.0), np.full(g.v_face_mask.shape, 3.0), np.full(g.cell_mask.shape, 3.0))
    for q in ("v1", "v2", "p"):
        for ax in (AlongX1(0.37), AlongX2(0.81)):
            assert np.all(extract_profile(f, g, ax, q).values == 3.0)


def test_poiseuille_profile():
    g = build_grid((0, 1, 0, 1), 32)
    bc = BoundarySpec(PressureDirichlet(1.0), PressureDirichlet(0.0), Dirichlet(), Dirichlet())
    r = solve_stokes(g, bc)
    prof = extract_profile(r.field, g, AlongX2(0.5), "v1")
    y = prof.coords
    assert np.abs(prof.values - 0.5 * y * (1 - y)).max() <= 1e-10


def test_profile_outside_domain():
    g = build_grid((0, 1, 0, 1), 8)
    f = StokesField(np.zeros(g.u_face_mask.shape), np.zeros(g.v_face_mask.shape), np.zeros(g.cell_mask.shape))
    with pytest.raises(DomainError):
        extract_profile(f, g, AlongX2(1.5), "v1")
    with pytest.raises(DomainError):
        extract_profile(f, g, AlongX1(-0.1), "p")


def test_coupled_v2_continuous(circle32):
    from porecouple.macro import Classical, MacroBC, NoFlux, build_macro_grids, solve_coupled
    ff, pm = build_macro_grids(0.5, -0.5, 1.0, 20, 0.0, False)
    bc = MacroBC(ff_left=PressureDirichlet(1.0), ff_right=PressureDirichlet(0.0), ff_top=PressureDirichlet(0.3),
                 pm_left=PressureDirichlet(1.0), pm_right=PressureDirichlet(0.0), pm_bottom=NoFlux())
    sol = solve_coupled(ff, pm, Classical(), bc, circle32["K"])
    prof = extract_profile(sol, None, AlongX2(0.275), "v2")
    k = int(np.argmin(np.abs(prof.coords)))
    assert prof.coords[k] == 0.0
    assert np.sum(prof.coords == 0.0) == 1
    assert prof.values[k] == pytest.approx(sol.v_sigma[5], abs=0) and sol.pm_flux_y[-1][5] == sol.ff.v[0][5]


def test_compare_profiles():
    x = np.linspace(0, 1, 51)
    a = Profile(AlongX2(0.1), "v1", x, np.ones_like(x))
    assert compare_profiles(a, a)["rel_l2"] == 0.0
    b = Profile(AlongX2(0.1), "v1", x, np.ones_like(x) + 1e-3)
    r = compare_profiles(a, b)
    assert r["rel_l2"] == pytest.approx(1e-3, rel=1e-9) and r["max_abs"] == pytest.approx(1e-3)
    c = Profile(AlongX2(0.1), "v1", x + 2.0, np.ones_like(x))
    with pytest.raises(DomainError):
        compare_profiles(a, c)


def test_profile_invariants(tmp_path):
    with pytest.raises(ConfigurationError):
        Profile(AlongX2(0.1), "v1", [0.0, 0.0], [1.0, 2.0])
    p = Profile(AlongX2(0.1), "p", [0.0, 1.0], [1.0, 2.0])
    p.to_csv(tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "coordinate,p"
