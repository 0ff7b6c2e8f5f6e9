import math

import pytest

import elliptw as et


def mp_config(p=64):
    c = et.ModelConfig()
    c.p = c.n = p
    c.spectrum = et.PopulationSpectrum.identity(p)
    c.radial = et.RadialLaw.point_mass(1.0)
    c.tau = 0.05
    return c


def test_validate_and_edge():
    c = mp_config()
    assert et.validate(c) == []
    rep = et.find_edge(c)
    assert abs(rep.x_star + 0.5) < 1e-8
    assert abs(rep.edge - 4.0) < 1e-8
    g0 = et.gamma0_scale(c, c.radial, rep)
    assert abs(g0 - 2.0 ** (-4.0 / 3.0)) < 1e-8


def test_solver_matches_closed_form():
    c = mp_config()
    t = et.solve_system(c, 2.0 + 0.5j)
    w = (2.0 + 0.5j) ** 2 - 4.0 * (2.0 + 0.5j)
    m = (-(2.0 + 0.5j) + w**0.5) / (2.0 * (2.0 + 0.5j))
    if m.imag < 0:
        m = (-(2.0 + 0.5j) - w**0.5) / (2.0 * (2.0 + 0.5j))
    assert abs(t.m1 - m) < 1e-9
    assert t.residual <= 1e-12


def test_density_mass():
    c = mp_config(32)
    grid = et.support_grid(4.0, 801)[1:]
    curve = et.density(c, et.SystemMode.limiting, et.Variant.m, grid, 1e-2)
    assert abs(curve.trapezoid_mass() - 1.0) < 2e-3


def test_tw_table_roundtrip(tmp_path):
    table = et.build_tw1_table()
    assert abs(table.mean() + 1.2065) < 2e-3
    u = et.tw1_cdf(table, 0.0)
    assert abs(et.tw1_quantile(table, u)) < 1e-6
    path = tmp_path / "tw.csv"
    table.write_csv(str(path))
    again = et.TW1Table.read_csv(str(path))
    assert again.F1_values == table.F1_values
    with pytest.raises(ValueError):
        et.tw1_quantile(table, 1.5)


def test_trial_and_campaign_determinism():
    spec = et.ExperimentSpec()
    spec.model = mp_config(100)
    spec.trials = 6
    spec.seed_base = 3
    spec.threads = 2
    a = et.run_campaign(spec)
    b = et.run_campaign(spec)
    assert a.to_json() == b.to_json()
    assert a.gamma0 == pytest.approx(2.0 ** (-4.0 / 3.0), abs=1e-8)
    assert a.n_excluded == 0
    assert 0.0 <= a.ks_elliptical <= 1.0


def test_radial_law():
    law = et.RadialLaw.parametric(1.0, 0.0)
    assert et.radial_cdf(law, 0.5) == pytest.approx(0.5)
    assert law.mean() == pytest.approx(0.5)
