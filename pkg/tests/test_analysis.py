import math

import numpy as np
import pytest

from bnsd import analysis
from bnsd.analysis import (NEVER_VIOLATED, NO_CLOSED_FORM, STATIONARITY_TOL, closed_form,
                           critical_time, in_plane_exact_max, optimize_bloch, optimize_family,
                           optimize_in_plane, sweep, verdict)
from bnsd.channel import evolve
from bnsd.errors import EmptyGrid, InvalidParameters, NoClosedForm
from bnsd.operators import TRIPARTITE_TABLES, InPlaneSettings, build_operator
from bnsd.states import ALL_ZERO, GHZ, W, GenericState, density_matrix
from conftest import generic_with_corner, random_generic

SQ2 = math.sqrt(2)
T3_GHZ = math.log(SQ2) / 3
T_GHZ = math.log(2) / 3


def test_closed_form_p4_example():
    s = generic_with_corner(0.3)
    cf = closed_form("p4", s, 2.0)
    assert cf.max_abs(0.1) == pytest.approx(4 * 0.3 * math.exp(-0.6), abs=1e-12)
    assert cf.max_abs(0.1) == pytest.approx(0.6586, abs=5e-5)


def test_closed_form_errors():
    with pytest.raises(NoClosedForm):
        closed_form("svetlichny", W, 1.0)
    with pytest.raises(NoClosedForm):
        closed_form("mermin", GHZ, 1.0)
    with pytest.raises(InvalidParameters):
        closed_form("p1", GHZ, 0.0)


def test_closed_form_argmax_is_a_maximum():
    for name in analysis.CLOSED_FORM_NAMES:
        cf = closed_form(name, GHZ, 1.0)
        grid = np.linspace(-math.pi, math.pi, 10001)
        assert cf.shape(cf.argmax) == pytest.approx(np.max(cf.shape(grid)), abs=1e-6)
        assert cf.shape(cf.argmax) == pytest.approx(cf.shape_norm, abs=1e-12)


def test_analytic_critical_time_example():
    s = GenericState(0.8, a7=0.6)
    report = critical_time("svetlichny", s, 1.0)
    expected = math.log(2 * SQ2 * 0.48) / 3
    assert report.analytic_t == pytest.approx(expected, abs=1e-12)
    assert report.analytic_t == pytest.approx(0.1019172, abs=1e-7)
    assert report.numeric_t == pytest.approx(expected, abs=1e-8)
    assert report.settings_policy == "optimized-each-t"


def test_critical_time_below_threshold():
    s = generic_with_corner(0.3)
    report = critical_time("svetlichny", s, 1.0)
    assert report.analytic_t == NEVER_VIOLATED
    assert report.numeric_t == NEVER_VIOLATED


def test_critical_time_w_has_no_closed_form():
    report = critical_time("mabk-m", W, 1.0)
    assert report.analytic_t == NO_CLOSED_FORM


def test_critical_time_scales_with_rate():
    a = critical_time("p5", GHZ, 1.0).analytic_t
    b = critical_time("p5", GHZ, 4.0).analytic_t
    assert a == pytest.approx(T_GHZ)
    assert b == pytest.approx(a / 4)


@pytest.mark.parametrize("name", sorted(TRIPARTITE_TABLES))
def test_grid_optimizer_matches_singular_value(name, rng):
    for _ in range(5):
        rho = evolve(random_generic(rng), 1.0, rng.uniform(0, 0.3))
        res = optimize_in_plane(name, rho, analytic=False)
        exact = in_plane_exact_max(TRIPARTITE_TABLES[name], rho)
        assert res.max_abs == pytest.approx(exact, abs=1e-9)


def test_analytic_and_grid_paths_agree(rng):
    for _ in range(10):
        s = random_generic(rng)
        rho = evolve(s, 1.0, 0.1)
        for name in ("svetlichny", "p2", "chsh-bipartition"):
            a = optimize_in_plane(name, rho, s, analytic=True).max_abs
            g = optimize_in_plane(name, rho, s, analytic=False).max_abs
            assert a == pytest.approx(g, abs=1e-9)


def test_ghz_svetlichny_optimum():
    res = optimize_in_plane("svetlichny", density_matrix(GHZ), GHZ)
    assert res.max_abs == pytest.approx(4 * SQ2, abs=1e-12)
    assert res.method == "analytic"
    # the reported value is the trace at the reported settings
    assert build_operator("svetlichny", res.settings).expectation(density_matrix(GHZ)) == res.value


def test_phase_covariance():
    base = generic_with_corner(0.45)
    for phi in (0.3, -1.2, 2.9):
        shifted = generic_with_corner(0.45, alpha=phi)
        r0 = optimize_in_plane("svetlichny", density_matrix(base), base)
        r1 = optimize_in_plane("svetlichny", density_matrix(shifted), shifted)
        assert r1.max_abs == pytest.approx(r0.max_abs, abs=1e-12)
        assert r1.theta_bc_alpha == pytest.approx(r0.theta_bc_alpha, abs=1e-12)


def test_svetlichny_bounded_by_mabk_pair(rng):
    for _ in range(30):
        rho = evolve(random_generic(rng), 1.0, rng.uniform(0, 0.5))
        s = InPlaneSettings(*rng.uniform(-math.pi, math.pi, size=2))
        sv = build_operator("svetlichny", s).expectation(rho)
        m = build_operator("mabk-m", s).expectation(rho)
        mp = build_operator("mabk-mprime", s).expectation(rho)
        assert abs(sv) <= abs(m) + abs(mp) + 1e-12


def test_tripartite_death_precedes_full_death(rng):
    for _ in range(10):
        s = generic_with_corner(rng.uniform(0.37, 0.5), alpha=rng.uniform(-3, 3))
        t3 = closed_form("svetlichny", s, 1.0).critical_time(4.0)
        t = closed_form("p5", s, 1.0).critical_time(2.0)
        assert t3 < t


def test_bloch_optimizer_is_stationary_and_beats_in_plane():
    rho = density_matrix(W)
    res = optimize_bloch("mabk-m", rho, seed=3, starts=16)
    assert res.gradient_norm < STATIONARITY_TOL
    assert res.method == "multistart"
    # unconstrained Mermin optimum for W
    assert res.max_abs == pytest.approx(3.046, abs=1e-3)
    assert optimize_in_plane("mabk-m", rho, W).max_abs == pytest.approx(0.0, abs=1e-12)


def test_bloch_optimizer_is_seed_deterministic():
    rho = evolve(GHZ, 1.0, 0.05)
    a = optimize_bloch("svetlichny", rho, seed=7, starts=8)
    b = optimize_bloch("svetlichny", rho, seed=7, starts=8)
    assert a.value == b.value
    np.testing.assert_array_equal(a.settings.directions, b.settings.directions)
    assert a.max_abs == pytest.approx(4 * SQ2 * math.exp(-0.15), abs=1e-9)


def test_bloch_rejects_bipartition_and_bad_starts():
    rho = density_matrix(GHZ)
    with pytest.raises(InvalidParameters):
        optimize_bloch("chsh-bipartition", rho)
    with pytest.raises(InvalidParameters):
        optimize_bloch("svetlichny", rho, starts=0)
    with pytest.raises(InvalidParameters):
        analysis.optimize_settings("svetlichny", rho, mode="sphere")


def test_family_optimum_ghz():
    fam = optimize_family(density_matrix(GHZ))
    assert fam.max_abs == pytest.approx(4.0, abs=1e-9)
    assert fam.violating_count > 0
    late = optimize_family(evolve(GHZ, 1.0, T_GHZ + 1e-3))
    assert late.max_abs < 2.0
    assert late.violating_count == 0


@pytest.mark.parametrize("t, expected", [
    (0.0, (True, True, True, True)),
    (0.18, (True, False, True, False)),
    (0.5, (False, False, False, False)),
])
def test_verdict_examples(t, expected):
    v = verdict(GHZ, 1.0, t)
    assert (v.generic, v.genuinely_tripartite, v.subsystem_bipartite,
            v.even_odd_bipartition) == expected


def test_verdict_validation():
    with pytest.raises(InvalidParameters):
        verdict(GHZ, 1.0, -0.1)


def test_sweep_ghz_svetlichny_column():
    rows = sweep(GHZ, 1.0, [0.0, T3_GHZ, T_GHZ], ["svetlichny"])
    np.testing.assert_allclose([r.value for r in rows], [4 * SQ2, 4.0, 2 * SQ2], atol=1e-9)
    assert [r.violated for r in rows] == [True, False, False]


def test_sweep_monotone_and_ordered():
    grid = np.linspace(0, 1, 11)
    rows = sweep(GHZ, 1.0, grid, ["svetlichny", "chsh-bipartition", "p2"])
    assert [r.operator for r in rows[:3]] == ["chsh-bipartition", "p2", "svetlichny"]
    for name in ("svetlichny", "chsh-bipartition", "p2"):
        vals = [r.value for r in rows if r.operator == name]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_sweep_zero_state_is_silent():
    rows = sweep(ALL_ZERO, 1.0, [0.0, 0.5], ["svetlichny", "p5", "chsh-bipartition"])
    assert all(r.value == pytest.approx(0.0, abs=1e-15) and not r.violated for r in rows)


def test_sweep_grid_validation():
    with pytest.raises(EmptyGrid):
        sweep(GHZ, 1.0, [], ["p1"])
    with pytest.raises(InvalidParameters):
        sweep(GHZ, 1.0, [0.2, 0.1], ["p1"])
