import itertools
import math

import numpy as np
import pytest

from bnsd.channel import evolve
from bnsd.errors import InvalidFamily
from bnsd.linalg import SIGMA_X, kron_all
from bnsd.operators import WWZB_REPRESENTATIVES, InPlaneSettings, coefficient_table
from bnsd.states import GHZ, density_matrix
from bnsd.wwzb import (SETTINGS_TUPLES, SignFunction, classified_family, classify_orbits,
                       coefficients_from_signs, correlators, deterministic_maximum,
                       enumerate_family, family_dump, flip_outcome, locality_verdict, orbit,
                       permute_parties, signs_from_coefficients, swap_settings)
from conftest import random_generic


@pytest.fixture(scope="module")
def family():
    return classified_family()


def test_family_has_256_distinct_members(family):
    assert len(family) == 256
    assert len({ineq.key for ineq in family}) == 256


def test_sign_function_transform_is_a_bijection():
    for ineq in enumerate_family():
        assert signs_from_coefficients(ineq.coefficients) == ineq.sign_function


def test_constant_sign_function_gives_single_term():
    c = coefficients_from_signs(SignFunction((1,) * 8))
    np.testing.assert_array_equal(c, WWZB_REPRESENTATIVES[1])


def test_parity_sign_function_gives_corner_term():
    f = SignFunction(tuple((-1) ** sum(k) for k in SETTINGS_TUPLES))
    c = coefficients_from_signs(f)
    np.testing.assert_array_equal(c, coefficient_table({"A'B'C'": 2}))


def test_mabk_sign_function():
    f = signs_from_coefficients(WWZB_REPRESENTATIVES[5])
    expected = tuple(int(((-1) ** ka + (-1) ** kb + (-1) ** kc - (-1) ** (ka + kb + kc)) / 2)
                     for ka, kb, kc in SETTINGS_TUPLES)
    assert f.values == expected
    np.testing.assert_array_equal(coefficients_from_signs(f), WWZB_REPRESENTATIVES[5])


def test_inverse_rejects_foreign_tables():
    with pytest.raises(InvalidFamily):
        signs_from_coefficients(coefficient_table({"ABC": 1}))
    with pytest.raises(ValueError):
        SignFunction((1, 0, 1, 1, 1, 1, 1, 1))


def test_deterministic_maximum_is_two(family):
    for ineq in family:
        assert deterministic_maximum(ineq.coefficients) == 2.0


def test_coefficient_patterns(family):
    counts = {}
    for ineq in family:
        pattern = tuple(sorted(np.abs(ineq.coefficients).ravel().tolist()))
        counts[pattern] = counts.get(pattern, 0) + 1
    assert counts == {
        (0.0,) * 7 + (2.0,): 16,
        (0.5,) * 7 + (1.5,): 128,
        (0.0,) * 4 + (1.0,) * 4: 112,
    }


def test_orbit_sizes(family):
    classes = classify_orbits(family)
    assert {k: len(v) for k, v in classes.items()} == {1: 16, 2: 128, 3: 48, 4: 48, 5: 16}
    assert sorted(i for idx in classes.values() for i in idx) == list(range(256))
    for k, rep in WWZB_REPRESENTATIVES.items():
        members = [family[i].class_id for i in range(256) if family[i].key == tuple(
            round(float(v), 2) + 0.0 for v in rep.ravel())]
        assert members == [k]


def test_orbits_closed_under_generators():
    for rep in WWZB_REPRESENTATIVES.values():
        members = orbit(rep)
        for key in list(members)[:10]:
            c = np.array(key).reshape(2, 2, 2)
            assert tuple(swap_settings(c, 1).ravel() + 0.0) in members


def test_classify_rejects_truncated_family():
    with pytest.raises(InvalidFamily):
        classify_orbits(enumerate_family()[:255])


def test_symmetries_map_values_consistently(rng):
    # relabeling settings is the same as evaluating at relabeled measurements
    rho = density_matrix(random_generic(rng))
    s = InPlaneSettings(0.7, -0.2)
    corr = correlators(rho, s)
    c = WWZB_REPRESENTATIVES[3]
    base = float(np.sum(c * corr))
    assert float(np.sum(swap_settings(c, 0) * np.flip(corr, axis=0))) == pytest.approx(base)
    assert float(np.sum(flip_outcome(c, 2, 1) * flip_outcome(corr, 2, 1))) == pytest.approx(base)
    perm = (1, 0, 2)
    assert float(np.sum(permute_parties(c, perm) * permute_parties(corr, perm))) == \
        pytest.approx(base)


def test_correlators_trace_directly():
    rho = density_matrix(GHZ)
    corr = correlators(rho, InPlaneSettings(math.pi / 2, 0.0))
    # A' = sx, B = -sx, C' = sx -> E(A'BC') = -<sx sx sx> = -1
    assert corr[1, 0, 1] == pytest.approx(-1.0)
    assert np.sum(kron_all(SIGMA_X, SIGMA_X, SIGMA_X) * rho.T).real == pytest.approx(1.0)


def test_locality_verdict_ghz(family):
    report = locality_verdict(density_matrix(GHZ), InPlaneSettings(math.pi / 2, 0.0), family)
    assert report.violating_count >= 1
    assert report.max_value == pytest.approx(4.0)
    assert report.max_violation == pytest.approx(2.0)
    assert not report.is_fully_local_at_settings


def test_locality_verdict_decayed_state(family):
    rho = evolve(GHZ, 1.0, 1.0)
    report = locality_verdict(rho, InPlaneSettings(0.0, 0.0), family)
    assert report.violating_count == 0
    assert report.is_fully_local_at_settings


def test_family_dump_format(family):
    dump = family_dump(family)
    assert len(dump) == 256
    entry = dump[0]
    assert entry["f"] == [1] * 8
    assert set(entry["coeffs"]) == {"".join(map(str, x)) for x in itertools.product("01", repeat=3)}
    assert entry["coeffs"]["000"] == 2.0
    assert entry["class"] == 1
    assert {d["class"] for d in dump} == {1, 2, 3, 4, 5}
