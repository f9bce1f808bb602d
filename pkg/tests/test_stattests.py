"""Tests for the statistical verification battery."""

import numpy as np
import pytest

from hexch.definetti import extract_hierarchy
from hexch.fields import DistSpec, derive_seed, ifield_truncation_values, uniform_ifield
from hexch.hperm import random_hperm
from hexch.scenarios import make_level_values, make_source
from hexch.stattests import (
    TestReport,
    _energy_permutation_pvalue,
    cond_indep_test,
    conditional_iid_test,
    energy_distance,
    hexch_test,
    level_homogeneity_test,
)

UNIF = DistSpec("uniform", (0.0, 1.0))


# -- energy distance -------------------------------------------------------------


def test_energy_distance_identical_samples():
    a = np.array([[0.1, 0.2], [0.7, 0.4], [0.3, 0.3]])
    assert energy_distance(a, a) == pytest.approx(0.0, abs=1e-12)


def test_energy_distance_repeated_points():
    p = np.tile([0.2, 0.1], (5, 1))
    q = np.tile([0.5, 0.5], (7, 1))
    expected = 2 * np.linalg.norm([0.3, 0.4])
    assert energy_distance(p, q) == pytest.approx(expected)


def test_energy_distance_matches_brute_force():
    rng = np.random.default_rng(3)
    a = rng.random((4, 3))
    b = rng.random((5, 3))

    def brute(x, y):
        return np.mean([np.linalg.norm(u - v) for u in x for v in y])

    expected = 2 * brute(a, b) - brute(a, a) - brute(b, b)
    assert energy_distance(a, b) == pytest.approx(expected, abs=1e-12)


def test_energy_distance_symmetric_nonnegative():
    rng = np.random.default_rng(9)
    for _ in range(10):
        a = rng.random((6, 2))
        b = rng.random((8, 2))
        d = energy_distance(a, b)
        assert d >= 0.0
        assert d == pytest.approx(energy_distance(b, a), abs=1e-12)


def test_energy_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        energy_distance(np.zeros((3, 2)), np.zeros((3, 4)))


def test_energy_permutation_invariant_to_replicate_order():
    rng = np.random.default_rng(17)
    a = rng.random((12, 5))
    b = rng.random((12, 5))
    s1, p1 = _energy_permutation_pvalue(a, b, 99, seed=4)
    a_shuffled = a[rng.permutation(12)]
    b_shuffled = b[rng.permutation(12)]
    s2, p2 = _energy_permutation_pvalue(a_shuffled, b_shuffled, 99, seed=4)
    assert s1 == s2
    assert p1 == p2


# -- exchangeability test ----------------------------------------------------------


def test_hexch_null_smoke():
    src = make_source("path-mean", 2, 4)
    rejects = 0
    for t in range(20):
        rep = hexch_test(
            src.sample, 2, 4, n_reps=30, n_resamples=99, seed=derive_seed(1, "n", t)
        )
        assert 0.0 < rep.p_value <= 1.0
        rejects += rep.reject
    assert rejects <= 4


def test_hexch_power_smoke():
    src = make_source("label-leak", 2, 8)
    rejects = sum(
        hexch_test(
            src.sample, 2, 8, n_reps=30, n_resamples=99, seed=derive_seed(2, "p", t)
        ).reject
        for t in range(10)
    )
    assert rejects >= 9


def test_hexch_deterministic():
    src = make_source("product", 2, 4)
    r1 = hexch_test(src.sample, 2, 4, n_reps=20, n_resamples=49, seed=5)
    r2 = hexch_test(src.sample, 2, 4, n_reps=20, n_resamples=49, seed=5)
    assert r1.p_value == r2.p_value and r1.statistic == r2.statistic


def test_hexch_accepts_fixed_permutation_pool():
    src = make_source("uniform-leaf", 2, 4)
    pool = [random_hperm(2, 4, seed=s) for s in range(3)]
    rep = hexch_test(src.sample, 2, 4, perms=pool, n_reps=20, n_resamples=49, seed=1)
    assert rep.name == "hexch"


def test_hexch_insufficient_replicates():
    src = make_source("uniform-leaf", 1, 4)
    with pytest.raises(ValueError):
        hexch_test(src.sample, 1, 4, n_reps=19, seed=0)


def test_hexch_zero_resamples():
    src = make_source("uniform-leaf", 1, 4)
    with pytest.raises(ValueError):
        hexch_test(src.sample, 1, 4, n_reps=20, n_resamples=0, seed=0)


def test_hexch_joint_replica_mode():
    src = make_source("toy-magnetization", 2, 4, n=8)
    rep = hexch_test(src.sample, 2, 4, n=8, n_reps=20, n_resamples=49, seed=3)
    assert rep.metadata["joint_replica_perm"]
    assert rep.metadata["dim"] == 64


def test_hexch_marginal_cap():
    src = make_source("uniform-leaf", 2, 16)
    rep = hexch_test(src.sample, 2, 16, n_reps=20, n_resamples=49, seed=3)
    assert rep.metadata["dim"] == 64  # 256 leaves capped to a fixed subset


def test_report_decision_consistency():
    src = make_source("uniform-leaf", 1, 8)
    for t in range(5):
        rep = hexch_test(
            src.sample, 1, 8, n_reps=20, n_resamples=99, seed=derive_seed(3, "d", t)
        )
        assert rep.reject == (rep.p_value < rep.level)


def test_report_validates_pvalue():
    with pytest.raises(ValueError):
        TestReport("x", 0.0, 1.5, 10, 0.05, False)


# -- conditional i.i.d. test ---------------------------------------------------------


def _array_and_hierarchy(name, r, m, seed):
    src = make_source(name, r, m)
    arr = src.sample(seed)
    return arr, extract_hierarchy(arr, r, m)


def test_conditional_iid_null_calibration_smoke():
    rejects = 0
    for t in range(20):
        seed = derive_seed(11, "c", t)
        arr, h = _array_and_hierarchy("uniform-leaf", 2, 16, seed)
        rejects += conditional_iid_test(arr, h, seed=seed).reject
    assert rejects <= 2  # needs >= 90% non-rejection


def test_conditional_iid_markov_power_smoke():
    rejects = 0
    for t in range(10):
        seed = derive_seed(12, "m", t)
        arr, h = _array_and_hierarchy("markov-leak", 2, 16, seed)
        rejects += conditional_iid_test(arr, h, seed=seed).reject
    assert rejects >= 9


def test_conditional_iid_constant_array():
    arr = np.full(64, 0.5)
    h = extract_hierarchy(arr, 2, 8)
    rep = conditional_iid_test(arr, h, seed=1)
    # point-mass PIT is pure randomization: uniform, hence no rejection
    assert not rep.reject


def test_conditional_iid_shape_mismatch():
    arr, h = _array_and_hierarchy("uniform-leaf", 2, 4, seed=5)
    with pytest.raises(ValueError):
        conditional_iid_test(np.zeros(9), h, seed=0)


# -- conditional independence test ----------------------------------------------------


def test_cond_indep_null_calibration_smoke():
    rejects = 0
    for t in range(20):
        seed = derive_seed(21, "c", t)
        arr, h = _array_and_hierarchy("product", 2, 16, seed)
        rejects += cond_indep_test(arr, h, seed=seed).reject
    assert rejects <= 2


def test_cond_indep_sibling_coupled_power_smoke():
    rejects = 0
    for t in range(10):
        seed = derive_seed(22, "s", t)
        arr, h = _array_and_hierarchy("sibling-coupled", 2, 16, seed)
        rejects += cond_indep_test(arr, h, seed=seed).reject
    assert rejects >= 9


def test_cond_indep_requires_depth_two():
    arr, h = _array_and_hierarchy("uniform-leaf", 1, 8, seed=3)
    with pytest.raises(ValueError):
        cond_indep_test(arr, h, seed=0)


def test_cond_indep_requires_siblings():
    arr = np.array([0.3])
    h = extract_hierarchy(arr, 2, 1)
    with pytest.raises(ValueError):
        cond_indep_test(arr, h, seed=0)


def test_cond_indep_pair_budget_recorded():
    arr, h = _array_and_hierarchy("uniform-leaf", 2, 16, seed=9)
    rep = cond_indep_test(arr, h, seed=9, pair_budget=10)
    assert rep.metadata["n_pairs"] == 10


# -- level homogeneity ------------------------------------------------------------------


def test_level_homogeneity_uniform_field_passes():
    rejects = 0
    for t in range(20):
        seed = derive_seed(31, "u", t)
        by_depth, _ = ifield_truncation_values(uniform_ifield(seed, 2), 2, 32)
        declared = {d: UNIF for d in range(3)}
        rejects += level_homogeneity_test(by_depth, declared, seed=seed).reject
    assert rejects <= 2


def test_level_homogeneity_depth_shift_power():
    rejects = 0
    for t in range(20):
        seed = derive_seed(32, "s", t)
        by_depth, declared = make_level_values("depth-shift", 2, 32, seed)
        rejects += level_homogeneity_test(by_depth, declared, seed=seed).reject
    assert rejects >= 18


def test_level_homogeneity_single_class_errors():
    with pytest.raises(ValueError):
        level_homogeneity_test({0: np.array([0.5])}, {0: UNIF}, seed=0)


def test_level_homogeneity_missing_spec():
    with pytest.raises(ValueError):
        level_homogeneity_test(
            {0: np.zeros(4), 1: np.zeros(4)}, {0: UNIF}, seed=0
        )


def test_level_homogeneity_cross_depth_component():
    by_depth, _ = ifield_truncation_values(uniform_ifield(8, 2), 2, 16)
    declared = {d: UNIF for d in range(3)}
    rep = level_homogeneity_test(by_depth, declared, seed=8)
    names = {c["name"] for c in rep.metadata["components"]}
    assert "ks2@0|1" in names or "ks2@1|2" in names
