"""Tests for the scenario registry."""

import numpy as np
import pytest

from hexch.fields import UniformField, derive_seed, path_matrix, sample_ah, sample_array
from hexch.hperm import HPerm
from hexch.scenarios import (
    builtin,
    list_scenarios,
    make_level_values,
    make_model,
    make_source,
)
from hexch.stattests import hexch_test
from hexch.tree import leaf_coords, root


def test_registry_size_and_names():
    specs = list_scenarios()
    assert len(specs) >= 9
    names = {s.name for s in specs}
    assert {
        "uniform-leaf",
        "root-constant",
        "path-mean",
        "product",
        "toy-magnetization",
        "label-leak",
        "sibling-coupled",
        "markov-leak",
        "depth-shift",
    } <= names


def test_every_name_resolves_uniquely():
    for spec in list_scenarios():
        assert builtin(spec.name) is spec


def test_unknown_name():
    with pytest.raises(ValueError):
        builtin("does-not-exist")


def test_root_constant_is_constant():
    x = make_source("root-constant", 2, 5).sample(71)
    assert np.all(x == x[0])


def test_null_scenarios_use_path_function_form():
    # the generated array must equal the direct sigma evaluation exactly
    for name in ("uniform-leaf", "root-constant", "path-mean", "product"):
        src = make_source(name, 2, 4)
        direct = sample_array(make_model(name, 2), 2, 4, seed=13)
        assert np.array_equal(src.sample(13), direct)
    src = make_source("toy-magnetization", 2, 3, n=5)
    direct = sample_ah(make_model("toy-magnetization", 2), 2, 3, 5, seed=13)
    assert np.array_equal(src.sample(13), direct)


def test_label_leak_pure_parity_differs_under_swap():
    # with the parity-only model the values are determined by the first
    # coordinate, so the root swap changes the array deterministically
    src = make_source("label-leak", 1, 2, params={"weight": 1.0})
    x = src.sample(5)
    assert x.tolist() == [1.0, 0.0]  # X_(1)=parity(1)=1, X_(2)=parity(2)=0
    swap = HPerm(1, {root(1): (2, 1)})
    y = x[swap.permuted_leaf_indices(2)]
    assert y.tolist() == [0.0, 1.0]
    assert not np.array_equal(x, y)


def test_label_leak_blends_parity():
    src = make_source("label-leak", 2, 4, params={"weight": 0.5})
    x = src.sample(3)
    v = path_matrix(3, "v", 2, 4)[:, -1]
    parity = (leaf_coords(2, 4)[:, 0] % 2).astype(float)
    assert np.allclose(x, 0.5 * v + 0.5 * parity)


def test_toy_magnetization_without_replica_block_repeats_columns():
    src = make_source("toy-magnetization", 2, 3, n=6, params={"b": 0.0})
    x = src.sample(4)
    for i in range(1, 6):
        assert np.array_equal(x[:, 0], x[:, i])


def test_toy_magnetization_defaults():
    spec = builtin("toy-magnetization")
    assert spec.defaults["params"] == {"a": 2.0, "b": 1.0}
    model = make_model("toy-magnetization", 2)
    assert model.arity == 6
    assert dict(model.params) == {"a": 2.0, "b": 1.0}


def test_sibling_coupled_couples_consecutive_parents():
    src = make_source("sibling-coupled", 2, 8, params={"weight": 1.0})
    x = src.sample(6).reshape(8, 8)
    # with weight 1 the value is exactly the shared uniform, so paired
    # parents have identical children blocks
    for j in range(0, 8, 2):
        assert np.array_equal(x[j], x[j + 1])
    assert not np.array_equal(x[0], x[2])


def test_sibling_coupled_weight_zero_is_plain_leaf_field():
    src = make_source("sibling-coupled", 2, 4, params={"weight": 0.0})
    x = src.sample(10)
    assert np.allclose(x, path_matrix(10, "v", 2, 4)[:, -1])


def test_markov_leak_reuses_previous_uniform():
    src = make_source("markov-leak", 2, 4)
    x = src.sample(8).reshape(4, 4)
    v = path_matrix(8, "v", 2, 4)[:, -1].reshape(4, 4)
    assert np.array_equal(x[:, 0], v[:, 0])
    assert np.allclose(x[:, 1:], 0.5 * (v[:, 1:] + v[:, :-1]))


def test_depth_shift_shifts_only_depth_one():
    by_depth, declared = make_level_values("depth-shift", 2, 8, seed=3)
    base, _ = make_level_values("depth-shift", 2, 8, seed=3, params={"shift": 0.0})
    assert np.array_equal(by_depth[0], base[0])
    assert np.array_equal(by_depth[2], base[2])
    assert np.all(by_depth[1] >= 0.5)
    assert declared[1].family == "uniform"


def test_array_source_rejected_for_field_scenario():
    with pytest.raises(ValueError):
        make_source("depth-shift", 2, 4)
    with pytest.raises(ValueError):
        make_level_values("product", 2, 4, seed=0)


def test_null_scenarios_pass_hexch_smoke():
    # cheap spot-check of the registry's expected verdicts; the full
    # calibration bands run in the acceptance suite
    for name in ("uniform-leaf", "root-constant"):
        src = make_source(name, 2, 4)
        rejects = sum(
            hexch_test(
                src.sample,
                2,
                4,
                n_reps=20,
                n_resamples=99,
                seed=derive_seed(55, name, t),
            ).reject
            for t in range(10)
        )
        assert rejects <= 2


def test_expected_verdicts_shape():
    for spec in list_scenarios():
        assert spec.kind in ("null", "violation")
        for test_name, verdict in spec.expected.items():
            assert verdict in ("pass", "reject")
            if spec.kind == "null":
                assert verdict == "pass"
        if spec.kind == "violation":
            assert "reject" in spec.expected.values()
