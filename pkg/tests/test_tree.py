"""Tests for the tree index algebra."""

import itertools

import numpy as np
import pytest

from hexch.tree import (
    ProductVertex,
    TreeVertex,
    decode_vertex,
    encode_vertex,
    leaf,
    leaf_coords,
    leaves,
    internal_vertices,
    path,
    product_leaves,
    product_path,
    root,
    vertices,
    wedge,
    wedge_matrix,
)


def test_path_unfolds_prefixes():
    assert [v.coords for v in path(leaf(1, 2, 3))] == [(), (1,), (1, 2), (1, 2, 3)]


def test_path_of_root_is_itself():
    assert path(root(3)) == [root(3)]


def test_path_depth_one():
    assert [v.coords for v in path(leaf(7))] == [(), (7,)]


def test_path_parent_chain():
    p = path(leaf(3, 1, 4, 1))
    for a, b in zip(p, p[1:]):
        assert b.parent() == a
    assert len(p) == len(set(p))


def test_wedge_against_path_set_intersection():
    a, b = leaf(1, 2, 3), leaf(1, 2, 5)
    oracle = len(set(path(a)) & set(path(b)))
    assert oracle == 3
    assert wedge(a, b) == oracle


def test_wedge_self_is_path_length():
    v = leaf(4, 4, 4)
    assert wedge(v, v) == 4 == len(path(v))


def test_wedge_distinct_first_coordinate_shares_only_root():
    assert wedge(leaf(1, 9, 9), leaf(2, 9, 9)) == 1
    assert wedge(leaf(1), leaf(2)) == 1


def test_wedge_mismatched_depth_raises():
    with pytest.raises(ValueError):
        wedge(leaf(1, 2), leaf(1, 2, 3))


def test_wedge_matches_set_oracle_exhaustively():
    lv = leaves(3, 3)
    for a, b in itertools.combinations(lv, 2):
        assert wedge(a, b) == len(set(path(a)) & set(path(b)))


def test_wedge_symmetry_and_bounds():
    lv = leaves(2, 4)
    for a, b in itertools.product(lv, repeat=2):
        w = wedge(a, b)
        assert w == wedge(b, a)
        assert 1 <= w <= min(len(path(a)), len(path(b)))


def test_wedge_ultrametric_property_on_leaves():
    lv = leaves(3, 2)
    for a, b, c in itertools.product(lv, repeat=3):
        assert wedge(a, b) >= min(wedge(a, c), wedge(c, b))


def test_product_path_single_component():
    pv = ProductVertex((leaf(1, 2),))
    pp = product_path(pv)
    assert len(pp) == 3
    assert [p[0].coords for p in pp] == [(), (1,), (1, 2)]


def test_product_path_two_components():
    pv = ProductVertex((leaf(1), leaf(2, 2)))
    pp = product_path(pv)
    oracle = list(itertools.product(path(leaf(1)), path(leaf(2, 2))))
    assert pp == oracle
    assert len(pp) == 2 * 3


def test_product_path_of_roots():
    pv = ProductVertex((root(1), root(2)))
    assert product_path(pv) == [(root(1), root(2))]


def test_leaves_depth_one():
    assert [v.coords for v in leaves(1, 3)] == [(1,), (2,), (3,)]


def test_leaves_lexicographic():
    assert [v.coords for v in leaves(2, 2)] == [(1, 1), (1, 2), (2, 1), (2, 2)]


def test_leaves_count():
    assert len(leaves(3, 4)) == 4**3


def test_leaves_cap_guard():
    with pytest.raises(ValueError):
        leaves(10, 100, cap=10_000)


def test_vertex_validation():
    with pytest.raises(ValueError):
        TreeVertex((0,), 2)
    with pytest.raises(ValueError):
        TreeVertex((1, 1, 1), 2)
    with pytest.raises(ValueError):
        TreeVertex((), 0)


def test_encode_decode_round_trip():
    for v in vertices(3, 3):
        assert decode_vertex(encode_vertex(v), 3) == v
    assert encode_vertex(root(5)) == "0"
    assert encode_vertex(leaf(1, 2, 3)) == "3/1/2/3"


def test_internal_vertices_counts():
    assert len(internal_vertices(2, 3)) == 1 + 3
    assert len(vertices(2, 3)) == 1 + 3 + 9


def test_product_leaves_count_and_order():
    pls = product_leaves((1, 2), (2, 2))
    assert len(pls) == 2 * 4
    assert pls[0].parts[0].coords == (1,)
    assert pls[0].parts[1].coords == (1, 1)
    assert pls[-1].parts[0].coords == (2,)
    assert pls[-1].parts[1].coords == (2, 2)


def test_leaf_coords_matches_leaves():
    lc = leaf_coords(2, 3)
    assert lc.shape == (9, 2)
    assert [tuple(row) for row in lc] == [v.coords for v in leaves(2, 3)]


def test_wedge_matrix_matches_pairwise():
    lv = leaves(2, 3)
    coords = np.array([v.coords for v in lv])
    w = wedge_matrix(coords)
    for i, a in enumerate(lv):
        for j, b in enumerate(lv):
            assert w[i, j] == wedge(a, b)
