"""Index algebra for finite-depth infinitary rooted trees and their products.

A depth-``r`` tree has vertices identified with tuples of positive integers
of length 0..r; the empty tuple is the root and length-``r`` tuples are the
leaves.  Every vertex has countably many children (append one more positive
integer), so the tree is never materialized: all operations act on explicit
finite vertices, and the finite truncation ``{1..m}^r`` is generated on
demand.

The key combinatorial statistic is the *wedge* of two vertices: the number
of vertices shared by their root paths, i.e. one plus the length of their
longest common coordinate prefix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TreeVertex",
    "ProductVertex",
    "root",
    "leaf",
    "path",
    "wedge",
    "product_path",
    "leaves",
    "vertices",
    "internal_vertices",
    "product_leaves",
    "encode_vertex",
    "decode_vertex",
    "leaf_coords",
    "wedge_matrix",
    "DEFAULT_CELL_CAP",
]

# Guard against accidentally materializing huge truncations.
DEFAULT_CELL_CAP = 1_000_000


@dataclass(frozen=True, slots=True)
class TreeVertex:
    """A vertex of a depth-``r`` tree: a path of positive integer coordinates.

    ``coords`` of length d identifies a vertex at depth d (0 = root,
    r = leaf).  Vertices from trees of different depth never compare equal.
    """

    coords: tuple[int, ...]
    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"tree depth must be >= 1, got {self.r}")
        if len(self.coords) > self.r:
            raise ValueError(
                f"vertex depth {len(self.coords)} exceeds tree depth {self.r}"
            )
        if any(c < 1 for c in self.coords):
            raise ValueError(f"coordinates must be positive, got {self.coords}")

    @property
    def depth(self) -> int:
        return len(self.coords)

    @property
    def is_leaf(self) -> bool:
        return len(self.coords) == self.r

    @property
    def is_root(self) -> bool:
        return not self.coords

    def parent(self) -> "TreeVertex":
        if not self.coords:
            raise ValueError("the root has no parent")
        return TreeVertex(self.coords[:-1], self.r)

    def child(self, n: int) -> "TreeVertex":
        return TreeVertex(self.coords + (n,), self.r)

    def prefix(self, depth: int) -> "TreeVertex":
        return TreeVertex(self.coords[:depth], self.r)

    def encode(self) -> str:
        return encode_vertex(self)

    def __repr__(self):
        inner = ",".join(map(str, self.coords)) if self.coords else "root"
        return f"TreeVertex({inner}; r={self.r})"


@dataclass(frozen=True, slots=True)
class ProductVertex:
    """A vertex of a product of trees: one component vertex per factor."""

    parts: tuple[TreeVertex, ...]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("a product vertex needs at least one component")

    @property
    def depths(self) -> tuple[int, ...]:
        """Depth of each component (the depth tuple)."""
        return tuple(p.depth for p in self.parts)

    @property
    def tree_depths(self) -> tuple[int, ...]:
        return tuple(p.r for p in self.parts)

    def encode(self) -> str:
        return "|".join(p.encode() for p in self.parts)


def root(r: int) -> TreeVertex:
    return TreeVertex((), r)


def leaf(*coords: int, r: int | None = None) -> TreeVertex:
    """Convenience constructor: ``leaf(1, 2, 3)`` is a depth-3 leaf."""
    return TreeVertex(tuple(coords), len(coords) if r is None else r)


def path(v: TreeVertex) -> list[TreeVertex]:
    """Root path of ``v``: [root, (n1), (n1,n2), ..., v], length depth+1."""
    return [TreeVertex(v.coords[:d], v.r) for d in range(v.depth + 1)]


def wedge(a: TreeVertex, b: TreeVertex) -> int:
    """Number of vertices common to the root paths of ``a`` and ``b``.

    Equals 1 + the length of the longest common coordinate prefix; in
    particular ``wedge(a, a) == a.depth + 1`` and any two vertices share at
    least the root.
    """
    if a.r != b.r:
        raise ValueError(f"vertices index different trees (r={a.r} vs r={b.r})")
    k = 0
    for x, y in zip(a.coords, b.coords):
        if x != y:
            break
        k += 1
    return k + 1


def product_path(v: ProductVertex) -> list[tuple[TreeVertex, ...]]:
    """Cartesian product of the component root paths.

    Entries are ordered by their depth tuple, lexicographically with the
    last component varying fastest; this is the frozen input ordering for
    every sampler that consumes product paths.  Cardinality is
    ``prod(depth_i + 1)``.
    """
    return list(itertools.product(*(path(p) for p in v.parts)))


def _check_cap(n_cells: int, cap: int) -> None:
    if n_cells > cap:
        raise ValueError(
            f"truncation has {n_cells} cells, exceeding the cap of {cap}"
        )


def leaves(r: int, m: int, cap: int = DEFAULT_CELL_CAP) -> list[TreeVertex]:
    """All m^r leaves of the ``{1..m}^r`` truncation in lexicographic order."""
    if r < 1 or m < 1:
        raise ValueError("r and m must be >= 1")
    _check_cap(m**r, cap)
    rng = range(1, m + 1)
    return [TreeVertex(c, r) for c in itertools.product(rng, repeat=r)]


def vertices(r: int, m: int, cap: int = DEFAULT_CELL_CAP) -> list[TreeVertex]:
    """All vertices of the truncated tree, by depth then lexicographically."""
    if r < 1 or m < 1:
        raise ValueError("r and m must be >= 1")
    _check_cap(sum(m**d for d in range(r + 1)), cap)
    out = []
    for d in range(r + 1):
        rng = range(1, m + 1)
        out.extend(TreeVertex(c, r) for c in itertools.product(rng, repeat=d))
    return out


def internal_vertices(r: int, m: int, cap: int = DEFAULT_CELL_CAP) -> list[TreeVertex]:
    """Vertices of depth < r of the truncation (the ones that carry children)."""
    if r < 1 or m < 1:
        raise ValueError("r and m must be >= 1")
    _check_cap(sum(m**d for d in range(r)), cap)
    out = []
    for d in range(r):
        rng = range(1, m + 1)
        out.extend(TreeVertex(c, r) for c in itertools.product(rng, repeat=d))
    return out


def product_leaves(
    depths: tuple[int, ...], shape: tuple[int, ...], cap: int = DEFAULT_CELL_CAP
) -> list[ProductVertex]:
    """All leaves of the product truncation ``{1..m_1}^r_1 x ... x {1..m_l}^r_l``.

    Lexicographic in the concatenated coordinate tuple, first component
    slowest.
    """
    if len(depths) != len(shape):
        raise ValueError("depths and shape must have equal length")
    n_cells = 1
    for r_i, m_i in zip(depths, shape):
        if r_i < 1 or m_i < 1:
            raise ValueError("all depths and shape entries must be >= 1")
        n_cells *= m_i**r_i
    _check_cap(n_cells, cap)
    per_part = [leaves(r_i, m_i, cap=cap) for r_i, m_i in zip(depths, shape)]
    return [ProductVertex(parts) for parts in itertools.product(*per_part)]


def encode_vertex(v: TreeVertex) -> str:
    """Canonical string key: depth then coordinates, slash-separated.

    The root encodes as ``"0"``, the leaf (1,2,3) as ``"3/1/2/3"``.  Used
    for CSV columns, JSON keys and seed derivation.
    """
    if not v.coords:
        return "0"
    return "/".join([str(v.depth)] + [str(c) for c in v.coords])


def decode_vertex(s: str, r: int) -> TreeVertex:
    """Inverse of :func:`encode_vertex` for a depth-``r`` tree."""
    parts = s.split("/")
    d = int(parts[0])
    coords = tuple(int(c) for c in parts[1:])
    if len(coords) != d:
        raise ValueError(f"malformed vertex encoding {s!r}")
    return TreeVertex(coords, r)


def leaf_coords(r: int, m: int) -> np.ndarray:
    """Integer coordinate matrix of shape (m^r, r) for the truncation leaves.

    Row order matches :func:`leaves`.
    """
    grids = np.meshgrid(*([np.arange(1, m + 1)] * r), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, r)


def wedge_matrix(coords: np.ndarray) -> np.ndarray:
    """Pairwise wedge statistics of same-depth vertices given as coord rows."""
    n, d = coords.shape
    w = np.ones((n, n), dtype=np.int64)
    agree = np.ones((n, n), dtype=bool)
    for k in range(d):
        agree &= coords[:, None, k] == coords[None, :, k]
        w += agree
    return w
