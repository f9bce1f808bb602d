"""Tree-structure-preserving leaf bijections and their product versions.

A leaf bijection preserves the wedge statistic exactly when it factors into
independent child rearrangements below each internal vertex.  That
factorization is the storage format here: a finitely supported table mapping
internal vertices to permutations of the positive integers, identity
everywhere else.  Membership in the structure-preserving group then holds by
construction, and the table composes and inverts cheaply.

The table is keyed by the *source-side* vertex: applying the map to
``(n1, ..., nd)`` rewrites coordinate k through the permutation stored at the
source prefix ``(n1, ..., n_{k-1})``.  Composition and inversion below track
the key relabeling this convention requires.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tree import TreeVertex, internal_vertices, wedge_matrix

__all__ = [
    "HPerm",
    "ProductHPerm",
    "identity_hperm",
    "random_hperm",
    "random_product_hperm",
    "verify_wedge_preservation",
    "hperm_to_json_obj",
    "hperm_from_json_obj",
]


# -- finitely supported permutations of {1, 2, ...} -------------------------
#
# Stored as a tuple of the images of 1..k for some support size k; identity
# beyond k.  Normal form trims trailing fixed points, so the identity is ().


def _perm_normalize(images: tuple[int, ...]) -> tuple[int, ...]:
    k = len(images)
    while k > 0 and images[k - 1] == k:
        k -= 1
    return tuple(images[:k])


def _perm_check(images: tuple[int, ...]) -> None:
    if sorted(images) != list(range(1, len(images) + 1)):
        raise ValueError(f"not a permutation of 1..{len(images)}: {images}")


def _perm_apply(images: tuple[int, ...], n: int) -> int:
    return images[n - 1] if n <= len(images) else n


def _perm_compose(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    """Images of a∘b, i.e. n -> a(b(n))."""
    k = max(len(a), len(b))
    return _perm_normalize(
        tuple(_perm_apply(a, _perm_apply(b, n)) for n in range(1, k + 1))
    )


def _perm_invert(images: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(images)
    for n, image in enumerate(images, start=1):
        inv[image - 1] = n
    return tuple(inv)


# -- structure-preserving maps ----------------------------------------------


@dataclass(frozen=True)
class HPerm:
    """A wedge-preserving bijection of the depth-``r`` tree, in table form.

    ``table`` maps internal vertices (depth < r) to finitely supported
    permutations; vertices absent from the table act as the identity on
    their children.  Instances are immutable and safe to share.
    """

    r: int
    table: dict[TreeVertex, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[TreeVertex, tuple[int, ...]] = {}
        for v, images in self.table.items():
            if v.r != self.r:
                raise ValueError(f"table key {v} does not index a depth-{self.r} tree")
            if v.depth >= self.r:
                raise ValueError(f"table key {v} is not an internal vertex")
            _perm_check(images)
            images = _perm_normalize(tuple(images))
            if images:
                clean[v] = images
        object.__setattr__(self, "table", clean)

    def apply(self, v: TreeVertex) -> TreeVertex:
        """Image of a vertex (leaf or internal: the extension to the tree)."""
        if v.r != self.r:
            raise ValueError(f"vertex {v} does not index a depth-{self.r} tree")
        out = []
        for k, n in enumerate(v.coords):
            pi = self.table.get(TreeVertex(v.coords[:k], self.r))
            out.append(_perm_apply(pi, n) if pi is not None else n)
        return TreeVertex(tuple(out), self.r)

    __call__ = apply

    def compose(self, other: "HPerm") -> "HPerm":
        """The map v -> self(other(v))."""
        if self.r != other.r:
            raise ValueError("cannot compose maps of different tree depth")
        other_inv = other.invert()
        keys = set(other.table)
        keys.update(other_inv.apply(v) for v in self.table)
        table = {}
        for v in keys:
            outer = self.table.get(other.apply(v), ())
            inner = other.table.get(v, ())
            table[v] = _perm_compose(outer, inner)
        return HPerm(self.r, table)

    def invert(self) -> "HPerm":
        """The inverse map; table keys move to their images under self."""
        return HPerm(
            self.r, {self.apply(v): _perm_invert(pi) for v, pi in self.table.items()}
        )

    def is_identity(self) -> bool:
        return not self.table

    def permuted_leaf_indices(self, m: int) -> np.ndarray:
        """Index array ``idx`` with ``Y = X[idx]`` realizing ``Y_a = X[self(a)]``.

        Both arrays are over the ``{1..m}^r`` leaves in lexicographic order;
        requires the images of the truncation leaves to stay inside it.
        """
        n = m**self.r
        idx = np.empty(n, dtype=np.intp)
        strides = [m**k for k in range(self.r - 1, -1, -1)]
        for pos, v in enumerate(_iter_leaves(self.r, m)):
            img = self.apply(v).coords
            flat = 0
            for c, s in zip(img, strides):
                if c > m:
                    raise ValueError(
                        f"image {img} leaves the {{1..{m}}}^{self.r} truncation"
                    )
                flat += (c - 1) * s
            idx[pos] = flat
        return idx


def _iter_leaves(r: int, m: int):
    import itertools

    for coords in itertools.product(range(1, m + 1), repeat=r):
        yield TreeVertex(coords, r)


@dataclass(frozen=True)
class ProductHPerm:
    """One component map per factor of a product tree."""

    parts: tuple[HPerm, ...]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("a product map needs at least one component")

    @property
    def depths(self) -> tuple[int, ...]:
        return tuple(p.r for p in self.parts)

    def apply(self, pv) -> object:
        from .tree import ProductVertex

        if len(pv.parts) != len(self.parts):
            raise ValueError("component count mismatch")
        return ProductVertex(tuple(p.apply(v) for p, v in zip(self.parts, pv.parts)))

    __call__ = apply


def identity_hperm(r: int) -> HPerm:
    return HPerm(r, {})


def random_hperm(r: int, m: int, seed: int) -> HPerm:
    """Independent uniform child permutations at every internal vertex.

    Deterministic in ``seed``; the permutation at each vertex is the ranking
    of that vertex's children under the counter-based uniform field, so the
    result does not depend on platform or iteration order.
    """
    from .fields import UniformField

    f = UniformField(seed, role="hperm")
    internal = internal_vertices(r, m)
    children = [v.child(n) for v in internal for n in range(1, m + 1)]
    u = f.values(children).reshape(len(internal), m)
    table = {}
    for v, row in zip(internal, u):
        order = np.argsort(row, kind="stable")
        images = [0] * m
        for rank, child in enumerate(order, start=1):
            images[child] = rank
        table[v] = tuple(images)
    return HPerm(r, table)


def random_product_hperm(depths: tuple[int, ...], shape: tuple[int, ...], seed: int) -> ProductHPerm:
    from .fields import derive_seed

    parts = tuple(
        random_hperm(r_i, m_i, derive_seed(seed, "part", i))
        for i, (r_i, m_i) in enumerate(zip(depths, shape))
    )
    return ProductHPerm(parts)


def verify_wedge_preservation(mapping, leaf_list: list[TreeVertex]) -> bool:
    """True iff the map preserves pairwise wedges on the given leaves.

    ``mapping`` is anything callable on a :class:`TreeVertex` (an
    :class:`HPerm`, or an arbitrary leaf bijection when probing maps outside
    the table form).
    """
    if not leaf_list:
        return True
    src = np.array([v.coords for v in leaf_list], dtype=np.int64)
    img = np.array([mapping(v).coords for v in leaf_list], dtype=np.int64)
    return bool(np.array_equal(wedge_matrix(src), wedge_matrix(img)))


def hperm_to_json_obj(p: HPerm) -> list[dict]:
    """JSON form: one ``{"vertex": key, "perm": images}`` entry per table row."""
    rows = sorted(p.table.items(), key=lambda kv: (kv[0].depth, kv[0].coords))
    return [{"vertex": v.encode(), "perm": list(images)} for v, images in rows]


def hperm_from_json_obj(obj: list[dict], r: int) -> HPerm:
    from .tree import decode_vertex

    table = {
        decode_vertex(row["vertex"], r): tuple(row["perm"]) for row in obj
    }
    return HPerm(r, table)
