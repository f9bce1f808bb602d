"""Deterministic uniform fields on tree vertices and sigma-driven samplers.

Randomness is counter-based: the value attached to a vertex is a fixed
avalanche hash of (seed, role, vertex), mapped to [0,1) with 53-bit
precision.  That makes sampling order-independent, parallel-safe and stable
under truncation growth: the value at a vertex never depends on how much of
the tree is materialized around it, and whole arrays are reproducible
bit-for-bit from the seed alone.

The mixing function is the splitmix64 finalizer; its constants are frozen
below and must never change, since every stored array and manifest depends
on them:

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

A vertex is absorbed as the word sequence (depth, c1, ..., cd), one such
block per component for product vertices; this mirrors the canonical string
encoding.  Distinct roles ("v", "u", "v^7", ...) give independent streams
over the same vertices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import prod
from typing import Callable, Mapping

import numpy as np
import scipy.stats

from .tree import ProductVertex, TreeVertex

__all__ = [
    "UniformField",
    "IField",
    "DistSpec",
    "SigmaModel",
    "derive_seed",
    "field_value",
    "sample_array",
    "sample_multi",
    "sample_ah",
    "ifield_value",
    "uniform_ifield",
    "ifield_truncation_values",
    "sample_conditional",
    "sample_pair",
    "path_matrix",
    "product_path_matrix",
]

_U64 = np.uint64
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)
_GOLD = 0x9E3779B97F4A7C15
_MASK = 0xFFFFFFFFFFFFFFFF


def _mix(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; operates on uint64 arrays (wrap-around multiply)
    z = (z ^ (z >> _U64(30))) * _M1
    z = (z ^ (z >> _U64(27))) * _M2
    return z ^ (z >> _U64(31))


@lru_cache(maxsize=65536)
def _role_key(role: str) -> int:
    data = role.encode("utf-8")
    h = _mix(np.array([(_GOLD ^ len(data)) & _MASK], dtype=_U64))
    for b in data:
        h = _mix(h ^ _U64(b))
    return int(h[0])


def _init_state(seed: int, role: str) -> np.ndarray:
    s = np.array([(int(seed) ^ _GOLD) & _MASK], dtype=_U64)
    return _mix(_mix(s) ^ _U64(_role_key(role)))


def _hash_words(h0: np.ndarray, words: np.ndarray) -> np.ndarray:
    """Fold word columns into states ``h0`` (K,), words (V, L) -> floats (K, V)."""
    h = np.broadcast_to(h0[:, None], (h0.shape[0], words.shape[0])).copy()
    for col in range(words.shape[1]):
        h = _mix(h ^ words[:, col])
    return (h >> _U64(11)).astype(np.float64) * 2.0**-53


def derive_seed(seed: int, label: str, index: int = 0) -> int:
    """A fresh 64-bit seed, deterministic in (seed, label, index)."""
    h = _mix(_init_state(seed, "derive:" + label) ^ _U64(index & _MASK))
    return int(h[0])


def _vertex_words(v: TreeVertex | ProductVertex) -> np.ndarray:
    parts = v.parts if isinstance(v, ProductVertex) else (v,)
    seq: list[int] = []
    for p in parts:
        seq.append(p.depth)
        seq.extend(p.coords)
    return np.array([seq], dtype=_U64)


def _coord_grid(depth: int, m: int) -> np.ndarray:
    """(m^depth, depth) coordinate rows in lexicographic order."""
    if depth == 0:
        return np.empty((1, 0), dtype=_U64)
    grids = np.meshgrid(*([np.arange(1, m + 1, dtype=_U64)] * depth), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, depth)


def _level_words(depth: int, m: int) -> np.ndarray:
    grid = _coord_grid(depth, m)
    head = np.full((len(grid), 1), depth, dtype=_U64)
    return np.hstack([head, grid])


def _product_level_words(
    depth_tuple: tuple[int, ...], shape: tuple[int, ...]
) -> np.ndarray:
    """Word rows for all product vertices at one depth tuple, first part slowest."""
    blocks = [_level_words(d_i, m_i) for d_i, m_i in zip(depth_tuple, shape)]
    sizes = [len(b) for b in blocks]
    out = []
    for i, b in enumerate(blocks):
        after = prod(sizes[i + 1 :])
        before = prod(sizes[:i])
        out.append(np.tile(np.repeat(b, after, axis=0), (before, 1)))
    return np.hstack(out)


@dataclass(frozen=True)
class UniformField:
    """A deterministic i.i.d.-uniform surrogate indexed by tree vertices.

    ``value`` is a pure function of (seed, role, vertex); distinct roles are
    independent streams.  Values lie in [0, 1).
    """

    seed: int
    role: str = "v"

    def value(self, v: TreeVertex | ProductVertex) -> float:
        return float(_hash_words(_init_state(self.seed, self.role), _vertex_words(v))[0, 0])

    def values(self, vs) -> np.ndarray:
        """Batch evaluation; vertices may have mixed depths."""
        h0 = _init_state(self.seed, self.role)
        out = np.empty(len(vs))
        groups: dict[tuple, list[int]] = {}
        rows: dict[tuple, list[np.ndarray]] = {}
        for i, v in enumerate(vs):
            w = _vertex_words(v)
            key = (w.shape[1],)
            groups.setdefault(key, []).append(i)
            rows.setdefault(key, []).append(w[0])
        for key, idx in groups.items():
            vals = _hash_words(h0, np.array(rows[key], dtype=_U64))[0]
            out[np.array(idx)] = vals
        return out


def field_value(f: UniformField, v: TreeVertex | ProductVertex) -> float:
    """Functional form of :meth:`UniformField.value`."""
    return f.value(v)


# -- distributions on [0,1] for depth-keyed fields ---------------------------


@dataclass(frozen=True)
class DistSpec:
    """A distribution on [0,1]: a named family plus frozen parameters.

    Families: ``uniform(lo, hi)``, ``point(c)``, ``discrete(locs, weights)``,
    ``beta(a, b)``, ``table(qs, xs)`` (a quantile table interpolated
    linearly).  Values are produced by pushing base uniforms through the
    quantile function.
    """

    family: str
    params: tuple = ()

    def __post_init__(self):
        fam, p = self.family, self.params
        if fam == "uniform":
            lo, hi = p
            if not (0.0 <= lo < hi <= 1.0):
                raise ValueError(f"uniform needs 0 <= lo < hi <= 1, got {p}")
        elif fam == "point":
            (c,) = p
            if not 0.0 <= c <= 1.0:
                raise ValueError(f"point mass must lie in [0,1], got {c}")
        elif fam == "discrete":
            locs, weights = p
            if len(locs) != len(weights) or not locs:
                raise ValueError("discrete needs matching nonempty locs/weights")
            if any(w <= 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-12:
                raise ValueError("discrete weights must be positive and sum to 1")
            if list(locs) != sorted(locs):
                raise ValueError("discrete locations must be sorted")
        elif fam == "beta":
            a, b = p
            if a <= 0 or b <= 0:
                raise ValueError("beta parameters must be positive")
        elif fam == "table":
            qs, xs = p
            if len(qs) != len(xs) or len(qs) < 2:
                raise ValueError("table needs >= 2 (q, x) pairs")
            if list(qs) != sorted(qs) or qs[0] != 0.0 or qs[-1] != 1.0:
                raise ValueError("table q-grid must be sorted from 0 to 1")
            if list(xs) != sorted(xs):
                raise ValueError("table x-values must be nondecreasing")
        else:
            raise ValueError(f"unknown distribution family {fam!r}")

    def quantile(self, u):
        u = np.asarray(u, dtype=np.float64)
        fam, p = self.family, self.params
        if fam == "uniform":
            lo, hi = p
            return lo + u * (hi - lo)
        if fam == "point":
            return np.full_like(u, p[0])
        if fam == "discrete":
            locs, weights = p
            cum = np.cumsum(weights)
            cum[-1] = 1.0
            idx = np.searchsorted(cum, u, side="left")
            return np.asarray(locs, dtype=np.float64)[np.minimum(idx, len(locs) - 1)]
        if fam == "beta":
            return scipy.stats.beta.ppf(u, *p)
        qs, xs = p
        return np.interp(u, qs, xs)

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        fam, p = self.family, self.params
        if fam == "uniform":
            lo, hi = p
            return np.clip((x - lo) / (hi - lo), 0.0, 1.0)
        if fam == "point":
            return (x >= p[0]).astype(np.float64)
        if fam == "discrete":
            locs, weights = p
            cum = np.concatenate([[0.0], np.cumsum(weights)])
            cum[-1] = 1.0
            return cum[np.searchsorted(locs, x, side="right")]
        if fam == "beta":
            return scipy.stats.beta.cdf(x, *p)
        qs, xs = p
        return np.interp(x, xs, qs)

    def cdf_left(self, x):
        """Left limit of the CDF (differs from ``cdf`` only at atoms)."""
        x = np.asarray(x, dtype=np.float64)
        fam, p = self.family, self.params
        if fam == "point":
            return (x > p[0]).astype(np.float64)
        if fam == "discrete":
            locs, weights = p
            cum = np.concatenate([[0.0], np.cumsum(weights)])
            cum[-1] = 1.0
            return cum[np.searchsorted(locs, x, side="left")]
        return self.cdf(x)

    @property
    def is_uniform01(self) -> bool:
        return self.family == "uniform" and self.params == (0.0, 1.0)


UNIFORM01 = DistSpec("uniform", (0.0, 1.0))


def _normalize_level_key(key) -> tuple[int, ...]:
    return (key,) if isinstance(key, int) else tuple(key)


@dataclass(frozen=True)
class IField:
    """A vertex-indexed independent field whose law depends only on depth.

    ``level_dists`` maps each depth (an int for one tree, a depth tuple for
    products) to the :class:`DistSpec` shared by all vertices at that depth.
    Values are the base uniform field pushed through the level's quantile
    function, so independence across vertices is inherited from the base.
    """

    seed: int
    level_dists: Mapping
    role: str = "u"

    def __post_init__(self):
        norm = {_normalize_level_key(k): v for k, v in self.level_dists.items()}
        object.__setattr__(self, "level_dists", norm)

    def spec_at(self, depth_key) -> DistSpec:
        key = _normalize_level_key(depth_key)
        try:
            return self.level_dists[key]
        except KeyError:
            raise ValueError(f"no distribution spec declared for depth {key}") from None

    def base(self) -> UniformField:
        return UniformField(self.seed, role=self.role)

    def value(self, v: TreeVertex | ProductVertex) -> float:
        if isinstance(v, ProductVertex):
            key = v.depths
        else:
            key = (v.depth,)
        spec = self.spec_at(key)
        return float(spec.quantile(self.base().value(v)))


def ifield_value(f: IField, v: TreeVertex | ProductVertex) -> float:
    return f.value(v)


def uniform_ifield(seed: int, depths: int | tuple[int, ...], role: str = "u") -> IField:
    """An I-field that is uniform on [0,1] at every depth of the index set."""
    if isinstance(depths, int):
        keys = [(d,) for d in range(depths + 1)]
    else:
        keys = list(itertools.product(*(range(r_i + 1) for r_i in depths)))
    return IField(seed, {k: UNIFORM01 for k in keys}, role=role)


def ifield_truncation_values(
    f: IField, depths: int | tuple[int, ...], shape: int | tuple[int, ...]
):
    """Realize the field on a whole truncation.

    Returns ``(by_depth, by_vertex)``: values grouped by depth key, and a
    flat vertex -> value mapping in deterministic order.
    """
    if isinstance(depths, int):
        depths_t, shape_t = (depths,), (shape if isinstance(shape, int) else shape[0],)
        single = True
    else:
        depths_t, shape_t = tuple(depths), tuple(shape)
        single = False
    base = f.base()
    h0 = _init_state(base.seed, base.role)
    by_depth: dict[tuple[int, ...], np.ndarray] = {}
    by_vertex: dict = {}
    for dt in itertools.product(*(range(r_i + 1) for r_i in depths_t)):
        words = _product_level_words(dt, shape_t)
        u = _hash_words(h0, words)[0]
        vals = np.asarray(f.spec_at(dt).quantile(u), dtype=np.float64)
        by_depth[dt] = vals
        per_part = [
            _level_vertices(d_i, m_i, r_i)
            for d_i, m_i, r_i in zip(dt, shape_t, depths_t)
        ]
        for val, parts in zip(vals, itertools.product(*per_part)):
            v = parts[0] if single else ProductVertex(tuple(parts))
            by_vertex[v] = float(val)
    if single:
        by_depth = {d[0]: v for d, v in by_depth.items()}
    return by_depth, by_vertex


def _level_vertices(depth: int, m: int, r: int) -> list[TreeVertex]:
    return [
        TreeVertex(c, r) for c in itertools.product(range(1, m + 1), repeat=depth)
    ]


# -- sigma models and samplers -----------------------------------------------


@dataclass(frozen=True)
class SigmaModel:
    """A measurable map from path-indexed values to [0,1].

    ``fn`` is vectorized: it receives an (N, arity) matrix whose columns are
    the path values in the frozen ordering (root to leaf for one tree;
    depth-tuple lexicographic for products; field block then replica or
    auxiliary block for two-block forms) and returns N values in [0,1].
    """

    name: str
    arity: int
    fn: Callable[[np.ndarray], np.ndarray]
    params: tuple = ()

    def eval(self, inputs: np.ndarray) -> np.ndarray:
        inputs = np.asarray(inputs, dtype=np.float64)
        if inputs.ndim != 2 or inputs.shape[1] != self.arity:
            raise ValueError(
                f"model {self.name!r} expects (N, {self.arity}) inputs, "
                f"got shape {inputs.shape}"
            )
        out = np.asarray(self.fn(inputs), dtype=np.float64)
        if out.shape != (inputs.shape[0],):
            raise ValueError(f"model {self.name!r} returned shape {out.shape}")
        if out.size and (out.min() < -1e-9 or out.max() > 1.0 + 1e-9):
            raise ValueError(f"model {self.name!r} produced values outside [0,1]")
        return np.clip(out, 0.0, 1.0)


def path_matrix(seed: int, role: str, r: int, m: int) -> np.ndarray:
    """Field values along the root path of every truncation leaf.

    Shape (m^r, r+1); rows follow the lexicographic leaf order, column d
    holds the depth-d prefix value.
    """
    h0 = _init_state(seed, role)
    cols = []
    for d in range(r + 1):
        vals = _hash_words(h0, _level_words(d, m))[0]
        cols.append(np.repeat(vals, m ** (r - d)))
    return np.column_stack(cols)


def product_path_matrix(
    seed: int, role: str, depths: tuple[int, ...], shape: tuple[int, ...]
) -> np.ndarray:
    """Product-path field values for every product leaf.

    Shape (prod m_i^r_i, prod (r_i+1)); columns are depth tuples in
    lexicographic order, rows the lexicographic product-leaf order.
    """
    h0 = _init_state(seed, role)
    full_shape = tuple(
        m_i for r_i, m_i in zip(depths, shape) for _ in range(r_i)
    )
    cols = []
    for dt in itertools.product(*(range(r_i + 1) for r_i in depths)):
        vals = _hash_words(h0, _product_level_words(dt, shape))[0]
        grouped = []
        for d_i, m_i, r_i in zip(dt, shape, depths):
            grouped.extend([m_i] * d_i + [1] * (r_i - d_i))
        expanded = np.broadcast_to(vals.reshape(grouped), full_shape)
        cols.append(expanded.reshape(-1))
    return np.column_stack(cols)


def sample_array(model: SigmaModel, r: int, m: int, seed: int, role: str = "v") -> np.ndarray:
    """Array over the m^r truncation leaves, X = model(path values).

    Entries are indexed lexicographically; with a fixed seed the result is
    identical across runs, and the array over {1..m}^r is entry-for-entry a
    sub-array of the one over any larger {1..m'}^r.
    """
    if model.arity != r + 1:
        raise ValueError(f"model arity {model.arity} != r+1 = {r + 1}")
    return model.eval(path_matrix(seed, role, r, m))


def sample_multi(
    model: SigmaModel,
    depths: tuple[int, ...],
    shape: tuple[int, ...],
    seed: int,
    role: str = "v",
) -> np.ndarray:
    """Array over product-truncation leaves, X = model(product path values)."""
    if len(depths) != len(shape):
        raise ValueError("depths and shape must have equal length")
    arity = prod(r_i + 1 for r_i in depths)
    if model.arity != arity:
        raise ValueError(f"model arity {model.arity} != product path size {arity}")
    return model.eval(product_path_matrix(seed, role, tuple(depths), tuple(shape)))


def sample_ah(model: SigmaModel, r: int, m: int, n: int, seed: int) -> np.ndarray:
    """Array over {1..m}^r x {1..n}: shared tree field plus per-column replicas.

    Column i is model(v-path, v^i-path); the shared field uses role "v" and
    replica i the role "v^i".  Shape (m^r, n).
    """
    if model.arity != 2 * (r + 1):
        raise ValueError(f"model arity {model.arity} != 2(r+1) = {2 * (r + 1)}")
    shared = path_matrix(seed, "v", r, m)
    h0 = np.concatenate([_init_state(seed, f"v^{i}") for i in range(1, n + 1)])
    levels = [
        np.repeat(_hash_words(h0, _level_words(d, m)), m ** (r - d), axis=1)
        for d in range(r + 1)
    ]
    n_leaves = m**r
    inputs = np.empty((n * n_leaves, 2 * (r + 1)))
    inputs[:, : r + 1] = np.tile(shared, (n, 1))
    for d, lv in enumerate(levels):
        inputs[:, r + 1 + d] = lv.reshape(-1)
    return model.eval(inputs).reshape(n, n_leaves).T


def _ifield_path_matrix(f: IField, depths: tuple[int, ...], shape: tuple[int, ...]) -> np.ndarray:
    base = product_path_matrix(f.seed, f.role, depths, shape)
    cols = []
    for j, dt in enumerate(itertools.product(*(range(r_i + 1) for r_i in depths))):
        cols.append(np.asarray(f.spec_at(dt).quantile(base[:, j]), dtype=np.float64))
    return np.column_stack(cols)


def sample_conditional(
    model: SigmaModel,
    u_field: IField,
    depths: int | tuple[int, ...],
    shape: int | tuple[int, ...],
    seed: int,
):
    """Sample X = model(u-path, v-path) and emit the realized u-values.

    The first input block is the depth-keyed field along the product path,
    the second a fresh uniform field (role "v", derived from ``seed``)
    independent of it.  Returns ``(u_by_vertex, X)`` where ``u_by_vertex``
    maps every vertex of the truncation to its realized value.
    """
    depths_t = (depths,) if isinstance(depths, int) else tuple(depths)
    shape_t = (shape,) if isinstance(shape, int) else tuple(shape)
    path_size = prod(r_i + 1 for r_i in depths_t)
    if model.arity != 2 * path_size:
        raise ValueError(f"model arity {model.arity} != 2 * path size {path_size}")
    u_cols = _ifield_path_matrix(u_field, depths_t, shape_t)
    v_cols = product_path_matrix(seed, "v", depths_t, shape_t)
    x = model.eval(np.hstack([u_cols, v_cols]))
    _, u_by_vertex = ifield_truncation_values(u_field, depths, shape)
    return u_by_vertex, x


def sample_pair(
    model_y: SigmaModel,
    model_x: SigmaModel,
    depths: int | tuple[int, ...],
    shape: int | tuple[int, ...],
    seed: int,
):
    """Jointly exchangeable pair (Y, X) driven by independent uniform fields.

    Y = model_y(u-path) and X = model_x(u-path, v-path) with the same
    realized u field in both, so the coupling between Y and X flows entirely
    through it.
    """
    depths_t = (depths,) if isinstance(depths, int) else tuple(depths)
    shape_t = (shape,) if isinstance(shape, int) else tuple(shape)
    path_size = prod(r_i + 1 for r_i in depths_t)
    if model_y.arity != path_size:
        raise ValueError(f"Y-model arity {model_y.arity} != path size {path_size}")
    if model_x.arity != 2 * path_size:
        raise ValueError(f"X-model arity {model_x.arity} != 2 * path size {path_size}")
    u_cols = product_path_matrix(seed, "u", depths_t, shape_t)
    v_cols = product_path_matrix(seed, "v", depths_t, shape_t)
    y = model_y.eval(u_cols)
    x = model_x.eval(np.hstack([u_cols, v_cols]))
    return y, x
