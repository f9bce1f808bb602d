"""Built-in array models: exchangeable examples and known violations.

Null scenarios are strict path-function constructions (a fixed measurable
map of the uniform field values along the root path), hence hierarchically
exchangeable by construction.  Each violation breaks that form in exactly
one documented way, so the power of the test that targets it is
attributable to that mechanism.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fields import (
    UNIFORM01,
    SigmaModel,
    UniformField,
    ifield_truncation_values,
    path_matrix,
    sample_ah,
    sample_array,
    uniform_ifield,
)
from .tree import TreeVertex, leaf_coords

__all__ = [
    "ScenarioSpec",
    "ArraySource",
    "builtin",
    "list_scenarios",
    "make_model",
    "make_source",
    "make_level_values",
    "SCENARIO_NAMES",
]


@dataclass(frozen=True)
class ScenarioSpec:
    """Registry entry: construction recipe plus the verdicts it should earn."""

    name: str
    kind: str  # "null" or "violation"
    form: str  # "sigma", "sigma-replica", "custom", "ifield"
    summary: str
    defaults: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)  # test name -> "pass"/"reject"


@dataclass(frozen=True)
class ArraySource:
    """A seeded array generator over a fixed truncation."""

    name: str
    r: int
    m: int
    n: int | None
    sample: Callable[[int], np.ndarray]


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def make_model(name: str, r: int, params: dict | None = None) -> SigmaModel:
    """Instantiate a built-in path-function model for a depth-``r`` tree."""
    params = dict(params or {})
    if name == "uniform-leaf":
        return SigmaModel(name, r + 1, lambda p: p[:, -1])
    if name == "root-constant":
        return SigmaModel(name, r + 1, lambda p: p[:, 0])
    if name == "path-mean":
        return SigmaModel(name, r + 1, lambda p: p.mean(axis=1))
    if name == "product":
        return SigmaModel(name, r + 1, lambda p: p.prod(axis=1))
    if name == "toy-magnetization":
        a = float(params.get("a", 2.0))
        b = float(params.get("b", 1.0))
        k = r + 1

        def fn(p):
            shared = (p[:, :k] - 0.5).sum(axis=1)
            replica = (p[:, k:] - 0.5).sum(axis=1)
            return _sigmoid(a * shared + b * replica)

        return SigmaModel(name, 2 * (r + 1), fn, params=(("a", a), ("b", b)))
    raise ValueError(f"unknown scenario model {name!r}")


def _label_leak_sampler(r: int, m: int, weight: float) -> Callable[[int], np.ndarray]:
    parity = (leaf_coords(r, m)[:, 0] % 2).astype(np.float64)

    def sample(seed: int) -> np.ndarray:
        v = path_matrix(seed, "v", r, m)[:, -1]
        return (1.0 - weight) * v + weight * parity

    return sample


def _sibling_coupled_sampler(r: int, m: int, weight: float) -> Callable[[int], np.ndarray]:
    if r < 2:
        raise ValueError("sibling-coupled needs r >= 2")
    coords = leaf_coords(r, m)
    n_parents = m ** (r - 1)
    parent_idx = np.arange(m**r) // m
    pair_idx = parent_idx // 2
    child_idx = coords[:, -1] - 1
    n_pairs = (n_parents + 1) // 2
    shared_vs = [
        TreeVertex((p + 1, c + 1), 2) for p in range(n_pairs) for c in range(m)
    ]

    def sample(seed: int) -> np.ndarray:
        v = path_matrix(seed, "v", r, m)[:, -1]
        shared = UniformField(seed, role="s").values(shared_vs).reshape(n_pairs, m)
        return (1.0 - weight) * v + weight * shared[pair_idx, child_idx]

    return sample


def _markov_leak_sampler(r: int, m: int) -> Callable[[int], np.ndarray]:
    def sample(seed: int) -> np.ndarray:
        v = path_matrix(seed, "v", r, m)[:, -1].reshape(m ** (r - 1), m)
        out = v.copy()
        out[:, 1:] = 0.5 * (v[:, 1:] + v[:, :-1])
        return out.reshape(-1)

    return sample


def make_source(
    name: str,
    r: int,
    m: int,
    n: int | None = None,
    params: dict | None = None,
) -> ArraySource:
    """Seeded generator for a registered scenario on a given truncation."""
    spec = builtin(name)
    params = {**spec.defaults.get("params", {}), **(params or {})}
    if spec.form == "sigma":
        model = make_model(name, r, params)
        return ArraySource(name, r, m, None, lambda seed: sample_array(model, r, m, seed))
    if spec.form == "sigma-replica":
        if n is None:
            n = spec.defaults.get("n", 20)
        model = make_model(name, r, params)
        return ArraySource(name, r, m, n, lambda seed: sample_ah(model, r, m, n, seed))
    if name == "label-leak":
        w = float(params.get("weight", 0.5))
        return ArraySource(name, r, m, None, _label_leak_sampler(r, m, w))
    if name == "sibling-coupled":
        w = float(params.get("weight", 0.7))
        return ArraySource(name, r, m, None, _sibling_coupled_sampler(r, m, w))
    if name == "markov-leak":
        return ArraySource(name, r, m, None, _markov_leak_sampler(r, m))
    raise ValueError(f"scenario {name!r} does not generate arrays")


def make_level_values(name: str, r: int, m: int, seed: int, params: dict | None = None):
    """Depth-keyed field values plus declared specs, for homogeneity checks."""
    spec = builtin(name)
    params = {**spec.defaults.get("params", {}), **(params or {})}
    by_depth, _ = ifield_truncation_values(uniform_ifield(seed, r), r, m)
    declared = {d: UNIFORM01 for d in range(r + 1)}
    if name == "depth-shift":
        lo = float(params.get("shift", 0.5))
        by_depth = dict(by_depth)
        by_depth[1] = lo + (1.0 - lo) * by_depth[1]
    elif spec.form != "ifield":
        raise ValueError(f"scenario {name!r} does not generate field values")
    return by_depth, declared


_REGISTRY: dict[str, ScenarioSpec] = {}


def _register(spec: ScenarioSpec) -> None:
    _REGISTRY[spec.name] = spec


_register(
    ScenarioSpec(
        name="uniform-leaf",
        kind="null",
        form="sigma",
        summary="value = the leaf's own field value; entries i.i.d. uniform",
        defaults={"r": 2, "m": 8},
        expected={"hexch": "pass", "conditional_iid": "pass", "cond_indep": "pass"},
    )
)
_register(
    ScenarioSpec(
        name="root-constant",
        kind="null",
        form="sigma",
        summary="value = the root field value; the whole array is constant",
        defaults={"r": 2, "m": 8},
        expected={"hexch": "pass", "conditional_iid": "pass", "cond_indep": "pass"},
    )
)
_register(
    ScenarioSpec(
        name="path-mean",
        kind="null",
        form="sigma",
        summary="value = arithmetic mean of the field values on the root path",
        defaults={"r": 2, "m": 8},
        expected={"hexch": "pass", "conditional_iid": "pass", "cond_indep": "pass"},
    )
)
_register(
    ScenarioSpec(
        name="product",
        kind="null",
        form="sigma",
        summary="value = product of the field values on the root path",
        defaults={"r": 2, "m": 8},
        expected={"hexch": "pass", "conditional_iid": "pass", "cond_indep": "pass"},
    )
)
_register(
    ScenarioSpec(
        name="toy-magnetization",
        kind="null",
        form="sigma-replica",
        summary="squashed linear blend of a shared tree path and per-replica paths",
        defaults={"r": 2, "m": 4, "n": 20, "params": {"a": 2.0, "b": 1.0}},
        expected={"hexch": "pass"},
    )
)
_register(
    ScenarioSpec(
        name="label-leak",
        kind="violation",
        form="custom",
        summary="blends the parity of the first index coordinate into the value",
        defaults={"r": 2, "m": 8, "params": {"weight": 0.5}},
        expected={"hexch": "reject"},
    )
)
_register(
    ScenarioSpec(
        name="sibling-coupled",
        kind="violation",
        form="custom",
        summary="children of consecutive depth-1 siblings share an extra uniform "
        "at matching child index",
        defaults={"r": 2, "m": 16, "params": {"weight": 0.7}},
        expected={"cond_indep": "reject"},
    )
)
_register(
    ScenarioSpec(
        name="markov-leak",
        kind="violation",
        form="custom",
        summary="each sibling value reuses the previous sibling's uniform",
        defaults={"r": 2, "m": 16},
        expected={"conditional_iid": "reject"},
    )
)
_register(
    ScenarioSpec(
        name="depth-shift",
        kind="violation",
        form="ifield",
        summary="depth-1 field values are shifted away from the declared uniform law",
        defaults={"r": 2, "m": 32, "params": {"shift": 0.5}},
        expected={"level_homogeneity": "reject"},
    )
)

SCENARIO_NAMES = tuple(_REGISTRY)


def builtin(name: str) -> ScenarioSpec:
    """Look up a registered scenario by its exact name."""
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"unknown scenario {name!r}; known: {', '.join(_REGISTRY)}"
        ) from None


def list_scenarios() -> list[ScenarioSpec]:
    """The full registry in registration order."""
    return list(_REGISTRY.values())
