"""Statistical verification battery for hierarchically exchangeable arrays.

Exchangeability of an array law is tested across independent replicates:
one sample of arrays as generated, one sample with a freshly drawn
structure-preserving permutation applied to each replicate, compared by an
energy-distance permutation test.  Conditional structure (children i.i.d.
given their directing measure, independence across parents) is checked
through randomized probability integral transforms of leaf values against
their parent's estimated CDF.

All tests are deterministic given their seed, resample permutations
included, and report an add-one permutation p-value, so the decision at
level alpha is exact under the null.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.stats
from scipy.spatial.distance import cdist

from .definetti import DirectingHierarchy
from .fields import DistSpec, derive_seed
from .hperm import HPerm, random_hperm

__all__ = [
    "TestReport",
    "energy_distance",
    "hexch_test",
    "conditional_iid_test",
    "cond_indep_test",
    "level_homogeneity_test",
]


@dataclass
class TestReport:
    """Outcome of one statistical check."""

    __test__ = False  # not a pytest case despite the name

    name: str
    statistic: float
    p_value: float
    n_resamples: int
    level: float
    reject: bool
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value {self.p_value} outside [0,1]")

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "n_resamples": self.n_resamples,
            "level": self.level,
            "reject": self.reject,
            "metadata": self.metadata,
        }


def energy_distance(sample_a, sample_b) -> float:
    """Two-sample energy statistic 2 E|a-b| - E|a-a'| - E|b-b'|.

    Means are taken over all ordered pairs (the V-statistic convention, zero
    diagonal included), which keeps the statistic nonnegative; it vanishes
    exactly when the two empirical distributions coincide.
    """
    a = np.atleast_2d(np.asarray(sample_a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(sample_b, dtype=np.float64))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("samples must be nonempty")
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}"
        )
    dab = cdist(a, b).mean()
    daa = cdist(a, a).mean()
    dbb = cdist(b, b).mean()
    return float(2.0 * dab - daa - dbb)


def _energy_permutation_pvalue(
    a: np.ndarray, b: np.ndarray, n_resamples: int, seed: int
) -> tuple[float, float]:
    """Observed energy statistic and its add-one permutation p-value.

    The pooled rows are put in canonical (lexicographic) order before the
    resample splits are drawn, so the p-value is exactly invariant under any
    reordering of the replicates within each sample.
    """
    ka = a.shape[0]
    pool = np.vstack([a, b])
    labels = np.zeros(pool.shape[0], dtype=np.float64)
    labels[:ka] = 1.0
    order = np.lexsort(pool.T[::-1])
    pool = pool[order]
    labels = labels[order]
    dmat = cdist(pool, pool)
    n_tot = pool.shape[0]
    kb = n_tot - ka
    total = dmat.sum()

    def stats(masks: np.ndarray) -> np.ndarray:
        # masks: (R, n_tot) indicator rows for the first group
        t = masks @ dmat
        saa = np.einsum("ij,ij->i", t, masks)
        rowsum = t.sum(axis=1)
        sbb = total - 2.0 * rowsum + saa
        sab = rowsum - saa
        return 2.0 * sab / (ka * kb) - saa / (ka * ka) - sbb / (kb * kb)

    observed = float(stats(labels[None, :])[0])
    rng = np.random.Generator(np.random.PCG64(seed))
    masks = np.zeros((n_resamples, n_tot), dtype=np.float64)
    for i in range(n_resamples):
        masks[i, rng.permutation(n_tot)[:ka]] = 1.0
    count = int(np.sum(stats(masks) >= observed))
    p = (1 + count) / (n_resamples + 1)
    return observed, p


def _marginal_indices(dim: int, r: int, m: int, n, seed: int) -> np.ndarray | None:
    """Flattened coordinates entering the test statistic.

    Small single-tree truncations (m <= 8, r <= 3) keep every leaf;
    otherwise a fixed 64-coordinate subset is drawn once from the seed.
    """
    if n is None and m <= 8 and r <= 3:
        return None
    if dim <= 64:
        return None
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "marginal-subset")))
    return np.sort(rng.choice(dim, size=64, replace=False))


def hexch_test(
    source,
    r: int,
    m: int,
    *,
    n: int | None = None,
    perms: list[HPerm] | None = None,
    n_reps: int = 50,
    n_resamples: int = 199,
    level: float = 0.05,
    seed: int = 0,
) -> TestReport:
    """Permutation test of hierarchical exchangeability of an array law.

    ``source`` is a callable mapping a seed to an array over the
    ``{1..m}^r`` truncation (flat, or of shape ``(m^r, n)`` when ``n`` is
    given, in which case a replica-axis permutation is applied jointly with
    the tree permutation).  Two samples of ``n_reps`` independent replicates
    are compared: arrays as generated versus arrays with a freshly drawn
    structure-preserving permutation applied to each replicate.  Under an
    exchangeable law both samples share one distribution and the p-value is
    exact.
    """
    if n_reps < 20:
        raise ValueError(f"insufficient replicates: n_reps={n_reps} < 20")
    if n_resamples < 1:
        raise ValueError("n_resamples must be >= 1")
    dim = m**r * (1 if n is None else n)
    keep = _marginal_indices(dim, r, m, n, seed)

    def flat(arr: np.ndarray, pi: HPerm | None, rho: np.ndarray | None) -> np.ndarray:
        arr = np.asarray(arr, dtype=np.float64)
        if n is None:
            vec = arr.reshape(-1)
            if pi is not None:
                vec = vec[pi.permuted_leaf_indices(m)]
        else:
            mat = arr.reshape(m**r, n)
            if pi is not None:
                mat = mat[pi.permuted_leaf_indices(m)]
            if rho is not None:
                mat = mat[:, rho]
            vec = mat.reshape(-1)
        return vec if keep is None else vec[keep]

    a_rows = np.array(
        [flat(source(derive_seed(seed, "rep-a", k)), None, None) for k in range(n_reps)]
    )
    b_rows = []
    for k in range(n_reps):
        if perms:
            pi = perms[k % len(perms)]
        else:
            pi = random_hperm(r, m, derive_seed(seed, "perm", k))
        rho = None
        if n is not None:
            rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "rho", k)))
            rho = rng.permutation(n)
        b_rows.append(flat(source(derive_seed(seed, "rep-b", k)), pi, rho))
    b_rows = np.array(b_rows)

    observed, p = _energy_permutation_pvalue(
        a_rows, b_rows, n_resamples, derive_seed(seed, "resample")
    )
    return TestReport(
        name="hexch",
        statistic=observed,
        p_value=p,
        n_resamples=n_resamples,
        level=level,
        reject=p < level,
        metadata={
            "r": r,
            "m": m,
            "n": n,
            "n_reps": n_reps,
            "seed": seed,
            "dim": int(dim if keep is None else keep.size),
            "joint_replica_perm": n is not None,
        },
    )


def _pit_matrix(
    array, hierarchy: DirectingHierarchy, rng: np.random.Generator
) -> np.ndarray:
    """Randomized PIT of each leaf through its parent's level-0 CDF.

    Values landing on an atom are spread uniformly across the CDF jump, so
    the transform of an i.i.d.-within-parent block is exactly uniform.
    Shape (parents, m) in lexicographic order.
    """
    r, m = hierarchy.r, hierarchy.m
    arr = np.asarray(array, dtype=np.float64).reshape(-1)
    if arr.size != m**r:
        raise ValueError(
            f"shape mismatch: array has {arr.size} values, hierarchy expects {m**r}"
        )
    n_parents = m ** (r - 1)
    blocks = arr.reshape(n_parents, m)
    parents = [
        (v, mu)
        for v, mu in sorted(
            hierarchy.measures.items(), key=lambda kv: (kv[0].depth, kv[0].coords)
        )
        if v.depth == r - 1
    ]
    pit = np.empty_like(blocks)
    jitter = rng.random(blocks.shape)
    for i, (_, mu) in enumerate(parents):
        x = blocks[i]
        lo = mu.cdf_left(x)
        hi = mu.cdf(x)
        pit[i] = lo + jitter[i] * (hi - lo)
    return pit


def conditional_iid_test(
    array,
    hierarchy: DirectingHierarchy,
    *,
    n_resamples: int = 199,
    level: float = 0.05,
    seed: int = 0,
) -> TestReport:
    """Check that sibling values behave i.i.d. given their parent measure.

    Pools the randomized PIT values and KS-tests them against uniformity,
    and tests the within-parent lag-1 autocorrelation of the PIT sequence
    against a shuffle null.  The reported p-value is the Bonferroni
    combination of the two components.
    """
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "pit")))
    pit = _pit_matrix(array, hierarchy, rng)
    n_parents, m = pit.shape

    ks_stat, ks_p = scipy.stats.kstest(pit.reshape(-1), "uniform")

    components = {"ks_stat": float(ks_stat), "ks_p": float(ks_p)}
    pvals = [ks_p]
    rho = 0.0
    if m >= 2:
        rho = _lag1_corr(pit)
        shuffler = np.random.Generator(np.random.PCG64(derive_seed(seed, "shuffle")))
        count = 0
        for _ in range(n_resamples):
            if abs(_lag1_corr(shuffler.permuted(pit, axis=1))) >= abs(rho):
                count += 1
        rho_p = (1 + count) / (n_resamples + 1)
        components.update({"lag1_corr": float(rho), "lag1_p": float(rho_p)})
        pvals.append(rho_p)
    p = min(1.0, len(pvals) * min(pvals))
    return TestReport(
        name="conditional_iid",
        statistic=float(rho),
        p_value=float(p),
        n_resamples=n_resamples,
        level=level,
        reject=p < level,
        metadata={"n_parents": n_parents, "m": m, "seed": seed, **components},
    )


def _lag1_corr(pit: np.ndarray) -> float:
    a = pit[:, :-1].reshape(-1)
    b = pit[:, 1:].reshape(-1)
    sa, sb = a.std(), b.std()
    if sa == 0.0 or sb == 0.0:
        return 0.0
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))


def _pairs_by_gap(n_parents: int, budget: int) -> list[tuple[int, int]]:
    # nearest parents first, so local couplings always fit in the budget
    pairs = [
        (i, i + gap)
        for gap in range(1, n_parents)
        for i in range(n_parents - gap)
    ]
    return pairs[:budget]


def cond_indep_test(
    array,
    hierarchy: DirectingHierarchy,
    *,
    n_resamples: int = 199,
    level: float = 0.05,
    seed: int = 0,
    pair_budget: int = 64,
) -> TestReport:
    """Check independence of children across distinct parents.

    PIT-transforms each parent's children, then takes the maximal absolute
    correlation over a fixed budget of parent pairs (nearest pairs first).
    The null distribution is obtained by independently shuffling each
    parent's children, which preserves within-parent exchangeability while
    destroying cross-parent index alignment.
    """
    if hierarchy.r < 2:
        raise ValueError("cross-parent check needs tree depth r >= 2")
    if hierarchy.m < 2:
        raise ValueError("no sibling pairs: m must be >= 2")
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "pit")))
    pit = _pit_matrix(array, hierarchy, rng)
    n_parents, m = pit.shape
    pairs = _pairs_by_gap(n_parents, pair_budget)
    ii = np.array([p[0] for p in pairs])
    jj = np.array([p[1] for p in pairs])

    def max_abs_corr(mat: np.ndarray) -> float:
        z = mat - mat.mean(axis=1, keepdims=True)
        norms = np.linalg.norm(z, axis=1)
        norms[norms == 0.0] = 1.0
        z /= norms[:, None]
        return float(np.max(np.abs(np.einsum("ij,ij->i", z[ii], z[jj]))))

    observed = max_abs_corr(pit)
    shuffler = np.random.Generator(np.random.PCG64(derive_seed(seed, "shuffle")))
    count = 0
    for _ in range(n_resamples):
        if max_abs_corr(shuffler.permuted(pit, axis=1)) >= observed:
            count += 1
    p = (1 + count) / (n_resamples + 1)
    return TestReport(
        name="cond_indep",
        statistic=observed,
        p_value=float(p),
        n_resamples=n_resamples,
        level=level,
        reject=p < level,
        metadata={
            "n_parents": n_parents,
            "m": m,
            "n_pairs": len(pairs),
            "seed": seed,
        },
    )


def level_homogeneity_test(
    values_by_depth: dict,
    declared: dict,
    *,
    level: float = 0.05,
    seed: int = 0,
) -> TestReport:
    """Check realized field values against their declared per-depth laws.

    Each depth class is PIT-transformed through its declared distribution
    and KS-tested against uniformity; depth pairs declaring identical laws
    additionally get a two-sample KS check.  Component p-values combine by
    Bonferroni.
    """
    if len(values_by_depth) < 2:
        raise ValueError("need at least two populated depth classes")
    keys = sorted(values_by_depth)
    for key in keys:
        if key not in declared:
            raise ValueError(f"no declared distribution for depth {key}")
        if not isinstance(declared[key], DistSpec):
            raise ValueError(f"declared[{key}] is not a distribution spec")
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "pit")))
    components = []
    for key in keys:
        vals = np.asarray(values_by_depth[key], dtype=np.float64).reshape(-1)
        spec = declared[key]
        lo = spec.cdf_left(vals)
        hi = spec.cdf(vals)
        pit = lo + rng.random(vals.shape) * (hi - lo)
        stat, p = scipy.stats.kstest(pit, "uniform")
        components.append((f"ks@{key}", float(stat), float(p)))
    for ka, kb in itertools.combinations(keys, 2):
        if declared[ka] == declared[kb]:
            stat, p = scipy.stats.ks_2samp(
                np.asarray(values_by_depth[ka]).reshape(-1),
                np.asarray(values_by_depth[kb]).reshape(-1),
            )
            components.append((f"ks2@{ka}|{kb}", float(stat), float(p)))
    k = len(components)
    p = min(1.0, k * min(c[2] for c in components))
    stat = max(c[1] for c in components)
    return TestReport(
        name="level_homogeneity",
        statistic=stat,
        p_value=float(p),
        n_resamples=0,
        level=level,
        reject=p < level,
        metadata={
            "components": [
                {"name": n_, "stat": s_, "p": p_} for n_, s_, p_ in components
            ],
            "seed": seed,
        },
    )
