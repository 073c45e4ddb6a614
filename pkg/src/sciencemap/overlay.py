"""Overlay of a publication subset on a frozen base map, cohesion and core statistics."""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .descriptors import SimilarityMatrix
from .errors import EmptyCore, UnknownNode
from .participation import round_half_up
from .simnet import CombinedSimilarity
from .vosmap import Clustering, MapLayout

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OverlaySpec:
    base: MapLayout
    clustering: Clustering | None
    subset: frozenset[str]
    highlight: dict[str, float] = field(default_factory=dict)

    def subset_positions(self) -> dict[str, tuple[float, float]]:
        index = self.base.index()
        positions = self.base.positions
        return {
            node: (float(positions[index[node], 0]), float(positions[index[node], 1]))
            for node in sorted(self.subset)
        }


@dataclass
class CohesionReport:
    within_subset_strength: float
    expected_strength: float
    ratio: float
    permutation_p: float
    permutations: int
    subset_size: int
    subset_cluster_histogram: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict[str, object]:
        return {
            "within_subset_strength": self.within_subset_strength,
            "expected_strength": self.expected_strength,
            "ratio": self.ratio,
            "permutation_p": self.permutation_p,
            "permutations": self.permutations,
            "subset_size": self.subset_size,
            "subset_cluster_histogram": {
                str(k): v for k, v in sorted(self.subset_cluster_histogram.items())
            },
        }


@dataclass
class CoreStats:
    core_set: frozenset[str]
    shares: dict[str, int]
    overlap: dict[tuple[str, str], int]
    conditional: dict[tuple[str, str], int]
    raw_shares: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, object]:
        return {
            "core_size": len(self.core_set),
            "core_set": sorted(self.core_set),
            "shares": dict(sorted(self.shares.items())),
            "overlap": {f"{a}|{b}": v for (a, b), v in sorted(self.overlap.items())},
            "conditional": {
                f"{b} given {a}": v for (a, b), v in sorted(self.conditional.items())
            },
            "raw_shares": dict(sorted(self.raw_shares.items())),
        }


def _as_similarity(sim: SimilarityMatrix | CombinedSimilarity) -> SimilarityMatrix:
    return sim.matrix if isinstance(sim, CombinedSimilarity) else sim


def _indices(sim: SimilarityMatrix, subset: Iterable[str]) -> np.ndarray:
    index = sim.index()
    missing = [node for node in subset if node not in index]
    if missing:
        raise UnknownNode(sorted(missing)[0])
    return np.array(sorted(index[node] for node in subset), dtype=np.int64)


def make_overlay(
    base: MapLayout,
    subset: Iterable[str],
    clustering: Clustering | None = None,
    highlight_weight: float | Mapping[str, float] = 1.0,
) -> OverlaySpec:
    """Highlight ``subset`` on the base map without touching its positions."""
    subset = frozenset(subset)
    known = set(base.node_ids)
    for node in sorted(subset):
        if node not in known:
            raise UnknownNode(node)
    if isinstance(highlight_weight, Mapping):
        highlight = {node: float(highlight_weight.get(node, 1.0)) for node in sorted(subset)}
    else:
        highlight = {node: float(highlight_weight) for node in sorted(subset)}
    return OverlaySpec(base=base, clustering=clustering, subset=subset, highlight=highlight)


def _within_strength(S: np.ndarray, idx: np.ndarray) -> float:
    if len(idx) < 2:
        return 0.0
    return 0.5 * float(S[np.ix_(idx, idx)].sum())


def cohesion(
    sim: SimilarityMatrix | CombinedSimilarity,
    subset: Iterable[str],
    permutations: int = 1000,
    seed: int = 0,
    clustering: Clustering | None = None,
) -> CohesionReport:
    """Permutation test of the subset's internal link strength.

    Permutation ``k`` draws its random subset from ``seed + k`` so the result
    does not depend on evaluation order.
    """
    if permutations < 100:
        raise ValueError(f"permutations must be >= 100, got {permutations}")
    matrix = _as_similarity(sim)
    idx = _indices(matrix, subset)
    S = matrix.to_dense()
    observed = _within_strength(S, idx)

    null = np.empty(permutations)
    for k in range(permutations):
        rng = np.random.default_rng(seed + k)
        null[k] = _within_strength(S, rng.choice(matrix.n, size=len(idx), replace=False))
    expected = float(null.mean())
    p = float(np.count_nonzero(null >= observed)) / permutations

    histogram: dict[int, int] = {}
    if clustering is not None:
        labels = clustering.as_dict()
        histogram = dict(sorted(Counter(labels[matrix.labels[i]] for i in idx).items()))

    report = CohesionReport(
        within_subset_strength=observed,
        expected_strength=expected,
        ratio=observed / expected if expected > 0 else 0.0,
        permutation_p=p,
        permutations=permutations,
        subset_size=len(idx),
        subset_cluster_histogram=histogram,
    )
    logger.info(
        f"Cohesion of {len(idx)} nodes: observed={observed:.4g}, "
        f"expected={expected:.4g}, p={p:.4f}"
    )
    return report


def core_extract(
    sim: SimilarityMatrix | CombinedSimilarity, subset: Iterable[str], quantile: float
) -> set[str]:
    """Subset members whose within-subset link strength reaches the given quantile."""
    if not 0 < quantile < 1:
        raise ValueError(f"quantile must be in (0, 1), got {quantile}")
    matrix = _as_similarity(sim)
    idx = _indices(matrix, subset)
    if len(idx) == 0:
        return set()
    S = matrix.to_dense()
    strength = S[np.ix_(idx, idx)].sum(axis=1)
    # lower method: the cut is always an observed strength
    cut = np.quantile(strength, quantile, method="lower")
    keep = strength >= cut
    return {matrix.labels[i] for i, kept in zip(idx, keep) if kept}


def category_shares(
    core_set: Iterable[str], categories: Mapping[str, Sequence[str]]
) -> CoreStats:
    """Percent of the core carrying each category, jointly and conditionally."""
    core = frozenset(core_set)
    if not core:
        raise EmptyCore()
    members = {sid: set(categories.get(sid, ())) for sid in core}
    size = len(core)

    counts: Counter[str] = Counter(cat for cats in members.values() for cat in cats)
    pair_counts: Counter[tuple[str, str]] = Counter()
    for cats in members.values():
        for a, b in combinations(sorted(cats), 2):
            pair_counts[(a, b)] += 1

    shares = {cat: round_half_up(Fraction(100 * n, size)) for cat, n in sorted(counts.items())}
    raw = {cat: 100.0 * n / size for cat, n in sorted(counts.items())}
    overlap = {
        pair: round_half_up(Fraction(100 * n, size)) for pair, n in sorted(pair_counts.items())
    }
    conditional: dict[tuple[str, str], int] = {}
    for (a, b), n in sorted(pair_counts.items()):
        conditional[(a, b)] = round_half_up(Fraction(100 * n, counts[a]))
        conditional[(b, a)] = round_half_up(Fraction(100 * n, counts[b]))

    return CoreStats(
        core_set=core,
        shares=shares,
        overlap=overlap,
        conditional=dict(sorted(conditional.items())),
        raw_shares=raw,
    )


def label_clusters(
    clustering: Clustering, categories: Mapping[str, Sequence[str]]
) -> dict[int, str]:
    """Name each cluster after its most frequent category (ties alphabetical)."""
    per_cluster: dict[int, Counter[str]] = {}
    for node, cid in clustering.as_dict().items():
        bucket = per_cluster.setdefault(cid, Counter())
        bucket.update(categories.get(node, ()))
    names = {}
    for cid, counter in sorted(per_cluster.items()):
        if counter:
            names[cid] = min(counter.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        else:
            names[cid] = "uncategorized"
    return names
