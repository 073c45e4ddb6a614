"""Category co-assignment graph of the selected sources and its force-directed layout."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import networkx as nx
import numpy as np
import pandas as pd

from .errors import Degenerate
from .participation import round_half_up
from .vosmap import MapLayout, canonicalize

logger = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.1
_MIN_DISTANCE = 1e-9


@dataclass
class CategoryGraph:
    """Undirected graph: node weight = sources per category, edge weight = sources sharing both."""

    graph: nx.Graph
    uncategorized: list[str] = field(default_factory=list)

    @property
    def categories(self) -> list[str]:
        return sorted(self.graph.nodes)

    def node_weight(self, category: str) -> int:
        return int(self.graph.nodes[category]["weight"])

    def edge_weight(self, a: str, b: str) -> int:
        if not self.graph.has_edge(a, b):
            return 0
        return int(self.graph.edges[a, b]["weight"])

    def edges(self) -> list[tuple[str, str, int]]:
        return sorted(
            (min(a, b), max(a, b), int(data["weight"]))
            for a, b, data in self.graph.edges(data=True)
        )

    def adjacency(self) -> np.ndarray:
        return nx.to_numpy_array(self.graph, nodelist=self.categories, weight="weight")


def build_category_graph(
    selected: Iterable[str], categories: Mapping[str, Sequence[str]]
) -> CategoryGraph:
    graph = nx.Graph()
    uncategorized: list[str] = []
    for sid in sorted(set(selected)):
        cats = sorted(set(categories.get(sid, ())))
        if not cats:
            uncategorized.append(sid)
            continue
        for cat in cats:
            if cat in graph:
                graph.nodes[cat]["weight"] += 1
            else:
                graph.add_node(cat, weight=1)
        for a, b in combinations(cats, 2):
            if graph.has_edge(a, b):
                graph.edges[a, b]["weight"] += 1
            else:
                graph.add_edge(a, b, weight=1)

    if uncategorized:
        logger.warning(f"{len(uncategorized)} selected sources have no category and are skipped")
    logger.info(
        f"Category graph: {graph.number_of_nodes()} categories, {graph.number_of_edges()} edges"
    )
    return CategoryGraph(graph=graph, uncategorized=uncategorized)


def co_assignment(graph: CategoryGraph) -> pd.DataFrame:
    """Raw pair counts plus the share of each side's sources also carrying the other."""
    rows = []
    for a, b, count in graph.edges():
        rows.append(
            {
                "category_a": a,
                "category_b": b,
                "count": count,
                "pct_b_given_a": round_half_up(Fraction(100 * count, graph.node_weight(a))),
                "pct_a_given_b": round_half_up(Fraction(100 * count, graph.node_weight(b))),
            }
        )
    return pd.DataFrame(
        rows, columns=["category_a", "category_b", "count", "pct_b_given_a", "pct_a_given_b"]
    )


def fr_temperatures(iterations: int, initial: float = DEFAULT_TEMPERATURE) -> np.ndarray:
    """Linear cooling from ``initial``; the last temperature stays above zero."""
    step = initial / (iterations + 1)
    return initial - step * np.arange(iterations)


def _energy(A: np.ndarray, X: np.ndarray, k: float) -> float:
    """Potential whose negative gradient is the FR force field."""
    diff = X[:, None, :] - X[None, :, :]
    dist = np.maximum(np.linalg.norm(diff, axis=-1), _MIN_DISTANCE)
    upper = np.triu_indices(len(X), k=1)
    attraction = float(np.sum(A[upper] * dist[upper] ** 3)) / (3 * k)
    repulsion = float(np.sum(np.log(dist[upper]))) * k * k
    return attraction - repulsion


def fr_layout(
    graph: CategoryGraph,
    k: float | None = None,
    iterations: int = 500,
    seed: int = 0,
    temperature: float = DEFAULT_TEMPERATURE,
) -> MapLayout:
    """Fruchterman-Reingold layout with linear cooling.

    Attraction along an edge is ``w * d^2 / k`` with ``w`` the edge count over
    the largest edge count; repulsion between every pair is ``k^2 / d``. Each
    node moves along its net force by at most the current temperature.
    ``MapLayout.history`` holds the largest displacement of each iteration.
    """
    nodes = graph.categories
    n = len(nodes)
    if n < 2:
        raise Degenerate(n)
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if k is None:
        k = float(np.sqrt(1.0 / n))
    if k <= 0:
        raise ValueError(f"k must be > 0, got {k}")

    A = graph.adjacency()
    if A.max() > 0:
        A = A / A.max()
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 1.0, size=(n, 2))

    temperatures = fr_temperatures(iterations, temperature)
    history = []
    for t in temperatures:
        diff = X[:, None, :] - X[None, :, :]
        dist = np.maximum(np.linalg.norm(diff, axis=-1), _MIN_DISTANCE)
        magnitude = k * k / dist - A * dist * dist / k
        np.fill_diagonal(magnitude, 0.0)
        force = np.einsum("ijk,ij->ik", diff / dist[:, :, None], magnitude)
        length = np.linalg.norm(force, axis=1)
        scale = np.where(length > 0, np.minimum(length, t) / np.maximum(length, _MIN_DISTANCE), 0.0)
        step = force * scale[:, None]
        X = X + step
        history.append(float(np.linalg.norm(step, axis=1).max()))

    logger.info(f"FR layout of {n} categories after {iterations} iterations (k={k:.4g})")
    return MapLayout(
        node_ids=nodes,
        positions=canonicalize(X),
        converged=True,
        objective_value=_energy(A, X, k),
        history=tuple(history),
        iterations=iterations,
    )
