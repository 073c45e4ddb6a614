"""VOS mapping: constrained layout, resolution-based clustering, density maps.

The layout minimizes sum_{i<j} s_ij d_ij^2 under a unit mean-distance
constraint. Because the objective is homogeneous of degree two and the
constraint of degree one, the constrained minimum is a rescaled stationary
point of f(X) = sum s_ij d_ij^2 - sum d_ij, which is majorized
SMACOF-style: X <- 1/2 L^+ B(X) X with L the Laplacian of s.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy.spatial.distance import pdist, squareform

from .descriptors import SimilarityMatrix
from .errors import Degenerate, LayoutNotConverged

logger = logging.getLogger(__name__)

_EPS = 1e-12


@dataclass
class MapLayout:
    """2-D positions for labelled nodes; positions are read-only once built."""

    node_ids: list[str]
    positions: np.ndarray
    converged: bool
    objective_value: float
    history: tuple[float, ...] = ()
    iterations: int = 0

    def __post_init__(self) -> None:
        positions = np.array(self.positions, dtype=np.float64)
        if positions.shape != (len(self.node_ids), 2):
            raise ValueError(f"positions must be ({len(self.node_ids)}, 2), got {positions.shape}")
        positions.setflags(write=False)
        self.positions = positions

    @property
    def n(self) -> int:
        return len(self.node_ids)

    def index(self) -> dict[str, int]:
        return {node: i for i, node in enumerate(self.node_ids)}

    def position(self, node_id: str) -> tuple[float, float]:
        x, y = self.positions[self.index()[node_id]]
        return float(x), float(y)

    def pairwise_distances(self) -> np.ndarray:
        return pdist(self.positions)

    def mean_distance(self) -> float:
        return float(self.pairwise_distances().mean()) if self.n >= 2 else 0.0


@dataclass
class Clustering:
    node_ids: list[str]
    labels: np.ndarray
    resolution: float
    quality: float

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) if len(self.labels) else 0

    def cluster_of(self, node_id: str) -> int:
        return int(self.labels[self.node_ids.index(node_id)])

    def as_dict(self) -> dict[str, int]:
        return {node: int(c) for node, c in zip(self.node_ids, self.labels)}

    def sizes(self) -> dict[int, int]:
        ids, counts = np.unique(self.labels, return_counts=True)
        return {int(c): int(k) for c, k in zip(ids, counts)}


@dataclass
class DensityField:
    values: np.ndarray
    bandwidth: float
    bbox: tuple[float, float, float, float]
    grid: tuple[int, int] = field(default=(0, 0))

    @property
    def cell_size(self) -> tuple[float, float]:
        xmin, xmax, ymin, ymax = self.bbox
        width, height = self.grid
        return (xmax - xmin) / width, (ymax - ymin) / height

    @property
    def cell_area(self) -> float:
        dx, dy = self.cell_size
        return dx * dy

    def mass(self) -> float:
        return float(self.values.sum() * self.cell_area)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        xmin, _, ymin, _ = self.bbox
        dx, dy = self.cell_size
        width, height = self.grid
        return xmin + (np.arange(width) + 0.5) * dx, ymin + (np.arange(height) + 0.5) * dy


def restrict(sim: SimilarityMatrix, nodes: Iterable[str]) -> SimilarityMatrix:
    """Sub-matrix over ``nodes``, kept in the order of ``sim``."""
    wanted = set(nodes)
    idx = [i for i, label in enumerate(sim.labels) if label in wanted]
    return SimilarityMatrix(sim.weights[idx][:, idx], [sim.labels[i] for i in idx])


def largest_component(sim: SimilarityMatrix) -> SimilarityMatrix:
    """Largest connected component; ties go to the component with the smallest label."""
    graph = nx.Graph()
    graph.add_nodes_from(sim.labels)
    graph.add_weighted_edges_from((sim.labels[i], sim.labels[j], w) for i, j, w in sim.edges())
    components = sorted(nx.connected_components(graph), key=lambda c: (-len(c), min(c)))
    if not components:
        return sim
    return restrict(sim, components[0])


def canonicalize(positions: np.ndarray) -> np.ndarray:
    """Center, rotate the principal axis onto x, and fix reflections.

    Each axis is flipped so its third moment is positive; symmetric axes use
    the sign of the first node off that axis.
    """
    X = np.array(positions, dtype=np.float64)
    X -= X.mean(axis=0)
    if len(X) >= 2:
        eigvals, eigvecs = np.linalg.eigh(X.T @ X)
        X = X @ eigvecs[:, np.argsort(eigvals)[::-1]]
    for axis in range(X.shape[1]):
        col = X[:, axis]
        skew = float(np.sum(col**3))
        scale = float(np.sum(np.abs(col) ** 3))
        if abs(skew) > 1e-9 * max(scale, _EPS):
            sign = np.sign(skew)
        else:
            nonzero = np.flatnonzero(np.abs(col) > 1e-12)
            sign = np.sign(col[nonzero[0]]) if nonzero.size else 1.0
        if sign < 0:
            X[:, axis] = -col
    X -= X.mean(axis=0)
    return X


def _rescale_unit_mean(X: np.ndarray) -> np.ndarray:
    mean = pdist(X).mean()
    return X / mean if mean > 0 else X


def constrained_objective(S: np.ndarray, X: np.ndarray) -> float:
    """sum_{i<j} s_ij d_ij^2 after rescaling X to unit mean distance."""
    X = _rescale_unit_mean(X)
    D2 = squareform(pdist(X, "sqeuclidean"))
    return float(0.5 * np.sum(S * D2))


def vos_layout(
    sim: SimilarityMatrix,
    seed: int = 0,
    max_iter: int = 10_000,
    tol: float = 1e-6,
) -> MapLayout:
    """Seeded majorization of the VOS objective; non-convergence is reported, not raised."""
    n = sim.n
    if n < 2:
        raise Degenerate(n)

    S = sim.to_dense()
    rng = np.random.default_rng(seed)
    X = _rescale_unit_mean(rng.uniform(-0.5, 0.5, size=(n, 2)))

    if not S.any():
        logger.warning("Similarity matrix has no links; returning the seeded start")
        return MapLayout(sim.labels, canonicalize(X), True, 0.0, (0.0,), 0)

    laplacian = np.diag(S.sum(axis=1)) - S
    laplacian_pinv = np.linalg.pinv(laplacian)

    objective = constrained_objective(S, X)
    history = [objective]
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        D = squareform(pdist(X))
        with np.errstate(divide="ignore"):
            inv = np.where(D > 0, 1.0 / D, 0.0)
        B = -inv
        np.fill_diagonal(B, inv.sum(axis=1))
        X = _rescale_unit_mean(0.5 * laplacian_pinv @ (B @ X))

        updated = constrained_objective(S, X)
        history.append(updated)
        change = abs(objective - updated) / max(abs(objective), _EPS)
        objective = updated
        if change < tol:
            converged = True
            break

    if not converged:
        logger.warning(f"VOS layout did not converge within {max_iter} iterations")
    else:
        logger.info(
            f"VOS layout converged after {iteration} iterations (objective={objective:.6g})"
        )

    return MapLayout(
        node_ids=list(sim.labels),
        positions=canonicalize(X),
        converged=converged,
        objective_value=objective,
        history=tuple(history),
        iterations=iteration,
    )


def clustering_quality(S: np.ndarray, labels: Sequence[int], resolution: float) -> float:
    """V(c) = sum over same-cluster pairs i<j of (s_ij - resolution)."""
    labels = np.asarray(labels)
    total = 0.0
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        m = len(idx)
        total += 0.5 * float(S[np.ix_(idx, idx)].sum()) - resolution * m * (m - 1) / 2
    return total


def _local_moving(
    S: np.ndarray, labels: np.ndarray, resolution: float, rng: np.random.Generator
) -> bool:
    n = len(labels)
    moved_any = False
    moved = True
    while moved:
        moved = False
        for i in rng.permutation(n):
            current = labels[i]
            weights = np.bincount(labels, weights=S[i], minlength=n)
            sizes = np.bincount(labels, minlength=n).astype(np.float64)
            sizes[current] -= 1
            gains = weights - resolution * sizes
            gains[(sizes == 0) & (np.arange(n) != current)] = -np.inf
            best = int(np.argmax(gains))
            best_gain = gains[best]
            stay_gain = gains[current]
            if best_gain <= stay_gain + _EPS:
                best, best_gain = current, stay_gain
            if best_gain < -_EPS and sizes[current] > 0:
                best = int(np.flatnonzero(np.bincount(labels, minlength=n) == 0)[0])
            if best != current:
                labels[i] = best
                moved = moved_any = True
    return moved_any


def _merge_clusters(S: np.ndarray, labels: np.ndarray, resolution: float) -> bool:
    ids, dense = np.unique(labels, return_inverse=True)
    k = len(ids)
    if k < 2:
        return False
    onehot = np.zeros((len(labels), k))
    onehot[np.arange(len(labels)), dense] = 1.0
    W = onehot.T @ S @ onehot
    sizes = onehot.sum(axis=0)
    active = np.ones(k, dtype=bool)
    merged = False
    while True:
        gain = W - resolution * np.outer(sizes, sizes)
        np.fill_diagonal(gain, -np.inf)
        gain[~active, :] = -np.inf
        gain[:, ~active] = -np.inf
        a, b = np.unravel_index(int(np.argmax(gain)), gain.shape)
        if gain[a, b] <= _EPS:
            break
        a, b = min(a, b), max(a, b)
        W[a, :] += W[b, :]
        W[:, a] += W[:, b]
        sizes[a] += sizes[b]
        active[b] = False
        dense[dense == b] = a
        merged = True
    labels[:] = dense
    return merged


def _relabel(labels: np.ndarray) -> np.ndarray:
    """Dense ids from 1, largest cluster first, ties by smallest member index."""
    clusters = {}
    for i, c in enumerate(labels):
        clusters.setdefault(int(c), []).append(i)
    ordered = sorted(clusters.values(), key=lambda members: (-len(members), members[0]))
    result = np.empty(len(labels), dtype=np.int64)
    for cid, members in enumerate(ordered, start=1):
        result[members] = cid
    return result


def vos_cluster(
    sim: SimilarityMatrix, resolution: float = 1.0, restarts: int = 10, seed: int = 0
) -> Clustering:
    """Best of ``restarts`` local-moving runs with cluster merging."""
    if resolution <= 0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")

    S = sim.to_dense()
    n = sim.n
    best_labels = np.arange(n)
    best_quality = -np.inf
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        labels = np.arange(n)
        while True:
            _local_moving(S, labels, resolution, rng)
            if not _merge_clusters(S, labels, resolution):
                break
        quality = clustering_quality(S, labels, resolution)
        if quality > best_quality + _EPS:
            best_quality, best_labels = quality, labels.copy()

    final = _relabel(best_labels) if n else best_labels
    quality = clustering_quality(S, final, resolution) if n else 0.0
    result = Clustering(list(sim.labels), final, resolution, quality)
    logger.info(
        f"Clustering at resolution {resolution}: {result.n_clusters} clusters, V={quality:.6g}"
    )
    return result


def density_field(
    layout: MapLayout,
    weights: Sequence[float],
    bandwidth: float,
    grid: tuple[int, int] = (100, 100),
    bbox: tuple[float, float, float, float] | None = None,
    force: bool = False,
) -> DensityField:
    """Gaussian kernel density; each node's kernel is normalized to its weight on the grid."""
    if not layout.converged and not force:
        raise LayoutNotConverged()
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth}")
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (layout.n,):
        raise ValueError("One weight per node is required")
    if (weights < 0).any():
        raise ValueError("Node weights must be non-negative")

    P = layout.positions
    if bbox is None:
        pad = 3.0 * bandwidth
        bbox = (
            float(P[:, 0].min() - pad),
            float(P[:, 0].max() + pad),
            float(P[:, 1].min() - pad),
            float(P[:, 1].max() + pad),
        )
    field_ = DensityField(
        values=np.zeros((grid[1], grid[0])), bandwidth=bandwidth, bbox=bbox, grid=grid
    )
    xs, ys = field_.cell_centers()
    area = field_.cell_area
    for (px, py), weight in zip(P, weights):
        if weight == 0:
            continue
        kernel = np.outer(
            np.exp(-0.5 * ((ys - py) / bandwidth) ** 2),
            np.exp(-0.5 * ((xs - px) / bandwidth) ** 2),
        )
        mass = kernel.sum() * area
        if mass > 0:
            field_.values += weight * kernel / mass
    return field_
