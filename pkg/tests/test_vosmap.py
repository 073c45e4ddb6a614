"""Unit tests for the VOS layout, clustering and density maps."""

import numpy as np
import pytest
from scipy import sparse
from scipy.spatial.distance import pdist

from sciencemap.descriptors import SimilarityMatrix
from sciencemap.errors import Degenerate, LayoutNotConverged
from sciencemap.vosmap import (
    MapLayout,
    canonicalize,
    clustering_quality,
    constrained_objective,
    density_field,
    largest_component,
    restrict,
    vos_cluster,
    vos_layout,
)


def _sim(dense, labels=None):
    return SimilarityMatrix(sparse.csr_matrix(np.asarray(dense, dtype=float)), labels)


def _random_sim(rng, n, density=0.5):
    upper = np.triu(rng.random((n, n)) * (rng.random((n, n)) < density), k=1)
    return _sim(upper + upper.T)


def _partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in _partitions(rest):
        for k in range(len(partition)):
            yield partition[:k] + [[first] + partition[k]] + partition[k + 1 :]
        yield [[first]] + partition


def _best_quality(S, resolution):
    n = len(S)
    best = -np.inf
    for partition in _partitions(list(range(n))):
        labels = np.empty(n, dtype=int)
        for cid, block in enumerate(partition):
            labels[block] = cid
        best = max(best, clustering_quality(S, labels, resolution))
    return best


class TestVosLayout:
    """Test vos_layout."""

    def test_two_nodes_at_unit_distance(self):
        """Test two linked nodes end up exactly one unit apart."""
        layout = vos_layout(_sim([[0, 1], [1, 0]]), seed=3)

        assert pdist(layout.positions)[0] == pytest.approx(1.0, abs=1e-6)

    def test_equal_weights_give_equilateral_triangle(self):
        """Test three equally linked nodes converge to equal pairwise distances."""
        layout = vos_layout(_sim(np.ones((3, 3)) - np.eye(3)), seed=1, tol=1e-10)

        assert layout.converged
        np.testing.assert_allclose(layout.pairwise_distances(), 1.0, atol=1e-3)

    def test_objective_history_non_increasing(self):
        """Test the constrained objective never rises across iterations."""
        rng = np.random.default_rng(21)
        for seed in range(20):
            layout = vos_layout(_random_sim(rng, 10, density=0.8), seed=seed, max_iter=300)
            history = np.array(layout.history)
            assert np.all(np.diff(history) <= 1e-9 * np.maximum(1.0, history[:-1]))

    def test_unit_mean_distance_and_determinism(self):
        """Test mean pairwise distance is 1 and a fixed seed reproduces positions."""
        sim = _random_sim(np.random.default_rng(4), 12, density=0.6)

        first = vos_layout(sim, seed=9)
        second = vos_layout(sim, seed=9)

        assert first.mean_distance() == pytest.approx(1.0)
        assert first.positions.tobytes() == second.positions.tobytes()
        assert not first.positions.flags.writeable

    def test_single_node_is_degenerate(self):
        """Test fewer than two nodes raise Degenerate."""
        with pytest.raises(Degenerate):
            vos_layout(_sim([[0.0]]))

    def test_non_convergence_is_reported(self):
        """Test hitting max_iter returns a layout flagged as not converged."""
        sim = _random_sim(np.random.default_rng(8), 15, density=0.4)

        layout = vos_layout(sim, seed=0, max_iter=1, tol=0.0)

        assert not layout.converged
        assert layout.iterations == 1

    def test_scaling_similarities_keeps_layout(self):
        """Test multiplying every similarity by a constant yields the same positions."""
        sim = _random_sim(np.random.default_rng(31), 10, density=0.7)
        scaled = sim.scaled(7.5)

        base = vos_layout(sim, seed=2)
        other = vos_layout(scaled, seed=2)

        np.testing.assert_allclose(other.positions, base.positions, atol=1e-6)

    def test_beats_random_configurations(self):
        """Test the layout objective is no worse than 1000 random unit-mean placements."""
        rng = np.random.default_rng(12)
        sim = _random_sim(rng, 10, density=0.6)
        S = sim.to_dense()

        layout = vos_layout(sim, seed=0)
        best_random = min(
            constrained_objective(S, rng.uniform(-1, 1, size=(10, 2))) for _ in range(1000)
        )

        assert layout.objective_value <= best_random
        assert constrained_objective(S, layout.positions) == pytest.approx(layout.objective_value)


class TestCanonicalize:
    """Test canonicalize."""

    def test_centered_principal_axis_on_x(self):
        """Test output is centered with the largest spread along x."""
        rng = np.random.default_rng(2)
        points = rng.normal(size=(30, 2)) @ np.array([[0.2, 1.5], [-0.3, 0.4]])

        X = canonicalize(points)

        np.testing.assert_allclose(X.mean(axis=0), 0.0, atol=1e-12)
        assert X[:, 0].var() >= X[:, 1].var()
        np.testing.assert_allclose(pdist(X), pdist(points), atol=1e-10)

    def test_rotation_and_reflection_invariant(self):
        """Test rotated and mirrored inputs canonicalize to the same positions."""
        rng = np.random.default_rng(6)
        points = rng.normal(size=(12, 2)) * [3.0, 1.0]
        angle = 0.7
        rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])

        np.testing.assert_allclose(
            canonicalize(points @ rotation.T * [1.0, -1.0]), canonicalize(points), atol=1e-9
        )


class TestVosCluster:
    """Test vos_cluster."""

    def test_matches_exhaustive_optimum(self):
        """Test the best of 20 restarts reaches the exhaustive optimum on small graphs."""
        rng = np.random.default_rng(13)
        hits = 0
        trials = 100
        for trial in range(trials):
            sim = _random_sim(rng, int(rng.integers(3, 9)), density=0.5)
            best = _best_quality(sim.to_dense(), 0.3)

            result = vos_cluster(sim, resolution=0.3, restarts=20, seed=trial)

            assert result.quality <= best + 1e-9
            hits += result.quality >= best - 1e-9
        assert hits >= 0.95 * trials

    def test_labels_dense_largest_first(self):
        """Test two disjoint cliques get ids 1 and 2 with the larger first."""
        dense = np.zeros((6, 6))
        dense[:2, :2] = 1
        dense[2:, 2:] = 1
        np.fill_diagonal(dense, 0)

        result = vos_cluster(_sim(dense, list("abcdef")), resolution=0.5, restarts=3)

        assert result.as_dict() == {"a": 2, "b": 2, "c": 1, "d": 1, "e": 1, "f": 1}
        assert result.sizes() == {1: 4, 2: 2}
        assert result.quality == pytest.approx(clustering_quality(dense, result.labels, 0.5))

    def test_quality_formula(self):
        """Test V(c) sums s_ij - resolution over same-cluster pairs."""
        dense = np.array([[0, 2, 1], [2, 0, 0], [1, 0, 0]], dtype=float)

        assert clustering_quality(dense, [0, 0, 1], 0.5) == pytest.approx(1.5)
        assert clustering_quality(dense, [0, 0, 0], 0.5) == pytest.approx(3 - 1.5)

    def test_no_single_move_improves(self):
        """Test moving any one node to another or a new cluster never raises quality."""
        rng = np.random.default_rng(41)
        for trial in range(50):
            n = int(rng.integers(5, 13))
            sim = _random_sim(rng, n, density=0.5)
            S = sim.to_dense()

            result = vos_cluster(sim, resolution=0.3, restarts=3, seed=trial)

            for i in range(n):
                for target in range(result.n_clusters + 2):
                    moved = result.labels.copy()
                    moved[i] = target
                    assert clustering_quality(S, moved, 0.3) <= result.quality + 1e-9

    def test_resolution_extremes(self):
        """Test a resolution below every link gives one cluster and above every link singletons."""
        rng = np.random.default_rng(5)
        upper = np.triu(rng.uniform(0.5, 1.0, size=(8, 8)), k=1)
        sim = _sim(upper + upper.T)

        assert vos_cluster(sim, resolution=0.4, restarts=3).n_clusters == 1
        assert vos_cluster(sim, resolution=1.1, restarts=3).n_clusters == 8

    def test_invalid_arguments(self):
        """Test non-positive resolution or restarts are rejected."""
        sim = _sim([[0, 1], [1, 0]])

        with pytest.raises(ValueError):
            vos_cluster(sim, resolution=0)
        with pytest.raises(ValueError):
            vos_cluster(sim, restarts=0)


class TestComponents:
    """Test largest_component and restrict."""

    def test_largest_component_kept(self):
        """Test the largest connected component is returned in original order."""
        dense = np.zeros((6, 6))
        for i, j in [(0, 3), (3, 5), (1, 2)]:
            dense[i, j] = dense[j, i] = 1.0

        component = largest_component(_sim(dense, list("abcdef")))

        assert component.labels == ["a", "d", "f"]
        assert component.get(0, 1) == 1.0

    def test_restrict_keeps_order(self):
        """Test restrict follows the parent order, not the requested order."""
        sim = _sim(np.ones((3, 3)) - np.eye(3), ["x", "y", "z"])

        assert restrict(sim, ["z", "x"]).labels == ["x", "z"]


class TestDensityField:
    """Test density_field."""

    @pytest.fixture
    def layout(self):
        return vos_layout(_random_sim(np.random.default_rng(1), 8, density=0.7), seed=0)

    def test_mass_equals_total_weight(self, layout):
        """Test the grid integrates to the sum of node weights."""
        weights = np.arange(1, layout.n + 1, dtype=float)

        field = density_field(layout, weights, bandwidth=0.2, grid=(60, 50))

        assert field.values.shape == (50, 60)
        assert field.mass() == pytest.approx(weights.sum(), rel=1e-9)

    def test_unconverged_layout_needs_force(self, layout):
        """Test an unconverged layout raises unless forced."""
        stale = MapLayout(layout.node_ids, layout.positions, converged=False, objective_value=0.0)
        weights = np.ones(stale.n)

        with pytest.raises(LayoutNotConverged):
            density_field(stale, weights, bandwidth=0.2)
        assert density_field(stale, weights, bandwidth=0.2, force=True).mass() > 0

    def test_invalid_bandwidth(self, layout):
        """Test bandwidth must be positive."""
        with pytest.raises(ValueError):
            density_field(layout, np.ones(layout.n), bandwidth=0)

    def test_linear_in_weights(self, layout):
        """Test the field of a weighted sum equals the weighted sum of fields."""
        rng = np.random.default_rng(3)
        first, second = rng.random(layout.n), rng.random(layout.n)

        combined = density_field(layout, 2.0 * first + 0.5 * second, bandwidth=0.2, grid=(30, 30))
        parts = [density_field(layout, w, bandwidth=0.2, grid=(30, 30)) for w in (first, second)]

        np.testing.assert_allclose(
            combined.values, 2.0 * parts[0].values + 0.5 * parts[1].values, atol=1e-12
        )

    def test_stacked_nodes_double_density(self):
        """Test two nodes at one position give twice the density of one node there."""
        bbox = (-1.0, 1.0, -1.0, 1.0)
        single = MapLayout(["a"], [[0.2, -0.3]], converged=True, objective_value=0.0)
        stacked = MapLayout(["a", "b"], [[0.2, -0.3]] * 2, converged=True, objective_value=0.0)

        one = density_field(single, [1.0], bandwidth=0.2, grid=(41, 41), bbox=bbox)
        two = density_field(stacked, [1.0, 1.0], bandwidth=0.2, grid=(41, 41), bbox=bbox)

        np.testing.assert_allclose(two.values, 2.0 * one.values)

    def test_single_node_peaks_at_its_position(self):
        """Test the densest cell of a lone node is the cell containing it."""
        node = MapLayout(["a"], [[0.31, -0.21]], converged=True, objective_value=0.0)

        field = density_field(node, [1.0], bandwidth=0.15, grid=(40, 40), bbox=(-1, 1, -1, 1))
        row, col = np.unravel_index(np.argmax(field.values), field.values.shape)
        xs, ys = field.cell_centers()
        dx, dy = field.cell_size

        assert abs(xs[col] - 0.31) < dx / 2
        assert abs(ys[row] + 0.21) < dy / 2
