"""Unit tests for overlays, cohesion and core category statistics."""

import numpy as np
import pytest
from scipy import sparse

from sciencemap.descriptors import SimilarityMatrix
from sciencemap.errors import EmptyCore, UnknownNode
from sciencemap.overlay import (
    category_shares,
    cohesion,
    core_extract,
    label_clusters,
    make_overlay,
)
from sciencemap.vosmap import Clustering, MapLayout


@pytest.fixture
def planted():
    """200 sparsely linked nodes with a planted 15-node clique."""
    rng = np.random.default_rng(17)
    n = 200
    upper = np.triu(rng.random((n, n)) * (rng.random((n, n)) < 0.02), k=1)
    members = rng.choice(n, size=15, replace=False)
    for a in members:
        for b in members:
            if a < b:
                upper[a, b] = 1.0
    labels = [f"S{i:03d}" for i in range(n)]
    sim = SimilarityMatrix(sparse.csr_matrix(upper + upper.T), labels)
    return sim, [labels[i] for i in members]


@pytest.fixture
def layout():
    positions = np.array([[0.0, 0.0], [1.0, 0.5], [-0.5, 1.0], [0.25, -1.0]])
    return MapLayout(["A", "B", "C", "D"], positions, converged=True, objective_value=1.0)


class TestMakeOverlay:
    """Test make_overlay."""

    def test_positions_untouched(self, layout):
        """Test the overlay reuses base positions byte for byte."""
        before = layout.positions.tobytes()

        overlay = make_overlay(layout, ["B", "D"])

        assert overlay.base.positions.tobytes() == before
        assert overlay.subset_positions() == {"B": (1.0, 0.5), "D": (0.25, -1.0)}
        assert overlay.highlight == {"B": 1.0, "D": 1.0}

    def test_per_node_highlight(self, layout):
        """Test a mapping of highlight weights defaults missing nodes to 1."""
        overlay = make_overlay(layout, ["A", "C"], highlight_weight={"A": 2.5})

        assert overlay.highlight == {"A": 2.5, "C": 1.0}

    def test_unknown_node_raises(self, layout):
        """Test a subset member missing from the base map raises UnknownNode."""
        with pytest.raises(UnknownNode, match="Z"):
            make_overlay(layout, ["A", "Z"])


class TestCohesion:
    """Test cohesion."""

    def test_planted_clique_is_significant(self, planted):
        """Test a planted clique has p < 0.01 and a ratio far above 1."""
        sim, members = planted

        report = cohesion(sim, members, permutations=1000, seed=0)

        assert report.permutation_p < 0.01
        assert report.ratio > 5
        assert report.within_subset_strength >= 105
        assert report.subset_size == 15

    def test_random_subsets_not_significant(self, planted):
        """Test uniformly drawn subsets rarely reach p < 0.01."""
        sim, _ = planted
        rng = np.random.default_rng(99)

        significant = 0
        for _ in range(100):
            subset = list(rng.choice(sim.labels, size=15, replace=False))
            significant += cohesion(sim, subset, permutations=100).permutation_p < 0.01

        assert significant <= 5

    @pytest.mark.slow
    def test_unstructured_subsets_pass_at_full_strength(self, planted):
        """Test 99% of subsets drawn away from the clique have p > 0.01 at 1000 permutations."""
        sim, members = planted
        outside = [label for label in sim.labels if label not in members]
        rng = np.random.default_rng(7)

        trials = 200
        passed = sum(
            cohesion(
                sim, list(rng.choice(outside, size=15, replace=False)), permutations=1000, seed=t
            ).permutation_p
            > 0.01
            for t in range(trials)
        )

        assert passed >= 0.99 * trials

    def test_seed_reproducible(self, planted):
        """Test the same seed gives the same null expectation."""
        sim, members = planted

        first = cohesion(sim, members[:5], permutations=100, seed=4)
        second = cohesion(sim, members[:5], permutations=100, seed=4)

        assert first.to_dict() == second.to_dict()

    def test_cluster_histogram(self):
        """Test subset members are counted per cluster."""
        sim = SimilarityMatrix(sparse.csr_matrix(np.ones((4, 4)) - np.eye(4)), list("abcd"))
        clustering = Clustering(list("abcd"), np.array([1, 1, 2, 2]), 1.0, 0.0)

        report = cohesion(sim, ["a", "b", "c"], permutations=100, clustering=clustering)

        assert report.subset_cluster_histogram == {1: 2, 2: 1}
        assert report.to_dict()["subset_cluster_histogram"] == {"1": 2, "2": 1}

    def test_invariant_under_relabeling(self, planted):
        """Test renaming every node leaves the cohesion report unchanged."""
        sim, members = planted
        renamed = SimilarityMatrix(sim.weights, [f"X-{label}" for label in sim.labels])

        original = cohesion(sim, members, permutations=200, seed=1)
        relabeled = cohesion(renamed, [f"X-{m}" for m in members], permutations=200, seed=1)

        assert relabeled.to_dict() == original.to_dict()

    def test_single_node_subset(self, planted):
        """Test a one-node subset has no internal links and ratio 0."""
        sim, members = planted

        report = cohesion(sim, members[:1], permutations=100)

        assert report.within_subset_strength == 0.0
        assert report.ratio == 0.0
        assert report.permutation_p == 1.0

    def test_too_few_permutations(self, planted):
        """Test fewer than 100 permutations are rejected."""
        sim, members = planted

        with pytest.raises(ValueError, match="permutations"):
            cohesion(sim, members, permutations=99)

    def test_unknown_subset_node(self, planted):
        """Test subset members must be nodes of the similarity matrix."""
        sim, _ = planted

        with pytest.raises(UnknownNode):
            cohesion(sim, ["nowhere"], permutations=100)


class TestCore:
    """Test core_extract and category_shares."""

    def test_core_extract_keeps_top_quantile(self, planted):
        """Test the clique members dominate the core of a mixed subset."""
        sim, members = planted
        others = [label for label in sim.labels if label not in members][:15]

        core = core_extract(sim, members + others, quantile=0.5)

        assert set(members) <= core

    def test_star_hub_always_in_core(self):
        """Test the hub of a star is in the core at every quantile below 1."""
        n = 9
        dense = np.zeros((n, n))
        dense[0, 1:] = dense[1:, 0] = np.linspace(0.2, 1.0, n - 1)
        sim = SimilarityMatrix(sparse.csr_matrix(dense), [f"N{i}" for i in range(n)])

        for quantile in (0.01, 0.25, 0.5, 0.88, 0.99, 0.999):
            assert "N0" in core_extract(sim, sim.labels, quantile)

    def test_small_quantile_keeps_whole_subset(self, planted):
        """Test a quantile close to 0 returns every subset member."""
        sim, members = planted
        subset = members + [label for label in sim.labels if label not in members][:10]

        assert core_extract(sim, subset, 1e-9) == set(subset)

    def test_quantile_bounds(self, planted):
        """Test the quantile must lie strictly inside (0, 1)."""
        sim, members = planted

        for quantile in (0.0, 1.0):
            with pytest.raises(ValueError):
                core_extract(sim, members, quantile)

    def test_shares_of_26_member_core(self):
        """Test 20, 13 and 6 of 26 members round to 77, 50 and 23 percent."""
        core = [f"S{i:02d}" for i in range(26)]
        categories = {}
        for i, sid in enumerate(core):
            cats = []
            if i < 20:
                cats.append("Education")
            if i >= 13:
                cats.append("Computer Science")
            if i < 6:
                cats.append("Engineering")
            categories[sid] = cats

        stats = category_shares(core, categories)

        assert stats.shares == {"Computer Science": 50, "Education": 77, "Engineering": 23}
        assert stats.overlap[("Computer Science", "Education")] == 27
        assert stats.conditional[("Education", "Computer Science")] == 35
        assert stats.conditional[("Computer Science", "Education")] == 54
        assert stats.to_dict()["raw_shares"]["Education"] == pytest.approx(100 * 20 / 26)

    def test_empty_core(self):
        """Test an empty core raises EmptyCore."""
        with pytest.raises(EmptyCore):
            category_shares([], {})


class TestLabelClusters:
    """Test label_clusters."""

    def test_most_frequent_category_names_cluster(self):
        """Test clusters take their most frequent category, ties alphabetical."""
        clustering = Clustering(list("abcde"), np.array([1, 1, 1, 2, 3]), 1.0, 0.0)
        categories = {
            "a": ["Education"],
            "b": ["Education", "Psychology"],
            "c": ["Psychology", "Computer Science"],
            "d": ["Medicine", "Biology"],
        }

        assert label_clusters(clustering, categories) == {
            1: "Education",
            2: "Biology",
            3: "uncategorized",
        }
