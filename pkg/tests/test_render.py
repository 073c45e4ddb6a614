"""Unit tests for SVG renders and artifact file formats."""

import numpy as np
import pytest
from scipy import sparse

from sciencemap.descriptors import SimilarityMatrix
from sciencemap.exports import (
    read_json,
    read_layout_json,
    read_vos_network,
    write_json,
    write_layout_json,
    write_vos_labels,
    write_vos_network,
)
from sciencemap.overlay import make_overlay
from sciencemap.render import render_density, render_map, render_overlay
from sciencemap.vosmap import Clustering, MapLayout, density_field


@pytest.fixture
def layout():
    positions = np.array([[0.0, 0.0], [1.0, 0.2], [0.4, 1.1], [-0.6, 0.5]])
    return MapLayout(list("abcd"), positions, converged=True, objective_value=0.5)


class TestRender:
    """Test render_map, render_overlay and render_density."""

    def test_map_has_one_circle_per_node(self, layout, tmp_path):
        """Test the base map draws every node with its title."""
        clustering = Clustering(list("abcd"), np.array([1, 1, 2, 2]), 1.0, 0.0)

        path = render_map(layout, clustering, [1, 2, 3, 4], tmp_path / "map.svg")
        svg = path.read_text()

        assert svg.count("<circle") == 4
        assert "<title>c</title>" in svg

    def test_map_over_density_with_labels(self, layout, tmp_path):
        """Test the base map can sit on a heat layer and name its nodes."""
        density = density_field(layout, [1, 2, 3, 4], bandwidth=0.3, grid=(20, 20))

        path = render_map(
            layout, None, [1, 2, 3, 4], tmp_path / "map.svg", density=density, show_labels=True
        )
        svg = path.read_text()

        assert "<rect" in svg
        assert svg.count("<circle") == 4
        assert svg.count("<text") == 4
        assert svg.index("<rect") < svg.index("<circle")

    def test_overlay_highlights_subset(self, layout, tmp_path):
        """Test subset nodes land in the highlighted group."""
        overlay = make_overlay(layout, ["b", "d"])

        svg = render_overlay(overlay, [1, 1, 1, 1], tmp_path / "overlay.svg").read_text()
        subset_group = svg[svg.index('id="subset"') :]

        assert svg.count("<circle") == 4
        assert subset_group.count("<circle") == 2

    def test_density_heat_layer(self, layout, tmp_path):
        """Test the density render paints heat cells."""
        density = density_field(layout, [1, 1, 1, 1], bandwidth=0.3, grid=(20, 20))

        svg = render_density(density, tmp_path / "density.svg").read_text()

        assert svg.count("<rect") > 0


class TestExports:
    """Test the network, layout and JSON formats."""

    def test_vos_network_files(self, tmp_path):
        """Test the network file uses 1-based ids and reads back the same matrix."""
        dense = np.array([[0, 0.5, 0], [0.5, 0, 0.25], [0, 0.25, 0]])
        sim = SimilarityMatrix(sparse.csr_matrix(dense), ["x", "y", "z"])

        network = write_vos_network(sim, tmp_path / "network.txt")
        labels = write_vos_labels(sim, [3, 1, 2], tmp_path / "labels.txt")
        loaded, weights = read_vos_network(network, labels)

        assert network.read_text() == "1\t2\t0.5\n2\t3\t0.25\n"
        assert loaded.labels == ["x", "y", "z"]
        np.testing.assert_array_equal(loaded.to_dense(), dense)
        np.testing.assert_array_equal(weights, [3.0, 1.0, 2.0])

    def test_layout_json_keeps_positions(self, layout, tmp_path):
        """Test layout.json restores positions bit for bit."""
        restored = read_layout_json(write_layout_json(layout, tmp_path / "layout.json"))

        assert restored.positions.tobytes() == layout.positions.tobytes()
        assert restored.node_ids == layout.node_ids

    def test_json_is_sorted_and_handles_numpy(self, tmp_path):
        """Test JSON keys are sorted and numpy scalars are written as plain numbers."""
        path = write_json({"b": np.int64(2), "a": [np.float64(0.5)]}, tmp_path / "x.json")
        text = path.read_text()

        assert read_json(path) == {"a": [0.5], "b": 2}
        assert text.index('"a"') < text.index('"b"')
        assert text.endswith("}\n")
