"""Source network, base map layout and clustering stages."""

from __future__ import annotations

from collections import Counter

from ..exports import (
    clustering_to_dict,
    read_layout_json,
    read_vos_network,
    write_channels,
    write_density,
    write_json,
    write_layout_json,
    write_map,
    write_vos_labels,
    write_vos_network,
)
from ..overlay import label_clusters
from ..render import render_density, render_map
from ..simnet import build_channels, combine_channels, resolve_references
from ..vosmap import density_field, largest_component, restrict, vos_cluster, vos_layout
from .base import BaseStage, StageContext, StageJobInput, StageResult
from .runner import stage_registry


@stage_registry.register
class SimnetStage(BaseStage):
    """Citation, co-citation and coupling channels combined into one source similarity."""

    name = "simnet"
    requires = ("ingest",)
    config_sections = ("simnet",)

    def run(self, ctx: StageContext, job_input: StageJobInput) -> StageResult:
        store = ctx.store
        summary = store.require("ingest", "summary.json")
        corpus = ctx.corpus()

        refs = resolve_references(corpus)
        channels = build_channels(corpus, refs)
        combined = combine_channels(channels, ctx.config.simnet.weights)
        doc_counts = Counter(doc.source_id for doc in corpus.documents)

        details = {
            "weights": {k.value: v for k, v in combined.weights.items()},
            "empty_channels": [c.value for c in combined.empty_channels],
            "total_references": refs.total_references,
            "unresolved_references": refs.unresolved_references,
            "unresolved_ratio": refs.unresolved_ratio,
            "sources": combined.matrix.n,
            "links": combined.matrix.nnz // 2,
        }

        store.stage_dir(self.name)
        outputs = [
            write_channels(channels, store.path(self.name, "channels.csv")),
            write_vos_network(combined.matrix, store.path(self.name, "network.txt")),
            write_vos_labels(
                combined.matrix,
                [doc_counts.get(sid, 0) for sid in combined.matrix.labels],
                store.path(self.name, "network_labels.txt"),
            ),
            write_json(details, store.path(self.name, "simnet.json")),
        ]
        return self.finish(
            ctx,
            {**self.artifact_inputs(ctx, summary), **ctx.corpus_inputs()},
            outputs,
            metrics={"links": details["links"], "unresolved_ratio": refs.unresolved_ratio},
        )


@stage_registry.register
class MapStage(BaseStage):
    """VOS layout of the largest connected part of the source network, plus its density."""

    name = "map"
    requires = ("simnet",)
    config_sections = ("mapping", "seeds")

    def run(self, ctx: StageContext, job_input: StageJobInput) -> StageResult:
        mapping = ctx.config.mapping
        store = ctx.store
        network = store.require("simnet", "network.txt")
        labels = store.require("simnet", "network_labels.txt")
        sim, weights = read_vos_network(network, labels)

        component = largest_component(sim)
        excluded = sim.n - component.n
        if excluded:
            self.logger.warning(f"{excluded} sources outside the largest component are not mapped")
        node_weight = dict(zip(sim.labels, weights))
        component_weights = [float(node_weight[node]) for node in component.labels]

        layout = vos_layout(
            component, seed=ctx.config.seeds.map, max_iter=mapping.max_iter, tol=mapping.tol
        )
        density = density_field(
            layout,
            component_weights,
            mapping.bandwidth,
            grid=(mapping.grid, mapping.grid),
            force=mapping.force_density,
        )

        details = {
            "nodes": layout.n,
            "excluded": excluded,
            "converged": layout.converged,
            "iterations": layout.iterations,
            "objective": layout.objective_value,
            "mean_distance": layout.mean_distance(),
            "bandwidth": density.bandwidth,
            "bbox": list(density.bbox),
        }

        store.stage_dir(self.name)
        outputs = [
            write_layout_json(layout, store.path(self.name, "layout.json")),
            write_density(density, store.path(self.name, "density.csv")),
            render_density(density, store.path(self.name, "density.svg")),
            render_map(
                layout,
                None,
                component_weights,
                store.path(self.name, "map_density.svg"),
                density=density,
                show_labels=mapping.show_labels,
            ),
            write_json(details, store.path(self.name, "map.json")),
        ]
        return self.finish(
            ctx,
            self.artifact_inputs(ctx, network, labels),
            outputs,
            metrics={"nodes": layout.n, "iterations": layout.iterations},
        )


@stage_registry.register
class ClusterStage(BaseStage):
    """Resolution-based clustering of the mapped sources, named by their categories."""

    name = "cluster"
    requires = ("ingest", "simnet", "map")
    config_sections = ("mapping", "seeds")

    def run(self, ctx: StageContext, job_input: StageJobInput) -> StageResult:
        mapping = ctx.config.mapping
        store = ctx.store
        network = store.require("simnet", "network.txt")
        labels = store.require("simnet", "network_labels.txt")
        layout_path = store.require("map", "layout.json")
        sim, weights = read_vos_network(network, labels)
        layout = read_layout_json(layout_path)

        mapped = restrict(sim, layout.node_ids)
        clustering = vos_cluster(
            mapped,
            resolution=mapping.resolution,
            restarts=mapping.restarts,
            seed=ctx.config.seeds.cluster,
        )
        names = label_clusters(clustering, ctx.corpus().categories())

        node_weight = dict(zip(sim.labels, weights))
        map_weights = [float(node_weight[node]) for node in layout.node_ids]
        data = clustering_to_dict(clustering)
        data["names"] = {str(cid): name for cid, name in names.items()}
        data["sizes"] = {str(cid): size for cid, size in clustering.sizes().items()}

        store.stage_dir(self.name)
        outputs = [
            write_json(data, store.path(self.name, "clusters.json")),
            write_map(layout, clustering, map_weights, store.path(self.name, "map.txt")),
            render_map(
                layout,
                clustering,
                map_weights,
                store.path(self.name, "map.svg"),
                show_labels=ctx.config.mapping.show_labels,
            ),
        ]
        return self.finish(
            ctx,
            self.artifact_inputs(ctx, network, labels, layout_path),
            outputs,
            metrics={"clusters": clustering.n_clusters, "quality": clustering.quality},
        )
