"""Overlay, category graph and run report stages."""

from __future__ import annotations

import pandas as pd

from ..categraph import build_category_graph, co_assignment, fr_layout
from ..exports import (
    clustering_from_dict,
    read_json,
    read_keywords,
    read_layout_json,
    read_selected,
    read_vos_network,
    write_json,
)
from ..overlay import category_shares, cohesion, core_extract, make_overlay
from ..render import render_categraph, render_overlay
from ..vosmap import restrict
from .base import BaseStage, StageContext, StageJobInput, StageResult
from .runner import stage_registry


@stage_registry.register
class OverlayStage(BaseStage):
    """Selected publications on the frozen base map, with cohesion and core statistics."""

    name = "overlay"
    requires = ("ingest", "simnet", "map", "cluster", "bands")
    config_sections = ("overlay", "seeds")

    def run(self, ctx: StageContext, job_input: StageJobInput) -> StageResult:
        settings = ctx.config.overlay
        store = ctx.store
        network = store.require("simnet", "network.txt")
        labels = store.require("simnet", "network_labels.txt")
        layout_path = store.require("map", "layout.json")
        clusters_path = store.require("cluster", "clusters.json")
        selected_path = store.require("bands", "selected.csv")

        sim, weights = read_vos_network(network, labels)
        layout = read_layout_json(layout_path)
        cluster_data = read_json(clusters_path)
        clustering = clustering_from_dict(cluster_data)
        selected = read_selected(selected_path)

        on_map = set(layout.node_ids)
        subset = sorted(sid for sid in selected if sid in on_map)
        off_map = sorted(sid for sid in selected if sid not in on_map)
        if off_map:
            self.logger.warning(f"{len(off_map)} selected sources are not on the base map")

        spec = make_overlay(layout, subset, clustering)
        mapped = restrict(sim, layout.node_ids)
        report = cohesion(
            mapped,
            subset,
            permutations=settings.permutations,
            seed=ctx.config.seeds.overlay,
            clustering=clustering,
        )
        core = core_extract(mapped, subset, settings.core_quantile) if subset else set()
        core_stats = category_shares(core, ctx.corpus().categories()) if core else None
        if core_stats is None:
            self.logger.warning("Core is empty; no category shares")

        details = {
            "subset_size": len(subset),
            "not_on_map": off_map,
            "cohesion": report.to_dict(),
            "core": core_stats.to_dict() if core_stats is not None else None,
            "core_quantile": settings.core_quantile,
            "cluster_names": cluster_data.get("names", {}),
        }

        node_weight = dict(zip(sim.labels, weights))
        store.stage_dir(self.name)
        outputs = [
            render_overlay(
                spec,
                [float(node_weight[node]) for node in layout.node_ids],
                store.path(self.name, "overlay.svg"),
            ),
            write_json(details, store.path(self.name, "overlay.json")),
        ]
        return self.finish(
            ctx,
            self.artifact_inputs(ctx, network, labels, layout_path, clusters_path, selected_path),
            outputs,
            metrics={"subset": len(subset), "permutation_p": report.permutation_p},
        )


@stage_registry.register
class CategraphStage(BaseStage):
    """Category co-assignment graph of the selected publications and its FR layout."""

    name = "categraph"
    requires = ("ingest", "bands")
    config_sections = ("categraph", "seeds")

    def run(self, ctx: StageContext, job_input: StageJobInput) -> StageResult:
        settings = ctx.config.categraph
        store = ctx.store
        selected_path = store.require("bands", "selected.csv")
        selected = read_selected(selected_path)

        graph = build_category_graph(selected, ctx.corpus().categories())
        layout = fr_layout(
            graph, k=settings.k, iterations=settings.iterations, seed=ctx.config.seeds.categraph
        )
        index = layout.index()
        data = {
            "nodes": [
                {
                    "id": cat,
                    "weight": graph.node_weight(cat),
                    "x": float(layout.positions[index[cat], 0]),
                    "y": float(layout.positions[index[cat], 1]),
                }
                for cat in graph.categories
            ],
            "edges": [{"source": a, "target": b, "weight": w} for a, b, w in graph.edges()],
            "uncategorized": graph.uncategorized,
        }

        store.stage_dir(self.name)
        table_path = store.path(self.name, "co_assignment.csv")
        co_assignment(graph).to_csv(table_path, index=False, lineterminator="\n")
        outputs = [
            table_path,
            write_json(data, store.path(self.name, "categraph.json")),
            render_categraph(
                graph, layout, store.path(self.name, "categraph.svg"), colors=settings.colors
            ),
        ]
        return self.finish(
            ctx,
            self.artifact_inputs(ctx, selected_path),
            outputs,
            metrics={"categories": len(graph.categories), "edges": len(graph.edges())},
        )


@stage_registry.register
class ReportStage(BaseStage):
    """Single summary of the run, built only from fresh stage artifacts."""

    name = "report"
    requires = (
        "ingest",
        "descriptors",
        "participate",
        "bands",
        "simnet",
        "map",
        "cluster",
        "overlay",
        "categraph",
    )

    def run(self, ctx: StageContext, job_input: StageJobInput) -> StageResult:
        store = ctx.store
        paths = {
            "ingest": store.require("ingest", "summary.json"),
            "descriptors": store.require("descriptors", "descriptors.json"),
            "keywords": store.require("descriptors", "keywords.csv"),
            "participation": store.require("participate", "participation_summary.json"),
            "bands": store.require("bands", "bands.csv"),
            "cutoff": store.require("bands", "cutoff.json"),
            "simnet": store.require("simnet", "simnet.json"),
            "map": store.require("map", "map.json"),
            "clusters": store.require("cluster", "clusters.json"),
            "overlay": store.require("overlay", "overlay.json"),
            "categraph": store.require("categraph", "categraph.json"),
        }
        ingest = read_json(paths["ingest"])
        descriptors = read_json(paths["descriptors"])
        cutoff = read_json(paths["cutoff"])
        simnet = read_json(paths["simnet"])
        base_map = read_json(paths["map"])
        clusters = read_json(paths["clusters"])
        overlay = read_json(paths["overlay"])
        categraph = read_json(paths["categraph"])

        keyword_count = len(read_keywords(paths["keywords"]))
        band_table = pd.read_csv(paths["bands"]).to_dict(orient="records")

        report = {
            "documents": ingest["documents"],
            "sources": ingest["sources"],
            "term_core": descriptors["term_core"],
            "keyword_count": keyword_count,
            "descriptor_count": len(descriptors["primary"]),
            "secondary_descriptor_count": len(descriptors["secondary"]),
            "participation": read_json(paths["participation"]),
            "band_table": band_table,
            "cutoff": cutoff["cutoff"],
            "included_at_cutoff": cutoff["included"],
            "unrelated_at_cutoff": cutoff["unrelated"],
            "selected_count": cutoff["selected"],
            "selected_by_type": cutoff["selected_by_type"],
            "unresolved_reference_ratio": simnet["unresolved_ratio"],
            "mapped_sources": base_map["nodes"],
            "map_converged": base_map["converged"],
            "cluster_count": clusters["n_clusters"],
            "cluster_names": clusters["names"],
            "cohesion": overlay["cohesion"],
            "core_stats": overlay["core"],
            "category_count": len(categraph["nodes"]),
            "category_edge_count": len(categraph["edges"]),
        }
        report_path = write_json(report, store.root / "report.json")
        return self.finish(
            ctx,
            self.artifact_inputs(ctx, *paths.values()),
            [report_path],
            metrics={"selected": report["selected_count"], "clusters": report["cluster_count"]},
        )
