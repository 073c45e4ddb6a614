"""Descriptor, participation and cut-off band stages."""

from __future__ import annotations

from pathlib import Path

from .. import DEFAULT_VARIANT_RULES
from ..corpus import query_documents
from ..descriptors import (
    DescriptorSet,
    VariantRules,
    association_strength,
    build_cooccurrence,
    expand_secondary,
    extract_keywords,
    select_primary,
)
from ..errors import DataError
from ..exports import (
    read_json,
    read_participation,
    write_bands,
    write_cooccurrence,
    write_correspondence,
    write_json,
    write_keywords,
    write_participation,
    write_primary,
    write_selected,
    write_vos_labels,
    write_vos_network,
)
from ..participation import (
    ParticipationRow,
    RelatednessLabels,
    band_table,
    correspondence,
    participation_rows,
    participation_summary,
    select_cutoff,
    selected_publications,
    selection_by_type,
)
from .base import EXTERNAL_PREFIX, BaseStage, StageContext, StageJobInput, StageResult
from .runner import stage_registry


@stage_registry.register
class DescriptorsStage(BaseStage):
    """Keywords of the term-core sample, co-occurrence, primary and secondary descriptors."""

    name = "descriptors"
    requires = ("ingest",)
    config_sections = ("term_core", "query", "descriptors")

    def run(self, ctx: StageContext, job_input: StageJobInput) -> StageResult:
        config = ctx.config
        store = ctx.store
        summary = store.require("ingest", "summary.json")
        corpus = ctx.corpus()

        query = config.query.to_query([config.term_core], limit=config.query.sample_size)
        docs = query_documents(corpus, query)
        if not docs:
            raise DataError(f"No document matches the term core '{config.term_core}'")
        self.logger.info(f"Sampled {len(docs)} documents for '{config.term_core}'")

        stats = extract_keywords(docs)
        cooc = build_cooccurrence(docs, stats)
        sim = association_strength(cooc)
        primary = select_primary(
            sim,
            stats,
            config.descriptors.min_occurrence,
            config.descriptors.top_n,
            term_core=config.term_core,
        )

        rules_path = (
            config.require_path("variant_rules")
            if config.variant_rules is not None
            else DEFAULT_VARIANT_RULES
        )
        rules = VariantRules.load(
            rules_path,
            hyphen_variants=config.descriptors.hyphen_variants,
            space_variants=config.descriptors.space_variants,
        )
        dset = expand_secondary(primary, rules, term_core=config.term_core)

        store.stage_dir(self.name)
        outputs = [
            write_keywords(stats, store.path(self.name, "keywords.csv")),
            write_cooccurrence(cooc, store.path(self.name, "cooccurrence.csv")),
            write_primary(primary, stats, sim, store.path(self.name, "primary.csv")),
            write_json(dset.to_dict(), store.path(self.name, "descriptors.json")),
            write_vos_network(sim, store.path(self.name, "network.txt")),
            write_vos_labels(
                sim, [s.occurrences for s in stats], store.path(self.name, "network_labels.txt")
            ),
        ]
        inputs = {
            **self.artifact_inputs(ctx, summary),
            **ctx.corpus_inputs(),
            f"{EXTERNAL_PREFIX}variant_rules": rules_path,
        }
        return self.finish(
            ctx,
            inputs,
            outputs,
            metrics={
                "sample": len(docs),
                "keywords": len(stats),
                "primary": len(dset.primary),
                "secondary": len(dset.secondary),
            },
        )


@stage_registry.register
class ParticipateStage(BaseStage):
    """Correspondence matrix, TNA/NRA/PP per source and the PP distribution."""

    name = "participate"
    requires = ("ingest", "descriptors")
    config_sections = ("query",)

    def run(self, ctx: StageContext, job_input: StageJobInput) -> StageResult:
        store = ctx.store
        descriptors_path = store.require("descriptors", "descriptors.json")
        dset = DescriptorSet.from_dict(read_json(descriptors_path))
        corpus = ctx.corpus()

        base_query = ctx.config.query.to_query()
        matrix = correspondence(corpus, dset, base_query)
        result = participation_rows(matrix, corpus, base_query)

        summary = participation_summary(result.rows)
        summary["zero_tna"] = sorted(result.zero_tna)

        store.stage_dir(self.name)
        outputs = [
            write_participation(result.rows, store.path(self.name, "participation.csv")),
            write_correspondence(matrix.table, store.path(self.name, "correspondence.csv")),
            write_json(summary, store.path(self.name, "participation_summary.json")),
        ]
        return self.finish(
            ctx,
            {**self.artifact_inputs(ctx, descriptors_path), **ctx.corpus_inputs()},
            outputs,
            metrics={"sources": len(result.rows), "zero_tna": len(result.zero_tna)},
        )


@stage_registry.register
class BandsStage(BaseStage):
    """Cut-off bands, the selected cut-off and the selected publications."""

    name = "bands"
    requires = ("ingest", "participate")
    config_sections = ("participation",)

    def labels(
        self, ctx: StageContext, rows: list[ParticipationRow]
    ) -> tuple[RelatednessLabels, dict[str, Path]]:
        config = ctx.config
        if config.labels is None and config.participation.heuristic_labels:
            self.logger.warning("No labels file; using the PP > 0 heuristic")
            return RelatednessLabels.heuristic(rows), {}
        path = config.require_path("labels")
        return RelatednessLabels.load(path), {f"{EXTERNAL_PREFIX}labels": path}

    def run(self, ctx: StageContext, job_input: StageJobInput) -> StageResult:
        config = ctx.config
        store = ctx.store
        participation_path = store.require("participate", "participation.csv")
        rows = read_participation(participation_path)
        labels, label_inputs = self.labels(ctx, rows)

        bands = band_table(rows, labels, config.participation.thresholds)
        cutoff = select_cutoff(bands, config.participation.min_avg_pp)
        selected = selected_publications(rows, labels, cutoff)
        corpus = ctx.corpus()
        at_cutoff = next(b for b in bands if b.threshold_percent == cutoff)

        decision = {
            "cutoff": cutoff,
            "min_avg_pp": config.participation.min_avg_pp,
            "included": at_cutoff.included,
            "unrelated": at_cutoff.errors,
            "selected": len(selected),
            "selected_by_type": selection_by_type(selected, corpus),
        }
        self.logger.info(
            f"Cut-off {cutoff:g}%: {at_cutoff.included} included, "
            f"{at_cutoff.errors} unrelated, {len(selected)} selected"
        )

        store.stage_dir(self.name)
        outputs = [
            write_bands(bands, store.path(self.name, "bands.csv")),
            write_selected(selected, corpus.sources, store.path(self.name, "selected.csv")),
            write_json(decision, store.path(self.name, "cutoff.json")),
        ]
        return self.finish(
            ctx,
            {**self.artifact_inputs(ctx, participation_path), **label_inputs},
            outputs,
            metrics={"cutoff": cutoff, "selected": len(selected)},
        )
