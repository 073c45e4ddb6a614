"""Corpus ingest stage."""

from __future__ import annotations

from collections import Counter

import pandas as pd

from ..corpus import count_documents
from ..exports import write_json
from .base import BaseStage, StageContext, StageJobInput, StageResult
from .runner import stage_registry


@stage_registry.register
class IngestStage(BaseStage):
    """Parses the corpus once and records what the downstream stages will read."""

    name = "ingest"
    config_sections = ("query",)

    def run(self, ctx: StageContext, job_input: StageJobInput) -> StageResult:
        corpus = ctx.corpus(verify=False)
        store = ctx.store
        store.stage_dir(self.name)
        self.logger.info(f"Ingested {len(corpus)} documents from {len(corpus.sources)} sources")

        doc_counts = Counter(doc.source_id for doc in corpus.documents)
        sources = pd.DataFrame(
            [
                {
                    "source_id": sid,
                    "title": src.title,
                    "source_type": src.source_type.value,
                    "documents": doc_counts.get(sid, 0),
                    "categories": ";".join(src.categories),
                }
                for sid, src in corpus.sources.items()
            ],
            columns=["source_id", "title", "source_type", "documents", "categories"],
        )
        sources_path = store.path(self.name, "sources.csv")
        sources.to_csv(sources_path, index=False, lineterminator="\n")

        years = [doc.year for doc in corpus.documents]
        query = ctx.config.query.to_query()
        summary = {
            "documents": len(corpus),
            "sources": len(corpus.sources),
            "sources_by_type": dict(
                sorted(Counter(s.source_type.value for s in corpus.sources.values()).items())
            ),
            "documents_by_type": dict(
                sorted(Counter(d.doc_type.value for d in corpus.documents).items())
            ),
            "years": [min(years), max(years)] if years else [],
            "documents_in_query": count_documents(corpus, query),
            "uncategorized_sources": sum(1 for s in corpus.sources.values() if not s.categories),
        }
        summary_path = write_json(summary, store.path(self.name, "summary.json"))

        return self.finish(
            ctx,
            inputs=ctx.corpus_inputs(),
            outputs=[sources_path, summary_path],
            metrics={"documents": len(corpus), "sources": len(corpus.sources)},
        )
