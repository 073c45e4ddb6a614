"""Base stage classes and the common stage contract."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, ClassVar

from ..artifacts import ArtifactStore, file_sha256
from ..config import PipelineConfig
from ..corpus import Corpus, parse_corpus
from ..errors import StaleArtifact

logger = logging.getLogger(__name__)

EXTERNAL_PREFIX = "input:"


@dataclass
class StageJobInput:
    """Input envelope for a stage run."""

    stage: str
    config: PipelineConfig


@dataclass
class StageResult:
    """Result envelope for a stage run."""

    stage: str
    ok: bool
    metrics: dict[str, int | float] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    error: str | None = None


class StageContext:
    """Shared state of one pipeline invocation: config, artifact store, parsed corpus."""

    def __init__(self, config: PipelineConfig, store: ArtifactStore | None = None):
        self.config = config
        self.store = store or ArtifactStore(config.out)
        self._corpus: Corpus | None = None

    def corpus_inputs(self) -> dict[str, Path]:
        inputs = {f"{EXTERNAL_PREFIX}corpus": self.config.require_path("corpus")}
        if self.config.categories is not None:
            inputs[f"{EXTERNAL_PREFIX}categories"] = self.config.require_path("categories")
        return inputs

    def corpus(self, verify: bool = True) -> Corpus:
        """Parsed corpus; with ``verify`` it must be the file the ingest stage saw."""
        if verify:
            recorded = self.store.manifest("ingest")["inputs"]
            for name, path in self.corpus_inputs().items():
                if recorded.get(name) != file_sha256(path):
                    raise StaleArtifact("ingest", str(path))
        if self._corpus is None:
            self._corpus = parse_corpus(
                self.config.require_path("corpus"),
                categories_path=self.config.categories,
            )
        return self._corpus


class BaseStage(ABC):
    """Base class for all pipeline stages."""

    name: ClassVar[str]
    requires: ClassVar[tuple[str, ...]] = ()
    config_sections: ClassVar[tuple[str, ...]] = ()

    def __init__(self) -> None:
        self.logger = logging.getLogger(f"stage.{self.name}")

    @abstractmethod
    def run(self, ctx: StageContext, job_input: StageJobInput) -> StageResult:
        """Execute the stage and write its artifacts."""

    def provenance(self, ctx: StageContext) -> list[str]:
        """Inputs named in error messages when the stage fails."""
        return [f"{stage}/manifest.json" for stage in self.requires]

    def config_slice(self, ctx: StageContext) -> dict[str, Any]:
        return ctx.config.sections(*self.config_sections)

    def finish(
        self,
        ctx: StageContext,
        inputs: Mapping[str, Path],
        outputs: Iterable[Path],
        metrics: dict[str, int | float] | None = None,
        notes: list[str] | None = None,
    ) -> StageResult:
        """Write the manifest and build the result."""
        outputs = sorted(outputs)
        ctx.store.write_manifest(self.name, inputs, outputs, self.config_slice(ctx))
        self.logger.info(f"Wrote {len(outputs)} artifacts")
        return StageResult(
            stage=self.name,
            ok=True,
            metrics=metrics or {},
            outputs=[ctx.store.relative(p) for p in outputs],
            notes=notes or [],
        )

    def artifact_inputs(self, ctx: StageContext, *paths: Path) -> dict[str, Path]:
        return {ctx.store.relative(p): p for p in paths}
