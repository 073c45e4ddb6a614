"""Pipeline stages; importing this package registers them in pipeline order."""

from __future__ import annotations

from typing import Any

from ..config import PipelineConfig
from ..exports import read_json
from . import analysis, ingest, mapping, overlays  # noqa: F401
from .base import BaseStage, StageContext, StageJobInput, StageResult
from .runner import StageRegistry, StageRunner, stage_registry

PIPELINE_ORDER = (
    "ingest",
    "descriptors",
    "participate",
    "bands",
    "simnet",
    "map",
    "cluster",
    "overlay",
    "categraph",
    "report",
)


def run_stage(config: PipelineConfig, name: str) -> StageResult:
    return StageRunner(stage_registry, config).run_stage(name)


def run_pipeline(config: PipelineConfig) -> dict[str, Any]:
    """Run every stage in order and return the contents of ``report.json``."""
    runner = StageRunner(stage_registry, config)
    for name in PIPELINE_ORDER:
        runner.run_stage(name)
    return read_json(runner.context.store.root / "report.json")


__all__ = [
    "PIPELINE_ORDER",
    "BaseStage",
    "StageContext",
    "StageJobInput",
    "StageRegistry",
    "StageResult",
    "StageRunner",
    "run_pipeline",
    "run_stage",
    "stage_registry",
]
