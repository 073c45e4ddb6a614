"""Stage registry and runner."""

from __future__ import annotations

import logging
import time

from ..config import PipelineConfig
from ..errors import SciencemapError, StageFailed
from .base import BaseStage, StageContext, StageJobInput, StageResult

logger = logging.getLogger(__name__)


class StageRegistry:
    """Registry of all available stages, in pipeline order."""

    def __init__(self) -> None:
        self._stages: dict[str, type[BaseStage]] = {}

    def register(self, stage_class: type[BaseStage]) -> type[BaseStage]:
        self._stages[stage_class.name] = stage_class
        logger.debug(f"Registered stage: {stage_class.name}")
        return stage_class

    def get_stage(self, name: str) -> type[BaseStage] | None:
        return self._stages.get(name)

    def list_stages(self) -> list[str]:
        return list(self._stages)

    def upstream(self, name: str) -> list[str]:
        """Every stage ``name`` depends on, directly or through another stage."""
        seen: list[str] = []
        pending = list(self._stages[name].requires)
        while pending:
            dep = pending.pop(0)
            if dep in seen:
                continue
            seen.append(dep)
            dep_class = self._stages.get(dep)
            if dep_class is not None:
                pending.extend(dep_class.requires)
        return sorted(seen)


class StageRunner:
    """Runs stages against one output directory."""

    def __init__(self, registry: StageRegistry, config: PipelineConfig):
        self.registry = registry
        self.context = StageContext(config)

    def check_upstream(self, name: str) -> None:
        """Fail when any upstream stage consumed artifacts that changed after it ran."""
        for dep in self.registry.upstream(name):
            self.context.store.check_fresh(dep)

    def run_stage(self, name: str) -> StageResult:
        stage_class = self.registry.get_stage(name)
        if stage_class is None:
            raise ValueError(f"Stage '{name}' not found")

        stage = stage_class()
        job_input = StageJobInput(stage=name, config=self.context.config)
        logger.info(f"Starting stage: {name}")
        start = time.perf_counter()
        try:
            self.check_upstream(name)
            result = stage.run(self.context, job_input)
        except SciencemapError as ex:
            logger.error(f"Stage {name} failed: {ex}")
            raise StageFailed(name, ex, stage.provenance(self.context)) from ex
        except Exception as ex:
            logger.exception(f"Stage {name} failed unexpectedly")
            raise StageFailed(name, ex, stage.provenance(self.context)) from ex

        duration = time.perf_counter() - start
        logger.info(f"Stage completed: {name} ({len(result.outputs)} artifacts, {duration:.2f}s)")
        return result


stage_registry = StageRegistry()
