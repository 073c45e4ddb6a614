"""Pipeline configuration: TOML file, SCIENCEMAP_* environment, CLI overrides.

Priority is CLI override > config file > environment > defaults.
"""

from __future__ import annotations

import logging

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .corpus import CorpusQuery, DocType, Order, SearchField, SourceType
from .errors import ConfigError
from .participation import DEFAULT_THRESHOLDS

logger = logging.getLogger(__name__)

_PATH_FIELDS = ("corpus", "categories", "variant_rules", "labels", "published_bands")


class QueryConfig(BaseModel):
    """Filters of the database query chart."""

    fields: list[SearchField] = list(SearchField)
    source_types: list[SourceType] = [SourceType.JOURNAL, SourceType.PROCEEDING]
    doc_types: list[DocType] = [
        DocType.ARTICLE,
        DocType.CONFERENCE_PAPER,
        DocType.CONFERENCE_REVIEW,
    ]
    year_start: int = 2012
    year_end: int = 2014
    language: str | None = "en"
    sample_size: int = Field(default=2000, gt=0)
    order: Order = Order.CITATION_COUNT_DESC

    def to_query(
        self, terms: list[str] | tuple[str, ...] = (), limit: int | None = None
    ) -> CorpusQuery:
        return CorpusQuery(
            term_set=tuple(terms),
            fields_searched=frozenset(self.fields),
            source_types=frozenset(self.source_types),
            doc_types=frozenset(self.doc_types),
            years=(self.year_start, self.year_end),
            language=self.language,
            limit=limit,
            order=self.order,
        )


class DescriptorConfig(BaseModel):
    min_occurrence: int = Field(default=5, ge=1)
    top_n: int = Field(default=51, ge=1)
    hyphen_variants: bool = True
    space_variants: bool = True


class ParticipationConfig(BaseModel):
    thresholds: list[float] = list(DEFAULT_THRESHOLDS)
    min_avg_pp: float = 50.0
    heuristic_labels: bool = False

    @field_validator("thresholds")
    @classmethod
    def _descending(cls, value: list[float]) -> list[float]:
        if any(a <= b for a, b in zip(value, value[1:])):
            raise ValueError("thresholds must be strictly descending")
        return value


class SimnetConfig(BaseModel):
    citation_weight: float = Field(default=1.0, ge=0)
    cocitation_weight: float = Field(default=1.0, ge=0)
    coupling_weight: float = Field(default=1.0, ge=0)

    @property
    def weights(self) -> tuple[float, float, float]:
        return (self.citation_weight, self.cocitation_weight, self.coupling_weight)


class MappingConfig(BaseModel):
    tol: float = Field(default=1e-6, gt=0)
    max_iter: int = Field(default=10_000, ge=1)
    resolution: float = Field(default=1.0, gt=0)
    restarts: int = Field(default=10, ge=1)
    bandwidth: float = Field(default=0.15, gt=0)
    grid: int = Field(default=100, ge=2)
    force_density: bool = False
    show_labels: bool = False


class OverlayConfig(BaseModel):
    permutations: int = Field(default=1000, ge=100)
    core_quantile: float = Field(default=0.88, gt=0, lt=1)


class CategraphConfig(BaseModel):
    k: float | None = Field(default=None, gt=0)
    iterations: int = Field(default=500, ge=1)
    colors: dict[str, str] = Field(default_factory=dict)


class SeedConfig(BaseModel):
    map: int = 0
    cluster: int = 0
    overlay: int = 0
    categraph: int = 0


class PipelineConfig(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="SCIENCEMAP_",
        env_nested_delimiter="__",
        extra="forbid",
    )

    corpus: Path | None = None
    categories: Path | None = None
    variant_rules: Path | None = None
    labels: Path | None = None
    published_bands: Path | None = None
    out: Path = Path("out")
    term_core: str = "e-learning"

    query: QueryConfig = Field(default_factory=QueryConfig)
    descriptors: DescriptorConfig = Field(default_factory=DescriptorConfig)
    participation: ParticipationConfig = Field(default_factory=ParticipationConfig)
    simnet: SimnetConfig = Field(default_factory=SimnetConfig)
    mapping: MappingConfig = Field(default_factory=MappingConfig)
    overlay: OverlayConfig = Field(default_factory=OverlayConfig)
    categraph: CategraphConfig = Field(default_factory=CategraphConfig)
    seeds: SeedConfig = Field(default_factory=SeedConfig)

    def with_seed(self, seed: int) -> PipelineConfig:
        seeds = SeedConfig(map=seed, cluster=seed, overlay=seed, categraph=seed)
        return self.model_copy(update={"seeds": seeds})

    def require_path(self, name: str) -> Path:
        """A configured input path that must exist for the running stage."""
        value = getattr(self, name)
        if value is None:
            raise ConfigError(f"'{name}' is not configured")
        if not Path(value).exists():
            raise ConfigError(f"'{name}' not found: {value}")
        return Path(value)

    def sections(self, *names: str) -> dict[str, Any]:
        """Plain-data view of some config sections, for stage manifests."""
        data = self.model_dump(mode="json", include=set(names))
        return {key: data[key] for key in sorted(data)}


def _deep_merge(base: dict[str, Any], extra: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _drop_none(values: dict[str, Any]) -> dict[str, Any]:
    cleaned: dict[str, Any] = {}
    for key, value in values.items():
        if isinstance(value, dict):
            value = _drop_none(value)
            if not value:
                continue
        if value is not None:
            cleaned[key] = value
    return cleaned


def _read_toml(path: Path) -> dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as ex:
        raise ConfigError(f"Invalid TOML in {path}: {ex}") from ex
    for name in _PATH_FIELDS + ("out",):
        if name in data and not Path(data[name]).is_absolute():
            data[name] = str((path.parent / data[name]).resolve())
    return data


def load_config(
    path: str | Path | None = None,
    overrides: dict[str, Any] | None = None,
    seed: int | None = None,
) -> PipelineConfig:
    """Build the pipeline config from a TOML file, the environment and CLI overrides."""
    load_dotenv()
    data: dict[str, Any] = _read_toml(Path(path)) if path is not None else {}
    if overrides:
        data = _deep_merge(data, _drop_none(overrides))
    try:
        config = PipelineConfig(**data)
    except ValidationError as ex:
        first = ex.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"Invalid config value for {where}: {first['msg']}") from ex
    if seed is not None:
        config = config.with_seed(seed)
    logger.debug(f"Loaded config (file={path}, out={config.out})")
    return config
