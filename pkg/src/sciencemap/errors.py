"""Exception hierarchy for the science mapping pipeline.

Every error carries an ``exit_code`` so the CLI can map failures onto the
documented process exit codes without inspecting messages.
"""

from __future__ import annotations


class SciencemapError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1


class ConfigError(SciencemapError):
    """Invalid configuration or a referenced path that does not exist."""

    exit_code = 2


class DataError(SciencemapError):
    """Input data violates a contract of one of the modules."""

    exit_code = 3


class MalformedRow(DataError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"Malformed row at line {line}: {reason}")


class DuplicateId(DataError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"Duplicate doc_id: {doc_id}")


class UnknownSource(DataError):
    def __init__(self, doc_id: str, source_id: str):
        self.doc_id = doc_id
        self.source_id = source_id
        super().__init__(f"Document {doc_id} references unknown source {source_id}")


class CoreTermExcluded(DataError):
    def __init__(self, term: str, reason: str = "below min_occurrence"):
        self.term = term
        super().__init__(f"Term core '{term}' excluded: {reason}")


class ConflictingAlias(DataError):
    def __init__(self, variant: str, canonicals: tuple[str, ...]):
        self.variant = variant
        self.canonicals = canonicals
        super().__init__(
            f"Variant '{variant}' maps to several primary terms: {', '.join(canonicals)}"
        )


class UnlabeledSource(DataError):
    def __init__(self, source_id: str):
        self.source_id = source_id
        super().__init__(f"Included source {source_id} has no relatedness label")


class NoBandQualifies(DataError):
    def __init__(self, min_avg_pp: float):
        self.min_avg_pp = min_avg_pp
        super().__init__(f"No band reaches an average PP of {min_avg_pp}")


class EmptyCore(DataError):
    def __init__(self) -> None:
        super().__init__("Core set is empty")


class UnknownNode(DataError):
    def __init__(self, node_id: str):
        self.node_id = node_id
        super().__init__(f"Node {node_id} is not on the base map")


class Degenerate(DataError):
    def __init__(self, n: int):
        self.n = n
        super().__init__(f"Layout needs at least 2 nodes, got {n}")


class LayoutNotConverged(DataError):
    def __init__(self) -> None:
        super().__init__("Layout did not converge; pass force=True to use it anyway")


class StageDependencyError(SciencemapError):
    """A stage cannot run because an upstream artifact is absent or stale."""

    exit_code = 4


class MissingArtifact(StageDependencyError):
    def __init__(self, stage: str, path: str | None = None):
        self.stage = stage
        self.path = path
        detail = f" ({path})" if path else ""
        super().__init__(f"Missing artifact from stage '{stage}'{detail}")


class StaleArtifact(StageDependencyError):
    def __init__(self, stage: str, path: str):
        self.stage = stage
        self.path = path
        super().__init__(
            f"Artifact {path} of stage '{stage}' changed since it was produced; "
            f"re-run '{stage}'"
        )


class StageFailed(SciencemapError):
    """Wraps a stage error with the stage name and its input provenance."""

    def __init__(self, stage: str, cause: Exception, provenance: list[str] | None = None):
        self.stage = stage
        self.cause = cause
        self.provenance = provenance or []
        self.exit_code = getattr(cause, "exit_code", 1)
        inputs = f" [inputs: {', '.join(self.provenance)}]" if self.provenance else ""
        super().__init__(f"Stage '{stage}' failed: {cause}{inputs}")
