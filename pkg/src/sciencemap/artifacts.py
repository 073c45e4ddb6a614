"""File-based artifact handoff between stages, with content-hash manifests."""

from __future__ import annotations

import hashlib
import logging
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

import msgspec

from .errors import MissingArtifact, StaleArtifact
from .exports import read_json, write_json

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def payload_sha256(payload: Any) -> str:
    """Hash of the canonical (key-sorted) JSON encoding of ``payload``."""
    return hashlib.sha256(msgspec.json.encode(payload, order="sorted")).hexdigest()


class ArtifactStore:
    """One directory per stage under the output root, each with a manifest."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def stage_dir(self, stage: str) -> Path:
        path = self.root / stage
        path.mkdir(parents=True, exist_ok=True)
        return path

    def path(self, stage: str, name: str) -> Path:
        return self.root / stage / name

    def relative(self, path: Path) -> str:
        return path.relative_to(self.root).as_posix()

    def manifest_path(self, stage: str) -> Path:
        return self.root / stage / MANIFEST_NAME

    def manifest(self, stage: str) -> dict[str, Any]:
        path = self.manifest_path(stage)
        if not path.exists():
            raise MissingArtifact(stage, str(path))
        return read_json(path)

    def require(self, stage: str, name: str) -> Path:
        """Path of an upstream output, checked against the upstream manifest."""
        manifest = self.manifest(stage)
        path = self.path(stage, name)
        key = self.relative(path)
        if not path.exists() or key not in manifest["outputs"]:
            raise MissingArtifact(stage, str(path))
        if file_sha256(path) != manifest["outputs"][key]:
            raise StaleArtifact(stage, str(path))
        return path

    def write_manifest(
        self,
        stage: str,
        inputs: Mapping[str, Path],
        outputs: Iterable[Path],
        config: Mapping[str, Any],
    ) -> Path:
        """Record input/output hashes and the stage's config slice.

        ``inputs`` keys are stable names (artifact paths relative to the root,
        or the role of an external file) so manifests do not depend on where
        the run happens.
        """
        data = {
            "stage": stage,
            "inputs": {name: file_sha256(path) for name, path in sorted(inputs.items())},
            "outputs": {self.relative(p): file_sha256(p) for p in sorted(outputs)},
            "config": dict(config),
            "config_sha256": payload_sha256(dict(config)),
        }
        path = write_json(data, self.manifest_path(stage))
        logger.debug(f"Wrote manifest for stage {stage} ({len(data['outputs'])} outputs)")
        return path

    def check_fresh(self, stage: str) -> None:
        """Fail when an artifact this stage consumed has changed since it ran."""
        manifest = self.manifest(stage)
        for name, recorded in manifest["inputs"].items():
            candidate = self.root / name
            if ":" in name or not candidate.exists():
                continue
            if file_sha256(candidate) != recorded:
                producer = name.split("/", 1)[0]
                raise StaleArtifact(producer, str(candidate))
