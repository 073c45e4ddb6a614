"""Tabular and JSON file formats written and read by the pipeline stages.

Writers sort their rows and use ``\\n`` line endings so repeated runs are
byte-identical.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

import msgspec
import numpy as np
import pandas as pd
from scipy import sparse

from .descriptors import CooccurrenceMatrix, SimilarityMatrix, TermStats
from .participation import BandRow, ParticipationRow
from .simnet import ChannelMatrix
from .vosmap import Clustering, DensityField, MapLayout


def _write_frame(df: pd.DataFrame, path: Path, sep: str = ",") -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, sep=sep, lineterminator="\n")
    return path


def _builtin(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return obj.as_posix()
    raise NotImplementedError(f"Cannot encode {type(obj).__name__}")


def write_json(data: Any, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    encoded = msgspec.json.encode(data, order="sorted", enc_hook=_builtin)
    path.write_bytes(msgspec.json.format(encoded, indent=2) + b"\n")
    return path


def read_json(path: Path) -> Any:
    return msgspec.json.decode(path.read_bytes())


def write_keywords(stats: Sequence[TermStats], path: Path) -> Path:
    df = pd.DataFrame(
        {"term": [s.term for s in stats], "occurrences": [s.occurrences for s in stats]}
    )
    return _write_frame(df, path)


def read_keywords(path: Path) -> list[TermStats]:
    df = pd.read_csv(path, dtype={"term": str}, keep_default_na=False)
    return [TermStats(row.term, int(row.occurrences)) for row in df.itertuples(index=False)]


def write_primary(
    primary: Sequence[str], stats: Sequence[TermStats], sim: SimilarityMatrix, path: Path
) -> Path:
    occurrences = {s.term: s.occurrences for s in stats}
    strength = dict(zip(sim.labels, sim.total_link_strength()))
    df = pd.DataFrame(
        {
            "rank": range(1, len(primary) + 1),
            "term": list(primary),
            "occurrences": [occurrences[t] for t in primary],
            "total_link_strength": [float(strength[t]) for t in primary],
        }
    )
    return _write_frame(df, path)


def write_cooccurrence(cooc: CooccurrenceMatrix, path: Path) -> Path:
    upper = sparse.triu(cooc.counts, k=1).tocoo()
    order = np.lexsort((upper.col, upper.row))
    df = pd.DataFrame(
        {
            "term_i": [cooc.terms[i].term for i in upper.row[order]],
            "term_j": [cooc.terms[j].term for j in upper.col[order]],
            "count": upper.data[order].astype(np.int64),
        }
    )
    return _write_frame(df, path)


def write_vos_network(sim: SimilarityMatrix, path: Path) -> Path:
    """Tab-separated ``i j weight`` with 1-based ids, no header."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{i + 1}\t{j + 1}\t{weight!r}" for i, j, weight in sim.edges()]
    path.write_text("".join(f"{line}\n" for line in lines))
    return path


def write_vos_labels(sim: SimilarityMatrix, weights: Sequence[float], path: Path) -> Path:
    df = pd.DataFrame(
        {"id": range(1, sim.n + 1), "label": sim.labels, "weight": [float(w) for w in weights]}
    )
    return _write_frame(df, path, sep="\t")


def read_vos_network(
    network_path: Path, labels_path: Path
) -> tuple[SimilarityMatrix, np.ndarray]:
    """Similarity matrix and node weights from a network file and its labels file."""
    labels = pd.read_csv(labels_path, sep="\t", dtype={"label": str}, keep_default_na=False)
    n = len(labels)
    if network_path.stat().st_size:
        edges = pd.read_csv(
            network_path,
            sep="\t",
            header=None,
            names=["i", "j", "weight"],
            float_precision="round_trip",
        )
    else:
        edges = pd.DataFrame({"i": [], "j": [], "weight": []})
    rows = edges["i"].to_numpy(dtype=np.int64) - 1
    cols = edges["j"].to_numpy(dtype=np.int64) - 1
    data = edges["weight"].to_numpy(dtype=np.float64)
    upper = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    sim = SimilarityMatrix(upper + upper.T, list(labels["label"]))
    return sim, labels["weight"].to_numpy(dtype=np.float64)


def write_participation(rows: Sequence[ParticipationRow], path: Path) -> Path:
    df = pd.DataFrame(
        {
            "source_id": [r.source_id for r in rows],
            "TNA": [r.tna for r in rows],
            "NRA": [r.nra for r in rows],
            "PP": [r.pp for r in rows],
        }
    )
    return _write_frame(df, path)


def read_participation(path: Path) -> list[ParticipationRow]:
    df = pd.read_csv(path, dtype={"source_id": str}, keep_default_na=False)
    return [
        ParticipationRow(source_id=row.source_id, tna=int(row.TNA), nra=int(row.NRA))
        for row in df.itertuples(index=False)
    ]


def write_correspondence(table: pd.DataFrame, path: Path) -> Path:
    return _write_frame(table.reset_index(), path)


def bands_frame(bands: Sequence[BandRow]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "band": [b.band_index for b in bands],
            "threshold": [b.threshold_percent for b in bands],
            "included": [b.included for b in bands],
            "errors": [b.errors for b in bands],
            "error_percent": [b.error_percent for b in bands],
            "avg_pp": [b.avg_pp for b in bands],
        }
    )


def write_bands(bands: Sequence[BandRow], path: Path) -> Path:
    return _write_frame(bands_frame(bands), path)


def write_selected(selected: Sequence[str], corpus_sources: Mapping[str, Any], path: Path) -> Path:
    df = pd.DataFrame(
        {
            "source_id": list(selected),
            "source_type": [corpus_sources[sid].source_type.value for sid in selected],
        }
    )
    return _write_frame(df, path)


def read_selected(path: Path) -> list[str]:
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    return list(df["source_id"])


def write_channels(channels: Sequence[ChannelMatrix], path: Path) -> Path:
    frames = []
    for ch in channels:
        upper = sparse.triu(ch.counts, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        frames.append(
            pd.DataFrame(
                {
                    "source_i": [ch.sources[i] for i in upper.row[order]],
                    "source_j": [ch.sources[j] for j in upper.col[order]],
                    "count": upper.data[order].astype(np.int64),
                    "channel": ch.channel.value,
                }
            )
        )
    return _write_frame(pd.concat(frames, ignore_index=True), path)


def write_map(
    layout: MapLayout, clustering: Clustering | None, weights: Sequence[float], path: Path
) -> Path:
    """VOSviewer-style map file ``id label x y cluster weight``."""
    clusters = clustering.as_dict() if clustering is not None else {}
    df = pd.DataFrame(
        {
            "id": range(1, layout.n + 1),
            "label": layout.node_ids,
            "x": layout.positions[:, 0],
            "y": layout.positions[:, 1],
            "cluster": [clusters.get(node, 0) for node in layout.node_ids],
            "weight": [float(w) for w in weights],
        }
    )
    return _write_frame(df, path, sep="\t")


def write_layout_json(layout: MapLayout, path: Path) -> Path:
    return write_json(
        {
            "node_ids": layout.node_ids,
            "positions": layout.positions.tolist(),
            "converged": layout.converged,
            "objective_value": layout.objective_value,
            "iterations": layout.iterations,
            "history": list(layout.history),
        },
        path,
    )


def read_layout_json(path: Path) -> MapLayout:
    data = read_json(path)
    return MapLayout(
        node_ids=list(data["node_ids"]),
        positions=np.array(data["positions"], dtype=np.float64).reshape(-1, 2),
        converged=bool(data["converged"]),
        objective_value=float(data["objective_value"]),
        history=tuple(data["history"]),
        iterations=int(data["iterations"]),
    )


def write_density(density: DensityField, path: Path) -> Path:
    """Grid rows from top (largest y) to bottom, one column per x cell."""
    df = pd.DataFrame(density.values[::-1])
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, header=False, lineterminator="\n")
    return path


def clustering_to_dict(clustering: Clustering) -> dict[str, Any]:
    return {
        "resolution": clustering.resolution,
        "quality": clustering.quality,
        "n_clusters": clustering.n_clusters,
        "labels": clustering.as_dict(),
    }


def clustering_from_dict(data: Mapping[str, Any]) -> Clustering:
    labels = data["labels"]
    node_ids = list(labels)
    return Clustering(
        node_ids=node_ids,
        labels=np.array([labels[n] for n in node_ids], dtype=np.int64),
        resolution=float(data["resolution"]),
        quality=float(data["quality"]),
    )
