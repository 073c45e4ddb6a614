"""Source-level citation, co-citation and bibliographic coupling networks."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import sparse

from .corpus import Corpus
from .descriptors import SimilarityMatrix, association_strength_counts

logger = logging.getLogger(__name__)


class Channel(str, Enum):
    CITATION = "Citation"
    COCITATION = "CoCitation"
    COUPLING = "Coupling"


@dataclass
class ChannelMatrix:
    channel: Channel
    sources: list[str]
    counts: sparse.csr_matrix
    directed: sparse.csr_matrix | None = None
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._index = {sid: i for i, sid in enumerate(self.sources)}

    @property
    def is_empty(self) -> bool:
        return self.counts.nnz == 0

    def count(self, a: str, b: str) -> int:
        return int(self.counts[self._index[a], self._index[b]])


@dataclass
class ReferenceIndex:
    """Reference lists resolved to cited documents of the corpus."""

    sources: list[str]
    citing: list[tuple[int, tuple[str, ...]]]
    total_references: int
    unresolved_references: int

    @property
    def unresolved_ratio(self) -> float:
        if self.total_references == 0:
            return 0.0
        return self.unresolved_references / self.total_references


@dataclass
class CombinedSimilarity:
    matrix: SimilarityMatrix
    weights: dict[Channel, float]
    empty_channels: list[Channel] = field(default_factory=list)


def resolve_references(corpus: Corpus) -> ReferenceIndex:
    """Keep references that name a corpus doc_id; raw strings are counted and dropped."""
    sources = corpus.source_ids
    source_index = {sid: i for i, sid in enumerate(sources)}
    citing: list[tuple[int, tuple[str, ...]]] = []
    total = unresolved = 0
    for doc in corpus.documents:
        resolved = []
        for ref in dict.fromkeys(doc.references):
            total += 1
            if corpus.get(ref) is None:
                unresolved += 1
            else:
                resolved.append(ref)
        if resolved:
            citing.append((source_index[doc.source_id], tuple(resolved)))
    index = ReferenceIndex(sources, citing, total, unresolved)
    if unresolved:
        logger.warning(
            f"{unresolved} of {total} references are unresolved "
            f"({index.unresolved_ratio:.1%}); ignored for source channels"
        )
    return index


def _index(corpus: Corpus, refs: ReferenceIndex | None) -> ReferenceIndex:
    return refs if refs is not None else resolve_references(corpus)


def _symmetric_offdiag(matrix: sparse.spmatrix) -> sparse.csr_matrix:
    matrix = sparse.csr_matrix(matrix, dtype=np.int64)
    matrix = (matrix - sparse.diags(matrix.diagonal())).tocsr()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return matrix


def citation_counts(corpus: Corpus, refs: ReferenceIndex | None = None) -> ChannelMatrix:
    """Reference links between sources, symmetrized; the directed counts are kept."""
    refs = _index(corpus, refs)
    n = len(refs.sources)
    source_index = {sid: i for i, sid in enumerate(refs.sources)}
    rows: list[int] = []
    cols: list[int] = []
    for citing_source, cited in refs.citing:
        for doc_id in cited:
            rows.append(citing_source)
            cols.append(source_index[corpus.source_of(doc_id)])
    directed = sparse.csr_matrix(
        (np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(n, n)
    )
    directed = _symmetric_offdiag(directed)
    return ChannelMatrix(
        channel=Channel.CITATION,
        sources=refs.sources,
        counts=_symmetric_offdiag(directed + directed.T),
        directed=directed,
    )


def _cited_source_incidence(corpus: Corpus, refs: ReferenceIndex) -> sparse.csr_matrix:
    source_index = {sid: i for i, sid in enumerate(refs.sources)}
    rows: list[int] = []
    cols: list[int] = []
    for r, (_, cited) in enumerate(refs.citing):
        for col in sorted({source_index[corpus.source_of(doc_id)] for doc_id in cited}):
            rows.append(r)
            cols.append(col)
    return sparse.csr_matrix(
        (np.ones(len(rows), dtype=np.int64), (rows, cols)),
        shape=(len(refs.citing), len(refs.sources)),
    )


def cocitation_counts(corpus: Corpus, refs: ReferenceIndex | None = None) -> ChannelMatrix:
    """Number of citing documents whose references reach both sources."""
    refs = _index(corpus, refs)
    incidence = _cited_source_incidence(corpus, refs)
    return ChannelMatrix(
        channel=Channel.COCITATION,
        sources=refs.sources,
        counts=_symmetric_offdiag(incidence.T @ incidence),
    )


def coupling_counts(corpus: Corpus, refs: ReferenceIndex | None = None) -> ChannelMatrix:
    """Number of distinct cited documents shared by the reference lists of two sources."""
    refs = _index(corpus, refs)
    cited_ids = sorted({doc_id for _, cited in refs.citing for doc_id in cited})
    cited_index = {doc_id: i for i, doc_id in enumerate(cited_ids)}
    pairs = {(src, cited_index[doc_id]) for src, cited in refs.citing for doc_id in cited}
    rows = [p[0] for p in sorted(pairs)]
    cols = [p[1] for p in sorted(pairs)]
    incidence = sparse.csr_matrix(
        (np.ones(len(rows), dtype=np.int64), (rows, cols)),
        shape=(len(refs.sources), len(cited_ids)),
    )
    return ChannelMatrix(
        channel=Channel.COUPLING,
        sources=refs.sources,
        counts=_symmetric_offdiag(incidence @ incidence.T),
    )


def build_channels(corpus: Corpus, refs: ReferenceIndex | None = None) -> list[ChannelMatrix]:
    refs = _index(corpus, refs)
    return [
        citation_counts(corpus, refs),
        cocitation_counts(corpus, refs),
        coupling_counts(corpus, refs),
    ]


def normalize_channel(channel: ChannelMatrix) -> sparse.csr_matrix:
    """Association strength over row totals, rescaled so the largest entry is 1."""
    totals = np.asarray(channel.counts.sum(axis=1)).ravel()
    normalized = association_strength_counts(channel.counts, totals)
    normalized.eliminate_zeros()
    if normalized.nnz:
        normalized = normalized / normalized.max()
    return sparse.csr_matrix(normalized)


def combine_channels(
    channels: Sequence[ChannelMatrix], weights: Sequence[float] = (1.0, 1.0, 1.0)
) -> CombinedSimilarity:
    """Convex combination of independently normalized channels, max entry 1.

    Empty channels are skipped and their weight is spread over the others.
    """
    if len(channels) != len(weights):
        raise ValueError("One weight per channel is required")
    if any(w < 0 for w in weights):
        raise ValueError(f"Channel weights must be non-negative: {list(weights)}")
    if sum(weights) <= 0:
        raise ValueError("At least one channel weight must be positive")
    sources = channels[0].sources
    if any(ch.sources != sources for ch in channels):
        raise ValueError("Channels must share the same source ordering")

    empty = [ch.channel for ch in channels if ch.is_empty]
    for name in empty:
        logger.warning(f"EmptyChannel: {name.value} has no entries; its weight is redistributed")

    active = [(ch, w) for ch, w in zip(channels, weights) if not ch.is_empty and w > 0]
    total_weight = sum(w for _, w in active)
    effective = {ch.channel: 0.0 for ch in channels}
    n = len(sources)
    combined = sparse.csr_matrix((n, n), dtype=np.float64)
    for ch, w in active:
        share = w / total_weight
        effective[ch.channel] = share
        combined = combined + share * normalize_channel(ch)

    combined = sparse.csr_matrix(combined)
    combined.eliminate_zeros()
    if combined.nnz:
        combined = combined / combined.max()
    logger.info(
        f"Combined similarity over {n} sources with {combined.nnz // 2} links "
        f"(weights: {', '.join(f'{k.value}={v:.3f}' for k, v in effective.items())})"
    )
    return CombinedSimilarity(
        matrix=SimilarityMatrix(combined, sources),
        weights=effective,
        empty_channels=empty,
    )
