"""Keyword extraction, co-occurrence, association strength and descriptor sets."""

from __future__ import annotations

import logging
import re
import string
import unicodedata
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
from scipy import sparse

from .errors import ConflictingAlias, CoreTermExcluded, MalformedRow

if TYPE_CHECKING:
    from .corpus import DocumentRecord

logger = logging.getLogger(__name__)

_WHITESPACE_RE = re.compile(r"\s+")
# ASCII punctuation plus common typographic quotes and dashes
_EDGE_PUNCTUATION = string.punctuation + "‘’“”–—«»"


def normalize_term(raw: str) -> str:
    """Lowercase, NFC, trimmed, single-spaced, without surrounding punctuation."""
    text = unicodedata.normalize("NFC", raw).lower()
    text = _WHITESPACE_RE.sub(" ", text).strip()
    return text.strip(_EDGE_PUNCTUATION).strip()


@dataclass(frozen=True)
class TermStats:
    term: str
    occurrences: int


class SimilarityMatrix:
    """Sparse symmetric non-negative weights between labelled nodes."""

    def __init__(self, weights: sparse.spmatrix, labels: Sequence[str] | None = None):
        matrix = sparse.csr_matrix(weights, dtype=np.float64)
        if matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"Similarity matrix must be square, got {matrix.shape}")
        matrix = (matrix - sparse.diags(matrix.diagonal())).tocsr()
        matrix.eliminate_zeros()
        if matrix.nnz and abs(matrix - matrix.T).max() > 1e-12:
            raise ValueError("Similarity matrix must be symmetric")
        matrix.sort_indices()
        if matrix.nnz and matrix.data.min() < 0:
            raise ValueError("Similarity weights must be non-negative")
        self.weights = matrix
        self.labels = list(labels) if labels is not None else [str(i) for i in range(self.n)]
        if len(self.labels) != self.n:
            raise ValueError("One label per node is required")

    @property
    def n(self) -> int:
        return int(self.weights.shape[0])

    @property
    def nnz(self) -> int:
        return int(self.weights.nnz)

    def index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def get(self, i: int, j: int) -> float:
        return float(self.weights[i, j])

    def to_dense(self) -> np.ndarray:
        return self.weights.toarray()

    def total_link_strength(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1)).ravel()

    def scaled(self, factor: float) -> SimilarityMatrix:
        return SimilarityMatrix(self.weights * factor, self.labels)

    def edges(self) -> Iterable[tuple[int, int, float]]:
        """Upper-triangle entries ``(i, j, s_ij)`` with ``i < j`` in row order."""
        upper = sparse.triu(self.weights, k=1).tocsr()
        upper.sort_indices()
        for i in range(upper.shape[0]):
            start, end = upper.indptr[i], upper.indptr[i + 1]
            for j, value in zip(upper.indices[start:end], upper.data[start:end]):
                yield i, int(j), float(value)


@dataclass
class CooccurrenceMatrix:
    terms: list[TermStats]
    counts: sparse.csr_matrix
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._index = {t.term: i for i, t in enumerate(self.terms)}

    @property
    def occurrences(self) -> np.ndarray:
        return np.array([t.occurrences for t in self.terms], dtype=np.int64)

    def count(self, a: str, b: str) -> int:
        if a == b:
            return 0
        return int(self.counts[self._index[a], self._index[b]])


@dataclass
class DescriptorSet:
    term_core: str
    primary: list[str]
    secondary: dict[str, str] = field(default_factory=dict)

    def forms(self, term: str) -> list[str]:
        """The primary term followed by its variants, sorted."""
        variants = sorted(v for v, canonical in self.secondary.items() if canonical == term)
        return [term, *variants]

    def all_terms(self) -> list[str]:
        return [*self.primary, *sorted(self.secondary)]

    def to_dict(self) -> dict[str, object]:
        return {
            "term_core": self.term_core,
            "primary": list(self.primary),
            "secondary": dict(sorted(self.secondary.items())),
        }

    @classmethod
    def from_dict(cls, data: dict) -> DescriptorSet:
        return cls(
            term_core=data["term_core"],
            primary=list(data["primary"]),
            secondary=dict(data.get("secondary", {})),
        )


@dataclass
class VariantRules:
    """Alias pairs loaded from a ``variant,canonical`` CSV; pairs are bidirectional."""

    pairs: list[tuple[str, str]] = field(default_factory=list)
    hyphen_variants: bool = True
    space_variants: bool = True

    @classmethod
    def load(cls, path: str | Path, **flags: bool) -> VariantRules:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
        if list(df.columns) != ["variant", "canonical"]:
            raise MalformedRow(1, f"variant rules header must be variant,canonical ({path})")
        pairs = [
            (normalize_term(row.variant), normalize_term(row.canonical))
            for row in df.itertuples(index=False)
            if normalize_term(row.variant) and normalize_term(row.canonical)
        ]
        logger.info(f"Loaded {len(pairs)} variant rules from {path}")
        return cls(pairs=pairs, **flags)

    def aliases_of(self, term: str) -> list[str]:
        found = []
        for variant, canonical in self.pairs:
            if canonical == term:
                found.append(variant)
            elif variant == term:
                found.append(canonical)
        return found


def document_keywords(doc: DocumentRecord) -> frozenset[str]:
    """Normalized keywords of a document, each counted once."""
    return doc.keywords


def extract_keywords(docs: Sequence[DocumentRecord]) -> list[TermStats]:
    """Per-document keyword occurrences, most frequent first, then alphabetical."""
    if not docs:
        raise ValueError("extract_keywords needs at least one document")
    counts: dict[str, int] = {}
    for doc in docs:
        for kw in document_keywords(doc):
            counts[kw] = counts.get(kw, 0) + 1
    stats = [TermStats(term, n) for term, n in counts.items()]
    stats.sort(key=lambda s: (-s.occurrences, s.term))
    logger.info(f"Extracted {len(stats)} keywords from {len(docs)} documents")
    return stats


def _incidence(docs: Sequence[DocumentRecord], terms: Sequence[TermStats]) -> sparse.csr_matrix:
    index = {t.term: i for i, t in enumerate(terms)}
    rows: list[int] = []
    cols: list[int] = []
    for r, doc in enumerate(docs):
        for kw in document_keywords(doc):
            col = index.get(kw)
            if col is not None:
                rows.append(r)
                cols.append(col)
    data = np.ones(len(rows), dtype=np.int64)
    return sparse.csr_matrix((data, (rows, cols)), shape=(len(docs), len(terms)))


def build_cooccurrence(
    docs: Sequence[DocumentRecord], terms: Sequence[TermStats]
) -> CooccurrenceMatrix:
    """c_ij = number of documents carrying both keywords i and j."""
    incidence = _incidence(docs, terms)
    counts = (incidence.T @ incidence).tocsr()
    counts = (counts - sparse.diags(counts.diagonal())).tocsr()
    counts.eliminate_zeros()
    counts.sort_indices()
    return CooccurrenceMatrix(terms=list(terms), counts=counts.astype(np.int64))


def association_strength_counts(
    counts: sparse.spmatrix, totals: np.ndarray
) -> sparse.csr_matrix:
    """s_ij = c_ij / (w_i * w_j) on the non-zero entries of ``counts``."""
    coo = sparse.coo_matrix(counts, dtype=np.float64)
    totals = np.asarray(totals, dtype=np.float64)
    denom = totals[coo.row] * totals[coo.col]
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(denom > 0, coo.data / denom, 0.0)
    return sparse.csr_matrix((values, (coo.row, coo.col)), shape=coo.shape)


def association_strength(cooc: CooccurrenceMatrix) -> SimilarityMatrix:
    occurrences = cooc.occurrences
    if occurrences.size and occurrences.min() < 1:
        raise ValueError("association_strength requires every occurrence count >= 1")
    weights = association_strength_counts(cooc.counts, occurrences)
    return SimilarityMatrix(weights, [t.term for t in cooc.terms])


def select_primary(
    sim: SimilarityMatrix,
    stats: Sequence[TermStats],
    min_occurrence: int,
    top_n: int,
    term_core: str | None = None,
) -> list[str]:
    """Rank eligible terms by total link strength and keep the top ``top_n``.

    Ties fall back to occurrences (descending) and then the term itself. When a
    term core is given it is always part of the result.
    """
    if top_n < 1:
        raise ValueError(f"top_n must be >= 1, got {top_n}")
    if len(stats) != sim.n:
        raise ValueError("stats must align with the similarity matrix")

    strength = sim.total_link_strength()
    eligible = [i for i, s in enumerate(stats) if s.occurrences >= min_occurrence]

    if term_core is not None:
        core = normalize_term(term_core)
        if core not in {stats[i].term for i in eligible}:
            raise CoreTermExcluded(core)

    ranked = sorted(eligible, key=lambda i: (-strength[i], -stats[i].occurrences, stats[i].term))
    chosen = ranked[:top_n]
    if term_core is not None:
        core_idx = next(i for i in ranked if stats[i].term == normalize_term(term_core))
        if core_idx not in chosen:
            chosen = [*ranked[: top_n - 1], core_idx]
    order = {i: pos for pos, i in enumerate(ranked)}
    chosen.sort(key=order.__getitem__)
    return [stats[i].term for i in chosen]


def _automatic_variants(term: str, rules: VariantRules) -> list[str]:
    variants = []
    if rules.hyphen_variants and "-" in term:
        variants.append(term.replace("-", ""))
    if rules.space_variants and " " in term:
        variants.append(term.replace(" ", ""))
    return variants


def expand_secondary(
    primary: Sequence[str], rules: VariantRules, term_core: str | None = None
) -> DescriptorSet:
    """Attach spelling and acronym variants to the primary descriptors."""
    primary = [normalize_term(t) for t in primary]
    core = normalize_term(term_core) if term_core is not None else (primary[0] if primary else "")
    if core not in primary:
        raise CoreTermExcluded(core, reason="not among the primary descriptors")

    primary_set = set(primary)
    owners: dict[str, set[str]] = {}
    for term in primary:
        for variant in (*_automatic_variants(term, rules), *rules.aliases_of(term)):
            variant = normalize_term(variant)
            if not variant or variant in primary_set:
                continue
            owners.setdefault(variant, set()).add(term)

    secondary: dict[str, str] = {}
    for variant, terms in sorted(owners.items()):
        if len(terms) > 1:
            raise ConflictingAlias(variant, tuple(sorted(terms)))
        secondary[variant] = next(iter(terms))

    logger.info(f"Expanded {len(primary)} primary descriptors with {len(secondary)} variants")
    return DescriptorSet(term_core=core, primary=list(primary), secondary=secondary)
