"""Publication/descriptor correspondence, participation percentages and cut-off bands.

PP values are compared with exact rational arithmetic; the floating point
``pp`` on each row is for display and exports only.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path

import pandas as pd

from .corpus import Corpus, CorpusQuery, tokenize
from .descriptors import DescriptorSet
from .errors import MalformedRow, NoBandQualifies, UnlabeledSource

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS: tuple[float, ...] = tuple(float(t) for t in range(100, 15, -5))


class Label(str, Enum):
    RELATED = "related"
    UNRELATED = "unrelated"
    UNLABELED = "unlabeled"


@dataclass
class CorrespondenceMatrix:
    """Distinct article counts per (source, canonical descriptor)."""

    table: pd.DataFrame

    @property
    def sources(self) -> list[str]:
        return list(self.table.index)

    @property
    def terms(self) -> list[str]:
        return list(self.table.columns)

    def count(self, source_id: str, term: str) -> int:
        return int(self.table.at[source_id, term])


@dataclass(frozen=True)
class ParticipationRow:
    source_id: str
    tna: int
    nra: int

    @property
    def pp_exact(self) -> Fraction:
        return Fraction(100 * self.nra, self.tna)

    @property
    def pp(self) -> float:
        return 100.0 * self.nra / self.tna


@dataclass
class ParticipationResult:
    rows: list[ParticipationRow]
    zero_tna: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class BandRow:
    band_index: int
    threshold_percent: float
    included: int
    errors: int
    error_percent: int
    avg_pp: int

    @property
    def selected(self) -> int:
        return self.included - self.errors


class RelatednessLabels:
    """Manual (or heuristic) relatedness judgement per source."""

    def __init__(self, labels: Mapping[str, Label] | None = None):
        self._labels = dict(labels or {})

    def __getitem__(self, source_id: str) -> Label:
        return self._labels.get(source_id, Label.UNLABELED)

    def __len__(self) -> int:
        return len(self._labels)

    def items(self):
        return sorted(self._labels.items())

    @classmethod
    def load(cls, path: str | Path) -> RelatednessLabels:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
        if list(df.columns) != ["source_id", "label"]:
            raise MalformedRow(1, f"labels header must be source_id,label ({path})")
        labels = {}
        for offset, row in enumerate(df.itertuples(index=False)):
            value = row.label.strip().lower()
            if value not in (Label.RELATED.value, Label.UNRELATED.value):
                raise MalformedRow(offset + 2, f"unknown label '{row.label}'")
            labels[row.source_id.strip()] = Label(value)
        logger.info(f"Loaded {len(labels)} relatedness labels from {path}")
        return cls(labels)

    @classmethod
    def heuristic(cls, rows: Iterable[ParticipationRow]) -> RelatednessLabels:
        """PP > 0 means related; everything else unrelated."""
        return cls({r.source_id: Label.RELATED if r.nra > 0 else Label.UNRELATED for r in rows})


def round_half_up(value: Fraction | float | int) -> int:
    return math.floor(Fraction(value) + Fraction(1, 2))


def correspondence(
    corpus: Corpus, dset: DescriptorSet, base_query: CorpusQuery
) -> CorrespondenceMatrix:
    """Count distinct matching documents per source and canonical term.

    A document matching a term through several of its forms counts once.
    """
    if not dset.primary:
        raise ValueError("Descriptor set is empty")

    unfiltered = base_query.with_terms(())
    docs = corpus.filter_documents(unfiltered)
    sources = sorted(
        sid
        for sid, src in corpus.sources.items()
        if src.source_type in base_query.source_types
        and (base_query.source_ids is None or sid in base_query.source_ids)
    )

    columns: dict[str, Counter[str]] = {}
    for term in dset.primary:
        forms = [tokenize(form) for form in dset.forms(term)]
        forms = [form for form in forms if form]
        hits: Counter[str] = Counter()
        for doc in docs:
            if corpus.matches_any(doc, forms, base_query.fields_searched):
                hits[doc.source_id] += 1
        columns[term] = hits

    table = pd.DataFrame(
        {term: [columns[term].get(sid, 0) for sid in sources] for term in dset.primary},
        index=pd.Index(sources, name="source_id"),
        dtype="int64",
    )
    logger.info(f"Correspondence matrix: {len(sources)} sources x {len(dset.primary)} terms")
    return CorrespondenceMatrix(table)


def participation_rows(
    matrix: CorrespondenceMatrix, corpus: Corpus, base_query: CorpusQuery
) -> ParticipationResult:
    """TNA, NRA and PP per source; sources without articles are reported apart."""
    tna = Counter(doc.source_id for doc in corpus.filter_documents(base_query.with_terms(())))
    nra = matrix.table.max(axis=1) if len(matrix.terms) else pd.Series(0, index=matrix.table.index)

    rows: list[ParticipationRow] = []
    zero: list[str] = []
    for sid in matrix.sources:
        total = tna.get(sid, 0)
        if total == 0:
            zero.append(sid)
            continue
        rows.append(ParticipationRow(source_id=sid, tna=total, nra=int(nra[sid])))

    if zero:
        logger.warning(f"{len(zero)} sources have no articles in the timeframe (TNA=0)")
    return ParticipationResult(rows=rows, zero_tna=zero)


def _above(row: ParticipationRow, threshold: float) -> bool:
    if threshold >= 100:
        return row.nra == row.tna
    return row.pp_exact > Fraction(str(threshold))


def _check_descending(thresholds: Sequence[float]) -> None:
    if any(a <= b for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError(f"thresholds must be strictly descending: {list(thresholds)}")


def band_table(
    rows: Sequence[ParticipationRow],
    labels: RelatednessLabels,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> list[BandRow]:
    """One band per threshold: PP == 100 for a topmost 100 band, PP > t otherwise."""
    _check_descending(thresholds)
    bands: list[BandRow] = []
    for index, threshold in enumerate(thresholds, start=1):
        included = [r for r in rows if _above(r, threshold)]
        errors = 0
        for r in included:
            label = labels[r.source_id]
            if label is Label.UNLABELED:
                raise UnlabeledSource(r.source_id)
            if label is Label.UNRELATED:
                errors += 1
        if included:
            error_percent = round_half_up(Fraction(100 * errors, len(included)))
            avg_pp = round_half_up(sum((r.pp_exact for r in included), Fraction(0)) / len(included))
        else:
            error_percent = avg_pp = 0
        bands.append(
            BandRow(
                band_index=index,
                threshold_percent=float(threshold),
                included=len(included),
                errors=errors,
                error_percent=error_percent,
                avg_pp=avg_pp,
            )
        )

    for upper, lower in zip(bands, bands[1:]):
        if lower.included < upper.included:
            logger.warning(
                f"Band {lower.band_index} includes fewer sources than band {upper.band_index}"
            )
    return bands


def select_cutoff(table: Sequence[BandRow], min_avg_pp: float) -> float:
    """Smallest threshold whose band keeps an average PP of at least ``min_avg_pp``."""
    if not table:
        raise ValueError("band table is empty")
    qualifying = [band.threshold_percent for band in table if band.avg_pp >= min_avg_pp]
    if not qualifying:
        raise NoBandQualifies(min_avg_pp)
    return min(qualifying)


def selected_publications(
    rows: Sequence[ParticipationRow], labels: RelatednessLabels, cutoff: float
) -> list[str]:
    """Sources above the cut-off that are not labelled unrelated."""
    return sorted(
        r.source_id
        for r in rows
        if _above(r, cutoff) and labels[r.source_id] is not Label.UNRELATED
    )


def selection_by_type(selected: Iterable[str], corpus: Corpus) -> dict[str, int]:
    sources = corpus.sources
    counts = Counter(sources[sid].source_type.value for sid in selected)
    return dict(sorted(counts.items()))


def participation_summary(rows: Sequence[ParticipationRow], bucket: int = 5) -> dict[str, object]:
    """Shape of the PP distribution: unrelated sources, low-PP sources, histogram."""
    histogram: Counter[int] = Counter()
    for r in rows:
        if r.nra == 0:
            continue
        lower = min(int(r.pp_exact // bucket) * bucket, 100 - bucket)
        histogram[lower] += 1
    return {
        "sources": len(rows),
        "without_related_articles": sum(1 for r in rows if r.nra == 0),
        "with_related_articles": sum(1 for r in rows if r.nra > 0),
        f"below_{bucket}_percent": sum(1 for r in rows if 0 < r.pp_exact < bucket),
        "histogram": {f"{lo}-{lo + bucket}": histogram.get(lo, 0) for lo in range(0, 100, bucket)},
    }


@dataclass(frozen=True)
class PublishedBand:
    band_index: int
    threshold_percent: float
    included: int
    errors: int
    error_percent: int
    avg_pp: int


def load_published_bands(path: str | Path) -> list[PublishedBand]:
    df = pd.read_csv(path)
    return [
        PublishedBand(
            band_index=int(row.band),
            threshold_percent=float(row.threshold),
            included=int(row.included),
            errors=int(row.errors),
            error_percent=int(row.error_percent),
            avg_pp=int(row.avg_pp),
        )
        for row in df.itertuples(index=False)
    ]


def replay_bands(
    published: Sequence[PublishedBand],
) -> tuple[list[BandRow], list[str]]:
    """Recompute error% from published counts; report cells that disagree.

    Average PP cannot be recomputed from aggregates, so the published value is
    carried through.
    """
    bands: list[BandRow] = []
    discrepancies: list[str] = []
    for pub in published:
        error_percent = (
            round_half_up(Fraction(100 * pub.errors, pub.included)) if pub.included else 0
        )
        if error_percent != pub.error_percent:
            discrepancies.append(
                f"band {pub.band_index}: published error% {pub.error_percent}, "
                f"recomputed {error_percent}"
            )
        bands.append(
            BandRow(
                band_index=pub.band_index,
                threshold_percent=pub.threshold_percent,
                included=pub.included,
                errors=pub.errors,
                error_percent=error_percent,
                avg_pp=pub.avg_pp,
            )
        )
    for msg in discrepancies:
        logger.warning(f"Published band table disagrees with recomputation: {msg}")
    return bands, discrepancies
