"""Bibliographic corpus: CsvV1 parsing, records, and the standard field query."""

from __future__ import annotations

import logging
import re
from collections.abc import Iterable, Sequence
from enum import Enum
from functools import cached_property
from pathlib import Path

import pandas as pd
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from .descriptors import normalize_term
from .errors import ConfigError, DuplicateId, MalformedRow, UnknownSource

logger = logging.getLogger(__name__)

CSV_V1_COLUMNS = [
    "doc_id",
    "source_id",
    "source_title",
    "source_type",
    "doc_type",
    "year",
    "language",
    "title",
    "abstract",
    "author_keywords",
    "index_keywords",
    "references",
    "citation_count",
]
MULTI_VALUE_SEPARATOR = ";"

_TOKEN_RE = re.compile(r"[^\s,;:()\[\]{}\"!?]+")


class DocType(str, Enum):
    ARTICLE = "Article"
    CONFERENCE_PAPER = "ConferencePaper"
    REVIEW = "Review"
    CONFERENCE_REVIEW = "ConferenceReview"
    OTHER = "Other"

    @classmethod
    def parse(cls, raw: str) -> DocType:
        key = re.sub(r"[\s_-]+", "", raw).lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        return cls.OTHER


class SourceType(str, Enum):
    JOURNAL = "Journal"
    PROCEEDING = "Proceeding"

    @classmethod
    def parse(cls, raw: str) -> SourceType:
        key = raw.strip().lower()
        if key == "journal":
            return cls.JOURNAL
        if key in {"proceeding", "proceedings", "conference proceeding"}:
            return cls.PROCEEDING
        raise ValueError(f"unknown source_type '{raw}'")


class Order(str, Enum):
    CITATION_COUNT_DESC = "CitationCountDesc"
    DOC_ID_ASC = "DocIdAsc"


class SearchField(str, Enum):
    TITLE = "title"
    ABSTRACT = "abstract"
    KEYWORDS = "keywords"


class DocumentRecord(BaseModel):
    """One primary-literature item."""

    model_config = ConfigDict(frozen=True)

    doc_id: str = Field(min_length=1)
    source_id: str = Field(min_length=1)
    title: str = ""
    abstract: str = ""
    author_keywords: tuple[str, ...] = ()
    index_keywords: tuple[str, ...] = ()
    doc_type: DocType = DocType.ARTICLE
    year: int = Field(ge=1900, le=2100)
    language: str = "en"
    references: tuple[str, ...] = ()
    citation_count: int = Field(default=0, ge=0)

    @field_validator("author_keywords", "index_keywords")
    @classmethod
    def _drop_empty_keywords(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(kw for kw in value if normalize_term(kw))

    @property
    def keywords(self) -> frozenset[str]:
        """Normalized union of author and index keywords."""
        return frozenset(
            normalize_term(kw) for kw in (*self.author_keywords, *self.index_keywords)
        )


class SourceRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    source_id: str = Field(min_length=1)
    title: str = ""
    source_type: SourceType
    categories: tuple[str, ...] = ()


class CorpusQuery(BaseModel):
    """Query filters mirroring the database query chart."""

    model_config = ConfigDict(frozen=True)

    term_set: tuple[str, ...] = ()
    fields_searched: frozenset[SearchField] = frozenset(SearchField)
    source_types: frozenset[SourceType] = frozenset(SourceType)
    doc_types: frozenset[DocType] = frozenset(DocType)
    years: tuple[int, int] = (1900, 2100)
    language: str | None = None
    limit: int | None = Field(default=None, gt=0)
    order: Order = Order.CITATION_COUNT_DESC
    source_ids: frozenset[str] | None = None

    @model_validator(mode="after")
    def _check_years(self) -> CorpusQuery:
        if self.years[0] > self.years[1]:
            raise ValueError(f"years range is empty: {self.years}")
        return self

    @classmethod
    def standard(cls, term_set: Sequence[str] = ()) -> CorpusQuery:
        """Journal and proceedings primary literature, 2012-2014, English."""
        return cls(
            term_set=tuple(term_set),
            source_types=frozenset({SourceType.JOURNAL, SourceType.PROCEEDING}),
            doc_types=frozenset(
                {DocType.ARTICLE, DocType.CONFERENCE_PAPER, DocType.CONFERENCE_REVIEW}
            ),
            years=(2012, 2014),
            language="en",
        )

    def with_terms(self, terms: Iterable[str]) -> CorpusQuery:
        return self.model_copy(update={"term_set": tuple(terms), "limit": None})

    def without_limit(self) -> CorpusQuery:
        return self.model_copy(update={"limit": None})


def tokenize(text: str) -> tuple[str, ...]:
    """Split normalized text into whole tokens; hyphenated words stay whole."""
    tokens = (normalize_term(tok) for tok in _TOKEN_RE.findall(normalize_term(text)))
    return tuple(tok for tok in tokens if tok)


def _contains_sequence(haystack: tuple[str, ...], needle: tuple[str, ...]) -> bool:
    width = len(needle)
    if width == 1:
        return needle[0] in haystack
    first = needle[0]
    for start, token in enumerate(haystack[: len(haystack) - width + 1]):
        if token == first and haystack[start : start + width] == needle:
            return True
    return False


class _DocTokens:
    __slots__ = ("title", "abstract", "keywords", "vocabulary")

    def __init__(self, doc: DocumentRecord):
        self.title = tokenize(doc.title)
        self.abstract = tokenize(doc.abstract)
        self.keywords = tuple(
            tokenize(kw) for kw in (*doc.author_keywords, *doc.index_keywords)
        )
        self.vocabulary = frozenset(self.title) | frozenset(self.abstract)
        for kw in self.keywords:
            self.vocabulary |= frozenset(kw)

    def matches(self, term: tuple[str, ...], fields: frozenset[SearchField]) -> bool:
        if not term or not set(term) <= self.vocabulary:
            return False
        if SearchField.TITLE in fields and _contains_sequence(self.title, term):
            return True
        if SearchField.ABSTRACT in fields and _contains_sequence(self.abstract, term):
            return True
        if SearchField.KEYWORDS in fields:
            return any(_contains_sequence(kw, term) for kw in self.keywords)
        return False


class Corpus:
    """Immutable collection of documents and their sources."""

    def __init__(
        self,
        documents: Sequence[DocumentRecord],
        sources: dict[str, SourceRecord],
    ):
        self._documents = tuple(sorted(documents, key=lambda d: d.doc_id))
        self._sources = dict(sorted(sources.items()))
        self._by_id = {doc.doc_id: doc for doc in self._documents}
        if len(self._by_id) != len(self._documents):
            seen: set[str] = set()
            for doc in self._documents:
                if doc.doc_id in seen:
                    raise DuplicateId(doc.doc_id)
                seen.add(doc.doc_id)

    @property
    def documents(self) -> tuple[DocumentRecord, ...]:
        return self._documents

    @property
    def sources(self) -> dict[str, SourceRecord]:
        return dict(self._sources)

    @property
    def source_ids(self) -> list[str]:
        return list(self._sources)

    def __len__(self) -> int:
        return len(self._documents)

    def get(self, doc_id: str) -> DocumentRecord | None:
        return self._by_id.get(doc_id)

    def source_of(self, doc_id: str) -> str | None:
        doc = self._by_id.get(doc_id)
        return doc.source_id if doc else None

    def categories(self) -> dict[str, tuple[str, ...]]:
        return {sid: src.categories for sid, src in self._sources.items()}

    @cached_property
    def _tokens(self) -> dict[str, _DocTokens]:
        return {doc.doc_id: _DocTokens(doc) for doc in self._documents}

    def _passes_filters(self, doc: DocumentRecord, q: CorpusQuery) -> bool:
        if q.source_ids is not None and doc.source_id not in q.source_ids:
            return False
        source = self._sources[doc.source_id]
        if source.source_type not in q.source_types:
            return False
        if doc.doc_type not in q.doc_types:
            return False
        if not q.years[0] <= doc.year <= q.years[1]:
            return False
        if q.language is not None and doc.language.lower() != q.language.lower():
            return False
        return True

    def matches_any(
        self,
        doc: DocumentRecord,
        terms: Sequence[tuple[str, ...]],
        fields: frozenset[SearchField],
    ) -> bool:
        tokens = self._tokens[doc.doc_id]
        return any(tokens.matches(term, fields) for term in terms)

    def filter_documents(self, q: CorpusQuery) -> list[DocumentRecord]:
        """Documents passing the query in doc_id order; ``limit`` is ignored."""
        terms = [tokenize(term) for term in q.term_set]
        terms = [term for term in terms if term]
        hits = []
        for doc in self._documents:
            if not self._passes_filters(doc, q):
                continue
            if q.term_set and not self.matches_any(doc, terms, q.fields_searched):
                continue
            hits.append(doc)
        return hits


def parse_corpus(
    path: str | Path,
    format: str = "CsvV1",
    categories_path: str | Path | None = None,
) -> Corpus:
    """Parse a CsvV1 export into a Corpus.

    The categories sidecar defaults to ``categories.csv`` next to the corpus
    file and is optional.
    """
    if format != "CsvV1":
        raise ValueError(f"Unsupported corpus format: {format}")
    path = Path(path)

    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError as ex:
        raise MalformedRow(1, "file has no header row") from ex
    except pd.errors.ParserError as ex:
        match = re.search(r"line (\d+)", str(ex))
        raise MalformedRow(int(match.group(1)) if match else 0, str(ex)) from ex

    if list(df.columns) != CSV_V1_COLUMNS:
        raise MalformedRow(1, f"header must be {','.join(CSV_V1_COLUMNS)}")
    df = df.fillna("")

    documents: list[DocumentRecord] = []
    seen_ids: set[str] = set()
    source_defs: dict[str, tuple[str, SourceType]] = {}
    pending: list[tuple[str, str]] = []

    for offset, row in enumerate(df.itertuples(index=False)):
        line = offset + 2
        doc_id = row.doc_id.strip()
        source_id = row.source_id.strip()
        if not doc_id:
            raise MalformedRow(line, "missing doc_id")
        if not source_id:
            raise MalformedRow(line, "missing source_id")
        if doc_id in seen_ids:
            raise DuplicateId(doc_id)
        seen_ids.add(doc_id)

        if row.source_type.strip():
            try:
                source_type = SourceType.parse(row.source_type)
            except ValueError as ex:
                raise MalformedRow(line, str(ex)) from ex
            known = source_defs.get(source_id)
            if known is not None and known[1] != source_type:
                raise MalformedRow(line, f"source {source_id} has conflicting source_type")
            if known is None or (not known[0] and row.source_title.strip()):
                source_defs[source_id] = (row.source_title.strip(), source_type)
        else:
            pending.append((doc_id, source_id))

        if not row.doc_type.strip():
            raise MalformedRow(line, "missing doc_type")
        try:
            year = int(row.year)
            citation_count = int(row.citation_count or 0)
        except ValueError as ex:
            raise MalformedRow(line, f"non-integer field: {ex}") from ex

        try:
            documents.append(
                DocumentRecord(
                    doc_id=doc_id,
                    source_id=source_id,
                    title=row.title,
                    abstract=row.abstract,
                    author_keywords=_split_multi(row.author_keywords),
                    index_keywords=_split_multi(row.index_keywords),
                    doc_type=DocType.parse(row.doc_type),
                    year=year,
                    language=row.language.strip() or "en",
                    references=_split_multi(row.references),
                    citation_count=citation_count,
                )
            )
        except ValidationError as ex:
            first = ex.errors()[0]
            field = ".".join(str(part) for part in first["loc"])
            raise MalformedRow(line, f"{field}: {first['msg']}") from ex

    for doc_id, source_id in pending:
        if source_id not in source_defs:
            raise UnknownSource(doc_id, source_id)

    categories = _load_categories(
        Path(categories_path) if categories_path else path.with_name("categories.csv"),
        required=categories_path is not None,
        known=set(source_defs),
    )
    sources = {
        sid: SourceRecord(
            source_id=sid,
            title=title,
            source_type=source_type,
            categories=categories.get(sid, ()),
        )
        for sid, (title, source_type) in source_defs.items()
    }

    logger.info(f"Parsed {len(documents)} documents from {len(sources)} sources ({path})")
    return Corpus(documents, sources)


def _split_multi(value: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in value.split(MULTI_VALUE_SEPARATOR) if part.strip())


def _load_categories(
    path: Path, required: bool, known: set[str]
) -> dict[str, tuple[str, ...]]:
    if not path.exists():
        if required:
            raise ConfigError(f"Categories file not found: {path}")
        return {}

    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    if list(df.columns) != ["source_id", "category"]:
        raise MalformedRow(1, "categories header must be source_id,category")

    mapping: dict[str, list[str]] = {}
    unknown = 0
    for row in df.itertuples(index=False):
        sid, category = row.source_id.strip(), row.category.strip()
        if not sid or not category:
            continue
        if sid not in known:
            unknown += 1
            continue
        bucket = mapping.setdefault(sid, [])
        if category not in bucket:
            bucket.append(category)
    if unknown:
        logger.warning(f"Ignored {unknown} category rows for sources not in the corpus")
    return {sid: tuple(sorted(cats)) for sid, cats in mapping.items()}


def _sort_key(order: Order):
    if order is Order.CITATION_COUNT_DESC:
        return lambda d: (-d.citation_count, d.doc_id)
    return lambda d: d.doc_id


def query_documents(corpus: Corpus, q: CorpusQuery) -> list[DocumentRecord]:
    """Documents matching any query term, filtered, ordered and truncated.

    Term matching is whole-token and case-insensitive after normalization, so
    "learning" never matches "e-learning".
    """
    hits = sorted(corpus.filter_documents(q), key=_sort_key(q.order))
    if q.limit is not None:
        hits = hits[: q.limit]
    return hits


def count_documents(corpus: Corpus, q: CorpusQuery) -> int:
    return len(corpus.filter_documents(q.without_limit()))
