"""Seeded generator of topic-structured CsvV1 corpora for tests and desk-scale runs."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .corpus import CSV_V1_COLUMNS, MULTI_VALUE_SEPARATOR

logger = logging.getLogger(__name__)

THEME = "elearning"

TOPICS: dict[str, dict[str, list[str]]] = {
    THEME: {
        "keywords": [
            "e-learning",
            "online learning",
            "distance education",
            "blended learning",
            "learning management system",
            "mobile learning",
            "virtual learning environment",
            "mooc",
            "computer-supported collaborative learning",
            "ict",
            "elearning",
            "lms",
            "moodle",
            "instructional design",
        ],
        "categories": ["Education", "Computer Science"],
    },
    "education": {
        "keywords": [
            "higher education",
            "teacher training",
            "curriculum",
            "student assessment",
            "educational policy",
            "literacy",
        ],
        "categories": ["Education", "Social Sciences"],
    },
    "machine": {
        "keywords": [
            "machine learning",
            "neural networks",
            "classification",
            "data mining",
            "deep learning",
            "feature selection",
        ],
        "categories": ["Computer Science", "Mathematics"],
    },
    "library": {
        "keywords": [
            "information retrieval",
            "digital libraries",
            "bibliometrics",
            "metadata",
            "open access",
            "citation analysis",
        ],
        "categories": ["Documentation", "Computer Science"],
    },
    "medicine": {
        "keywords": [
            "clinical trial",
            "oncology",
            "diabetes",
            "public health",
            "epidemiology",
            "cardiology",
        ],
        "categories": ["Medicine"],
    },
    "engineering": {
        "keywords": [
            "finite element",
            "control systems",
            "signal processing",
            "robotics",
            "power electronics",
            "materials",
        ],
        "categories": ["Engineering"],
    },
}

_TITLE_TEMPLATES = [
    "A study of {kw} in practice",
    "Towards {kw}: evidence from {n} cases",
    "Evaluating {kw} with mixed methods",
    "{kw} revisited",
    "On the role of {kw}",
]


@dataclass
class SyntheticCorpus:
    documents: pd.DataFrame
    categories: pd.DataFrame
    labels: pd.DataFrame

    def write(self, out_dir: str | Path) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "corpus": out / "corpus.csv",
            "categories": out / "categories.csv",
            "labels": out / "labels.csv",
        }
        self.documents.to_csv(paths["corpus"], index=False, lineterminator="\n")
        self.categories.to_csv(paths["categories"], index=False, lineterminator="\n")
        self.labels.to_csv(paths["labels"], index=False, lineterminator="\n")
        logger.info(f"Wrote synthetic corpus of {len(self.documents)} documents to {out}")
        return paths


def _theme_shares(n_sources: int, rng: np.random.Generator) -> np.ndarray:
    """Share of each source's output on the theme: a focused group, a fringe, the rest none."""
    shares = np.zeros(n_sources)
    kind = rng.choice(3, size=n_sources, p=[0.12, 0.18, 0.70])
    shares[kind == 0] = rng.uniform(0.55, 1.0, size=int((kind == 0).sum()))
    shares[kind == 1] = rng.uniform(0.03, 0.35, size=int((kind == 1).sum()))
    return shares


def generate_corpus(
    n_documents: int = 5000,
    n_sources: int = 500,
    seed: int = 0,
    years: tuple[int, int] = (2010, 2016),
    unresolved_reference_rate: float = 0.1,
) -> SyntheticCorpus:
    """Build a corpus where a subset of sources publishes on the e-learning theme.

    Relatedness labels mark a source related when its intended theme share is
    at least 10%; fringe sources below that are the errors of the lower bands.
    """
    if n_sources < 2 or n_documents < n_sources:
        raise ValueError("need at least 2 sources and one document per source")
    rng = np.random.default_rng(seed)
    topic_names = sorted(t for t in TOPICS if t != THEME)

    shares = _theme_shares(n_sources, rng)
    home = rng.choice(topic_names, size=n_sources)
    source_types = np.where(rng.random(n_sources) < 0.4, "Journal", "Proceeding")
    source_ids = [f"S{i:04d}" for i in range(1, n_sources + 1)]

    owner = np.concatenate(
        [np.arange(n_sources), rng.integers(0, n_sources, size=n_documents - n_sources)]
    )
    owner = np.sort(owner)

    topic_of_doc: list[str] = []
    rows = []
    by_topic: dict[str, list[int]] = {}
    for d, s in enumerate(owner):
        topic = THEME if rng.random() < shares[s] else str(home[s])
        topic_of_doc.append(topic)
        vocab = TOPICS[topic]["keywords"]
        weights = 1.0 / np.arange(1, len(vocab) + 1)
        picks = rng.choice(
            len(vocab), size=int(rng.integers(2, 6)), replace=False, p=weights / weights.sum()
        )
        keywords = [vocab[i] for i in sorted(picks)]
        lead = keywords[0]
        doc_type = (
            "Article"
            if source_types[s] == "Journal"
            else ("Conference Review" if rng.random() < 0.05 else "Conference Paper")
        )
        title = _TITLE_TEMPLATES[int(rng.integers(len(_TITLE_TEMPLATES)))].format(
            kw=lead, n=int(rng.integers(2, 40))
        )
        abstract = f"We examine {keywords[-1]} and report findings on {lead}."

        references = []
        earlier = by_topic.get(topic, [])
        for _ in range(int(rng.integers(0, 7))):
            if rng.random() < unresolved_reference_rate or not earlier:
                references.append(f"Anonymous {int(rng.integers(1990, 2010))} unpublished report")
            elif rng.random() < 0.85:
                references.append(f"D{earlier[int(rng.integers(len(earlier)))] + 1:06d}")
            else:
                references.append(f"D{int(rng.integers(d)) + 1:06d}" if d else "Anonymous")
        by_topic.setdefault(topic, []).append(d)

        rows.append(
            {
                "doc_id": f"D{d + 1:06d}",
                "source_id": source_ids[s],
                "source_title": f"{str(home[s]).title()} {source_types[s]} {s + 1}",
                "source_type": source_types[s],
                "doc_type": doc_type,
                "year": int(rng.integers(years[0], years[1] + 1)),
                "language": "en" if rng.random() < 0.95 else "es",
                "title": title,
                "abstract": abstract,
                "author_keywords": MULTI_VALUE_SEPARATOR.join(keywords),
                "index_keywords": "",
                "references": MULTI_VALUE_SEPARATOR.join(dict.fromkeys(references)),
                "citation_count": int(rng.geometric(0.15)) - 1,
            }
        )

    documents = pd.DataFrame(rows, columns=CSV_V1_COLUMNS)

    category_rows = []
    for s, sid in enumerate(source_ids):
        cats = set(TOPICS[str(home[s])]["categories"])
        if shares[s] >= 0.5:
            cats |= set(TOPICS[THEME]["categories"])
        elif shares[s] > 0 and rng.random() < 0.3:
            cats.add("Education")
        category_rows.extend({"source_id": sid, "category": c} for c in sorted(cats))
    categories = pd.DataFrame(category_rows, columns=["source_id", "category"])

    labels = pd.DataFrame(
        {
            "source_id": source_ids,
            "label": ["related" if share >= 0.1 else "unrelated" for share in shares],
        }
    )
    logger.info(
        f"Generated {n_documents} documents over {n_sources} sources "
        f"({int((shares > 0).sum())} publish on the theme)"
    )
    return SyntheticCorpus(documents=documents, categories=categories, labels=labels)
