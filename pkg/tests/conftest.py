"""Pytest configuration and fixtures."""

from pathlib import Path

import pandas as pd
import pytest

from sciencemap.corpus import CSV_V1_COLUMNS, parse_corpus
from sciencemap.synthetic import generate_corpus


def _doc(doc_id: str, source_id: str, **fields) -> dict:
    row = {
        "doc_id": doc_id,
        "source_id": source_id,
        "source_title": f"Source {source_id}",
        "source_type": "Journal",
        "doc_type": "Article",
        "year": 2013,
        "language": "en",
        "title": "",
        "abstract": "",
        "author_keywords": "",
        "index_keywords": "",
        "references": "",
        "citation_count": 0,
    }
    row.update(fields)
    return row


@pytest.fixture
def make_doc():
    """Factory for one CsvV1 row whose defaults pass the standard query."""
    return _doc


@pytest.fixture
def write_corpus(tmp_path):
    """Write CsvV1 rows (and optionally a categories sidecar) to tmp_path."""

    def _write(rows, categories=None, name="corpus.csv") -> Path:
        path = tmp_path / name
        pd.DataFrame(rows, columns=CSV_V1_COLUMNS).to_csv(path, index=False)
        if categories is not None:
            pd.DataFrame(
                [
                    {"source_id": sid, "category": cat}
                    for sid, cats in categories.items()
                    for cat in cats
                ],
                columns=["source_id", "category"],
            ).to_csv(path.with_name("categories.csv"), index=False)
        return path

    return _write


@pytest.fixture
def citation_corpus(write_corpus, make_doc):
    """Four sources; D5 and D6 cite across them, D7 cites a raw string."""
    rows = [
        make_doc("D1", "S1"),
        make_doc("D2", "S2"),
        make_doc("D3", "S3"),
        make_doc("D4", "S4"),
        make_doc("D5", "S1", references="D2;D3"),
        make_doc("D6", "S4", references="D2;D3;D1"),
        make_doc("D7", "S2", references="D3;Smith 2001 unpublished"),
        make_doc("D8", "S3", references="D8"),
    ]
    return parse_corpus(write_corpus(rows))


@pytest.fixture(scope="session")
def synthetic_files(tmp_path_factory):
    """Small seeded synthetic corpus with categories and labels on disk."""
    out = tmp_path_factory.mktemp("synthetic")
    return generate_corpus(n_documents=1200, n_sources=120, seed=7).write(out)


@pytest.fixture
def pipeline_config(synthetic_files, tmp_path):
    """TOML config for the synthetic corpus with light clustering and permutation settings."""
    path = tmp_path / "sciencemap.toml"
    path.write_text(
        "\n".join(
            [
                f'corpus = "{synthetic_files["corpus"].as_posix()}"',
                f'categories = "{synthetic_files["categories"].as_posix()}"',
                f'labels = "{synthetic_files["labels"].as_posix()}"',
                'out = "out"',
                "",
                "[mapping]",
                "restarts = 3",
                "grid = 40",
                "",
                "[overlay]",
                "permutations = 200",
                "",
                "[categraph]",
                "iterations = 100",
                "",
            ]
        )
    )
    return path
