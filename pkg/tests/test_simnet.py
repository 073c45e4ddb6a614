"""Unit tests for citation, co-citation and coupling channels and their combination."""

from collections import defaultdict
from itertools import combinations

import numpy as np
import pytest
from scipy import sparse

from sciencemap.corpus import parse_corpus
from sciencemap.simnet import (
    Channel,
    ChannelMatrix,
    build_channels,
    citation_counts,
    cocitation_counts,
    combine_channels,
    coupling_counts,
    normalize_channel,
    resolve_references,
)


def _resolved(corpus, doc):
    return [ref for ref in dict.fromkeys(doc.references) if corpus.get(ref) is not None]


def _naive_citation(corpus):
    counts = defaultdict(int)
    for doc in corpus.documents:
        for ref in _resolved(corpus, doc):
            a, b = doc.source_id, corpus.source_of(ref)
            if a != b:
                counts[(a, b)] += 1
                counts[(b, a)] += 1
    return counts


def _naive_cocitation(corpus):
    counts = defaultdict(int)
    for doc in corpus.documents:
        cited = sorted({corpus.source_of(ref) for ref in _resolved(corpus, doc)})
        for a, b in combinations(cited, 2):
            counts[(a, b)] += 1
            counts[(b, a)] += 1
    return counts


def _naive_coupling(corpus):
    refs = defaultdict(set)
    for doc in corpus.documents:
        refs[doc.source_id].update(_resolved(corpus, doc))
    counts = {}
    for a in corpus.source_ids:
        for b in corpus.source_ids:
            if a != b:
                counts[(a, b)] = len(refs[a] & refs[b])
    return counts


def _assert_matches(channel, oracle):
    for a in channel.sources:
        for b in channel.sources:
            expected = 0 if a == b else oracle.get((a, b), 0)
            assert channel.count(a, b) == expected, (channel.channel, a, b)


class TestResolveReferences:
    """Test resolve_references."""

    def test_unresolved_ratio(self, citation_corpus):
        """Test raw-string references are counted and dropped."""
        refs = resolve_references(citation_corpus)

        assert refs.total_references == 8
        assert refs.unresolved_references == 1
        assert refs.unresolved_ratio == pytest.approx(0.125)


class TestChannels:
    """Test the three channel counts."""

    def test_citation_counts(self, citation_corpus):
        """Test symmetrized citation links; self-citations are dropped."""
        channel = citation_counts(citation_corpus)

        assert channel.count("S1", "S2") == 1
        assert channel.count("S1", "S4") == 1
        assert channel.count("S2", "S3") == 1
        assert channel.count("S3", "S3") == 0
        assert channel.directed[0, 1] == 1
        assert channel.directed[1, 0] == 0

    def test_cocitation_counts(self, citation_corpus):
        """Test co-citation counts citing documents reaching both sources."""
        channel = cocitation_counts(citation_corpus)

        assert channel.count("S2", "S3") == 2
        assert channel.count("S1", "S2") == 1
        assert channel.count("S1", "S4") == 0

    def test_coupling_counts(self, citation_corpus):
        """Test coupling counts shared cited documents."""
        channel = coupling_counts(citation_corpus)

        assert channel.count("S1", "S4") == 2
        assert channel.count("S1", "S2") == 1
        assert channel.count("S2", "S4") == 1
        assert channel.count("S3", "S1") == 0

    def test_random_fixture_matches_naive_loops(self, write_corpus, make_doc):
        """Test all three channels equal naive loops on a 50-document fixture."""
        rng = np.random.default_rng(5)
        rows = []
        for i in range(50):
            refs = []
            if i:
                for _ in range(int(rng.integers(0, 6))):
                    if rng.random() < 0.15:
                        refs.append(f"Anonymous {int(rng.integers(100))}")
                    else:
                        refs.append(f"D{int(rng.integers(i)):02d}")
            source = f"S{int(rng.integers(8))}"
            rows.append(make_doc(f"D{i:02d}", source, references=";".join(refs)))
        corpus = parse_corpus(write_corpus(rows))

        citation, cocitation, coupling = build_channels(corpus)

        _assert_matches(citation, _naive_citation(corpus))
        _assert_matches(cocitation, _naive_cocitation(corpus))
        _assert_matches(coupling, _naive_coupling(corpus))


class TestCombineChannels:
    """Test normalize_channel and combine_channels."""

    @staticmethod
    def _channel(name, dense):
        return ChannelMatrix(
            channel=name,
            sources=["A", "B", "C"],
            counts=sparse.csr_matrix(np.array(dense, dtype=np.int64)),
        )

    def test_normalized_channel_max_is_one(self, citation_corpus):
        """Test per-channel normalization scales the largest entry to 1."""
        normalized = normalize_channel(cocitation_counts(citation_corpus))

        assert normalized.max() == pytest.approx(1.0)
        assert abs(normalized - normalized.T).max() == pytest.approx(0.0)

    def test_identical_channels_equal_single_channel(self, citation_corpus):
        """Test three identical channels combine to the single normalized channel."""
        channel = coupling_counts(citation_corpus)
        copies = [
            ChannelMatrix(name, channel.sources, channel.counts)
            for name in (Channel.CITATION, Channel.COCITATION, Channel.COUPLING)
        ]

        combined = combine_channels(copies)

        np.testing.assert_allclose(
            combined.matrix.to_dense(), normalize_channel(channel).toarray(), atol=1e-12
        )

    def test_empty_channel_weight_redistributed(self):
        """Test an empty channel is reported and its weight spread over the others."""
        links = [[0, 2, 1], [2, 0, 0], [1, 0, 0]]
        channels = [
            self._channel(Channel.CITATION, links),
            self._channel(Channel.COCITATION, np.zeros((3, 3))),
            self._channel(Channel.COUPLING, links),
        ]

        combined = combine_channels(channels, (1.0, 1.0, 2.0))

        assert combined.empty_channels == [Channel.COCITATION]
        assert combined.weights[Channel.COCITATION] == 0.0
        assert combined.weights[Channel.CITATION] == pytest.approx(1 / 3)
        assert combined.weights[Channel.COUPLING] == pytest.approx(2 / 3)
        assert combined.matrix.to_dense().max() == pytest.approx(1.0)

    def test_invalid_weights_rejected(self, citation_corpus):
        """Test negative or all-zero weights are rejected."""
        channels = build_channels(citation_corpus)

        with pytest.raises(ValueError):
            combine_channels(channels, (1.0, -1.0, 1.0))
        with pytest.raises(ValueError):
            combine_channels(channels, (0.0, 0.0, 0.0))
        with pytest.raises(ValueError):
            combine_channels(channels, (1.0, 1.0))

    def test_scaled_channel_leaves_combination_unchanged(self, citation_corpus):
        """Test multiplying one channel's counts by a constant changes nothing."""
        channels = build_channels(citation_corpus)
        citation = channels[0]
        scaled = ChannelMatrix(citation.channel, citation.sources, citation.counts * 3)

        base = combine_channels(channels)
        other = combine_channels([scaled, *channels[1:]])

        np.testing.assert_allclose(other.matrix.to_dense(), base.matrix.to_dense(), atol=1e-12)

    def test_single_weight_reproduces_channel(self, citation_corpus):
        """Test weights (1, 0, 0) give the normalized citation channel alone."""
        channels = build_channels(citation_corpus)

        combined = combine_channels(channels, (1.0, 0.0, 0.0))

        np.testing.assert_allclose(
            combined.matrix.to_dense(), normalize_channel(channels[0]).toarray(), atol=1e-12
        )
        assert combined.weights[Channel.CITATION] == 1.0


class TestChannelMatrix:
    """Test ChannelMatrix lookups."""

    def test_index_built_once(self, citation_corpus):
        """Test count resolves labels through the index built at construction."""
        channel = coupling_counts(citation_corpus)
        index = channel._index

        assert index == {sid: i for i, sid in enumerate(channel.sources)}
        assert channel.count("S1", "S4") == 2
        assert channel._index is index
