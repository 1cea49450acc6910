"""Tests for core/corpus.py - tokens, vocabulary, w-grams and samples."""

import numpy as np
import pytest


class TestTokenize:
    """Tests for tokenize and split_sentences."""

    def test_lowercases_and_strips_flanking_punctuation(self):
        """Punctuation at token edges is removed, case is folded."""
        from core.corpus import tokenize

        assert tokenize("The stock market, rose!") == ["the", "stock", "market", "rose"]

    def test_empty_line(self):
        """An empty line gives no tokens."""
        from core.corpus import tokenize

        assert tokenize("") == []
        assert tokenize("  -- ... ") == []

    def test_internal_punctuation_kept(self):
        """Apostrophes inside a word survive."""
        from core.corpus import tokenize

        assert tokenize("don't STOP") == ["don't", "stop"]

    def test_split_sentences(self):
        """A paragraph splits after sentence-final punctuation followed by whitespace."""
        from core.corpus import split_sentences

        text = "It rained. Did it stop? Yes!  It did."
        assert split_sentences(text) == ["It rained.", "Did it stop?", "Yes!", "It did."]

    def test_split_sentences_keeps_decimal_numbers(self):
        """A period without following whitespace does not split."""
        from core.corpus import split_sentences

        assert split_sentences("Pi is 3.14 roughly") == ["Pi is 3.14 roughly"]


class TestVocabulary:
    """Tests for build_vocabulary and Vocabulary."""

    def test_most_frequent_tokens(self):
        """Keeps the n_voc most frequent tokens with their counts."""
        from core.corpus import build_vocabulary

        vocab = build_vocabulary(["a", "b", "a", "c", "a", "b"], 2)
        assert vocab.tokens == ["a", "b"]
        assert vocab.counts.tolist() == [3, 2]

    def test_fewer_distinct_than_n_voc(self):
        """Returns every token when there are fewer than n_voc."""
        from core.corpus import build_vocabulary

        vocab = build_vocabulary(["x"], 5)
        assert vocab.tokens == ["x"]
        assert vocab.counts.tolist() == [1]

    def test_ties_broken_lexicographically(self):
        """Equal counts are ordered by token."""
        from core.corpus import build_vocabulary

        assert build_vocabulary(["b", "a", "b", "a"], 2).tokens == ["a", "b"]

    def test_empty_stream_rejected(self):
        """An empty corpus is an error."""
        from core.corpus import build_vocabulary
        from core.errors import EmptyCorpusError

        with pytest.raises(EmptyCorpusError, match="empty corpus"):
            build_vocabulary([], 10)

    def test_invalid_n_voc(self):
        """n_voc must be positive."""
        from core.corpus import build_vocabulary
        from core.errors import ConfigurationError

        with pytest.raises(ConfigurationError):
            build_vocabulary(["a"], 0)

    def test_lookup(self, toy_vocab):
        """Ids follow the ranking; unknown tokens map to None."""
        assert toy_vocab.id_of("the") == 0
        assert toy_vocab.id_of("zebra") is None
        assert "cat" in toy_vocab
        assert toy_vocab.ids(["the", "zebra", "cat"]) == [0, toy_vocab.id_of("cat")]

    def test_save_and_load(self, toy_vocab, temp_dir):
        """The TSV file restores an equal vocabulary."""
        from core.corpus import Vocabulary

        path = temp_dir / "vocab.tsv"
        toy_vocab.save(path)
        assert Vocabulary.load(path) == toy_vocab

    def test_load_rejects_non_integer_count(self, temp_dir):
        from core.corpus import Vocabulary
        from core.errors import ConfigurationError

        path = temp_dir / "vocab.tsv"
        path.write_text("bank\t3\nriver\tmany\n", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="vocab.tsv:2"):
            Vocabulary.load(path)

    def test_lines_must_be_utf8(self, temp_dir):
        from core.corpus import iter_lines
        from core.errors import InputEncodingError

        path = temp_dir / "latin1.txt"
        path.write_bytes("caf\xe9\n".encode("latin-1"))
        with pytest.raises(InputEncodingError):
            list(iter_lines([path]))

    def test_parallel_counting_matches_serial(self, temp_dir, toy_lines):
        """Counting file shards with several workers gives the same vocabulary."""
        from core.corpus import build_vocabulary, build_vocabulary_from_files, tokenize

        paths = []
        for n, line in enumerate(toy_lines):
            path = temp_dir / f"shard{n}.txt"
            path.write_text(line + "\n", encoding="utf-8")
            paths.append(path)

        serial = build_vocabulary((t for line in toy_lines for t in tokenize(line)), 8)
        assert build_vocabulary_from_files(paths, 8, workers=2) == serial

    def test_duplicate_tokens_rejected(self):
        """A vocabulary cannot list a token twice."""
        from core.corpus import Vocabulary
        from core.errors import ConfigurationError

        with pytest.raises(ConfigurationError):
            Vocabulary(["a", "a"], np.array([2, 1]))


class TestProbabilities:
    """Tests for occurrence_probabilities and uniform_probabilities."""

    def test_normalized_and_duplicated(self):
        """Both blocks carry the same normalized frequencies."""
        from core.corpus import Vocabulary, occurrence_probabilities

        p = occurrence_probabilities(Vocabulary(["a", "b"], np.array([3, 1])))
        np.testing.assert_allclose(p, [0.75, 0.25, 0.75, 0.25])

    def test_single_word(self):
        from core.corpus import Vocabulary, occurrence_probabilities

        p = occurrence_probabilities(Vocabulary(["a"], np.array([1])))
        np.testing.assert_allclose(p, [1.0, 1.0])

    def test_equal_counts_are_uniform(self):
        """Equal counts reduce to the uniform vector."""
        from core.corpus import Vocabulary, occurrence_probabilities, uniform_probabilities

        p = occurrence_probabilities(Vocabulary(list("abcd"), np.array([2, 2, 2, 2])))
        np.testing.assert_allclose(p, uniform_probabilities(4))
        np.testing.assert_allclose(p, 0.25)

    def test_strictly_positive_and_sums_to_one(self, toy_vocab):
        from core.corpus import occurrence_probabilities

        p = occurrence_probabilities(toy_vocab)
        assert (p > 0).all()
        assert abs(p[: toy_vocab.n_voc].sum() - 1.0) < 1e-12


class TestWGrams:
    """Tests for sentence_to_wgrams and encode_wgram."""

    @pytest.fixture
    def abcd(self):
        from core.corpus import Vocabulary

        return Vocabulary(["a", "b", "c", "d"], np.array([4, 3, 2, 1]))

    def test_sliding_window(self, abcd):
        """One w-gram per window position, centre word as target."""
        from core.corpus import WGram, sentence_to_wgrams

        grams = sentence_to_wgrams(["a", "b", "c", "d"], 3, abcd)
        assert grams == [WGram((0, 2), 1, 3), WGram((1, 3), 2, 3)]

    def test_short_sentence_dropped(self, abcd):
        from core.corpus import sentence_to_wgrams

        assert sentence_to_wgrams(["a", "b"], 3, abcd) == []

    def test_oov_removed_before_windowing(self, abcd):
        """Out-of-vocabulary tokens vanish and the window closes over them."""
        from core.corpus import WGram, sentence_to_wgrams

        assert sentence_to_wgrams(["a", "zzz", "b", "c"], 3, abcd) == [WGram((0, 2), 1, 3)]

    def test_window_count(self, abcd):
        """A sentence of length L yields L - w + 1 w-grams."""
        from core.corpus import sentence_to_wgrams

        tokens = ["a", "b", "c", "d"] * 3
        assert len(sentence_to_wgrams(tokens, 5, abcd)) == len(tokens) - 5 + 1

    @pytest.mark.parametrize("w", [2, 4, 1])
    def test_even_or_small_window_rejected(self, abcd, w):
        from core.corpus import sentence_to_wgrams
        from core.errors import ConfigurationError

        with pytest.raises(ConfigurationError):
            sentence_to_wgrams(["a", "b", "c"], w, abcd)

    def test_encode_definition(self):
        """Context ids in the first block, target offset by n_voc."""
        from core.corpus import WGram, encode_wgram

        assert encode_wgram(WGram((0, 2), 1, 3), 4).active_indices.tolist() == [0, 2, 5]

    def test_encode_repeated_context_collapses(self):
        """Repeated context ids set one bit; the target bit is independent."""
        from core.corpus import WGram, encode_wgram

        assert encode_wgram(WGram((3, 3), 3, 3), 4).active_indices.tolist() == [3, 7]

    def test_encode_static_form(self):
        """Empty context gives a one-hot target block only."""
        from core.corpus import WGram, encode_wgram

        assert encode_wgram(WGram((), 0, 3), 4).active_indices.tolist() == [4]

    def test_encode_out_of_range(self):
        from core.corpus import WGram, encode_wgram
        from core.errors import IdOutOfRangeError

        with pytest.raises(IdOutOfRangeError, match="id out of range"):
            encode_wgram(WGram((0, 4), 1, 3), 4)

    def test_encode_ids_matches_wgram_path(self, abcd):
        """The vectorized encoder gives the same samples as w-gram by w-gram encoding."""
        from core.corpus import encode_ids, encode_wgram, sentence_to_wgrams

        tokens = ["a", "b", "a", "c", "d", "a", "a", "b"]
        expected = [encode_wgram(g, 4).active_indices for g in sentence_to_wgrams(tokens, 5, abcd)]
        lengths, indices = encode_ids(np.array(abcd.ids(tokens)), 5, 4)
        got = np.split(indices, np.cumsum(lengths)[:-1])
        assert [g.tolist() for g in got] == [e.tolist() for e in expected]


class TestSampleSet:
    """Tests for encode_corpus, SampleSet and the sample cache."""

    def test_one_target_bit_per_sample(self, toy_lines, toy_vocab):
        """Every sample has exactly one active index in the target block."""
        from core.corpus import encode_corpus

        samples = encode_corpus(toy_lines, toy_vocab, 3)
        for i in range(len(samples)):
            idx = samples[i].active_indices
            assert (idx >= toy_vocab.n_voc).sum() == 1
            assert np.all(np.diff(idx) > 0)

    def test_sample_count(self, toy_lines, toy_vocab):
        """All tokens are in vocabulary, so each line gives L - w + 1 samples."""
        from core.corpus import encode_corpus, tokenize

        samples = encode_corpus(toy_lines, toy_vocab, 3)
        assert len(samples) == sum(max(0, len(tokenize(line)) - 2) for line in toy_lines)

    def test_chunked_parallel_encoding_is_identical(self, synthetic_lines):
        """Chunk size and worker count do not change the sample stream."""
        from core.corpus import build_vocabulary, encode_corpus, tokenize

        vocab = build_vocabulary((t for line in synthetic_lines for t in tokenize(line)), 20)
        one = encode_corpus(synthetic_lines, vocab, 5)
        many = encode_corpus(synthetic_lines, vocab, 5, workers=2, chunk_size=37)
        assert one == many

    def test_empty_corpus_rejected(self, toy_vocab):
        """No w-grams at all is an error."""
        from core.corpus import encode_corpus
        from core.errors import EmptyCorpusError

        with pytest.raises(EmptyCorpusError):
            encode_corpus(["cat", ""], toy_vocab, 3)

    def test_rows_are_binary_csr(self, toy_lines, toy_vocab):
        from core.corpus import encode_corpus

        samples = encode_corpus(toy_lines, toy_vocab, 3)
        X = samples.rows(np.array([2, 0]))
        assert X.shape == (2, 2 * toy_vocab.n_voc)
        assert np.flatnonzero(X[0].toarray()).tolist() == samples[2].active_indices.tolist()
        assert set(X.data.tolist()) == {1.0}

    def test_cache_round_trip(self, toy_lines, toy_vocab, temp_dir):
        """Reading the cache restores the same samples."""
        from core.corpus import encode_corpus, read_sample_cache, write_sample_cache

        samples = encode_corpus(toy_lines, toy_vocab, 3)
        path = temp_dir / "samples.flyg"
        write_sample_cache(path, samples)
        assert read_sample_cache(path) == samples

    def test_cache_bad_magic(self, temp_dir):
        from core.corpus import read_sample_cache
        from core.errors import BadMagicError

        path = temp_dir / "bad.flyg"
        path.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(BadMagicError):
            read_sample_cache(path)

    def test_cache_truncated(self, toy_lines, toy_vocab, temp_dir):
        from core.corpus import encode_corpus, read_sample_cache, write_sample_cache
        from core.errors import TruncatedFileError

        path = temp_dir / "samples.flyg"
        write_sample_cache(path, encode_corpus(toy_lines, toy_vocab, 3))
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(TruncatedFileError):
            read_sample_cache(path)

    def test_cache_sample_count_mismatch(self, toy_lines, toy_vocab, temp_dir):
        """Whole records that disagree with the header's sample count are rejected."""
        from core.corpus import encode_corpus, read_sample_cache, write_sample_cache
        from core.errors import TruncatedFileError

        samples = encode_corpus(toy_lines, toy_vocab, 3)
        path = temp_dir / "samples.flyg"
        write_sample_cache(path, samples.subset(len(samples) - 1))
        whole = temp_dir / "whole.flyg"
        write_sample_cache(whole, samples)
        header = whole.read_bytes()[:24]
        path.write_bytes(header + path.read_bytes()[24:])
        with pytest.raises(TruncatedFileError, match="announces"):
            read_sample_cache(path)

    def test_record_walk(self):
        """Record offsets follow the length bytes, not every byte that looks like one."""
        from core.corpus import _record_starts

        body = np.array([1, 9, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0], dtype=np.uint8)
        assert _record_starts(body).tolist() == [0, 5, 6]
        assert _record_starts(np.zeros(0, dtype=np.uint8)).tolist() == []

    @pytest.mark.slow
    def test_large_cache_round_trip(self, temp_dir):
        from core.corpus import EncodedSample, SampleSet, read_sample_cache, write_sample_cache

        rng = np.random.default_rng(0)
        lengths = rng.integers(1, 12, size=200000)
        indices = rng.integers(0, 2000, size=int(lengths.sum())).astype(np.int32)
        indptr = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
        samples = SampleSet(indptr, indices, 1000, 11)
        path = temp_dir / "large.flyg"
        write_sample_cache(path, samples)
        assert read_sample_cache(path) == samples
        assert read_sample_cache(path)[7] == EncodedSample(indices[indptr[7] : indptr[8]])


class TestShuffle:
    """Tests for shuffle_epoch."""

    def test_single_sample(self):
        from core.corpus import shuffle_epoch

        assert shuffle_epoch(1, 0, 0).tolist() == [0]

    def test_is_permutation(self):
        from core.corpus import shuffle_epoch

        assert sorted(shuffle_epoch(50, 3, 9).tolist()) == list(range(50))

    def test_deterministic(self):
        from core.corpus import shuffle_epoch

        np.testing.assert_array_equal(shuffle_epoch(100, 2, 5), shuffle_epoch(100, 2, 5))

    def test_epochs_differ(self):
        """Different epochs draw from different streams."""
        from core.corpus import shuffle_epoch

        assert not np.array_equal(shuffle_epoch(10, 0, 1), shuffle_epoch(10, 1, 1))

    def test_frozen_permutations(self):
        """Seed 1 gives these orders; a change means training runs no longer reproduce."""
        from core.corpus import shuffle_epoch

        assert shuffle_epoch(10, 0, 1).tolist() == [9, 0, 8, 4, 7, 6, 1, 2, 3, 5]
        assert shuffle_epoch(10, 1, 1).tolist() == [9, 6, 3, 4, 0, 1, 5, 7, 8, 2]

    def test_zero_samples_rejected(self):
        from core.corpus import shuffle_epoch
        from core.errors import EmptyCorpusError

        with pytest.raises(EmptyCorpusError):
            shuffle_epoch(0, 0, 0)
