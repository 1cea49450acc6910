"""Tests for core/synthetic.py - topic corpora."""

from core.synthetic import topic_words, two_topic_corpus


def test_topic_words_are_disjoint():
    topics = topic_words(3, 20)

    assert len(topics) == 3
    assert all(len(t) == 20 for t in topics)
    assert len(set().union(*map(set, topics))) == 60


def test_sentences_stay_in_one_topic():
    lines, topics = two_topic_corpus(200, topic_size=10, sentence_length=6, seed=1)
    topic_sets = [set(t) for t in topics]

    assert len(lines) == 200
    for line in lines:
        words = set(line.split())
        assert len(line.split()) == 6
        assert any(words <= t for t in topic_sets)


def test_both_topics_are_used():
    lines, topics = two_topic_corpus(200, seed=2)

    first = sum(line.split()[0] in topics[0] for line in lines)
    assert 0 < first < 200


def test_seeded():
    assert two_topic_corpus(50, seed=5) == two_topic_corpus(50, seed=5)
    assert two_topic_corpus(50, seed=5)[0] != two_topic_corpus(50, seed=6)[0]
