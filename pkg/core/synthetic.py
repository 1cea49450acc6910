"""Synthetic corpora with known structure, used to check training end to end."""

import numpy as np


def topic_words(n_topics: int = 2, topic_size: int = 50) -> list[list[str]]:
    """Disjoint word lists, one per topic."""
    return [[f"t{t}w{j:02d}" for j in range(topic_size)] for t in range(n_topics)]


def two_topic_corpus(
    n_sentences: int,
    topic_size: int = 50,
    sentence_length: int = 12,
    seed: int = 0,
    n_topics: int = 2,
) -> tuple[list[str], list[list[str]]]:
    """Sentences whose words are all drawn uniformly from one randomly chosen topic.

    Returns the sentence lines and the topic word lists.
    """
    topics = topic_words(n_topics, topic_size)
    rng = np.random.default_rng(seed)
    choice = rng.integers(0, n_topics, size=n_sentences)
    words = rng.integers(0, topic_size, size=(n_sentences, sentence_length))
    lines = [" ".join(topics[t][j] for j in row) for t, row in zip(choice, words, strict=True)]
    return lines, topics
