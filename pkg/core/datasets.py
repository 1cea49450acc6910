"""Benchmark records and their tab-separated file formats.

Word pairs:    word1<TAB>word2<TAB>score
Context pairs: sentence1<TAB>idx1<TAB>sentence2<TAB>idx2<TAB>label

Lines starting with '#' and blank lines are ignored. Sentences are tokenized
with the corpus tokenizer and idx counts tokens of the tokenized sentence.
"""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from core.corpus import numbered_lines, tokenize
from core.errors import EvaluationError


@dataclass(frozen=True)
class WordPairRecord:
    """Two words with a human similarity score."""

    word1: str
    word2: str
    human_score: float


@dataclass(frozen=True)
class ContextPairRecord:
    """Two sentences, each with a marked target word, and a label or score."""

    sentence1: tuple[str, ...]
    target_index1: int
    sentence2: tuple[str, ...]
    target_index2: int
    label: float

    @property
    def target1(self) -> str:
        return self.sentence1[self.target_index1]

    @property
    def target2(self) -> str:
        return self.sentence2[self.target_index2]


def _data_lines(path: Path | str):
    for lineno, line in numbered_lines(path):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line.split("\t")


def _score(value: str, where: str) -> float:
    try:
        score = float(value)
    except ValueError as e:
        raise EvaluationError(f"{where}: score {value!r} is not a number") from e
    if not math.isfinite(score):
        raise EvaluationError(f"{where}: score must be finite")
    return score


def read_word_pairs(path: Path | str) -> list[WordPairRecord]:
    records = []
    for lineno, fields in _data_lines(path):
        where = f"{path}:{lineno}"
        if len(fields) != 3:
            raise EvaluationError(f"{where}: expected 3 tab-separated fields, got {len(fields)}")
        word1, word2, score = fields
        records.append(
            WordPairRecord(word1.strip().lower(), word2.strip().lower(), _score(score, where))
        )
    return records


def read_context_pairs(path: Path | str) -> list[ContextPairRecord]:
    records = []
    for lineno, fields in _data_lines(path):
        where = f"{path}:{lineno}"
        if len(fields) != 5:
            raise EvaluationError(f"{where}: expected 5 tab-separated fields, got {len(fields)}")
        sentence1, idx1, sentence2, idx2, label = fields
        tokens1, tokens2 = tuple(tokenize(sentence1)), tuple(tokenize(sentence2))
        try:
            i1, i2 = int(idx1), int(idx2)
        except ValueError as e:
            raise EvaluationError(f"{where}: target indices must be integers") from e
        if not (0 <= i1 < len(tokens1) and 0 <= i2 < len(tokens2)):
            raise EvaluationError(f"{where}: target index out of range")
        records.append(ContextPairRecord(tokens1, i1, tokens2, i2, _score(label, where)))
    return records


def read_vectors(path: Path | str) -> tuple[list[str], np.ndarray]:
    """Read continuous vectors in text format ("word v1 ... vd"), optional "n d" header."""
    words: list[str] = []
    rows: list[list[float]] = []
    for lineno, line in numbered_lines(path):
        fields = line.rstrip().split(" ")
        if lineno == 1 and len(fields) == 2:
            continue
        if len(fields) < 2:
            continue
        try:
            row = [float(x) for x in fields[1:]]
        except ValueError as e:
            raise EvaluationError(f"{path}:{lineno}: vector component is not a number") from e
        words.append(fields[0])
        rows.append(row)
    if not rows:
        raise EvaluationError(f"{path}: no vectors found")
    if len({len(r) for r in rows}) != 1:
        raise EvaluationError(f"{path}: vectors have different dimensions")
    return words, np.array(rows, dtype=np.float64)
