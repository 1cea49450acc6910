"""Pytest fixtures for flyhash tests."""

import json
import sys
import tempfile
from pathlib import Path
from typing import Any

import numpy as np
import pytest

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))


# === Temporary Directory Fixtures ===


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def temp_config_dir(temp_dir):
    """Create a temporary config directory structure."""
    config_dir = temp_dir / "config"
    config_dir.mkdir(parents=True)

    user_config_dir = temp_dir / ".config"
    user_config_dir.mkdir(parents=True)

    return {
        "root": temp_dir,
        "config": config_dir,
        "user_config": user_config_dir,
    }


@pytest.fixture
def isolated_config(temp_config_dir, monkeypatch):
    """Point ConfigManager at an empty temp tree so only built-in defaults apply."""
    monkeypatch.setattr("core.config_manager.ConfigManager.PROJECT_DIR", temp_config_dir["root"])
    monkeypatch.setattr("core.config_manager.ConfigManager.CONFIG_DIR", temp_config_dir["config"])
    monkeypatch.setattr(
        "core.config_manager.ConfigManager.USER_CONFIG_DIR", temp_config_dir["user_config"]
    )
    monkeypatch.delenv("FLYHASH_WORKERS", raising=False)
    monkeypatch.delenv("FLYHASH_RELEASE", raising=False)
    return temp_config_dir


# === Corpus Fixtures ===


@pytest.fixture
def toy_lines() -> list[str]:
    """A few sentences with repeated words and punctuation."""
    return [
        "The cat sat on the mat.",
        "The dog sat on the log!",
        "A cat and a dog met on the mat",
        "the bank of the river was steep",
        "she paid cash at the bank",
    ]


@pytest.fixture
def toy_vocab(toy_lines):
    from core.corpus import build_vocabulary, tokenize

    return build_vocabulary((t for line in toy_lines for t in tokenize(line)), 100)


@pytest.fixture
def synthetic_lines():
    """Small two-topic corpus: 10 words per topic, 8 tokens per sentence."""
    from core.synthetic import two_topic_corpus

    lines, _ = two_topic_corpus(400, topic_size=10, sentence_length=8, seed=3)
    return lines


@pytest.fixture
def small_config():
    """Hyperparameters small enough for unit tests and stable for the synthetic corpus."""
    from core.trainer import TrainingConfig

    return TrainingConfig(
        K=16, w=3, n_voc=20, epochs=2, lr0=1e-4, batch_size=256, seed=7, probe_size=200
    )


@pytest.fixture
def small_model(synthetic_lines, small_config):
    """A model trained for two epochs on the small synthetic corpus."""
    from core.trainer import train

    model, _ = train(synthetic_lines, small_config)
    return model


@pytest.fixture
def model_file(temp_dir, small_model):
    path = temp_dir / "model.flyw"
    small_model.save(path)
    return path


@pytest.fixture
def random_model():
    """Untrained model over a tiny vocabulary, for hashing and evaluation tests."""
    from core.corpus import Vocabulary
    from core.model import FlyModel, init_weights

    tokens = ["bank", "river", "money", "cash", "water", "fish", "loan", "shore"]
    vocab = Vocabulary(tokens, np.arange(len(tokens), 0, -1) * 10)
    return FlyModel(init_weights(12, len(tokens), seed=1), vocab, w=3, seed=1)


# === Dataset Fixtures ===


@pytest.fixture
def word_pairs_file(temp_dir) -> Path:
    path = temp_dir / "pairs.tsv"
    path.write_text(
        "# word1\tword2\tscore\n"
        "bank\tmoney\t8.5\n"
        "river\twater\t9.0\n"
        "fish\tloan\t1.0\n"
        "cash\tmoney\t9.5\n"
        "shore\tbank\t6.0\n"
        "money\tmoney\t10.0\n"
        "unicorn\tbank\t3.0\n",
        encoding="utf-8",
    )
    return path


@pytest.fixture
def context_pairs_file(temp_dir) -> Path:
    path = temp_dir / "wic.tsv"
    rows = [
        ("the river bank was muddy", 2, "fish swim near the bank", 4, 1),
        ("the bank gave a loan", 1, "money in the bank", 3, 1),
        ("the bank gave a loan", 1, "the river bank was muddy", 2, 0),
        ("cash from the bank", 3, "water at the shore", 3, 0),
        ("fish in the river", 3, "fish in the water", 3, 1),
        ("a loan of cash", 1, "the shore and the river", 4, 0),
    ]
    path.write_text(
        "".join(f"{s1}\t{i1}\t{s2}\t{i2}\t{y}\n" for s1, i1, s2, i2, y in rows), encoding="utf-8"
    )
    return path


# === Release Config Fixtures ===


@pytest.fixture
def sample_release_config() -> dict[str, Any]:
    """Sample release configuration."""
    return {
        "name": "Test Release",
        "version": "1.0.0",
        "description": "Test release configuration",
        "commands": [
            {"id": "corpus_tools", "enabled": True},
            {"id": "training", "enabled": True},
            {"id": "evaluation", "enabled": False},
        ],
    }


@pytest.fixture
def release_file(temp_config_dir, sample_release_config):
    """Create a release config file."""
    releases_dir = temp_config_dir["config"] / "releases"
    releases_dir.mkdir(parents=True, exist_ok=True)

    release_path = releases_dir / "test.json"
    with open(release_path, "w", encoding="utf-8") as f:
        json.dump(sample_release_config, f)

    return release_path
