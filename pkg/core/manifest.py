"""Run manifests: what produced an artifact, from which inputs, with which settings."""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

MANIFEST_SUFFIX = ".manifest.json"


def file_digest(path: Path | str, chunk_size: int = 1 << 20) -> str:
    """SHA-256 of a file's bytes, as "sha256:<hex>"."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            digest.update(chunk)
    return f"sha256:{digest.hexdigest()}"


def manifest_path_for(artifact: Path | str) -> Path:
    return Path(f"{artifact}{MANIFEST_SUFFIX}")


@dataclass
class RunManifest:
    """Everything needed to re-run a command and get the same bytes back."""

    command: str
    config: dict[str, Any]
    inputs: dict[str, str] = field(default_factory=dict)
    seed: int | None = None
    artifacts: list[str] = field(default_factory=list)
    version: str = ""

    @classmethod
    def for_inputs(cls, command: str, config: dict[str, Any], paths, **kwargs) -> "RunManifest":
        inputs = {str(p): file_digest(p) for p in paths if p and Path(p).is_file()}
        return cls(command=command, config=config, inputs=inputs, **kwargs)

    def write(self, path: Path | str) -> Path:
        path = Path(path)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, indent=2, ensure_ascii=False, sort_keys=True)
            f.write("\n")
        return path

    @classmethod
    def read(cls, path: Path | str) -> "RunManifest":
        with open(path, encoding="utf-8") as f:
            return cls(**json.load(f))
