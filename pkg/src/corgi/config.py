"""Application configuration with flags > file > defaults precedence."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from importlib.resources import files
from pathlib import Path
from typing import Optional

from .logic import KnowledgeBase


@dataclass
class AppConfig:
    kb_path: Optional[str] = None          # default: packaged kb/main.pl
    types_path: Optional[str] = None       # default: packaged types.tsv
    lexicon_path: Optional[str] = None     # directory overriding parser data
    embeddings_path: Optional[str] = None  # pretrained word vectors
    model_path: Optional[str] = None       # trained checkpoint (.npz)
    n: int = 3                             # feedback-loop bound
    k: int = 5
    t1: float = 0.9
    t2: float = 0.5
    max_depth: int = 20
    max_steps: int = 100_000
    listen_address: str = "127.0.0.1:8000"
    session_store_path: str = "sessions.jsonl"
    seed: int = 0

    def validate(self) -> "AppConfig":
        if not (1 <= self.k):
            raise ValueError("k must be >= 1")
        if not (0.0 < self.t1 <= 1.0):
            raise ValueError("t1 must be in (0, 1]")
        if not (0.0 < self.t2 < 1.0):
            raise ValueError("t2 must be in (0, 1)")
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if self.max_depth <= 0 or self.max_steps <= 0:
            raise ValueError("limits must be positive")
        for attr in ("kb_path", "types_path", "embeddings_path", "model_path"):
            value = getattr(self, attr)
            if value is not None and not Path(value).exists():
                raise FileNotFoundError(f"{attr}: {value}")
        return self

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def load_kb(self) -> KnowledgeBase:
        if self.kb_path:
            kb = KnowledgeBase.from_file(self.kb_path)
        else:
            kb = KnowledgeBase.from_text(
                files("corgi.data").joinpath("kb/main.pl").read_text())
        if self.types_path:
            kb.load_types(self.types_path)
        else:
            _load_packaged_types(kb)
        return kb


def _load_packaged_types(kb: KnowledgeBase) -> None:
    text = files("corgi.data").joinpath("types.tsv").read_text()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        noun, _, tag = line.partition("\t")
        if tag:
            kb.types_dict[noun.strip()] = tag.strip()


def resolve_config(flag_values: dict, config_path: Optional[str] = None
                   ) -> AppConfig:
    """Merge CLI flags over a JSON config file over built-in defaults.

    `flag_values` holds only flags the user actually passed (None = unset).
    """
    merged = {}
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            file_values = json.load(fh)
        known = {f.name for f in fields(AppConfig)}
        unknown = set(file_values) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_values)
    for key, value in flag_values.items():
        if value is not None:
            merged[key] = value
    return AppConfig(**merged).validate()
