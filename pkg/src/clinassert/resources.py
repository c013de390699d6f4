"""Locations of bundled data files (cue inventories, rule sets, fixtures)."""

from __future__ import annotations

import os
from pathlib import Path

ENV_DATA_DIR = "CLINASSERT_DATA_DIR"


def data_dir() -> Path:
    override = os.environ.get(ENV_DATA_DIR)
    if override:
        return Path(override)
    return Path(__file__).parent / "data"


def abbreviations_path() -> Path:
    return data_dir() / "abbreviations.txt"


def negex_cues_path() -> Path:
    return data_dir() / "negex_cues.jsonl"


def contextual_rules_paths() -> list[Path]:
    return sorted(data_dir().glob("rules_*.jsonl"))


def pipeline_path() -> Path:
    return data_dir() / "pipeline_i2b2.json"


def synthetic_docs_path() -> Path:
    return data_dir() / "synthetic_docs_500.jsonl"


def synthetic_chunks_path() -> Path:
    return data_dir() / "synthetic_chunks_500.jsonl"
