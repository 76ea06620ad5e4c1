"""Run configuration: file + flag merging with strict key checking.

Flags override file values; the merged, fully-resolved document is persisted
as ``run_config.json`` in the run's output directory so any run can be
reproduced from its own echo.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ConfigurationError


def load_config_file(path: str | Path | None) -> dict:
    if path is None:
        return {}
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    return doc


def merge_config(file_doc: Mapping, flag_doc: Mapping) -> dict:
    """Overlay non-None flag values onto the file document."""
    merged = dict(file_doc)
    for key, value in flag_doc.items():
        if value is not None:
            merged[key] = value
    return merged


def reject_unknown_keys(doc: Mapping, known: Iterable[str], context: str) -> None:
    unknown = set(doc) - set(known)
    if unknown:
        raise ConfigurationError(f"unknown {context} config keys: {sorted(unknown)}")


def require_keys(doc: Mapping, required: Iterable[str], context: str) -> None:
    missing = [k for k in required if doc.get(k) is None]
    if missing:
        raise ConfigurationError(f"missing required {context} config keys: {missing}")


def echo_config(doc: Mapping, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "run_config.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
