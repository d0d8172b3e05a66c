"""Canonical JSON serialization and provenance stamping.

Every artifact the toolkit writes must be byte-identical across runs with
the same inputs, so all JSON goes through one canonical writer and all
provenance fields are derived from (version, seed, config) only. No
timestamps, no hostnames.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

TOOL_NAME = "tmclin"
TOOL_VERSION = "0.1.0"


def canonical_dumps(obj: Any) -> str:
    """Serialize to deterministic, human-readable JSON (trailing newline)."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def compact_dumps(obj: Any) -> str:
    """Deterministic single-line JSON, used for hashing."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def config_hash(config: Any) -> str:
    """Stable hash of a JSON-serializable configuration object."""
    return sha256_hex(compact_dumps(config))


def provenance(seed: int, config: Any) -> dict[str, Any]:
    """Provenance field attached to every output artifact."""
    return {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "seed": int(seed),
        "config_hash": config_hash(config),
    }


def provenance_comments(prov: dict[str, Any]) -> list[str]:
    """Provenance rendered as CSV comment lines (no leading newline)."""
    return [
        f"# {prov['tool']} v{prov['version']} seed={prov['seed']} "
        f"config_hash={prov['config_hash']}"
    ]


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(canonical_dumps(obj), encoding="utf-8")


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))
