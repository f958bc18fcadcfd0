"""Shared helpers: canonical JSON, content hashing, seeded RNG substreams."""
from __future__ import annotations

import hashlib
import json
import random
from pathlib import Path
from typing import Any


def canonical_json(obj: Any) -> str:
    """Serialize to the canonical JSON form used for files and hashing.

    Sorted keys, compact separators, UTF-8 passthrough. Two structurally
    equal objects always serialize to identical bytes.
    """
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path, chunk_size: int = 1 << 20) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        while True:
            chunk = fh.read(chunk_size)
            if not chunk:
                break
            h.update(chunk)
    return h.hexdigest()


def substream(seed: int, *key: object) -> random.Random:
    """Derive an independent RNG from a root seed and a string-able key.

    Keyed substreams make parallel stages order-independent: the stream for
    (seed, "enrich", 3) is the same no matter which worker draws it. Keys go
    through sha256, never the builtin hash(), so streams are stable across
    processes and PYTHONHASHSEED values.
    """
    tag = ":".join([str(seed), *[str(k) for k in key]])
    derived = int.from_bytes(hashlib.sha256(tag.encode("utf-8")).digest()[:8], "big")
    return random.Random(derived)
