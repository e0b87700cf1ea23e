"""Report plumbing: residual statistics, canonical JSON, deterministic
chunked parallelism.

Reports must be byte-identical for a fixed (config, seed) regardless of the
thread-pool size, so chunk boundaries are fixed constants and reductions are
order-independent; nothing time- or host-dependent ever enters a report.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

CHUNK = 8192


@dataclass(frozen=True)
class ResidualStats:
    max: float
    mean: float
    q95: float
    count: int

    def to_json(self) -> dict:
        return {"max": self.max, "mean": self.mean, "q95": self.q95,
                "count": self.count}


def residual_stats(values: np.ndarray) -> ResidualStats:
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        return ResidualStats(0.0, 0.0, 0.0, 0)
    return ResidualStats(
        max=float(np.max(values)),
        mean=float(np.mean(values)),
        q95=float(np.quantile(values, 0.95)),
        count=int(values.size),
    )


def env_threads(override: int | None = None) -> int:
    """Worker count: explicit override, else BIHERM_THREADS, else 1."""
    if override is not None:
        return max(1, int(override))
    raw = os.environ.get("BIHERM_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def chunked_map(fn, x: np.ndarray, threads: int = 1, chunk: int = CHUNK):
    """Apply ``fn`` to fixed-size slices of the leading axis and stitch the
    results back in order.

    ``fn`` must be pure; chunk size never depends on the thread count, so the
    output is bitwise identical for any pool size.
    """
    x = np.asarray(x)
    n = x.shape[0]
    bounds = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    if len(bounds) <= 1 or threads <= 1:
        parts = [fn(x[a:b]) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: fn(x[ab[0]:ab[1]]), bounds))
    if isinstance(parts[0], dict):
        return {k: np.concatenate([p[k] for p in parts], axis=0) for k in parts[0]}
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(col, axis=0) for col in zip(*parts))
    return np.concatenate(parts, axis=0)


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_hash(obj) -> str:
    """Content hash of a canonicalised config document."""
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
