"""Summary statistics for arrays shown by ``inspect``."""

from __future__ import annotations

from typing import Any

import numpy as np


def compute_summary(data: np.ndarray) -> dict[str, Any]:
    """Compute summary statistics for an array.

    Args:
        data: Any numeric array.

    Returns:
        A dict with min, max, mean, std, norm, size and sparsity.
    """
    data = np.asarray(data, dtype=np.float64)
    stats: dict[str, Any] = {"size": int(data.size), "shape": list(data.shape)}
    if data.size == 0:
        return stats

    finite = data[np.isfinite(data)]
    stats["non_finite"] = int(data.size - finite.size)
    if finite.size:
        stats["min"] = float(np.min(finite))
        stats["max"] = float(np.max(finite))
        stats["mean"] = float(np.mean(finite))
        stats["std"] = float(np.std(finite))
        stats["norm"] = float(np.linalg.norm(finite))

    # Sparsity
    zero_count = np.sum(np.abs(data) < 1e-10)
    stats["sparsity"] = float(zero_count / data.size)
    return stats


def support_sizes(strategy: np.ndarray, threshold: float = 1e-9) -> list[int]:
    """Number of actions above ``threshold`` in each row."""
    return [int(n) for n in np.sum(np.asarray(strategy) > threshold, axis=-1)]
