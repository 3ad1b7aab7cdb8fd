"""Euclidean projection onto the probability simplex."""

from __future__ import annotations

import numpy as np


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Project v onto {w : w_i >= 0, sum w_i = 1} in the Euclidean norm.

    Sort-and-threshold method: sort descending, find the largest k such that
    u_k + (1 - sum_{j<=k} u_j)/k > 0, and shift-clip by the resulting
    threshold. O(n log n), deterministic.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("project_simplex expects a nonempty 1-D vector")
    u = np.sort(v, kind="stable")[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, v.size + 1)
    cond = u + (1.0 - css) / ks > 0.0
    k = ks[cond][-1]
    tau = (css[k - 1] - 1.0) / k
    return np.maximum(v - tau, 0.0)
