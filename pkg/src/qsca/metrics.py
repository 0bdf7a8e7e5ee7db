"""Circuit norm and distance over total power traces.

All comparisons are Euclidean; traces of unequal length are zero-padded to
the longer one, which keeps the duration difference visible to the metric.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import ArityError, DegenerateNormError
from .tracegen import PowerTrace


class MetricKind(enum.Enum):
    """The four identification quantities."""

    TRACE = "trace"
    ENERGY = "energy"
    MEAN_POWER = "mean_power"
    DURATION = "duration"


def circuit_norm(t: PowerTrace) -> float:
    """Euclidean norm of the sample vector."""
    return math.sqrt(float(np.sum(t.samples * t.samples)))


def _padded(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if len(a) == len(b):
        return a, b
    n = max(len(a), len(b))
    pa = np.zeros(n, dtype=np.float64)
    pa[: len(a)] = a
    pb = np.zeros(n, dtype=np.float64)
    pb[: len(b)] = b
    return pa, pb


def circuit_dist(a: PowerTrace, b: PowerTrace) -> float:
    """Euclidean distance after zero-padding the shorter trace."""
    pa, pb = _padded(a.samples, b.samples)
    d = pa - pb
    return math.sqrt(float(np.sum(d * d)))


def norm_dist(a: PowerTrace, b: PowerTrace) -> float:
    """circuit_dist(a, b) / circuit_norm(a); asymmetric in the first argument."""
    na = circuit_norm(a)
    if na == 0.0:
        raise DegenerateNormError("first trace has zero norm")
    return circuit_dist(a, b) / na


def min_pairwise_norm_dist(traces) -> float:
    """Minimum of norm_dist over all ordered pairs of distinct traces."""
    traces = list(traces)
    if len(traces) < 2:
        raise ArityError("need at least two traces")
    best = math.inf
    for i, a in enumerate(traces):
        for j, b in enumerate(traces):
            if i != j:
                best = min(best, norm_dist(a, b))
    return best
