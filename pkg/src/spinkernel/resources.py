"""Gram-ensemble statistics and SWAP-test shot-requirement bounds.

The kernel ensemble of a training set is summarized by its median
k_repr and interquartile range (the resolution scale a finite-shot
estimate has to beat).  Chebyshev's inequality with the SWAP-test
variance (1 - k^2)/S then gives two practical shot bounds:

    S_spread >= (1 - k_repr^2) / ((1 - P_spread) eps^2 IQR^2)
    S_CA     >= (1 - k_repr^2) / ((1 - P_CA) eps_CA^2 k_repr^2)

The first resolves the spread of kernel values across the dataset, the
second avoids estimator concentration around zero.  Both blow up when
the ensemble concentrates, which is the symmetry-driven resource story
these tools quantify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .kernel import GramMatrix

#: Defaults used in the shot-bound figures.
DEFAULT_EPSILON = 1e-3
DEFAULT_CONFIDENCE = 0.99

_MAX_SHOTS = 2 ** 63 - 1


@dataclass(frozen=True)
class EnsembleStats:
    """Quartile summary of the (strictly upper triangular) Gram entries."""

    k_repr: float
    q1: float
    q3: float
    iqr: float
    count: int
    include_diagonal: bool


def ensemble_stats(gram: GramMatrix,
                   include_diagonal: bool = False) -> EnsembleStats:
    """Median and quartiles of the kernel ensemble.

    Quartiles use linear interpolation of order statistics (NumPy's
    default, the widespread "type 7" convention).  The all-ones diagonal
    is excluded by default: including it would bias k_repr upward.
    """
    entries = gram.upper_entries(include_diagonal=include_diagonal)
    if entries.size < 3:
        raise ValueError(
            f"need at least 3 ensemble entries, got {entries.size}")
    q1, med, q3 = np.percentile(entries, [25.0, 50.0, 75.0])
    return EnsembleStats(k_repr=float(med), q1=float(q1), q3=float(q3),
                         iqr=float(q3 - q1), count=int(entries.size),
                         include_diagonal=include_diagonal)


@dataclass(frozen=True)
class ShotBound:
    """One shot bound: real value, ceiled integer shots, and status.

    `value` may be math.inf (diverging bound); `shots` is None when the
    bound is infinite or overflows 2^63 - 1, with `status` saying why
    instead of silently saturating.
    """

    value: float
    shots: Optional[int]
    status: str  # "ok" | "unresolvable-spread" | "concentrated-at-zero"
                 # | "infeasible"

    @property
    def finite(self) -> bool:
        return self.shots is not None


def _as_bound(value: float, diverged_status: str) -> ShotBound:
    if not math.isfinite(value):
        return ShotBound(value=math.inf, shots=None, status=diverged_status)
    if value > _MAX_SHOTS:
        return ShotBound(value=value, shots=None, status="infeasible")
    return ShotBound(value=value, shots=int(math.ceil(value)), status="ok")


def shots_spread(stats: EnsembleStats, epsilon: float = DEFAULT_EPSILON,
                 p_spread: float = DEFAULT_CONFIDENCE) -> ShotBound:
    """Shots needed to resolve the ensemble spread.

    Scales as 1/epsilon^2 (halving the tolerance quadruples the cost)
    and as 1/IQR^2 (kernel concentration).  A zero-variance ensemble
    (k_repr = 1) needs no shots; a zero IQR with residual variance is
    reported as an unresolvable spread.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if not 0.0 < p_spread < 1.0:
        raise ValueError(f"p_spread must lie in (0, 1), got {p_spread}")
    num = 1.0 - stats.k_repr ** 2
    if num <= 0.0:
        return ShotBound(value=0.0, shots=0, status="ok")
    if stats.iqr <= 0.0:
        return ShotBound(value=math.inf, shots=None,
                         status="unresolvable-spread")
    value = num / ((1.0 - p_spread) * epsilon ** 2 * stats.iqr ** 2)
    return _as_bound(value, "unresolvable-spread")


def shots_ca(stats: EnsembleStats, epsilon_ca: float = DEFAULT_EPSILON,
             p_ca: float = DEFAULT_CONFIDENCE) -> ShotBound:
    """Shots needed to keep the estimator away from concentration at zero.

    Diverges as 1/k_repr^2 when the ensemble concentrates near zero.
    """
    if epsilon_ca <= 0:
        raise ValueError(f"epsilon_ca must be > 0, got {epsilon_ca}")
    if not 0.0 < p_ca < 1.0:
        raise ValueError(f"p_ca must lie in (0, 1), got {p_ca}")
    num = 1.0 - stats.k_repr ** 2
    if num <= 0.0:
        return ShotBound(value=0.0, shots=0, status="ok")
    if stats.k_repr == 0.0:
        return ShotBound(value=math.inf, shots=None,
                         status="concentrated-at-zero")
    value = num / ((1.0 - p_ca) * epsilon_ca ** 2 * stats.k_repr ** 2)
    return _as_bound(value, "concentrated-at-zero")


@dataclass(frozen=True)
class ShotBounds:
    """Both bounds plus the parameters they were evaluated with."""

    s_spread: ShotBound
    s_ca: ShotBound
    epsilon: float
    p_spread: float
    epsilon_ca: float
    p_ca: float


def shot_bounds(stats: EnsembleStats, epsilon: float = DEFAULT_EPSILON,
                p_spread: float = DEFAULT_CONFIDENCE,
                epsilon_ca: float = DEFAULT_EPSILON,
                p_ca: float = DEFAULT_CONFIDENCE) -> ShotBounds:
    return ShotBounds(
        s_spread=shots_spread(stats, epsilon, p_spread),
        s_ca=shots_ca(stats, epsilon_ca, p_ca),
        epsilon=epsilon, p_spread=p_spread,
        epsilon_ca=epsilon_ca, p_ca=p_ca,
    )


def kernel_histogram(gram: GramMatrix, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Histogram of strictly-upper Gram entries on uniform [0, 1] bins.

    Entries are clipped into [0, 1] first (finite-shot estimates can
    stray below zero), so the counts always sum to the entry count.
    Returns (counts, bin_edges).
    """
    if bins < 2:
        raise ValueError(f"need at least 2 bins, got {bins}")
    entries = np.clip(gram.upper_entries(), 0.0, 1.0)
    counts, edges = np.histogram(entries, bins=bins, range=(0.0, 1.0))
    return counts, edges
