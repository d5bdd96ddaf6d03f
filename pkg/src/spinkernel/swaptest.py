"""Finite-shot SWAP-test estimation of kernel entries.

The SWAP-test ancilla returns outcome 0 with probability
P0 = (1 + k)/2, so S shots give the unbiased estimator

    k_hat = 2 (c / S) - 1,   c ~ Binomial(S, P0),
    Var(k_hat) = (1 - k^2) / S.

The circuit itself is not simulated gate by gate; the binomial law above
is its exact outcome distribution.  Each entry gets its own
counter-based RNG stream keyed by (master_seed, i, j), so sampling is
deterministic and independent of scheduling or sampling order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import GramMatrix


@dataclass(frozen=True)
class ShotConfig:
    """Number of SWAP-test repetitions per entry and the master RNG seed."""

    shots: int
    master_seed: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")


def _entry_rng(cfg: ShotConfig, i: int, j: int) -> np.random.Generator:
    seq = np.random.SeedSequence((cfg.master_seed, i, j))
    return np.random.Generator(np.random.Philox(seq))


def sample_entry(k_true: float, cfg: ShotConfig, entry_id=(0, 0)) -> float:
    """Draw one finite-shot estimate of a kernel entry.

    Estimates land on the lattice {-1 + 2m/S}; negative values are kept,
    since clipping would bias the estimator.
    """
    if not 0.0 <= k_true <= 1.0:
        raise ValueError(f"k_true must lie in [0, 1], got {k_true}")
    rng = _entry_rng(cfg, *entry_id)
    c = rng.binomial(cfg.shots, 0.5 * (1.0 + k_true))
    return 2.0 * (c / cfg.shots) - 1.0


def sample_gram(gram: GramMatrix, cfg: ShotConfig,
                sample_diagonal: bool = True) -> GramMatrix:
    """Resample every Gram entry through the SWAP-test estimator.

    The strict upper triangle is sampled independently and mirrored.  The
    diagonal is sampled too by default (a real SWAP test does not know
    that K(x, x) = 1); pass sample_diagonal=False to keep it exact.  The
    result may lose positive semidefiniteness; inspect min_eigenvalue()
    rather than expecting clipping.
    """
    if gram.provenance not in ("analytic", "ed"):
        raise ValueError(
            f"can only sample a noiseless Gram, got provenance "
            f"{gram.provenance!r}")
    m = gram.size
    values = np.empty((m, m))
    for i in range(m):
        values[i, i] = (sample_entry(gram.values[i, i], cfg, (i, i))
                        if sample_diagonal else gram.values[i, i])
        for j in range(i + 1, m):
            values[i, j] = values[j, i] = sample_entry(
                gram.values[i, j], cfg, (i, j))
    return GramMatrix(points=gram.points, values=values, kind=gram.kind,
                      provenance="swap-sampled", seed=cfg.master_seed,
                      shots=cfg.shots)
