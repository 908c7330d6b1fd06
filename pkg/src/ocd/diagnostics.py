"""Observables tracked along a run: cost, cross-correlation, marginal drift.

All statistics use population (1/N) normalization, matching the estimator
module; users comparing against 1/(N-1) conventions should rescale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CostModel, ParticleEnsemble
from .errors import DegenerateEnsemble, DimensionMismatch


@dataclass(frozen=True)
class MomentSummary:
    """Mean vector and (population) covariance of one marginal."""

    mean: np.ndarray        # (n,)
    covariance: np.ndarray  # (n, n)


def moment_summary(samples: np.ndarray) -> MomentSummary:
    s = np.asarray(samples, dtype=np.float64)
    mean = s.mean(axis=0)
    centered = s - mean
    cov = centered.T @ centered / s.shape[0]
    return MomentSummary(mean=mean, covariance=cov)


def transport_cost(ensemble: ParticleEnsemble, cost: CostModel) -> float:
    """Mean pair cost (1/N) sum_i c(X_i, Y_i)."""
    return float(np.mean(cost.cost(ensemble.x_samples, ensemble.y_samples)))


def cross_correlation(ensemble: ParticleEnsemble) -> np.ndarray:
    """Centered cross-covariance (1/N) sum_i (X_i - Xbar) outer (Y_i - Ybar)."""
    n_p = ensemble.n_particles
    if n_p < 2:
        raise DegenerateEnsemble(f"cross_correlation needs N_p >= 2, got {n_p}")
    xc = ensemble.x_samples - ensemble.x_samples.mean(axis=0)
    yc = ensemble.y_samples - ensemble.y_samples.mean(axis=0)
    return xc.T @ yc / n_p


def spd_margin(j: np.ndarray) -> float:
    """Smallest eigenvalue of the symmetric part (J + J^T)/2.

    Non-negative values certify that J sits in the positive semi-definite
    cone up to the symmetric part; the skew part is discarded.
    """
    j = np.atleast_2d(np.asarray(j, dtype=np.float64))
    sym = 0.5 * (j + j.T)
    return float(np.linalg.eigvalsh(sym)[0])


def marginal_drift(current: MomentSummary, reference: MomentSummary) -> float:
    """Largest relative moment drift between two marginal summaries.

    Mean drift is ||dm|| / (1 + ||m_ref||); covariance drift is the same
    ratio in Frobenius norm.  The max of the two is returned.
    """
    if current.mean.shape != reference.mean.shape:
        raise DimensionMismatch(
            f"moment dimensions differ: {current.mean.shape} vs {reference.mean.shape}"
        )
    dm = np.linalg.norm(current.mean - reference.mean)
    dm_rel = dm / (1.0 + np.linalg.norm(reference.mean))
    dc = np.linalg.norm(current.covariance - reference.covariance, ord="fro")
    dc_rel = dc / (1.0 + np.linalg.norm(reference.covariance, ord="fro"))
    return float(max(dm_rel, dc_rel))
