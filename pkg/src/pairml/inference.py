"""Curvature, Fisher information, standard errors, Wald test and the
spillover decomposition of the slope estimate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as spstats

from .estimator import (
    EstimateReport,
    RankDeficiencyError,
    SufficientStats,
    Theta,
    _quadratic_moments,
)


class UnsupportedDimensionError(ValueError):
    """Operation defined only for a single predictor."""


def hessian(theta: Theta, stats: SufficientStats) -> np.ndarray:
    """Negated second-derivative matrix of the pairwise log-likelihood.

    Parameter order is (beta_1..beta_k, sigma2, psi); the returned matrix is
    positive definite near the maximizer.
    """
    beta, s2, psi = theta.beta, theta.sigma2, theta.psi
    k = theta.k
    u = 1.0 - psi**2
    P, C = _quadratic_moments(stats, beta)
    S = P - 2.0 * psi * C
    M = stats.A - psi * stats.B
    g = stats.c - stats.A @ beta - psi * (stats.d - stats.B @ beta)
    dB = stats.d - stats.B @ beta

    H = np.empty((k + 2, k + 2))
    H[:k, :k] = M / (s2 * u)
    H[:k, k] = H[k, :k] = g / (s2**2 * u)
    H[:k, k + 1] = H[k + 1, :k] = dB / (s2 * u) - 2.0 * psi * g / (s2 * u**2)
    H[k, k] = S / (s2**3 * u) - stats.q / s2**2
    H[k, k + 1] = H[k + 1, k] = (C * (1.0 + psi**2) - P * psi) / (s2**2 * u**2)
    H[k + 1, k + 1] = (
        -stats.q * (1.0 + psi**2) / u**2
        + (P * (1.0 + 3.0 * psi**2) - 2.0 * C * psi * (3.0 + psi**2)) / (s2 * u**3)
    )
    return H


@dataclass(frozen=True)
class FisherInfo:
    """Block-diagonal expected information: off-diagonal blocks vanish, so the
    three parameter groups are asymptotically uncorrelated."""

    i11: np.ndarray
    i22: float
    i33: float
    i11_inv: np.ndarray
    i22_inv: float
    i33_inv: float
    q: int

    def standard_errors(self) -> np.ndarray:
        """Stacked (beta..., sigma2, psi) standard errors."""
        return np.sqrt(
            np.concatenate([np.diag(self.i11_inv), [self.i22_inv, self.i33_inv]])
        )


def fisher_information(theta: Theta, stats: SufficientStats) -> FisherInfo:
    """Expected information blocks evaluated at the plug-in parameters.

    The beta block is (A - psi B) / (sigma2 (1 - psi^2)); the psi block is
    q (1 + psi^2) / (1 - psi^2)^2; the sigma2 block retains the residual
    cross-product term evaluated at the plug-in estimates.
    """
    beta, s2, psi = theta.beta, theta.sigma2, theta.psi
    u = 1.0 - psi**2
    _, C = _quadratic_moments(stats, beta)
    i11 = (stats.A - psi * stats.B) / (s2 * u)
    try:
        i11_inv = np.linalg.inv(i11)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(str(exc)) from exc
    i22 = (-2.0 * psi * C + stats.q * s2 * (1.0 + psi**2)) / (s2**3 * u)
    i33 = stats.q * (1.0 + psi**2) / u**2
    if i22 <= 0:
        raise RankDeficiencyError("sigma2 information block is not positive")
    return FisherInfo(
        i11=i11,
        i22=float(i22),
        i33=float(i33),
        i11_inv=i11_inv,
        i22_inv=float(1.0 / i22),
        i33_inv=float(u**2 / (stats.q * (1.0 + psi**2))),
        q=stats.q,
    )


def wald_test_psi(report: EstimateReport, info: FisherInfo):
    """Wald statistic and chi-square(1) p-value for zero pair correlation."""
    psi = report.theta.psi
    statistic = psi**2 / info.i33_inv
    pvalue = float(spstats.chi2.sf(statistic, df=1))
    return float(statistic), pvalue


@dataclass(frozen=True)
class SpilloverDecomposition:
    """Additive terms of the k=1 slope estimate.

    The numerator is the x-y covariance plus the psi-weighted cross-location
    spillover; the denominator is the x variance plus the psi-weighted
    spatial autocovariance of x.
    """

    covariance_xy: float
    spillover_term: float
    variance_x: float
    autocovariance_term: float

    @property
    def beta_hat(self) -> float:
        return (self.covariance_xy + self.spillover_term) / (
            self.variance_x + self.autocovariance_term
        )

    def to_dict(self) -> dict:
        return {
            "covariance_xy": self.covariance_xy,
            "spillover_term": self.spillover_term,
            "variance_x": self.variance_x,
            "autocovariance_term": self.autocovariance_term,
            "beta_hat": self.beta_hat,
        }


def spillover_decomposition(stats: SufficientStats, theta: Theta) -> SpilloverDecomposition:
    if stats.k != 1:
        raise UnsupportedDimensionError("spillover decomposition requires k=1")
    psi = theta.psi
    return SpilloverDecomposition(
        covariance_xy=stats.alpha3,
        spillover_term=-psi * stats.alpha4,
        variance_x=stats.alpha1,
        autocovariance_term=-2.0 * psi * stats.alpha5,
    )


@dataclass(frozen=True)
class InferenceReport:
    standard_errors: np.ndarray
    level: float
    lower: np.ndarray
    upper: np.ndarray
    wald_psi: float
    wald_psi_pvalue: float
    spillover: SpilloverDecomposition | None

    def to_dict(self) -> dict:
        return {
            "standard_errors": [float(s) for s in self.standard_errors],
            "level": float(self.level),
            "lower": [float(v) for v in self.lower],
            "upper": [float(v) for v in self.upper],
            "wald_psi": float(self.wald_psi),
            "wald_psi_pvalue": float(self.wald_psi_pvalue),
            "spillover": None if self.spillover is None else self.spillover.to_dict(),
        }


def confidence_intervals(
    report: EstimateReport,
    info: FisherInfo,
    level: float = 0.95,
    stats: SufficientStats | None = None,
) -> InferenceReport:
    """Normal-approximation intervals, Wald test for psi, and (for k=1, when
    stats are supplied) the slope spillover decomposition."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    se = info.standard_errors()
    z = spstats.norm.ppf(0.5 * (1.0 + level))
    est = report.theta.as_vector()
    wald, pvalue = wald_test_psi(report, info)
    spill = None
    if stats is not None and stats.k == 1:
        spill = spillover_decomposition(stats, report.theta)
    return InferenceReport(
        standard_errors=se,
        level=level,
        lower=est - z * se,
        upper=est + z * se,
        wald_psi=wald,
        wald_psi_pvalue=pvalue,
        spillover=spill,
    )
