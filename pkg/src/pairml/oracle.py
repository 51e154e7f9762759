"""Brute-force maximizer of the pairwise log-likelihood.

This is the ground-truth reference for verifying the closed-form solver.  It
evaluates the bivariate density pair by pair and searches the (beta, psi)
plane directly, sharing nothing with the estimator module beyond the
PairSample container, so agreement between the two is meaningful evidence.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import PairSample

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class BoundaryWarning(UserWarning):
    """The maximizer landed on the search bounds; widen them."""


@dataclass(frozen=True)
class OracleResult:
    beta: np.ndarray
    sigma2: float
    psi: float
    loglik: float
    grid_shape: tuple[int, ...]
    refinement_sweeps: int

    def to_dict(self) -> dict:
        return {
            "beta": [float(b) for b in self.beta],
            "sigma2": float(self.sigma2),
            "psi": float(self.psi),
            "loglik": float(self.loglik),
            "grid_shape": list(self.grid_shape),
            "refinement_sweeps": int(self.refinement_sweeps),
        }


def pairwise_loglik(sample: PairSample, beta, sigma2: float, psi: float) -> float:
    """Sum of per-pair bivariate Gaussian log-densities of the residuals."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    e1 = sample.y1 - sample.X1 @ beta
    e2 = sample.y2 - sample.X2 @ beta
    det = 1.0 - psi**2
    quad = (e1**2 - 2.0 * psi * e1 * e2 + e2**2) / (2.0 * sigma2 * det)
    logdens = -np.log(2.0 * np.pi * sigma2 * np.sqrt(det)) - quad
    return float(logdens.sum())


def _profiled_sigma2(sample: PairSample, beta, psi: float) -> float:
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    e1 = sample.y1 - sample.X1 @ beta
    e2 = sample.y2 - sample.X2 @ beta
    s = float(np.sum(e1**2 - 2.0 * psi * e1 * e2 + e2**2))
    return max(s / (2.0 * sample.q * (1.0 - psi**2)), 1e-300)


def _profiled_loglik(sample: PairSample, beta, psi: float) -> float:
    return pairwise_loglik(sample, beta, _profiled_sigma2(sample, beta, psi), psi)


def _default_beta_bounds(sample: PairSample) -> np.ndarray:
    """OLS point plus/minus five classical standard errors, per coefficient."""
    X = np.vstack([sample.X1, sample.X2])
    y = np.concatenate([sample.y1, sample.y2])
    beta_ols, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta_ols
    dof = max(X.shape[0] - X.shape[1], 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    se = np.sqrt(np.diag(cov))
    se = np.where(se > 0, se, 1.0)
    return np.column_stack([beta_ols - 5.0 * se, beta_ols + 5.0 * se])


def _golden_section(f, lo: float, hi: float, tol: float) -> float:
    """Maximize a unimodal scalar function on [lo, hi]."""
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
    return 0.5 * (a + b)


def brute_force_maximize(
    sample: PairSample,
    beta_bounds: np.ndarray | None = None,
    psi_bounds: tuple[float, float] = (-0.99, 0.99),
    resolution: tuple[int, ...] | None = None,
    refine_tol: float = 1e-7,
    max_sweeps: int = 60,
) -> OracleResult:
    """Coarse grid search over (beta, psi) with sigma2 profiled out, followed
    by coordinate-wise golden-section refinement.

    Supports k <= 2; the search is deliberately naive and slow.
    """
    k = sample.k
    if k > 2:
        raise ValueError("the brute-force oracle supports at most two predictors")
    if beta_bounds is None:
        beta_bounds = _default_beta_bounds(sample)
    beta_bounds = np.atleast_2d(np.asarray(beta_bounds, dtype=float))
    if resolution is None:
        resolution = (400, 397) if k == 1 else (60, 60, 59)
    if len(resolution) != k + 1:
        raise ValueError("resolution must give one grid size per beta plus psi")

    axes = [
        np.linspace(beta_bounds[j, 0], beta_bounds[j, 1], resolution[j])
        for j in range(k)
    ]
    psi_axis = np.linspace(psi_bounds[0], psi_bounds[1], resolution[-1])

    q = sample.q
    det = 1.0 - psi_axis**2
    best_val = -np.inf
    best_point = None
    for idx in np.ndindex(*[len(ax) for ax in axes]):
        beta = np.array([axes[j][idx[j]] for j in range(k)])
        e1 = sample.y1 - sample.X1 @ beta
        e2 = sample.y2 - sample.X2 @ beta
        ss = float(e1 @ e1 + e2 @ e2)
        cc = float(e1 @ e2)
        # At the profiled sigma2 the quadratic term collapses to q, so the
        # whole psi axis can be scanned at once for this beta.
        sig = np.maximum((ss - 2.0 * psi_axis * cc) / (2.0 * q * det), 1e-300)
        vals = -q * np.log(2.0 * np.pi) - q * np.log(sig) - 0.5 * q * np.log(det) - q
        j_best = int(np.argmax(vals))
        if vals[j_best] > best_val:
            best_val = float(vals[j_best])
            best_point = (beta.copy(), float(psi_axis[j_best]))
    beta, psi = best_point

    # Coordinate-wise golden-section refinement around the best grid node.
    widths = [(axes[j][-1] - axes[j][0]) / (len(axes[j]) - 1) for j in range(k)]
    psi_width = (psi_axis[-1] - psi_axis[0]) / (len(psi_axis) - 1)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        prev = np.append(beta, psi)
        for j in range(k):
            lo = max(beta_bounds[j, 0], beta[j] - 2.0 * widths[j])
            hi = min(beta_bounds[j, 1], beta[j] + 2.0 * widths[j])

            def along(bj, j=j):
                trial = beta.copy()
                trial[j] = bj
                return _profiled_loglik(sample, trial, psi)

            beta[j] = _golden_section(along, lo, hi, refine_tol / 10.0)
            widths[j] = max((hi - lo) / 4.0, refine_tol)
        lo = max(psi_bounds[0], psi - 2.0 * psi_width)
        hi = min(psi_bounds[1], psi + 2.0 * psi_width)
        psi = _golden_section(lambda p: _profiled_loglik(sample, beta, p),
                              lo, hi, refine_tol / 10.0)
        psi_width = max((hi - lo) / 4.0, refine_tol)
        if np.max(np.abs(np.append(beta, psi) - prev)) < refine_tol:
            break

    for j in range(k):
        span = beta_bounds[j, 1] - beta_bounds[j, 0]
        if min(beta[j] - beta_bounds[j, 0], beta_bounds[j, 1] - beta[j]) < 1e-3 * span:
            warnings.warn(f"beta[{j}] maximizer is on the search bounds",
                          BoundaryWarning)
    if min(psi - psi_bounds[0], psi_bounds[1] - psi) < 1e-3 * (psi_bounds[1] - psi_bounds[0]):
        warnings.warn("psi maximizer is on the search bounds", BoundaryWarning)

    sigma2 = _profiled_sigma2(sample, beta, psi)
    return OracleResult(
        beta=beta,
        sigma2=sigma2,
        psi=psi,
        loglik=pairwise_loglik(sample, beta, sigma2, psi),
        grid_shape=tuple(resolution),
        refinement_sweeps=sweeps,
    )
