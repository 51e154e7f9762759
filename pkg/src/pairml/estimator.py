"""Sufficient statistics, pairwise log-likelihood, score and the BML solver.

All estimating equations are expressed through six cross-sums of the paired
data (matrix-valued for k predictors), so a fit costs O(q k^2) regardless of
how the pairs were selected.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import PairSample


class EmptySampleError(ValueError):
    """Statistics requested for a sample with no pairs."""


class RankDeficiencyError(np.linalg.LinAlgError):
    """The predictor cross-product matrix is singular."""


class DegenerateFitError(RuntimeError):
    """Fitted disturbance variance fell below the numerical floor."""


PSI_CLAMP = 1e-8
SIGMA2_FLOOR = 1e-12


@dataclass(frozen=True)
class Theta:
    """Parameter triple: regression coefficients, disturbance variance and
    within-pair disturbance correlation."""

    beta: np.ndarray
    sigma2: float
    psi: float

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        object.__setattr__(self, "beta", beta)
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not abs(self.psi) < 1:
            raise ValueError(f"psi must lie in (-1, 1), got {self.psi}")

    @property
    def k(self) -> int:
        return self.beta.shape[0]

    def as_vector(self) -> np.ndarray:
        """Stack as (beta_1..beta_k, sigma2, psi)."""
        return np.concatenate([self.beta, [self.sigma2, self.psi]])

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "Theta":
        v = np.asarray(v, dtype=float)
        return cls(beta=v[:-2], sigma2=float(v[-2]), psi=float(v[-1]))


@dataclass(frozen=True)
class SufficientStats:
    """Cross-sums of the paired data.

    A = X1'X1 + X2'X2, B = X1'X2 + X2'X1, c = X1'y1 + X2'y2,
    d = X1'y2 + X2'y1, syy = y1'y1 + y2'y2, scross = y1'y2.
    For k=1 these reduce to the six scalar statistics
    alpha1 = A, alpha2 = syy, alpha3 = c, alpha4 = d, alpha5 = B/2,
    alpha6 = scross.
    """

    A: np.ndarray
    B: np.ndarray
    c: np.ndarray
    d: np.ndarray
    syy: float
    scross: float
    q: int

    @property
    def k(self) -> int:
        return self.A.shape[0]

    def _scalar(self, M) -> float:
        if self.k != 1:
            raise ValueError("scalar alpha statistics are defined only for k=1")
        return float(np.asarray(M).reshape(-1)[0])

    @property
    def alpha1(self) -> float:
        return self._scalar(self.A)

    @property
    def alpha2(self) -> float:
        return self.syy

    @property
    def alpha3(self) -> float:
        return self._scalar(self.c)

    @property
    def alpha4(self) -> float:
        return self._scalar(self.d)

    @property
    def alpha5(self) -> float:
        return self._scalar(self.B) / 2.0

    @property
    def alpha6(self) -> float:
        return self.scross


def compute_stats(sample: PairSample) -> SufficientStats:
    """Exact cross-sums of the paired responses and predictors."""
    if sample.q == 0:
        raise EmptySampleError("cannot compute statistics of an empty sample")
    X1, X2, y1, y2 = sample.X1, sample.X2, sample.y1, sample.y2
    A = X1.T @ X1 + X2.T @ X2
    B = X1.T @ X2 + X2.T @ X1
    c = X1.T @ y1 + X2.T @ y2
    d = X1.T @ y2 + X2.T @ y1
    return SufficientStats(
        A=A,
        B=B,
        c=c,
        d=d,
        syy=float(y1 @ y1 + y2 @ y2),
        scross=float(y1 @ y2),
        q=sample.q,
    )


def residual_cross_moments(sample: PairSample, beta: np.ndarray):
    """Return (sum e1^2, sum e2^2, sum e1*e2) for residuals e = y - X beta."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    e1 = sample.y1 - sample.X1 @ beta
    e2 = sample.y2 - sample.X2 @ beta
    return float(e1 @ e1), float(e2 @ e2), float(e1 @ e2)


def _quadratic_moments(stats: SufficientStats, beta: np.ndarray):
    """Residual moments from the sufficient statistics.

    Returns (P, C) where P = sum(e1^2 + e2^2) and C = sum(e1 * e2).
    """
    beta = np.atleast_1d(beta)
    P = stats.syy - 2.0 * beta @ stats.c + beta @ stats.A @ beta
    C = stats.scross - beta @ stats.d + 0.5 * beta @ stats.B @ beta
    return float(P), float(C)


def log_likelihood(theta: Theta, sample: PairSample) -> float:
    """Pairwise Gaussian log-likelihood of the coded sample.

    l = -q ln(2 pi) - q ln sigma2 - (q/2) ln(1 - psi^2)
        - sum(e1^2 - 2 psi e1 e2 + e2^2) / (2 sigma2 (1 - psi^2)).
    """
    q = sample.q
    p1, p2, cc = residual_cross_moments(sample, theta.beta)
    s = p1 + p2 - 2.0 * theta.psi * cc
    u = 1.0 - theta.psi**2
    return float(
        -q * np.log(2.0 * np.pi)
        - q * np.log(theta.sigma2)
        - 0.5 * q * np.log(u)
        - s / (2.0 * theta.sigma2 * u)
    )


def log_likelihood_from_stats(theta: Theta, stats: SufficientStats) -> float:
    """Same value as :func:`log_likelihood`, evaluated from the cross-sums."""
    P, C = _quadratic_moments(stats, theta.beta)
    s = P - 2.0 * theta.psi * C
    u = 1.0 - theta.psi**2
    q = stats.q
    return float(
        -q * np.log(2.0 * np.pi)
        - q * np.log(theta.sigma2)
        - 0.5 * q * np.log(u)
        - s / (2.0 * theta.sigma2 * u)
    )


def score(theta: Theta, stats: SufficientStats) -> np.ndarray:
    """Gradient of the pairwise log-likelihood, stacked as (beta, sigma2, psi)."""
    beta, s2, psi = theta.beta, theta.sigma2, theta.psi
    u = 1.0 - psi**2
    P, C = _quadratic_moments(stats, beta)
    s = P - 2.0 * psi * C
    g_beta = (stats.c - stats.A @ beta - psi * (stats.d - stats.B @ beta)) / (s2 * u)
    g_s2 = -stats.q / s2 + s / (2.0 * s2**2 * u)
    g_psi = stats.q * psi / u + (-P * psi + C * (1.0 + psi**2)) / (s2 * u**2)
    return np.concatenate([np.atleast_1d(g_beta), [g_s2, g_psi]])


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 200
    score_tol: float = 1e-8
    fix_psi_zero: bool = False
    psi_clamp: float = PSI_CLAMP
    sigma2_floor: float = SIGMA2_FLOOR
    newton_steps: int = 25
    path: str = "auto"  # auto | scalar | matrix


@dataclass(frozen=True)
class EstimateReport:
    theta: Theta
    loglik: float
    iterations: int
    converged: bool
    score_norm: float
    coding_rate: float | None = None

    def to_dict(self) -> dict:
        return {
            "beta": [float(b) for b in self.theta.beta],
            "sigma2": float(self.theta.sigma2),
            "psi": float(self.theta.psi),
            "loglik": float(self.loglik),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "score_norm": float(self.score_norm),
            "coding_rate": None if self.coding_rate is None else float(self.coding_rate),
        }


def _beta_given_psi(stats: SufficientStats, psi: float, path: str) -> np.ndarray:
    if path == "scalar":
        num = stats.alpha3 - psi * stats.alpha4
        den = stats.alpha1 - 2.0 * psi * stats.alpha5
        if den == 0.0:
            raise RankDeficiencyError("predictor cross-product is singular")
        return np.array([num / den])
    M = stats.A - psi * stats.B
    try:
        beta = np.linalg.solve(M, stats.c - psi * stats.d)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(str(exc)) from exc
    return beta


def _psi_given_beta(stats: SufficientStats, beta: np.ndarray, clamp: float) -> float:
    P, C = _quadratic_moments(stats, beta)
    if P <= 0.0:
        raise DegenerateFitError("residual sum of squares is not positive")
    psi = 2.0 * C / P
    return float(np.clip(psi, -1.0 + clamp, 1.0 - clamp))


def _sigma2_given(stats: SufficientStats, beta: np.ndarray, psi: float) -> float:
    P, C = _quadratic_moments(stats, beta)
    return (P - 2.0 * psi * C) / (2.0 * stats.q * (1.0 - psi**2))


def _newton_polish(theta: Theta, stats: SufficientStats, options: SolverOptions) -> Theta:
    """Full-score Newton iterations to certify stationarity.

    Uses the analytic negated curvature matrix; steps that would leave the
    parameter space or not improve the score norm are rejected.
    """
    from .inference import hessian  # deferred to avoid a module cycle

    current = theta
    norm = float(np.max(np.abs(score(current, stats))))
    for _ in range(options.newton_steps):
        if norm <= 1e-13:
            break
        g = score(current, stats)
        H = hessian(current, stats)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        v = current.as_vector() + step
        s2, psi = v[-2], v[-1]
        if not (s2 > options.sigma2_floor and abs(psi) < 1.0 - options.psi_clamp / 2):
            break
        candidate = Theta.from_vector(v)
        cand_norm = float(np.max(np.abs(score(candidate, stats))))
        if not cand_norm < norm:
            break
        current, norm = candidate, cand_norm
    return current


def estimate(
    sample: PairSample,
    options: SolverOptions = SolverOptions(),
    coding_rate: float | None = None,
) -> EstimateReport:
    """BML point estimation by damped fixed-point iteration plus Newton polish.

    The coupled closed forms beta(psi) and psi(beta) are iterated from psi=0;
    sigma2 follows in closed form; a final Newton polish on the full score
    certifies the stationary point.
    """
    stats = compute_stats(sample)
    k = stats.k
    # With psi constrained to zero only beta and sigma2 are free, so a
    # smaller sample suffices.
    min_q = (k + 1) // 2 if options.fix_psi_zero else k + 2
    if stats.q < max(min_q, 1):
        raise EmptySampleError(f"need at least {max(min_q, 1)} pairs, got q={stats.q}")
    path = options.path
    if path == "auto":
        path = "scalar" if k == 1 else "matrix"
    if path == "scalar" and k != 1:
        raise ValueError("scalar path requires k=1")

    if options.fix_psi_zero:
        beta = _beta_given_psi(stats, 0.0, path)
        sigma2 = _sigma2_given(stats, beta, 0.0)
        if sigma2 < options.sigma2_floor:
            raise DegenerateFitError(f"sigma2 estimate {sigma2} below floor")
        theta = Theta(beta=beta, sigma2=sigma2, psi=0.0)
        g = score(theta, stats)
        norm = float(np.max(np.abs(g[:-1])))  # psi is constrained, not scored
        return EstimateReport(
            theta=theta,
            loglik=log_likelihood_from_stats(theta, stats),
            iterations=0,
            converged=norm <= options.score_tol,
            score_norm=norm,
            coding_rate=coding_rate,
        )

    psi = 0.0
    beta = _beta_given_psi(stats, psi, path)
    iterations = 0
    converged_fp = False
    damping = 1.0
    last_dpsi = None
    for iterations in range(1, options.max_iter + 1):
        beta_new = _beta_given_psi(stats, psi, path)
        psi_target = _psi_given_beta(stats, beta_new, options.psi_clamp)
        dpsi = psi_target - psi
        if last_dpsi is not None and dpsi * last_dpsi < 0:
            damping = 0.5
        psi_new = psi + damping * dpsi
        psi_new = float(np.clip(psi_new, -1.0 + options.psi_clamp, 1.0 - options.psi_clamp))
        delta = max(float(np.max(np.abs(beta_new - beta))), abs(psi_new - psi))
        beta, psi, last_dpsi = beta_new, psi_new, dpsi
        if delta < options.tol:
            converged_fp = True
            break

    sigma2 = _sigma2_given(stats, beta, psi)
    if sigma2 < options.sigma2_floor:
        raise DegenerateFitError(f"sigma2 estimate {sigma2} below floor")
    theta = Theta(beta=beta, sigma2=sigma2, psi=psi)
    theta = _newton_polish(theta, stats, options)

    norm = float(np.max(np.abs(score(theta, stats))))
    at_boundary = abs(theta.psi) >= 1.0 - 2.0 * options.psi_clamp
    converged = converged_fp and norm <= options.score_tol and not at_boundary
    return EstimateReport(
        theta=theta,
        loglik=log_likelihood_from_stats(theta, stats),
        iterations=iterations,
        converged=converged,
        score_norm=norm,
        coding_rate=coding_rate,
    )
