"""Data-generating processes and the Monte Carlo validation harness.

Two DGPs are provided: an exact pair-level process whose disturbances are
bivariate Gaussian within each pair and independent across pairs, and a full
lattice spatial-error-model process used to exercise the whole
coding-plus-estimation pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats as spstats

from .core import NeighborGraph, PairSample, SpatialDataset, build_lattice_graph
from .estimator import (
    EstimateReport,
    SolverOptions,
    Theta,
    compute_stats,
    estimate,
)
from .inference import fisher_information


class ConditioningError(np.linalg.LinAlgError):
    """The lattice error operator is numerically singular."""


class HarnessError(RuntimeError):
    """No Monte Carlo replication produced a usable estimate."""


@dataclass(frozen=True)
class DgpConfig:
    """Pair-level DGP: q independent pairs with correlated disturbances."""

    q: int
    theta: Theta
    seed: int
    k: int = 1

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be at least 1")
        if self.theta.k != self.k:
            raise ValueError("theta.beta length must equal k")


def generate_pair_sample(config: DgpConfig, rng: np.random.Generator | None = None) -> PairSample:
    """Draw q pairs with bivariate Gaussian disturbances.

    Predictors are standard normal, recentered so the stacked columns have
    exactly zero mean, drawn once and held fixed within the replication.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    q, k = config.q, config.k
    beta, sigma2, psi = config.theta.beta, config.theta.sigma2, config.theta.psi
    X = rng.standard_normal((2 * q, k))
    X -= X.mean(axis=0)
    X1, X2 = X[:q], X[q:]
    z1 = rng.standard_normal(q)
    z2 = rng.standard_normal(q)
    sd = np.sqrt(sigma2)
    e1 = sd * z1
    e2 = sd * (psi * z1 + np.sqrt(1.0 - psi**2) * z2)
    return PairSample(
        y1=X1 @ beta + e1,
        y2=X2 @ beta + e2,
        X1=X1,
        X2=X2,
    )


def row_standardized_rook(rows: int, cols: int) -> np.ndarray:
    """Dense row-standardized rook contiguity matrix of a grid."""
    graph = build_lattice_graph(rows, cols, "rook")
    n = graph.n
    W = np.zeros((n, n))
    for i, nbrs in enumerate(graph.adjacency):
        W[i, list(nbrs)] = 1.0 / len(nbrs)
    return W


def generate_lattice_sem(
    rows: int,
    cols: int,
    beta,
    sigma2: float,
    lam: float,
    seed: int,
    k: int | None = None,
) -> SpatialDataset:
    """Spatial error model on a rook lattice: e = (I - lam W)^-1 u.

    W is row-standardized rook contiguity; u is iid Gaussian; the returned
    dataset is centered.
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if k is None:
        k = beta.shape[0]
    if abs(lam) >= 1:
        raise ValueError("lam must lie in (-1, 1)")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    rng = np.random.default_rng(seed)
    graph = build_lattice_graph(rows, cols, "rook")
    n = graph.n
    W = row_standardized_rook(rows, cols)
    operator = np.eye(n) - lam * W
    if np.linalg.cond(operator) > 1e12:
        raise ConditioningError("I - lam W is near singular")
    u = rng.standard_normal(n) * np.sqrt(sigma2)
    eps = np.linalg.solve(operator, u)
    X = rng.standard_normal((n, k))
    y = X @ beta + eps
    y = y - y.mean()
    X = X - X.mean(axis=0)
    return SpatialDataset(y=y, X=X, graph=graph, centered=True)


@dataclass(frozen=True)
class MonteCarloReport:
    replications: int
    failures: int
    parameter_names: tuple[str, ...]
    true_values: np.ndarray
    means: np.ndarray
    biases: np.ndarray
    variances: np.ndarray
    fisher_variances: np.ndarray
    correlations: np.ndarray
    ks_statistic: float
    ks_pvalue: float
    estimates: np.ndarray  # (R_ok, k+2) per-replication estimates

    def to_dict(self, include_estimates: bool = False) -> dict:
        out = {
            "replications": int(self.replications),
            "failures": int(self.failures),
            "parameter_names": list(self.parameter_names),
            "true_values": [float(v) for v in self.true_values],
            "means": [float(v) for v in self.means],
            "biases": [float(v) for v in self.biases],
            "variances": [float(v) for v in self.variances],
            "fisher_variances": [float(v) for v in self.fisher_variances],
            "fisher_ratios": [
                float(v / f) if f > 0 else None
                for v, f in zip(self.variances, self.fisher_variances)
            ],
            "correlations": [[float(v) for v in row] for row in self.correlations],
            "ks_statistic": float(self.ks_statistic),
            "ks_pvalue": float(self.ks_pvalue),
        }
        if include_estimates:
            out["estimates"] = [[float(v) for v in row] for row in self.estimates]
        return out


def run_monte_carlo(
    config: DgpConfig,
    replications: int,
    seed: int | None = None,
    options: SolverOptions = SolverOptions(),
) -> MonteCarloReport:
    """Repeatedly draw pair samples and re-estimate, summarizing bias,
    variance against the Fisher prediction, cross-correlations and the
    normality of the standardized first slope.

    Each replication owns a seed-derived RNG stream, so results do not depend
    on execution order.  Non-converged replications are dropped and counted.
    """
    if replications < 1:
        raise ValueError("need at least one replication")
    if seed is None:
        seed = config.seed
    streams = np.random.SeedSequence(seed).spawn(replications)
    k = config.k
    names = tuple(f"beta{i + 1}" for i in range(k)) + ("sigma2", "psi")
    truth = config.theta.as_vector()

    rows = []
    fisher_rows = []
    failures = 0
    for stream in streams:
        rng = np.random.default_rng(stream)
        sample = generate_pair_sample(config, rng=rng)
        try:
            report = estimate(sample, options=options)
        except Exception:
            failures += 1
            continue
        if not report.converged:
            failures += 1
            continue
        rows.append(report.theta.as_vector())
        # Predicted sampling variances at the true parameters, this design.
        info = fisher_information(config.theta, compute_stats(sample))
        fisher_rows.append(
            np.concatenate([np.diag(info.i11_inv), [info.i22_inv, info.i33_inv]])
        )
    if not rows:
        raise HarnessError("all Monte Carlo replications failed")

    estimates = np.vstack(rows)
    fisher = np.vstack(fisher_rows)
    means = estimates.mean(axis=0)
    variances = estimates.var(axis=0, ddof=1)
    if estimates.shape[0] >= 2:
        corr = np.corrcoef(estimates, rowvar=False)
    else:
        corr = np.eye(k + 2)
    standardized = (estimates[:, 0] - truth[0]) / np.sqrt(fisher[:, 0])
    ks = spstats.kstest(standardized, "norm")
    return MonteCarloReport(
        replications=replications,
        failures=failures,
        parameter_names=names,
        true_values=truth,
        means=means,
        biases=means - truth,
        variances=variances,
        fisher_variances=fisher.mean(axis=0),
        correlations=corr,
        ks_statistic=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        estimates=estimates,
    )
