"""Coding-based resampling: re-estimate under many random codings and
aggregate the resulting resampling distribution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SpatialDataset, enumerate_codings, extract_pair_sample
from .estimator import SolverOptions, Theta, estimate


class BootstrapError(RuntimeError):
    """No coding produced a converged estimate."""


@dataclass(frozen=True)
class BootstrapReport:
    codings: int
    dropped: int
    parameter_names: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray
    percentile_lower: np.ndarray
    percentile_upper: np.ndarray
    level: float
    estimates: np.ndarray  # (B_ok, k+2), one row per converged coding

    def to_dict(self, include_estimates: bool = True) -> dict:
        out = {
            "codings": int(self.codings),
            "dropped": int(self.dropped),
            "parameter_names": list(self.parameter_names),
            "means": [float(v) for v in self.means],
            "stds": [float(v) for v in self.stds],
            "percentile_lower": [float(v) for v in self.percentile_lower],
            "percentile_upper": [float(v) for v in self.percentile_upper],
            "level": float(self.level),
        }
        if include_estimates:
            out["estimates"] = [[float(v) for v in row] for row in self.estimates]
        return out


def coding_bootstrap(
    dataset: SpatialDataset,
    codings: int,
    seed: int,
    mode: str = "subsample",
    q: int | None = None,
    level: float = 0.95,
    options: SolverOptions = SolverOptions(),
) -> BootstrapReport:
    """Estimate under ``codings`` independent random codings of the dataset.

    The default subsample mode codes q = floor(n / 4) pairs, which leaves room
    for the codings to differ; distinct codings may share units, so the
    resampling summaries make no independence claim across codings.
    Non-converged codings are dropped and counted.
    """
    if codings < 1:
        raise ValueError("need at least one coding")
    if mode == "subsample" and q is None:
        q = max(1, dataset.n // 4)
    coding_list = enumerate_codings(dataset.graph, codings, seed, mode=mode, q=q)
    rows = []
    dropped = 0
    for coding in coding_list:
        sample = extract_pair_sample(dataset, coding)
        try:
            report = estimate(sample, options=options,
                              coding_rate=coding.coding_rate(dataset.n))
        except Exception:
            dropped += 1
            continue
        if not report.converged:
            dropped += 1
            continue
        rows.append(report.theta.as_vector())
    if not rows:
        raise BootstrapError("no coding produced a converged estimate")
    estimates = np.vstack(rows)
    k = estimates.shape[1] - 2
    names = tuple(f"beta{i + 1}" for i in range(k)) + ("sigma2", "psi")
    tail = 100.0 * (1.0 - level) / 2.0
    return BootstrapReport(
        codings=codings,
        dropped=dropped,
        parameter_names=names,
        means=estimates.mean(axis=0),
        stds=estimates.std(axis=0, ddof=0),
        percentile_lower=np.percentile(estimates, tail, axis=0),
        percentile_upper=np.percentile(estimates, 100.0 - tail, axis=0),
        level=level,
        estimates=estimates,
    )


def besag_average(report: BootstrapReport) -> Theta:
    """Componentwise mean of the per-coding estimates, re-clamped so the
    averaged variance and correlation remain valid parameters."""
    mean = report.estimates.mean(axis=0)
    beta = mean[:-2]
    sigma2 = max(float(mean[-2]), 1e-12)
    psi = float(np.clip(mean[-1], -1.0 + 1e-8, 1.0 - 1e-8))
    return Theta(beta=beta, sigma2=sigma2, psi=psi)
