"""Figure rendering and delimited output for the CLI reports."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import PairSample
from .estimator import (
    EstimateReport,
    Theta,
    compute_stats,
    log_likelihood_from_stats,
    score,
)
from .resample import BootstrapReport
from .simulate import MonteCarloReport


def psi_profile_figure(sample: PairSample, report: EstimateReport, path) -> Path:
    """Two-panel figure: log-likelihood and its psi-score along the psi axis,
    with the other parameters held at their estimates."""
    stats = compute_stats(sample)
    beta, sigma2 = report.theta.beta, report.theta.sigma2
    psi_hat = report.theta.psi
    half_width = max(0.2, 4.0 * abs(psi_hat))
    lo = max(-0.99, psi_hat - half_width)
    hi = min(0.99, psi_hat + half_width)
    grid = np.linspace(lo, hi, 401)
    loglik = np.array([
        log_likelihood_from_stats(Theta(beta=beta, sigma2=sigma2, psi=p), stats)
        for p in grid
    ])
    psi_score = np.array([
        score(Theta(beta=beta, sigma2=sigma2, psi=p), stats)[-1] for p in grid
    ])

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(grid, loglik, lw=1.2)
    ax1.axvline(psi_hat, color="crimson", ls="--", lw=0.8)
    ax1.set_xlabel(r"$\psi$")
    ax1.set_ylabel("log-likelihood")
    ax2.plot(grid, psi_score, lw=1.2)
    ax2.axhline(0.0, color="gray", lw=0.6)
    ax2.axvline(psi_hat, color="crimson", ls="--", lw=0.8)
    ax2.set_xlabel(r"$\psi$")
    ax2.set_ylabel(r"score of $\psi$")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def estimate_histograms(estimates: np.ndarray, names, truth, path) -> Path:
    """One histogram panel per parameter across replications or codings."""
    n_par = estimates.shape[1]
    fig, axes = plt.subplots(1, n_par, figsize=(3.2 * n_par, 3.0))
    if n_par == 1:
        axes = [axes]
    for j, ax in enumerate(axes):
        ax.hist(estimates[:, j], bins=40, color="steelblue", alpha=0.8)
        if truth is not None:
            ax.axvline(truth[j], color="crimson", ls="--", lw=0.9)
        ax.set_xlabel(names[j])
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def montecarlo_figure(report: MonteCarloReport, path) -> Path:
    return estimate_histograms(
        report.estimates, report.parameter_names, report.true_values, path
    )


def bootstrap_figure(report: BootstrapReport, path) -> Path:
    return estimate_histograms(report.estimates, report.parameter_names, None, path)


def write_estimates_csv(estimates: np.ndarray, names, path) -> Path:
    """Delimited per-row estimates (one row per replication or coding)."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", *names])
        for idx, row in enumerate(estimates):
            writer.writerow([idx, *[repr(float(v)) for v in row]])
    return path
