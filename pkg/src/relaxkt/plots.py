"""Figure rendering for solve histories and rate reports.

Files only; the Agg backend is forced so no display is needed.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_convergence(residuals, errors=None, bound=None, path="convergence.png",
                     title="Convergence history"):
    """Semilog residual curve, plus error and predicted-bound curves if given.

    ``bound`` is (sigma, e0): the line e0 * sigma**k is drawn for
    comparison against the measured error. Returns the path written.
    """
    residuals = np.asarray(residuals, dtype=float)
    ks = np.arange(residuals.shape[0])
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.semilogy(ks, np.maximum(residuals, 1e-300), label="relative residual")
    if errors is not None:
        errors = np.asarray(errors, dtype=float)
        ax.semilogy(np.arange(errors.shape[0]), np.maximum(errors, 1e-300),
                    label="error norm")
        if bound is not None:
            sigma, e0 = bound
            if sigma > 0.0 and e0 > 0.0:
                kb = np.arange(errors.shape[0])
                ax.semilogy(kb, e0 * sigma ** kb, "--",
                            label=f"bound, sigma={sigma:.4f}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("norm")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_spectrum(report, path="spectrum.png", title="Restricted spectrum"):
    """Stem plot of the restricted singular values with the unit line."""
    spectrum = np.asarray(report.spectrum, dtype=float)
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    ax0.stem(np.arange(1, spectrum.shape[0] + 1), spectrum)
    ax0.axhline(1.0, color="gray", linestyle=":", alpha=0.7)
    ax0.axhline(report.sigma_max_restricted, color="red", linestyle="--",
                alpha=0.7, label=f"sigma_max={report.sigma_max_restricted:.4f}")
    ax0.set_xlabel("index")
    ax0.set_ylabel("singular value")
    ax0.set_title(title)
    ax0.legend()
    bound = np.asarray(report.bound_curve, dtype=float)
    ax1.semilogy(np.arange(1, bound.shape[0] + 1), np.maximum(bound, 1e-300))
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("predicted error factor")
    ax1.set_title("Rate bound")
    ax1.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
