"""Matplotlib figures for the evaluation reports (written to files)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_cv_report(report, out_path) -> Path:
    """Held-out log probability vs K for both models, plus the difference."""
    ks = [r["k"] for r in report.results if "ctm_mean" in r]
    ctm = [r["ctm_mean"] for r in report.results if "ctm_mean" in r]
    ctm_se = [r["ctm_se"] for r in report.results if "ctm_mean" in r]
    lda = [r["lda_mean"] for r in report.results if "ctm_mean" in r]
    lda_se = [r["lda_se"] for r in report.results if "ctm_mean" in r]
    diff = [r["diff_mean"] for r in report.results if "ctm_mean" in r]
    diff_se = [r["diff_se"] for r in report.results if "ctm_mean" in r]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.errorbar(ks, ctm, yerr=ctm_se, marker="o", label="CTM")
    ax1.errorbar(ks, lda, yerr=lda_se, marker="s", label="LDA")
    ax1.set_xlabel("number of topics")
    ax1.set_ylabel("held-out log probability")
    ax1.legend()
    ax2.errorbar(ks, diff, yerr=diff_se, marker="o", color="tab:green")
    ax2.axhline(0.0, color="grey", lw=0.8)
    ax2.set_xlabel("number of topics")
    ax2.set_ylabel("CTM - LDA log probability")
    fig.tight_layout()
    out = Path(out_path)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def plot_perplexity(p_grid, ctm_values, lda_values, out_path) -> Path:
    """Predictive perplexity vs observed-word count for both models."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(p_grid, ctm_values, marker="o", label="CTM")
    ax.plot(p_grid, lda_values, marker="s", label="LDA")
    ax.set_xlabel("observed words per document")
    ax.set_ylabel("predictive perplexity")
    ax.legend()
    fig.tight_layout()
    out = Path(out_path)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out
