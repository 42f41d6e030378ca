"""Figures for suite reports (Agg backend, PNG output)."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
    "legend.fontsize": 7,
    "legend.frameon": False,
}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_residuals(report, path: Path) -> Path:
    """Residual over tolerance for every record; points above 1 failed."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ratios = []
        for r in report.records:
            if r.tolerance > 0:
                ratios.append(r.residual / r.tolerance)
            else:
                ratios.append(0.0 if r.passed else np.inf)
        ratios = np.array(ratios, dtype=float)
        finite = np.where(np.isfinite(ratios), ratios, 1e3)
        colors = ["tab:blue" if r.passed else "tab:red" for r in report.records]
        ax.scatter(np.arange(len(finite)), np.maximum(finite, 1e-20), s=8, c=colors)
        ax.axhline(1.0, color="k", lw=0.8, ls="--")
        ax.set_yscale("log")
        ax.set_xlabel("check")
        ax.set_ylabel("residual / tolerance")
        ax.set_title(f"{report.suite}: {len(report.records) - len(report.failures())}/{len(report.records)} passed")
        return _save(fig, path)


def plot_pmf(table, path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        by_lam = defaultdict(list)
        for lam, k, pmf, ref, level in table.rows:
            by_lam[lam].append((k, pmf, level))
        for lam, rows in sorted(by_lam.items()):
            k, pmf, level = map(np.array, zip(*rows))
            (line,) = ax.plot(k, pmf, lw=1, label=f"intensity {lam:g}")
            ax.plot(k, level, "o", ms=3, mfc="none", color=line.get_color())
        ax.set_xlabel("k")
        ax.set_ylabel("probability")
        ax.legend()
        return _save(fig, path)


def plot_convergence(table, path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        by_pair = defaultdict(list)
        for pair, M, value, lin, gap, *_ in table.rows:
            by_pair[pair].append((M, gap))
        for pair, rows in sorted(by_pair.items()):
            M, gap = map(np.array, zip(*rows))
            ax.semilogy(M, np.maximum(gap, 1e-18), lw=0.8, marker=".", ms=3)
        ax.set_xlabel("level cap M")
        ax.set_ylabel("|truncated entropy - Lindblad entropy|")
        return _save(fig, path)


def plot_ladder(table, path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        by_query = defaultdict(list)
        for q, length, n, err, scaled in table.rows:
            by_query[q].append((n, scaled))
        for q, rows in sorted(by_query.items()):
            n, scaled = map(np.array, zip(*rows))
            ax.loglog(n, scaled, lw=0.8, marker=".", ms=3, base=2)
        ax.set_xlabel("copies n")
        ax.set_ylabel("n * |Bernoulli - Poisson|")
        return _save(fig, path)


_TABLE_PLOTS = {"pmf": plot_pmf, "convergence": plot_convergence, "ladder": plot_ladder}


def render_report(report, directory) -> list[Path]:
    """Write a residual overview plus one figure per known table; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [plot_residuals(report, directory / f"{report.suite}_residuals.png")]
    for name, table in report.tables.items():
        if name in _TABLE_PLOTS and table.rows:
            paths.append(_TABLE_PLOTS[name](table, directory / f"{report.suite}_{name}.png"))
    return paths
