"""Matplotlib rendering of sweep and asymptotics outputs.

Figures are a convenience view of the CSVs; the CSV is the contract.
SVG output is made byte-deterministic by pinning the hash salt and
dropping the date metadata.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "chansense"

_SCHEME_STYLE = {
    "single_phase": dict(color="tab:blue", marker="o", label="single-phase"),
    "bmac": dict(color="tab:orange", marker="s", label="BMAC"),
    "adasense": dict(color="tab:green", marker="^", label="AdaSense"),
}


def _save(fig: plt.Figure, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format=path.suffix.lstrip("."), metadata={"Date": None})
    plt.close(fig)


def render_energy_panel(
    series: dict[str, tuple[Sequence[float], Sequence[float]]],
    title: str,
    path: Path,
) -> None:
    """Energy versus miss probability, log-log, one line per scheme.

    ``series`` maps scheme name to (betas, energies); infeasible cells
    should already be filtered out.
    """
    fig, ax = plt.subplots(figsize=(6, 4.2))
    for scheme in ("single_phase", "bmac", "adasense"):
        if scheme not in series:
            continue
        betas, energies = series[scheme]
        if not betas:
            continue
        ax.loglog(betas, energies, lw=1.2, ms=4, **_SCHEME_STYLE[scheme])
    ax.set_xlabel("miss probability")
    ax.set_ylabel("expected energy (W·samples)")
    ax.set_title(title, fontsize=10)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_line(
    x: Sequence[float],
    ys: dict[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
    title: str,
    path: Path,
    logx: bool = False,
    logy: bool = False,
) -> None:
    """Generic line chart used by the asymptotics reports."""
    fig, ax = plt.subplots(figsize=(6, 4.2))
    for label, y in ys.items():
        ax.plot(x, y, marker="o", ms=4, lw=1.2, label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=10)
    ax.grid(True, which="both", alpha=0.3)
    if len(ys) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
