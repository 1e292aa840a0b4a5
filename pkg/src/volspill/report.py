"""CSV emitters and figure rendering for the pipeline outputs.

Every delimited file starts with provenance comment lines (tool version,
config hash, seed) so outputs are traceable and reruns are byte-comparable.
Numbers print with 6 significant digits unless raw=True, which round-trips
full precision. Figures render alongside the CSVs with the crisis windows
shaded, matching the correlation-path panels of the study this reproduces.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .correlation import DccSummary
from .data import CrisisWindow

__all__ = [
    "Provenance",
    "write_csv",
    "format_number",
    "render_rho_figure",
    "render_volatility_figure",
    "write_manifest",
]


class Provenance:
    """Header block stamped into every output file."""

    def __init__(self, version: str, config_hash: str, seed) -> None:
        self.version = version
        self.config_hash = config_hash
        self.seed = seed

    def lines(self) -> list[str]:
        return [
            f"# volspill {self.version}",
            f"# config: {self.config_hash}",
            f"# seed: {self.seed}",
        ]

    def as_dict(self) -> dict:
        return {"version": self.version, "config": self.config_hash, "seed": self.seed}


def format_number(value, raw: bool = False) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value)) if raw else f"{float(value):.6g}"
    return str(value)


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Sequence[Sequence],
    provenance: Optional[Provenance] = None,
    raw: bool = False,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if provenance is not None:
            for line in provenance.lines():
                fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(cell, raw) for cell in row])
    return path


def write_manifest(
    path: Path,
    stages: dict,
    complete: bool,
    provenance: Provenance,
    error: Optional[dict] = None,
) -> Path:
    path = Path(path)
    payload = {
        "complete": complete,
        "stages": stages,
        "provenance": provenance.as_dict(),
    }
    if error is not None:
        payload["error"] = error
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _shade_windows(ax, windows: Sequence[CrisisWindow]) -> None:
    for window in windows:
        ax.axvspan(window.start, window.end, color="0.85", zorder=0)


def render_rho_figure(
    path: Path,
    dates,
    rho: np.ndarray,
    pair: tuple[str, str],
    windows: Sequence[CrisisWindow] = (),
    ccc_level: Optional[float] = None,
) -> Path:
    """Correlation path for one pair with crisis windows shaded."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(9, 3.2))
    _shade_windows(ax, windows)
    ax.plot(dates, rho, lw=0.9, color="C0")
    if ccc_level is not None:
        ax.axhline(ccc_level, color="C3", lw=0.8, ls="--", label=f"constant {ccc_level:.3f}")
        ax.legend(loc="upper right", frameon=False, fontsize=8)
    ax.set_ylim(-1.0, 1.0)
    ax.set_ylabel("conditional correlation")
    ax.set_title(f"{pair[0]} / {pair[1]}", fontsize=10)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_volatility_figure(
    path: Path,
    dates,
    sigma_paths: dict[str, np.ndarray],
    windows: Sequence[CrisisWindow] = (),
) -> Path:
    """Stacked conditional-volatility panels, one per series."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = len(sigma_paths)
    fig, axes = plt.subplots(n, 1, figsize=(9, 1.6 * n + 0.8), sharex=True, squeeze=False)
    for ax, (name, sigma) in zip(axes[:, 0], sigma_paths.items()):
        _shade_windows(ax, windows)
        ax.plot(dates, sigma, lw=0.7, color="C0")
        ax.set_ylabel(name, fontsize=8)
    axes[-1, 0].set_xlabel("date")
    fig.suptitle("conditional volatility", fontsize=10)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def summary_rows(summary: DccSummary) -> list[list]:
    label = f"{summary.pair[0]}_{summary.pair[1]}"
    return [[label, row.label, row.mean, row.min, row.max] for row in summary.rows]
