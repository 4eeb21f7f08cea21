"""Render simulation summary figures next to the delimited output.

One PNG per metric (realized FDR, power, mean selection size), with a panel
per setting, the noise scale on the x-axis, and one line per score.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_METRICS = (
    ("fdr_mean", "realized FDR", "fdr.png"),
    ("power_mean", "power", "power.png"),
    ("nsel_mean", "mean selected", "nsel.png"),
)

_STYLE = {"res": "o-", "clip": "s-", "sub": "^-"}


def render_simulation_figures(records: list[dict], out_dir, q: float | None = None) -> list[Path]:
    """Write the three metric figures and return their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    settings = sorted({r["setting"] for r in records})
    scores = sorted({r["score"] for r in records})
    ncols = min(4, len(settings))
    nrows = math.ceil(len(settings) / ncols)
    paths = []
    for key, label, filename in _METRICS:
        fig, axes = plt.subplots(
            nrows, ncols, figsize=(3.2 * ncols, 2.6 * nrows), squeeze=False
        )
        for ax in axes.flat[len(settings):]:
            ax.set_visible(False)
        for ax, setting in zip(axes.flat, settings):
            for score in scores:
                rows = sorted(
                    (r for r in records if r["setting"] == setting and r["score"] == score),
                    key=lambda r: r["sigma"],
                )
                if not rows:
                    continue
                ax.plot(
                    [r["sigma"] for r in rows],
                    [r[key] for r in rows],
                    _STYLE.get(score, "-"),
                    label=score,
                    markersize=4,
                )
            if key == "fdr_mean" and q is not None:
                ax.axhline(q, color="red", linestyle="--", linewidth=0.8)
            ax.set_title(f"setting {setting}", fontsize=9)
            ax.set_xlabel("sigma", fontsize=8)
            ax.set_ylabel(label, fontsize=8)
            ax.tick_params(labelsize=7)
        handles, labels = axes.flat[0].get_legend_handles_labels()
        if handles:
            fig.legend(handles, labels, loc="lower right", fontsize=8)
        fig.tight_layout()
        path = out_dir / filename
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths
