"""Static SVG line charts of generalization error against sample size."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import read_rows, summarize  # noqa: E402

__all__ = ["emit_charts", "chart_name"]


def chart_name(noise: str, penalty: str, d: int) -> str:
    return f"{noise}_{penalty}_d{d}.svg"


def emit_charts(csv_path, out_dir) -> list[Path]:
    """One chart per (noise, penalty, d): mean error vs T, one line per eta,
    shaded +-1 standard error. Returns the written paths, sorted."""
    rows = read_rows(csv_path)
    out_dir = Path(out_dir)
    if not rows:
        return []
    out_dir.mkdir(parents=True, exist_ok=True)
    stats = summarize(rows)
    groups: dict = {}
    for (noise, penalty, d, eta, T), val in stats.items():
        groups.setdefault((noise, penalty, d), {}).setdefault(eta, []).append((T, *val))

    written = []
    with plt.rc_context({"svg.hashsalt": "lsts-sparse", "svg.fonttype": "none"}):
        for (noise, penalty, d), by_eta in sorted(groups.items()):
            fig, ax = plt.subplots(figsize=(6, 4))
            for eta in sorted(by_eta):
                pts = sorted(by_eta[eta])
                Ts = [p[0] for p in pts]
                mean = [p[1] for p in pts]
                se = [p[2] for p in pts]
                ax.plot(Ts, mean, marker="o", label=f"eta={eta:g}")
                ax.fill_between(Ts, [m - s for m, s in zip(mean, se)],
                                [m + s for m, s in zip(mean, se)], alpha=0.2)
            ax.set_xlabel("T")
            ax.set_ylabel("generalization error")
            ax.set_title(f"{penalty} / {noise} noise, d={d}")
            ax.legend()
            fig.tight_layout()
            path = out_dir / chart_name(noise, penalty, d)
            fig.savefig(path, format="svg", metadata={"Date": None})
            plt.close(fig)
            written.append(path)
    return written
