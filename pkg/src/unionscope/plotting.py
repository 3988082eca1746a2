"""Figure rendering for the bench report path.

Benchmarks emit CSV for external tooling; these helpers render the standard
companion figures (round growth and the time-vs-rounds tradeoff) next to it.
Uses the Agg backend so headless runs work.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def render_bench_figures(rows: list[dict], outdir: Path) -> list[Path]:
    """Render rounds-vs-m and time-vs-rounds figures from bench rows.

    Each row carries m, epsilon, c1, rounds, queries, wall_ms, rel_error.
    Returns the written paths.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    c1_values = sorted({r["c1"] for r in rows})

    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    for c1 in c1_values:
        pts = sorted((r["m"], r["rounds"]) for r in rows if r["c1"] == c1)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"c1={c1}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("sets m")
    ax.set_ylabel("rounds")
    ax.legend(fontsize=8)
    ax.set_title("round growth")
    fig.tight_layout()
    p1 = outdir / "bench_rounds.png"
    fig.savefig(p1, dpi=150)
    plt.close(fig)
    written.append(p1)

    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    for c1 in c1_values:
        pts = [(r["rounds"], r["wall_ms"]) for r in rows if r["c1"] == c1]
        ax.scatter([p[0] for p in pts], [p[1] for p in pts], label=f"c1={c1}", s=18)
    ax.set_xlabel("rounds")
    ax.set_ylabel("wall ms")
    ax.legend(fontsize=8)
    ax.set_title("time vs rounds tradeoff")
    fig.tight_layout()
    p2 = outdir / "bench_tradeoff.png"
    fig.savefig(p2, dpi=150)
    plt.close(fig)
    written.append(p2)

    return written
