"""Matplotlib figure rendering for the report commands.

Each report command drops a PNG next to its CSV so results can be eyeballed
without extra tooling; the CSVs stay the canonical machine-readable output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection

from .metrics import PercentChangeRow, SummaryRow

# Draw each direction of a two-way road slightly offset from the axis so
# both are visible.
_OFFSET_FRACTION = 0.06


def render_heatmap(records: list[dict], path: str | Path, title: str = "Mean travel speed (m/s)") -> Path:
    """Per-edge mean-speed map: colored segments, gray dashes for no data."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 6))

    segments, speeds, empty_segments = [], [], []
    for rec in records:
        a = np.array([rec["from_x"], rec["from_y"]], dtype=float)
        b = np.array([rec["to_x"], rec["to_y"]], dtype=float)
        direction = b - a
        if not np.hypot(*direction):
            continue
        # Shift to the right-hand side of the travel direction, scaled with
        # the edge so paired directions stay separated at any zoom.
        offset = np.array([direction[1], -direction[0]]) * _OFFSET_FRACTION
        shrink = 0.12 * direction
        seg = [tuple(a + offset + shrink), tuple(b + offset - shrink)]
        if rec["mean_speed"] is None:
            empty_segments.append(seg)
        else:
            segments.append(seg)
            speeds.append(rec["mean_speed"])

    if empty_segments:
        ax.add_collection(LineCollection(empty_segments, colors="0.8", linestyles="dashed", linewidths=2))
    if segments:
        coll = LineCollection(segments, cmap="RdYlGn", linewidths=4)
        coll.set_array(np.asarray(speeds))
        coll.set_clim(0, max(speeds) if speeds else 1.0)
        ax.add_collection(coll)
        fig.colorbar(coll, ax=ax, label="mean speed (m/s)")

    ax.autoscale()
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_sweep(points: list[tuple[float, SummaryRow]], path: str | Path) -> Path:
    """Mean travel time against automated-fleet share."""
    path = Path(path)
    pens = [p for p, _ in points]
    times = [s.mean_travel_time for _, s in points]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(pens, times, marker="o")
    ax.set_xlabel("automated-vehicle share (%)")
    ax.set_ylabel("mean travel time (s)")
    ax.set_title("Travel time vs fleet automation")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_compare(rows: list[tuple[str, SummaryRow | PercentChangeRow]], path: str | Path) -> Path:
    """Percent-change bars for the non-baseline cases."""
    path = Path(path)
    metric_labels = ["travel time", "fuel", "CO2", "TTC events"]
    cases = [(label, row) for label, row in rows if isinstance(row, PercentChangeRow)]
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / max(1, len(cases))
    x = np.arange(len(metric_labels))
    for i, (label, row) in enumerate(cases):
        values = [
            0.0 if v is None else v
            for v in (row.mean_travel_time, row.fuel, row.co2, row.ttc_events)
        ]
        ax.bar(x + i * width, values, width=width, label=label)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xticks(x + width * (len(cases) - 1) / 2 if cases else x)
    ax.set_xticklabels(metric_labels)
    ax.set_ylabel("change vs baseline (%)")
    ax.set_title("Scenario comparison")
    if cases:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
