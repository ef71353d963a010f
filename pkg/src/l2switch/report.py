"""Figures rendered from a simulation timeline.

Three PNGs: memory/queue occupancy over time, a per-port activity
raster, and per-port frame counts.  Files land next to the event and
stats output so a report directory is self-contained.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import CycleRecord, SwitchStats


def _save(fig, path: Path):
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def occupancy_figure(timeline: Sequence[CycleRecord], blocks: int, out: Path):
    cycles = np.array([r.cycle for r in timeline])
    free = np.array([r.free_blocks for r in timeline])
    depths = np.array([r.voq_depths for r in timeline])
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(9, 6), sharex=True)
    top.plot(cycles, free, lw=1.0, color="tab:blue")
    top.axhline(blocks, color="gray", lw=0.8, ls=":")
    top.set_ylabel("free blocks")
    top.set_ylim(0, blocks + 2)
    top.set_title("shared memory and output queue occupancy")
    for port in range(depths.shape[1]):
        bottom.plot(cycles, depths[:, port], lw=1.0, label=f"port {port}")
    bottom.set_xlabel("switch cycle")
    bottom.set_ylabel("VOQ depth")
    bottom.legend(loc="upper right", fontsize=8)
    _save(fig, out)


def activity_figure(timeline: Sequence[CycleRecord], out: Path):
    rx = np.array([r.rx_active for r in timeline], dtype=float)
    tx = np.array([r.tx_active for r in timeline], dtype=float)
    ports = rx.shape[1]
    # one row per direction per port: rx rows on top, tx rows below
    raster = np.concatenate([rx.T, tx.T])
    fig, ax = plt.subplots(figsize=(9, 0.5 * raster.shape[0] + 1.5))
    ax.imshow(
        raster,
        aspect="auto",
        interpolation="nearest",
        cmap="Greys",
        extent=(0, len(timeline), raster.shape[0], 0),
    )
    labels = [f"rx {p}" for p in range(ports)] + [f"tx {p}" for p in range(ports)]
    ax.set_yticks(np.arange(len(labels)) + 0.5, labels=labels, fontsize=8)
    ax.set_xlabel("switch cycle")
    ax.set_title("per-port activity")
    _save(fig, out)


def frame_count_figure(stats: SwitchStats, out: Path):
    ports = np.arange(stats.ports)
    width = 0.35
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(ports - width / 2, stats.rx_frames, width, label="ingress ok")
    ax.bar(ports + width / 2, stats.tx_frames, width, label="egress")
    drops = [c + b for c, b in zip(stats.rx_crc_drops, stats.rx_backpressure_drops)]
    if any(drops):
        ax.bar(ports - width / 2, drops, width, bottom=stats.rx_frames,
               color="tab:red", label="dropped at ingress")
    ax.set_xticks(ports, labels=[f"port {p}" for p in ports])
    ax.set_ylabel("frames")
    ax.set_title("frame counts")
    ax.legend(fontsize=8)
    _save(fig, out)


def render_report(
    timeline: Sequence[CycleRecord],
    stats: SwitchStats,
    blocks: int,
    out_dir: Path,
) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [
        out_dir / "occupancy.png",
        out_dir / "activity.png",
        out_dir / "frame_counts.png",
    ]
    occupancy_figure(timeline, blocks, paths[0])
    activity_figure(timeline, paths[1])
    frame_count_figure(stats, paths[2])
    return paths
