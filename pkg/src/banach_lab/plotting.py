"""Figures written next to the JSON/CSV reports (Agg backend, no display)."""
from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .vectors import Interval  # noqa: E402

FIG_SIZE = (5.0, 4.0)
DPI = 120


def _num(v) -> float:
    if isinstance(v, Interval):
        return float(v.mid)
    return float(v)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = path.suffix.lstrip(".") or "png"
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    os.close(fd)
    try:
        # no timestamps or version strings, so reruns give identical files
        fig.savefig(tmp, format=fmt, dpi=DPI, metadata={"Software": None} if fmt == "png" else None)
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.unlink(tmp)
    return path


def matrix_figure(matrix: Sequence[Sequence], path, title: str, xlabel: str = "n", ylabel: str = "m") -> Path:
    """Heatmap of a value table with 1-based ticks."""
    data = [[_num(v) for v in row] for row in matrix]
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    rows, cols = len(data), len(data[0]) if data else 0
    im = ax.imshow(data, origin="upper", cmap="viridis", extent=(0.5, cols + 0.5, rows + 0.5, 0.5))
    fig.colorbar(im, ax=ax)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    return _save(fig, path)


def iterates_figure(values: Sequence, path, title: str = "norm iterates") -> Path:
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.plot(range(len(values)), [_num(v) for v in values], marker="o")
    ax.set_xlabel("k")
    ax.set_ylabel("||x||_k")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def growth_figure(growth: Sequence[tuple[int, int]], path, title: str = "packing growth") -> Path:
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.step([g[0] for g in growth], [g[1] for g in growth], where="post", marker="o")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("net size")
    ax.set_ylabel("packing count")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)
