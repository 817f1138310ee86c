"""Optional PNG renderings of emitted data. matplotlib is imported lazily."""

from __future__ import annotations

from pathlib import Path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def packet_figure(result, path) -> Path:
    """|psi|^2 over (x, s) with the mean worldline overlaid."""
    import numpy as np

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    dens = np.abs(result.psi) ** 2
    ax.pcolormesh(result.x, result.s, dens, shading="auto", cmap="viridis")
    ax.plot(result.series["x"], result.s, color="w", lw=1, label="<x>(s)")
    ax.set_xlabel("x")
    ax.set_ylabel("s")
    ax.legend(loc="upper left")
    path = Path(path)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def trajectory_figure(geo, ham, path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    n = geo.states.shape[1] // 2
    ax.plot(ham.states[:, 0], ham.states[:, n], lw=2, label="Hamilton")
    ax.plot(geo.states[:, 0], geo.states[:, n], "--", lw=1, label="autoparallel")
    ax.set_xlabel("x1")
    ax.set_ylabel("p1")
    ax.legend()
    path = Path(path)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path
