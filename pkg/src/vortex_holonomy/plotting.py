"""SVG figures for the command-line reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "vortex-holonomy"
matplotlib.rcParams["svg.fonttype"] = "none"

WINDOW = (-np.pi / 4, 3 * np.pi / 4)


def save_svg(fig, path, timestamp: bool = False) -> None:
    """Write ``fig`` as SVG; without ``timestamp`` the output is byte-stable."""
    meta = {} if timestamp else {"Date": None}
    fig.savefig(path, format="svg", metadata=meta)
    plt.close(fig)


def window_phi(phi1: np.ndarray) -> np.ndarray:
    """Map ``phi1`` (period ``pi``) into the display window ``[-pi/4, 3pi/4)``."""
    return np.mod(np.asarray(phi1) - WINDOW[0], np.pi) + WINDOW[0]


def _break_wraps(x: np.ndarray, y: np.ndarray, jump: float):
    cut = np.where(np.abs(np.diff(x)) > jump)[0]
    if cut.size == 0:
        return x, y
    x = np.insert(x.astype(float), cut + 1, np.nan)
    y = np.insert(y.astype(float), cut + 1, np.nan)
    return x, y


def portrait_chart(lines, highlights=(), title: str = "", labels=()):
    """Flow lines in the ``(phi1, I1)`` window.

    ``lines`` and ``highlights`` are sequences of ``(I1, phi1)`` sample arrays.
    """
    fig, ax = plt.subplots(figsize=(6.4, 6.0))
    for ln in lines:
        x, y = _break_wraps(window_phi(ln[:, 1]), ln[:, 0], 0.5 * np.pi)
        ax.plot(x, y, color="0.55", lw=0.6)
    cmap = plt.get_cmap("tab10")
    for n, ln in enumerate(highlights):
        x, y = _break_wraps(window_phi(ln[:, 1]), ln[:, 0], 0.5 * np.pi)
        lab = labels[n] if n < len(labels) else None
        ax.plot(x, y, color=cmap(n % 10), lw=1.6, label=lab)
    ax.set_xlim(*WINDOW)
    ax.set_xlabel(r"$\varphi_1$")
    ax.set_ylabel(r"$I_1$")
    ax.set_xticks([-np.pi / 4, 0, np.pi / 4, np.pi / 2, 3 * np.pi / 4])
    ax.set_xticklabels([r"$-\pi/4$", "0", r"$\pi/4$", r"$\pi/2$", r"$3\pi/4$"])
    if title:
        ax.set_title(title)
    if labels and highlights:
        ax.legend(fontsize=7, loc="best")
    fig.tight_layout()
    return fig


def portrait_surface(lines_xyz, surface: str, mu: float, title: str = ""):
    """Flow lines drawn on the embedded sphere or hyperboloid sheet."""
    fig = plt.figure(figsize=(6.0, 6.0))
    ax = fig.add_subplot(projection="3d")
    m = abs(mu)
    u = np.linspace(0, 2 * np.pi, 37)
    if surface == "sphere":
        v = np.linspace(-m, m, 19)
        rad = np.sqrt(np.maximum(m * m - v * v, 0))
    else:
        top = max([m * 3] + [np.nanmax(np.abs(ln[:, 2])) for ln in lines_xyz if len(ln)])
        sheet = 1.0
        if lines_xyz and len(lines_xyz[0]):
            sheet = np.sign(lines_xyz[0][0, 2])
        v = sheet * np.linspace(m, top, 19)
        rad = np.sqrt(np.maximum(v * v - m * m, 0))
    X = np.outer(rad, np.cos(u))
    Y = np.outer(rad, np.sin(u))
    Z = np.outer(v, np.ones_like(u))
    ax.plot_wireframe(X, Y, Z, color="0.85", lw=0.4)
    for ln in lines_xyz:
        ax.plot(ln[:, 0], ln[:, 1], ln[:, 2], color="C0", lw=0.8)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    if title:
        ax.set_title(title)
    return fig


def vortex_paths(t, z, snapshot_idx=(), title: str = ""):
    """Vortex tracks in the plane with polygon snapshots.

    ``z`` has shape ``(n_times, n_vortices)`` (complex).
    """
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    n = z.shape[1]
    for a in range(n):
        ax.plot(z[:, a].real, z[:, a].imag, lw=0.8, label=f"vortex {a + 1}")
    for k in snapshot_idx:
        ring = np.append(z[k], z[k, 0])
        ax.plot(ring.real, ring.imag, color="0.4", lw=0.6)
        ax.scatter(z[k].real, z[k].imag, s=8, color="k", zorder=3)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(fontsize=7)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig
