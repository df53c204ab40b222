"""Self-contained SVG figures (text rendered as paths, no external assets)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .wave import energy  # noqa: E402

_RC = {"svg.fonttype": "path", "svg.hashsalt": "gzkstab"}


def _save(fig, path):
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def wave_figure(wave, path):
    """Profile and (phi, phi') phase portrait with energy level sets."""
    P = wave.params
    x = np.append(wave.x, P.L)
    phi = np.append(wave.phi, wave.phi[0])
    dphi = wave.derivative()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(x, phi, lw=1.5)
    ax1.set_xlabel("x")
    ax1.set_ylabel("phi")
    ax1.set_title(f"p={P.p:g}, c={P.c:g}, L={P.L:.6g} ({P.branch.value})")

    span = 1.3 * max(np.abs(wave.phi).max(), 1e-3)
    vspan = 1.3 * max(np.abs(dphi).max(), 1e-3)
    lo = -span if P.branch.value == "sign-changing" else -0.3 * span
    g = np.linspace(lo, span, 300)
    v = np.linspace(-vspan, vspan, 300)
    G, V = np.meshgrid(g, v)
    if float(P.p).is_integer():
        E = energy(G, V, P.p, P.c)
    else:
        E = energy(np.abs(G), V, P.p, P.c)
    ax2.contour(G, V, E, levels=25, linewidths=0.5, colors="0.6")
    ax2.contour(G, V, E, levels=[P.B], linewidths=0.8, colors="C1", linestyles="--")
    ax2.plot(np.append(wave.phi, wave.phi[0]), np.append(dphi, dphi[0]), "C0", lw=1.5)
    ax2.set_xlabel("phi")
    ax2.set_ylabel("phi'")
    ax2.set_title(f"phase portrait, B={P.B:.6g}")
    fig.tight_layout()
    return _save(fig, path)


def spectrum_figure(rep, path, title=None):
    lam = rep.eigenvalues
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(lam.real, lam.imag, ".", ms=3)
    ax.axvline(0.0, color="0.7", lw=0.5)
    ax.set_xlabel("Re lambda")
    ax.set_ylabel("Im lambda")
    ax.set_title(title or f"{rep.origin} spectrum, k={rep.k}")
    fig.tight_layout()
    return _save(fig, path)


def growth_figure(curve, path, threshold=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(curve.k_samples, curve.max_re_lambda, "o-", ms=3)
    ax.axvline(curve.k0, color="C3", lw=0.8, ls="--", label="k0")
    if threshold is not None:
        ax.axhline(threshold, color="0.5", lw=0.5, ls=":", label="threshold")
    ax.set_xlabel("k")
    ax.set_ylabel("max Re lambda")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)
