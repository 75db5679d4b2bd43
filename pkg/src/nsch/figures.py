"""Figure rendering for the CLI report path (file output only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dynamics import State
from .exceptions import IoError

__all__ = [
    "energy_figure",
    "fields_figure",
    "sigma_compare_figure",
    "twin_figure",
    "potential_figure",
]


def _save(fig, path):
    try:
        fig.savefig(path, dpi=130, bbox_inches="tight")
    except OSError as exc:
        raise IoError(f"cannot write figure {path}: {exc}") from None
    finally:
        plt.close(fig)


def _col(header, data, name):
    return data[:, header.index(name)]


def energy_figure(header, data, path):
    """Energy pieces, dissipation channels, and the residual over time."""
    t = _col(header, data, "t")
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
    for name in ("E_total", "E_kinetic", "E_gradient", "E_potential",
                 "E_entropy", "E_cross"):
        ax0.plot(t, _col(header, data, name), label=name)
    ax0.set_xlabel("t")
    ax0.set_title("energy")
    ax0.legend(fontsize=7)

    for name in ("D_visc", "D_mu", "D_fisher", "D_logistic", "R_source"):
        ax1.plot(t, _col(header, data, name), label=name)
    res = np.abs(_col(header, data, "residual_energy"))
    ax1.plot(t, res, "k--", label="|residual|")
    ax1.set_xlabel("t")
    ax1.set_title("dissipation / sources")
    ax1.legend(fontsize=7)
    _save(fig, path)


def fields_figure(s: State, path):
    """Heatmaps of the current fields."""
    g = s.grid
    panels = [("phi", s.phi.phys), ("sigma", s.sigma.phys)]
    if s.v is not None:
        speed = np.hypot(s.v.x.phys, s.v.y.phys)
        panels.append(("|v|", speed))
    fig, axes = plt.subplots(1, len(panels), figsize=(4 * len(panels), 3.4))
    if len(panels) == 1:
        axes = [axes]
    extent = (0.0, g.Lx, 0.0, g.Ly)
    for ax, (name, arr) in zip(axes, panels):
        im = ax.imshow(arr.T, origin="lower", extent=extent, aspect="auto")
        ax.set_title(f"{name} at t={s.t:.4g}")
        fig.colorbar(im, ax=ax, shrink=0.85)
    _save(fig, path)


def sigma_compare_figure(t_a, min_a, t_b, min_b, labels, path):
    """sigma_min trajectories of the two concentration equation forms."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t_a, min_a, label=labels[0])
    ax.plot(t_b, min_b, label=labels[1])
    ax.axhline(0.0, color="k", linewidth=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("min sigma")
    ax.legend()
    _save(fig, path)


def twin_figure(ladder: dict, path):
    """W(t) for each perturbation size delta, log scale."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for delta, series in sorted(ladder.items(), reverse=True):
        ts = [p[0] for p in series]
        ws = [max(p[1], 1e-300) for p in series]
        ax.semilogy(ts, ws, label=f"delta={delta:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("W")
    ax.legend()
    _save(fig, path)


def potential_figure(pots, path):
    """Regularized potential derivative curves for a family of (eps, chi)."""
    r = np.linspace(-3.0, 3.0, 1201)
    fig, ax = plt.subplots(figsize=(6, 4))
    for rp in pots:
        ax.plot(r, rp.psi0_reg_prime(r),
                label=f"eps={rp.eps:g}, chi={rp.chi:g}")
    ax.set_xlabel("r")
    ax.set_ylabel("regularized derivative")
    ax.legend(fontsize=7)
    _save(fig, path)
