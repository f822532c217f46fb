"""Matplotlib renderings of the CLI reports, written next to the data files."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["profile_figure", "bound_figure", "scan_figure", "verify_figure"]

_DPI = 150


def profile_figure(rows: list[dict], path: str) -> None:
    """Energy density per particle along the time axis, one curve per n."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for n in sorted({r["n"] for r in rows}):
        sel = [r for r in rows if r["n"] == n]
        t = np.array([r["t"] for r in sel])
        rho = np.array([r["rho"] for r in sel])
        err = np.array([r["rho_error"] for r in sel])
        (line,) = ax.plot(t, rho, label=f"n = {n}")
        ax.fill_between(t, rho - err, rho + err, alpha=0.25,
                        color=line.get_color(), linewidth=0)
    ax.axhline(0.0, color="0.5", linewidth=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\rho(t) = \langle T^{00}(t,x)\rangle / n$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def bound_figure(rows: list[dict], path: str) -> None:
    """Bound versus mass, with the massless limit for reference."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    mu = np.array([r["mu"] for r in rows])
    rhs = np.array([r["rhs"] for r in rows])
    order = np.argsort(mu)
    ax.semilogx(mu[order], rhs[order], "o-", label="bound")
    ax.axhline(rows[0]["massless_limit"], color="0.4", linestyle="--",
               label="massless limit")
    ax.set_xlabel(r"$\mu$")
    ax.set_ylabel("lower bound")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def scan_figure(rows: list[dict], gamma_star: float, path: str) -> None:
    """Minimized origin energy against separation, one curve per width."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for alpha in sorted({r["alpha"] for r in rows}):
        sel = sorted((r for r in rows if r["alpha"] == alpha),
                     key=lambda r: r["gamma"])
        ax.plot([r["gamma"] for r in sel], [r["min_value"] for r in sel],
                "o-", markersize=3, label=rf"$\alpha$ = {alpha}")
    ax.axvline(gamma_star, color="0.4", linestyle="--",
               label=rf"$\gamma^*$ = {gamma_star:.4f}")
    ax.axhline(0.0, color="0.5", linewidth=0.8)
    ax.set_xlabel(r"$\gamma$")
    ax.set_ylabel("minimized origin energy density")
    ax.set_yscale("symlog", linthresh=1e-3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def verify_figure(rows: list[dict], path: str) -> None:
    """Margins of the bound verification, one bar per state."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    margins = [r["margin"] for r in rows]
    errors = [r["lhs_error"] + r["rhs_error"] for r in rows]
    colors = ["tab:green" if r["passed"] else "tab:red" for r in rows]
    pos = np.arange(len(rows))
    ax.bar(pos, margins, yerr=errors, color=colors)
    ax.axhline(0.0, color="0.3", linewidth=0.8)
    ax.set_xticks(pos)
    ax.set_xticklabels([str(i) for i in pos], fontsize=7)
    ax.set_xlabel("state index")
    ax.set_ylabel("margin = lhs - rhs")
    if margins and min(margins) > 0:
        ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
