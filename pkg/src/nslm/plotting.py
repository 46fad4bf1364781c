"""Report figures written next to the CSV/JSON output.

Every function takes plain data, draws with the non-interactive Agg backend
and saves to ``path``; the file format follows the extension.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

GOLDEN = (math.sqrt(5) - 1.0) / 2.0
STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.bbox": "tight",
}
METHOD_COLORS = {"ilmm-ep": "tab:blue", "ilmm-ip": "tab:orange"}


def _figure(width=5.0, ncols=1):
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, ncols, figsize=(width * ncols, width * GOLDEN))
    return fig, axes


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_residual_history(histories: dict, path, tol=None, title=None) -> Path:
    """``histories`` maps a label to its sequence of ``||f(x_k)||``."""
    fig, ax = _figure()
    for label, f_norms in histories.items():
        ax.semilogy(range(len(f_norms)), f_norms, marker="o", ms=3,
                    color=METHOD_COLORS.get(label), label=label)
    if tol is not None:
        ax.axhline(tol, color="gray", ls="--", lw=0.8, label=f"tol = {tol:g}")
    ax.set_xlabel("outer iteration k")
    ax.set_ylabel(r"$\|f(x_k)\|$")
    if title:
        ax.set_title(title)
    ax.legend()
    return _save(fig, path)


def plot_bench_summary(summary: list[dict], path) -> Path:
    """Median iterations and times per size, one bar pair per method.

    ``summary`` rows carry ``n``, ``ep_it``, ``ip_it``, ``ep_time``, ``ip_time``.
    """
    fig, (ax_it, ax_t) = _figure(width=4.0, ncols=2)
    sizes = [str(row["n"]) for row in summary]
    x = range(len(sizes))
    w = 0.38
    for offset, key, label in ((-w / 2, "ep", "ilmm-ep"), (w / 2, "ip", "ilmm-ip")):
        xs = [i + offset for i in x]
        ax_it.bar(xs, [row[f"{key}_it"] for row in summary], w, label=label, color=METHOD_COLORS[label])
        ax_t.bar(xs, [row[f"{key}_time"] for row in summary], w, label=label, color=METHOD_COLORS[label])
    for ax, ylabel in ((ax_it, "median iterations"), (ax_t, "median time [s]")):
        ax.set_xticks(list(x))
        ax.set_xticklabels(sizes)
        ax.set_xlabel("n")
        ax.set_ylabel(ylabel)
    ax_it.legend()
    return _save(fig, path)


def plot_order_fit(errors, fit, target: float, path) -> Path:
    """``log e_{k+1}`` against ``log e_k``: all iterates, the fitted run, and both slopes.

    ``fit`` is an :class:`nslm.ilmm.OrderFit`.
    """
    fig, ax = _figure()
    pairs = [(a, b) for a, b in zip(errors[:-1], errors[1:]) if a > 0 and b > 0]
    ax.plot([math.log10(a) for a, _ in pairs], [math.log10(b) for _, b in pairs], "o", ms=3,
            color="0.7", label="all iterates")
    xs = [math.log10(a) for a, _ in fit.pairs]
    ys = [math.log10(b) for _, b in fit.pairs]
    ax.plot(xs, ys, "o", ms=4, color="k", label="fitted run")
    lo, hi = min(xs), max(xs)
    ax.plot([lo, hi], [fit.intercept + fit.order * lo, fit.intercept + fit.order * hi], "-", lw=1,
            label=f"fit q = {fit.order:.2f}")
    ax.plot([lo, hi], [ys[0] + target * (lo - xs[0]), ys[0] + target * (hi - xs[0])], "--", lw=1,
            label=f"1 + sigma/2 = {target:.2f}")
    ax.set_xlabel(r"$\log_{10} e_k$")
    ax.set_ylabel(r"$\log_{10} e_{k+1}$")
    ax.legend()
    return _save(fig, path)
