"""Figures written next to the ``verify`` CSV output.

Uses the object-oriented matplotlib API with the Agg canvas so nothing
touches pyplot's global state.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.0,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "signbalance",
}
MAX_PATH_POINTS = 20_000


def _figure(width=5.0, height=3.6):
    fig = Figure(figsize=(width, height), dpi=120)
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path) -> Path:
    path = Path(path)
    # no Software/creation metadata, so reruns give identical bytes
    fig.savefig(path, metadata={"Software": None})
    return path


def partial_sum_path(trace, conv, path):
    """The signed partial-sum path in the plane, with block boundaries marked."""
    with matplotlib.rc_context(STYLE):
        fig = _figure(4.6, 4.6)
        ax = fig.add_subplot()
        sums = trace.sums[:, :2]
        step = max(1, len(sums) // MAX_PATH_POINTS)
        ax.plot(sums[::step, 0], sums[::step, 1], color="0.6", lw=0.6, label="partial sums")
        b = conv.boundary_sums[:, :2]
        ax.plot(b[:, 0], b[:, 1], "o-", ms=2.5, color="C0", label="block boundaries")
        ax.plot(b[-1, 0], b[-1, 1], "*", ms=9, color="C3", label="final boundary")
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def cauchy_modulus(conv, path):
    with matplotlib.rc_context(STYLE):
        fig = _figure()
        ax = fig.add_subplot()
        Ms = np.array(sorted(conv.cauchy))
        if len(Ms):
            actual = np.array([conv.cauchy[M][0] for M in Ms])
            predicted = np.array([conv.cauchy[M][1] for M in Ms])
            ax.loglog(Ms, predicted, "-", color="C3", label=f"sum of {conv.bound_constant}/(m+1)^2, m >= M")
            pos = actual > 0
            ax.loglog(Ms[pos], actual[pos], "o", ms=3, color="C0", label="measured modulus")
        ax.set_xlabel("starting level M")
        ax.set_ylabel("max distance between boundary sums")
        ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def block_residuals(conv, path):
    with matplotlib.rc_context(STYLE):
        fig = _figure()
        ax = fig.add_subplot()
        levels = np.asarray(conv.levels)
        ax.semilogy(levels, conv.bounds, "-", color="C3", label="bound")
        # zero residuals (exact cancellation) have no place on a log axis
        res, dev = conv.residual_norms, conv.intra_block_max_deviation
        ax.semilogy(levels[res > 0], res[res > 0], "o", ms=3, color="C0", label="block residual")
        ax.semilogy(levels[dev > 0], dev[dev > 0], "x", ms=3, color="C2", label="intra-block max deviation")
        ax.set_xlabel("level m")
        ax.set_ylabel("norm")
        ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def render_all(trace, conv, out_dir) -> list:
    out_dir = Path(out_dir)
    return [
        partial_sum_path(trace, conv, out_dir / "partial_sums.png"),
        cauchy_modulus(conv, out_dir / "cauchy.png"),
        block_residuals(conv, out_dir / "block_residuals.png"),
    ]
