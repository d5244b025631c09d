"""SVG line plots for the command-line reports.

Figures are built on ``matplotlib.figure.Figure`` directly so nothing
touches pyplot's global state, and saved with a fixed hash salt and no date
stamp so identical data gives byte-identical files.
"""

import matplotlib
from matplotlib.figure import Figure
import numpy as np

GOLDEN = (np.sqrt(5) - 1.0) / 2.0
FIG_WIDTH = 6.4

STYLE = {
    "font.family": "sans-serif",
    "font.size": 9,
    "axes.labelsize": 10,
    "axes.prop_cycle": matplotlib.cycler(color=["#d62728", "#2ca02c", "#1f77b4", "#ff7f0e", "#9467bd"]),
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "svg.hashsalt": "csdyn",
    "svg.fonttype": "none",
}

LINESTYLES = ["-", "--", ":", "-.", (0, (3, 1, 1, 1))]


def _figure():
    fig = Figure(figsize=(FIG_WIDTH, FIG_WIDTH * GOLDEN))
    ax = fig.add_subplot()
    ax.grid(True, lw=0.3, alpha=0.5)
    return fig, ax


def _save(fig, path):
    with matplotlib.rc_context({"svg.hashsalt": STYLE["svg.hashsalt"]}):
        fig.savefig(path, format="svg", metadata={"Date": None})


def line_plot(path, t, series, xlabel="t", ylabel="", title=None):
    """One polyline per entry of ``series`` (label -> values) against ``t``.

    NaN values break the line, which is how singular grid points show up.
    """
    with matplotlib.rc_context(STYLE):
        fig, ax = _figure()
        for i, (label, y) in enumerate(series.items()):
            ax.plot(t, y, ls=LINESTYLES[i % len(LINESTYLES)], label=label)
        ax.axhline(0.0, color="0.3", lw=0.5)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
        _save(fig, path)
    return path


def plot_trajectory(path, t, rho11, rho12):
    return line_plot(
        path,
        t,
        {"rho_11": rho11, "Re rho_12": np.real(rho12), "Im rho_12": np.imag(rho12)},
        ylabel="density-matrix element",
    )


def plot_rates(path, t, rates):
    series = {
        "Omega": rates.omega,
        "gamma_-": rates.gamma_minus,
        "gamma_+": rates.gamma_plus,
        "gamma_d": rates.gamma_d,
    }
    return line_plot(path, t, series, ylabel="rate")


def plot_sweep(path, axis, values, summaries, rate="gamma_minus"):
    """Overlay one rate curve per sweep point."""
    label = {"delta": "Delta", "temp": "T", "n": "N"}[axis]
    series = {f"{label} = {v}": getattr(s.rates, rate) for v, s in zip(values, summaries)}
    return line_plot(path, summaries[0].grid, series, ylabel=rate.replace("gamma_minus", "gamma_-"))


def plot_rhp(path, t, n_values):
    return line_plot(path, t, {"N(t)": n_values}, ylabel="RHP indicator")
