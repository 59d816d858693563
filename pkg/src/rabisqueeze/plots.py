"""Figure rendering for the CLI's --plot flag.

Each experiment's dataset gets one PNG next to (or instead of) the data
file.  matplotlib is imported lazily and forced onto the Agg backend so
plotting works headless and stays out of the import path of the library.
"""

from __future__ import annotations

from collections import defaultdict

from .experiments import Dataset


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def _column(ds: Dataset, name: str) -> list:
    idx = ds.columns.index(name)
    return [row[idx] for row in ds.rows]


def _plot_spectrum(ds: Dataset, plt):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    series: dict[int, list[tuple[float, float]]] = defaultdict(list)
    for delta, level, _, _, err in ds.rows:
        series[level].append((delta, err))
    for level, pts in sorted(series.items()):
        pts.sort()
        ax.semilogy([x for x, _ in pts], [max(y, 1e-18) for _, y in pts],
                    marker="o", label=f"level {level}")
    ax.set_xlabel("detuning / mode frequency")
    ax.set_ylabel("|closed-form - numeric| energy / mode frequency")
    ax.set_title("Dispersive energies vs numeric diagonalization")
    ax.legend()
    return fig


_GROUND_CURVES = [
    ("s_disp_minus_db", "lowered branch"),
    ("s_disp_plus_db", "raised branch"),
    ("s_rabi_approx_db", "approx ground"),
    ("s_rabi_exact_db", "exact ground"),
]


def _plot_ground_squeezing(ds: Dataset, plt):
    deltas = sorted({row[1] for row in ds.rows})
    fig, axes = plt.subplots(1, len(deltas), figsize=(4.0 * len(deltas), 3.6),
                             sharey=True, squeeze=False)
    for ax, delta in zip(axes[0], deltas):
        rows = [r for r in ds.rows if r[1] == delta and r[-1] == "ok"]
        rows.sort(key=lambda r: r[0])
        gs = [r[0] for r in rows]
        for name, label in _GROUND_CURVES:
            idx = ds.columns.index(name)
            ax.plot(gs, [r[idx] for r in rows], marker=".", label=label)
        ax.set_xlabel("coupling / mode frequency")
        ax.set_title(f"detuning = {delta:g}")
    axes[0][0].set_ylabel("squeezing (dB)")
    axes[0][-1].legend(fontsize="small")
    fig.suptitle("Ground-state squeezing")
    return fig


def _plot_protocol_family(ds: Dataset, plt):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    series = defaultdict(list)
    for n, s, err, variant, _, jitter in ds.rows:
        series[(variant, jitter)].append((n, s, err))
    for (variant, jitter), pts in sorted(series.items()):
        pts.sort()
        ns = [p[0] for p in pts]
        ss = [p[1] for p in pts]
        errs = [p[2] for p in pts]
        label = variant if jitter == 0 else f"{variant}, jitter {jitter:g}"
        if any(e > 0 for e in errs):
            ax.errorbar(ns, ss, yerr=errs, marker="o", capsize=3, label=label)
        else:
            ax.plot(ns, ss, marker="o", label=label)
    ax.set_xlabel("cycle")
    ax.set_ylabel("squeezing (dB)")
    gamma = ds.metadata.get("gamma", "0")
    ax.set_title(f"Flip protocol squeezing (loss rate {gamma}/dwell)")
    ax.legend(fontsize="small")
    return fig


_RENDERERS = {
    "spectrum": _plot_spectrum,
    "ground-squeezing": _plot_ground_squeezing,
    "protocol": _plot_protocol_family,
    "noisy-protocol": _plot_protocol_family,
    "jitter-ensemble": _plot_protocol_family,
}


def render(ds: Dataset, path: str) -> str:
    """Write the dataset's figure to path (PNG); returns the path."""
    plt = _pyplot()
    experiment = ds.metadata.get("experiment", "")
    if experiment not in _RENDERERS:
        raise ValueError(f"no renderer for experiment {experiment!r}")
    fig = _RENDERERS[experiment](ds, plt)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
