"""
SVG figures for sweep results
Log-log error plots with reference-slope guides, and solution profile plots.
The CSV stays the authoritative output; these are for reading results at a glance.
"""

from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from errors import ConfigurationError  # noqa: E402
from run_logging import log_status  # noqa: E402

_MARKERS = ("o", "s", "^", "D", "v", "P")


def _writeout(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
    plt.close(fig)
    log_status("PLOT", f"wrote {path}")
    return path


def write_loglog_svg(path, series: Dict[str, Sequence[Tuple[float, float]]],
                     reference_slopes: Sequence[float] = (1.0,), title="", x_label="1 - s",
                     y_label="error") -> Path:
    """
    series: label -> [(x, error), ...]; non-positive or non-finite points are dropped
    reference_slopes: dashed guides x^p anchored at the first point of the first series
    """
    cleaned = {}
    for label, points in series.items():
        data = np.asarray(list(points), dtype=float).reshape(-1, 2)
        keep = np.all(np.isfinite(data), axis=1) & np.all(data > 0.0, axis=1)
        data = data[keep]
        if data.size:
            cleaned[label] = data[np.argsort(data[:, 0])]
    if not cleaned:
        raise ConfigurationError("nothing to plot: every series is empty or non-positive")

    fig, ax = plt.subplots(figsize=(7, 6))
    for k, (label, data) in enumerate(cleaned.items()):
        ax.loglog(data[:, 0], data[:, 1], marker=_MARKERS[k % len(_MARKERS)], ms=6.0, label=label)

    anchor = next(iter(cleaned.values()))
    x0, y0 = anchor[0]
    xs = np.array([anchor[0, 0], anchor[-1, 0]])
    for p in reference_slopes:
        ax.loglog(xs, y0 * (xs / x0) ** p, "k--", lw=1.0, label=f"slope {p:g}")

    ax.grid(True, which="major")
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    if title:
        ax.set_title(title)
    ax.legend(loc="best")
    return _writeout(fig, path)


def write_profile_svg(path, curves: Dict[str, Tuple[Sequence[float], Sequence[float]]],
                      title="", interface: Optional[float] = None) -> Path:
    """curves: label -> (x, u(x)); a dotted vertical line marks the interface when given"""
    if not curves:
        raise ConfigurationError("nothing to plot: no profiles given")

    fig, ax = plt.subplots(figsize=(8, 5))
    for label, (x, u) in curves.items():
        ax.plot(np.asarray(x, dtype=float), np.asarray(u, dtype=float), lw=1.2, label=label)
    if interface is not None:
        ax.axvline(interface, color="0.5", ls=":", lw=1.0)
    ax.axhline(0.0, color="0.8", lw=0.8)
    ax.set_xlim(0.0, 1.0)
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.grid(True)
    if title:
        ax.set_title(title)
    ax.legend(loc="best")
    return _writeout(fig, path)


def plot_slope_fits(out_dir, fits) -> list:
    """One log-log figure per (group, against, h) from ConvergenceAnalyzer.fits()"""
    figures = {}
    for fit in fits:
        key = (fit.model, fit.b, fit.sigma1, fit.sigma2, fit.alpha, fit.against, fit.h)
        figures.setdefault(key, {})[fit.metric] = fit.points

    written = []
    for (model, b, s1, s2, alpha, against, h), series in figures.items():
        stem = f"{model}_b{b:g}_s{s1:g}_{s2:g}_a{alpha:g}_vs_{'h' if against == 'h' else '1ms'}"
        if h is not None:
            stem += f"_h{h:.3g}"
        title = f"{model}: b={b:g}, sigma=({s1:g}, {s2:g}), alpha={alpha:g}"
        try:
            written.append(write_loglog_svg(Path(out_dir) / f"{stem}.svg", series, title=title,
                                            x_label="h" if against == "h" else "1 - s"))
        except ConfigurationError as exc:
            log_status("PLOT", f"skipped {stem}: {exc}", "warn")
    return written
