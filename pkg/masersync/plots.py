"""
Static SVG figures of sweep rows. Presentation only, never compared
byte for byte.
"""
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from masersync import errors  # noqa: E402
from masersync.analytics import trapping_angles  # noqa: E402
from masersync.types import SweepRow  # noqa: E402

logger = logging.getLogger(__name__)


def _ok(rows: List[SweepRow], column: str) -> List[SweepRow]:
    return [r for r in rows if r.status == "ok" and getattr(r, column) is not None]


def _save(fig, fpath):
    try:
        fig.savefig(fpath, format="svg")
    except OSError as e:
        raise errors.OutputError(fpath, e) from e
    finally:
        plt.close(fig)


def plot_sync_vs_theta(rows: List[SweepRow], fpath):
    """ quantum S solid, semiclassical S dashed, one colour per (coupling, eps) """
    series = defaultdict(list)
    for r in _ok(rows, "S_quantum"):
        series[(r.coupling.value, r.N, r.eps)].append(r)
    fig, ax = plt.subplots(figsize=(6, 4))
    for (kind, N, eps), group in sorted(series.items()):
        group = sorted(group, key=lambda r: r.theta)
        line, = ax.plot([r.theta for r in group], [r.S_quantum for r in group],
                        label=f"{kind} N={N:g} eps={eps:g}")
        semi = [r for r in group if r.S_semiclassical is not None]
        if semi:
            ax.plot([r.theta for r in semi], [r.S_semiclassical for r in semi],
                    linestyle="--", color=line.get_color())
    ax.set_xlabel("Theta")
    ax.set_ylabel("S")
    ax.legend(fontsize="small")
    _save(fig, fpath)


def plot_mi_vs_eps(rows: List[SweepRow], fpath):
    series = defaultdict(list)
    for r in _ok(rows, "mutual_info"):
        if r.eps > 0 and r.mutual_info > 0:
            series[(r.coupling.value, r.N, r.theta)].append(r)
    fig, ax = plt.subplots(figsize=(6, 4))
    for (kind, N, theta), group in sorted(series.items()):
        group = sorted(group, key=lambda r: r.eps)
        ax.loglog([r.eps for r in group], [r.mutual_info for r in group],
                  marker="o", label=f"{kind} N={N:g} Theta={theta:g}")
    ax.set_xlabel("eps")
    ax.set_ylabel("I")
    ax.legend(fontsize="small")
    _save(fig, fpath)


def plot_log_neg_vs_theta(rows: List[SweepRow], fpath):
    """ trapping angles of the first Fock levels as dotted lines """
    series = defaultdict(list)
    for r in _ok(rows, "log_negativity"):
        series[(r.coupling.value, r.N, r.eps)].append(r)
    fig, ax = plt.subplots(figsize=(6, 4))
    thetas = [r.theta for group in series.values() for r in group]
    for (kind, N, eps), group in sorted(series.items()):
        group = sorted(group, key=lambda r: r.theta)
        ax.plot([r.theta for r in group], [r.log_negativity for r in group],
                label=f"{kind} N={N:g} eps={eps:g}")
    if thetas:
        Ns = sorted({key[1] for key in series})
        for angle in trapping_angles(5, 2):
            for N in Ns:
                theta = angle.theta(N)
                if min(thetas) <= theta <= max(thetas):
                    ax.axvline(theta, linestyle=":", color="grey", linewidth=0.8)
    ax.set_xlabel("Theta")
    ax.set_ylabel("E_N")
    ax.legend(fontsize="small")
    _save(fig, fpath)


def emit_plots(rows: List[SweepRow], config, out: Path) -> Dict[str, Path]:
    out = Path(out)
    paths = {}
    m = config.measures
    if m.S and config.theta is not None:
        paths["plot_sync"] = out / f"{config.name}_sync.svg"
        plot_sync_vs_theta(rows, paths["plot_sync"])
    if m.mutual_info:
        paths["plot_mi"] = out / f"{config.name}_mi.svg"
        plot_mi_vs_eps(rows, paths["plot_mi"])
    if m.log_negativity and config.theta is not None:
        paths["plot_log_neg"] = out / f"{config.name}_log_neg.svg"
        plot_log_neg_vs_theta(rows, paths["plot_log_neg"])
    logger.info("wrote %s plots", len(paths))
    return paths
