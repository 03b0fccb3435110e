"""Figure rendering for sweep results: one PNG per paper-style panel.

Figures are drawn from the aggregate table only, so anything plotted here
can be recomputed from agg.csv with any external tool. The optional gnuplot
scripts consume agg.csv directly.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_ESTIMATOR_LABELS = {
    "reg_mni": "regression MNI",
    "cls_mni": "classification MNI",
    "topt_post": "postprocessed (top-t + LS)",
    "threshold_post": "postprocessed (threshold + LS)",
    "rescaled": "rescaled (zero-shot)",
}


def _series(agg_rows: list[dict], sweep: str, estimator: str, xcol: str, ycol: str):
    xs, ys, errs = [], [], []
    for row in agg_rows:
        if row["sweep"] != sweep or row["estimator"] != estimator:
            continue
        if row.get(ycol) is None:
            continue
        xs.append(row[xcol])
        ys.append(row[ycol])
        errs.append(row.get(ycol.replace("_mean", "_std")) or 0.0)
    return xs, ys, errs


def render_figures(result, target: str | Path) -> list[Path]:
    """Render the risk-vs-n, support-magnitude, and few-shot panels to PNG."""
    target = Path(target)
    agg = result.agg_rows
    cfg = result.config
    written: list[Path] = []

    estimators = list(cfg.estimators)

    # Panel: regression risk vs n, log-log.
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    plotted = False
    for est in estimators:
        xs, ys, errs = _series(agg, "n", est, "n", "risk_mean")
        if not xs:
            continue
        ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=2, label=_ESTIMATOR_LABELS.get(est, est))
        plotted = True
    if plotted:
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("regression risk")
        ax.legend(fontsize=8)
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        path = target / "risk_vs_n.png"
        fig.savefig(path, dpi=150)
        written.append(path)
    plt.close(fig)

    # Panel: per-coordinate magnitudes of the sign-label interpolator vs n.
    support = () if cfg.signal.dense_gaussian else cfg.signal.support
    if support and "cls_mni" in estimators:
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        plotted = False
        for j in support:
            xs, ys, errs = _series(agg, "n", "cls_mni", "n", f"abs_theta_{j}_mean")
            if xs:
                ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=2, label=f"support index {j}")
                plotted = True
        for col, label in (
            ("max_abs_offsupport_head_mean", "max off-support, head"),
            ("max_abs_offsupport_tail_mean", "max off-support, tail"),
        ):
            xs, ys, errs = _series(agg, "n", "cls_mni", "n", col)
            if xs:
                ax.errorbar(xs, ys, yerr=errs, marker="x", linestyle="--", capsize=2, label=label)
                plotted = True
        if plotted:
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_xlabel("n")
            ax.set_ylabel("|estimated coefficient|")
            ax.legend(fontsize=8)
            ax.grid(True, which="both", alpha=0.3)
            fig.tight_layout()
            path = target / "support_vs_n.png"
            fig.savefig(path, dpi=150)
            written.append(path)
        plt.close(fig)

    # Panel: few-shot least-squares risk vs m at fixed n.
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    plotted = False
    for est in ("topt_post", "threshold_post"):
        xs, ys, errs = _series(agg, "m", est, "m", "risk_mean")
        if xs:
            ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=2, label=_ESTIMATOR_LABELS.get(est, est))
            plotted = True
    if plotted:
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("m (few-shot samples)")
        ax.set_ylabel("regression risk")
        ax.legend(fontsize=8)
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        path = target / "fewshot_vs_m.png"
        fig.savefig(path, dpi=150)
        written.append(path)
    plt.close(fig)

    return written


_GP_HEADER = """\
# Companion plot script; expects agg.csv in the same directory.
set datafile separator ","
set key autotitle columnhead
set grid
set logscale xy
"""


def _gp_filtered(ycol: str, estimator: str, xcol: str = "n", sweep: str = "n") -> str:
    cond = f'strcol("sweep") eq "{sweep}" && strcol("estimator") eq "{estimator}"'
    return (
        f'"agg.csv" using (column("{xcol}")):({cond} ? column("{ycol}") : NaN) '
        f'with linespoints title "{estimator}"'
    )


def emit_gnuplot_scripts(result, target: str | Path) -> list[Path]:
    """Write gnuplot scripts mirroring the PNG panels."""
    target = Path(target)
    cfg = result.config
    written = []

    risk_lines = [_gp_filtered("risk_mean", est) for est in cfg.estimators]
    script = _GP_HEADER + 'set xlabel "n"\nset ylabel "regression risk"\n'
    script += "plot \\\n  " + ", \\\n  ".join(risk_lines) + "\n"
    path = target / "risk_vs_n.gp"
    path.write_text(script, encoding="utf-8")
    written.append(path)

    support = () if cfg.signal.dense_gaussian else cfg.signal.support
    if support:
        mag_lines = [_gp_filtered(f"abs_theta_{j}_mean", "cls_mni") for j in support]
        mag_lines.append(_gp_filtered("max_abs_offsupport_head_mean", "cls_mni"))
        mag_lines.append(_gp_filtered("max_abs_offsupport_tail_mean", "cls_mni"))
        script = _GP_HEADER + 'set xlabel "n"\nset ylabel "|estimated coefficient|"\n'
        script += "plot \\\n  " + ", \\\n  ".join(mag_lines) + "\n"
        path = target / "support_vs_n.gp"
        path.write_text(script, encoding="utf-8")
        written.append(path)

    fewshot_ests = [e for e in cfg.estimators if e in ("topt_post", "threshold_post")]
    if fewshot_ests and cfg.m_grid:
        ls_lines = [_gp_filtered("risk_mean", est, xcol="m", sweep="m") for est in fewshot_ests]
        script = _GP_HEADER + 'set xlabel "m"\nset ylabel "regression risk"\n'
        script += "plot \\\n  " + ", \\\n  ".join(ls_lines) + "\n"
        path = target / "fewshot_vs_m.gp"
        path.write_text(script, encoding="utf-8")
        written.append(path)
    return written
