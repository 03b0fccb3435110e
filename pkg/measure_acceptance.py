"""One-off measurement of the scale-dependent acceptance quantities (not part of the package)."""
import dataclasses
import json
import math
import time

import numpy as np

from mnishift import harness

OUT = {}
t_all = time.time()


def med(vals):
    return float(np.median(vals))


def rows_of(res, sweep, est, n=None):
    return [
        r
        for r in res.rows
        if r["sweep"] == sweep and r["estimator"] == est and (n is None or r["n"] == n) and not r["error"]
    ]


# --- fig2i -----------------------------------------------------------------
t0 = time.time()
fig2i = harness.preset("fig2i")
res_i = harness.run_sweep(fig2i, jobs=2)
OUT["fig2i_elapsed"] = time.time() - t0
OUT["fig2i_failed"] = len(res_i.failed_cells)

grid = fig2i.n_grid
OUT["fig2i_support_recovery_rate"] = {
    n: float(np.mean([r["support_recovery"] for r in rows_of(res_i, "n", "cls_mni", n)])) for n in grid
}
OUT["fig2i_topt_median_risk"] = {n: med([r["risk"] for r in rows_of(res_i, "n", "topt_post", n)]) for n in grid}
OUT["fig2i_reg_median_risk"] = {n: med([r["risk"] for r in rows_of(res_i, "n", "reg_mni", n)]) for n in grid}
OUT["fig2i_cls_median_risk"] = {n: med([r["risk"] for r in rows_of(res_i, "n", "cls_mni", n)]) for n in grid}

cls_1600 = rows_of(res_i, "n", "cls_mni", 1600)
for j in (0, 1):
    OUT[f"fig2i_su{j}_median_1600"] = med([r[f"su_{j}"] for r in cls_1600])
    OUT[f"fig2i_pred_su{j}_median_1600"] = med([r[f"pred_su_{j}"] for r in cls_1600])
OUT["fig2i_pred_limit_risk_median_1600"] = med([r["pred_limit_risk"] for r in cls_1600])

# --- fig2ii ----------------------------------------------------------------
t0 = time.time()
fig2ii = harness.preset("fig2ii")
res_ii = harness.run_sweep(fig2ii, jobs=2)
OUT["fig2ii_elapsed"] = time.time() - t0
OUT["fig2ii_failed"] = len(res_ii.failed_cells)
OUT["fig2ii_reg_median_risk"] = {n: med([r["risk"] for r in rows_of(res_ii, "n", "reg_mni", n)]) for n in grid}
OUT["fig2ii_cls_median_risk"] = {n: med([r["risk"] for r in rows_of(res_ii, "n", "cls_mni", n)]) for n in grid}
OUT["fig2ii_topt_median_risk"] = {n: med([r["risk"] for r in rows_of(res_ii, "n", "topt_post", n)]) for n in grid}
OUT["fig2ii_support_recovery_rate"] = {
    n: float(np.mean([r["support_recovery"] for r in rows_of(res_ii, "n", "cls_mni", n)])) for n in grid
}

# --- tuned strength 2/pi ------------------------------------------------------
t0 = time.time()
scale = math.sqrt((2 / math.pi) / 1.25)
tuned = dataclasses.replace(
    fig2i,
    signal=harness.SignalConfig(support=(0, 1), coeffs=(1.0 * scale, -0.5 * scale)),
    n_grid=(100, 1600),
    m_grid=(),
    estimators=("reg_mni", "cls_mni"),
)
res_t = harness.run_sweep(tuned, jobs=2)
OUT["tuned_elapsed"] = time.time() - t0
OUT["tuned_cls_median_risk"] = {n: med([r["risk"] for r in rows_of(res_t, "n", "cls_mni", n)]) for n in (100, 1600)}

# --- isotropic50 / poly_u25 --------------------------------------------------
for name in ("isotropic50", "poly_u25"):
    t0 = time.time()
    cfg = harness.preset(name)
    res = harness.run_sweep(cfg, jobs=2)
    OUT[f"{name}_elapsed"] = time.time() - t0
    OUT[f"{name}_failed"] = len(res.failed_cells)
    seps = [r["separation_ratio"] for r in rows_of(res, "n", "cls_mni", 1600)]
    OUT[f"{name}_sep_gt1_rate_1600"] = float(np.mean([s > 1 for s in seps]))
    OUT[f"{name}_sep_median_1600"] = med(seps)
    OUT[f"{name}_support_recovery_rate"] = {
        n: float(np.mean([r["support_recovery"] for r in rows_of(res, "n", "cls_mni", n)])) for n in grid
    }

# --- ansatz criterion 9 -------------------------------------------------------
t0 = time.time()
ratios = {}
for n in grid:
    vals = [harness.run_ansatz_point(fig2i, n, d)["ratio"] for d in range(3)]
    ratios[n] = med(vals)
OUT["ansatz_median_ratio"] = ratios
OUT["ansatz_band"] = max(ratios.values()) / min(ratios.values())
OUT["ansatz_elapsed"] = time.time() - t0

OUT["total_elapsed"] = time.time() - t_all
print(json.dumps(OUT, indent=2, default=str))
with open("/tmp/acceptance_measurements.json", "w") as fh:
    json.dump(OUT, fh, indent=2, default=str)
