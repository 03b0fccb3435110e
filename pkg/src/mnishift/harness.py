"""Experiment orchestration: sweeps over n and m, seeding, aggregation, CSV IO.

A sweep is a pure function of (config, base_seed): every cell derives its
RNG streams from (base_seed, config hash, sweep tag, grid point, draw), so
cells can run in any order or in parallel, extending the draw count leaves
existing cells unchanged, and identical runs produce identical tables.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .covariance import (
    DEFAULT_DIM_CAP,
    CovarianceSpec,
    Explicit,
    Isotropic,
    PolyDecay,
    Provenance,
    Spiked,
    build_ensemble,
    k_star,
    provenance_from_json,
    provenance_to_json,
)
from .errors import ConfigError, UnknownPreset, UnsupportedRegime
from .estimators import (
    Estimate,
    EstimateKind,
    GramFactor,
    TopT,
    Threshold,
    gram_factorize,
    mni,
    recover_support,
    rescale_zero_shot,
    restricted_least_squares,
)
from .metrics import (
    decompose_lemma2,
    empirical_b,
    excess_risk,
    quadratic_risk,
    separation_ratio,
    survival_contamination,
)
from .signal import Signal, make_dense_gaussian, make_sparse
from .synth import Dataset, FewShotSet, SeedRecord, sample_dataset, sample_fewshot
from .theory import (
    LowerAnsatz,
    Upper,
    bias_bounds_lemma3,
    limiting_risk_general,
    limiting_survival,
    taskshift_bound_theorem2,
)

logger = logging.getLogger(__name__)

ESTIMATOR_NAMES = ("reg_mni", "cls_mni", "topt_post", "threshold_post", "rescaled")

_TAG_N_SWEEP = 0
_TAG_M_SWEEP = 1
_TAG_ANSATZ = 2


@dataclass(frozen=True)
class SignalConfig:
    """Sparse support/coefficients, or a dense Gaussian signal drawn per draw."""

    support: tuple[int, ...] = ()
    coeffs: tuple[float, ...] = ()
    dense_gaussian: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: Provenance
    signal: SignalConfig
    n_grid: tuple[int, ...]
    m_grid: tuple[int, ...]
    draws: int = 10
    base_seed: int = 0
    fewshot_sigma2: float = 1.0
    label_noise: float = 0.0
    estimators: tuple[str, ...] = ("reg_mni", "cls_mni", "topt_post")
    fixed_n_for_m_sweep: int = 1000
    fewshot_m: int = 100
    rank_constant: float = 2.0
    threshold_coeff: float = 1.0
    dim_cap: int = DEFAULT_DIM_CAP

    def validate(self) -> None:
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError("n_grid must be non-empty and strictly ascending")
        if self.m_grid and any(b <= a for a, b in zip(self.m_grid, self.m_grid[1:])):
            raise ConfigError("m_grid must be strictly ascending")
        if any(n < 2 for n in self.n_grid):
            raise ConfigError("n_grid entries must be >= 2")
        if any(m < 1 for m in self.m_grid):
            raise ConfigError("m_grid entries must be >= 1")
        if self.draws < 1:
            raise ConfigError("draws must be >= 1")
        if self.base_seed < 0:
            raise ConfigError("base_seed must be a non-negative integer")
        if not self.estimators:
            raise ConfigError("at least one estimator must be requested")
        unknown = set(self.estimators) - set(ESTIMATOR_NAMES)
        if unknown:
            raise ConfigError(f"unknown estimators: {sorted(unknown)}")
        if not 0.0 <= self.label_noise < 0.5:
            raise ConfigError("label_noise must lie in [0, 0.5)")
        if self.fewshot_sigma2 < 0.0:
            raise ConfigError("fewshot_sigma2 must be >= 0")
        if self.fixed_n_for_m_sweep < 2:
            raise ConfigError("fixed_n_for_m_sweep must be >= 2")
        if self.fewshot_m < 1:
            raise ConfigError("fewshot_m must be >= 1")
        if isinstance(self.ensemble, Explicit):
            raise ConfigError("sweeps need a constructible ensemble, not an explicit spectrum")
        sig = self.signal
        if sig.dense_gaussian:
            if sig.support or sig.coeffs:
                raise ConfigError("dense_gaussian excludes an explicit support")
            needs_support = set(self.estimators) & {"topt_post", "threshold_post", "rescaled"}
            if needs_support:
                raise ConfigError(
                    f"estimators {sorted(needs_support)} need a sparse signal"
                )
        else:
            if not sig.support:
                raise ConfigError("a sparse signal needs a non-empty support")
            if len(sig.support) != len(sig.coeffs):
                raise ConfigError("support and coeffs must have equal length")

    def to_json(self) -> dict:
        sig = (
            {"dense_gaussian": True}
            if self.signal.dense_gaussian
            else {"support": list(self.signal.support), "coeffs": list(self.signal.coeffs)}
        )
        return {
            "ensemble": provenance_to_json(self.ensemble),
            "signal": sig,
            "n_grid": list(self.n_grid),
            "m_grid": list(self.m_grid),
            "draws": self.draws,
            "base_seed": self.base_seed,
            "fewshot_sigma2": self.fewshot_sigma2,
            "label_noise": self.label_noise,
            "estimators": list(self.estimators),
            "fixed_n_for_m_sweep": self.fixed_n_for_m_sweep,
            "fewshot_m": self.fewshot_m,
            "rank_constant": self.rank_constant,
            "threshold_coeff": self.threshold_coeff,
            "dim_cap": self.dim_cap,
        }

    @staticmethod
    def from_json(obj: dict) -> "ExperimentConfig":
        sig_obj = obj.get("signal", {})
        if sig_obj.get("dense_gaussian"):
            sig = SignalConfig(dense_gaussian=True)
        else:
            sig = SignalConfig(
                support=tuple(int(j) for j in sig_obj.get("support", ())),
                coeffs=tuple(float(a) for a in sig_obj.get("coeffs", ())),
            )
        cfg = ExperimentConfig(
            ensemble=provenance_from_json(obj["ensemble"]),
            signal=sig,
            n_grid=tuple(int(v) for v in obj["n_grid"]),
            m_grid=tuple(int(v) for v in obj.get("m_grid", ())),
            draws=int(obj.get("draws", 10)),
            base_seed=int(obj.get("base_seed", 0)),
            fewshot_sigma2=float(obj.get("fewshot_sigma2", 1.0)),
            label_noise=float(obj.get("label_noise", 0.0)),
            estimators=tuple(obj.get("estimators", ("reg_mni", "cls_mni", "topt_post"))),
            fixed_n_for_m_sweep=int(obj.get("fixed_n_for_m_sweep", 1000)),
            fewshot_m=int(obj.get("fewshot_m", 100)),
            rank_constant=float(obj.get("rank_constant", 2.0)),
            threshold_coeff=float(obj.get("threshold_coeff", 1.0)),
            dim_cap=int(obj.get("dim_cap", DEFAULT_DIM_CAP)),
        )
        cfg.validate()
        return cfg

    def hash(self) -> str:
        payload = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def seed_hash(self) -> int:
        """Hash of the data-determining fields only.

        Grid extents, draw counts, estimator choices, and noise scales do
        not enter, so extending a run never re-randomizes existing cells.
        """
        material = {
            "ensemble": provenance_to_json(self.ensemble),
            "signal": self.to_json()["signal"],
            "label_noise": self.label_noise,
        }
        payload = json.dumps(material, sort_keys=True, separators=(",", ":"))
        return int(hashlib.sha256(payload.encode()).hexdigest()[:16], 16)


def _cell_rngs(cfg: ExperimentConfig, tag: int, point: int, draw: int) -> tuple[np.random.Generator, ...]:
    """Independent (dataset, few-shot, signal) streams for one grid cell."""
    entropy = (cfg.base_seed, cfg.seed_hash(), tag, point, draw)
    seq = np.random.SeedSequence(entropy)
    return tuple(np.random.Generator(np.random.PCG64(child)) for child in seq.spawn(3))


def _build_signal(cfg: ExperimentConfig, spec: CovarianceSpec, rng: np.random.Generator, n: int) -> Signal:
    if cfg.signal.dense_gaussian:
        return make_dense_gaussian(spec, rng)
    sig = make_sparse(spec, cfg.signal.support, cfg.signal.coeffs)
    if sig.t >= n**0.4:
        logger.warning("sparsity t=%d is large relative to n=%d (t >= n^0.4)", sig.t, n)
    return sig


# ---------------------------------------------------------------------------
# Row schema


def metric_columns(support: tuple[int, ...]) -> list[str]:
    cols = [
        "risk",
        "bias",
        "task_shift_error",
        "cross_term",
        "contamination",
        "separation_ratio",
        "max_abs_offsupport_head",
        "max_abs_offsupport_tail",
        "pred_limit_risk",
        "bound_upper_ts",
        "bound_lower_ts",
        "bias_lb",
        "bias_ub",
        "wall_seconds",
    ]
    for j in support:
        cols.extend([f"su_{j}", f"abs_theta_{j}", f"b_hat_{j}", f"pred_su_{j}"])
    return cols


def row_schema(cfg: ExperimentConfig) -> list[str]:
    support = () if cfg.signal.dense_gaussian else cfg.signal.support
    head = ["config_hash", "sweep", "n", "m", "draw", "estimator", "error", "k_star", "support_recovery"]
    return head + metric_columns(support)


def column_type(name: str) -> type:
    if name in ("config_hash", "sweep", "estimator", "error"):
        return str
    if name in ("n", "m", "draw", "k_star", "support_recovery", "draws_ok"):
        return int
    return float


# ---------------------------------------------------------------------------
# Single-cell execution


@dataclass
class _CellContext:
    """Shared per-cell state: dataset, factorization, interpolators, predictions."""

    spec: CovarianceSpec
    sig: Signal
    ds: Dataset
    factor: GramFactor
    est_reg: Estimate
    est_cls: Estimate
    ks: int | None
    b_hat: dict[int, float] | None
    bias_bounds: tuple[float, float]
    bound_upper: float | None


def _prepare_cell(
    cfg: ExperimentConfig, n: int, rng_ds: np.random.Generator, rng_sig: np.random.Generator,
    seed: SeedRecord | None = None,
) -> _CellContext:
    spec = build_ensemble(cfg.ensemble, n, dim_cap=cfg.dim_cap)
    sig = _build_signal(cfg, spec, rng_sig, n)
    ds = sample_dataset(spec, sig, n, rng_ds, label_noise=cfg.label_noise, seed=seed)
    factor = gram_factorize(ds.X)
    est_reg = mni(ds.X, ds.y_reg, factor, kind=EstimateKind.REGRESSION_MNI)
    est_cls = mni(ds.X, ds.y_cls, factor, kind=EstimateKind.CLASSIFICATION_MNI)
    ks = k_star(spec, n, cfg.rank_constant)

    b_hat = None
    if not cfg.signal.dense_gaussian and ks is not None:
        excluded = set(sig.support) | set(range(ks))
        if len(excluded) < spec.d:
            b_hat = empirical_b(ds, spec, sig, ks, gram=factor)

    bias_bounds = bias_bounds_lemma3(
        spec, n, float(np.dot(sig.theta_star, sig.theta_star)), sig.theta_star
    )
    try:
        bound_upper = taskshift_bound_theorem2(spec, n, sig.strength, Upper(), cfg.rank_constant)
    except UnsupportedRegime:
        bound_upper = None
    return _CellContext(
        spec=spec,
        sig=sig,
        ds=ds,
        factor=factor,
        est_reg=est_reg,
        est_cls=est_cls,
        ks=ks,
        b_hat=b_hat,
        bias_bounds=bias_bounds,
        bound_upper=bound_upper,
    )


def _offsupport_maxima(ctx: _CellContext) -> tuple[float | None, float | None]:
    """Largest |theta_hat_j| off the support, split at k_star."""
    theta = np.abs(ctx.est_cls.theta)
    mask = np.ones(ctx.spec.d, dtype=bool)
    mask[list(ctx.sig.support)] = False
    ks = ctx.ks if ctx.ks is not None else ctx.spec.d
    head = theta[:ks][mask[:ks]]
    tail = theta[ks:][mask[ks:]]
    head_max = float(head.max()) if head.size else None
    tail_max = float(tail.max()) if tail.size else None
    return head_max, tail_max


def _base_row(cfg: ExperimentConfig, sweep: str, n: int, m: int | None, draw: int, estimator: str) -> dict:
    row = {name: None for name in row_schema(cfg)}
    row.update(
        config_hash=cfg.hash(),
        sweep=sweep,
        n=n,
        m=m,
        draw=draw,
        estimator=estimator,
        error="",
    )
    return row


def _fill_common(row: dict, ctx: _CellContext, est: Estimate) -> None:
    row["risk"] = excess_risk(ctx.spec, ctx.sig, est)
    if ctx.sig.t < ctx.spec.d:
        su, cn = survival_contamination(ctx.spec, ctx.sig, est)
        row["contamination"] = cn
        for j, v in su.items():
            row[f"su_{j}"] = v


def _estimator_row(
    cfg: ExperimentConfig,
    ctx: _CellContext,
    estimator: str,
    sweep: str,
    n: int,
    m: int | None,
    draw: int,
    fewshot: "FewShotView | None",
) -> dict:
    row = _base_row(cfg, sweep, n, m, draw, estimator)
    row["k_star"] = ctx.ks
    t0 = time.perf_counter()

    if estimator == "reg_mni":
        _fill_common(row, ctx, ctx.est_reg)
        row["bias_lb"] = ctx.bias_bounds[1]
        row["bias_ub"] = ctx.bias_bounds[0]
    elif estimator == "cls_mni":
        rec = decompose_lemma2(ctx.spec, ctx.sig, ctx.ds, ctx.est_reg, ctx.est_cls)
        row["risk"] = rec.risk
        row["bias"] = rec.bias
        row["task_shift_error"] = rec.task_shift_error
        row["cross_term"] = rec.cross_term
        row["contamination"] = rec.contamination
        if rec.survival:
            for j, v in rec.survival.items():
                row[f"su_{j}"] = v
        if ctx.sig.t < ctx.spec.d:
            row["separation_ratio"] = separation_ratio(ctx.est_cls, ctx.sig)
            recovered = recover_support(ctx.est_cls, TopT(ctx.sig.t))
            row["support_recovery"] = int(recovered == ctx.sig.support)
            head_max, tail_max = _offsupport_maxima(ctx)
            row["max_abs_offsupport_head"] = head_max
            row["max_abs_offsupport_tail"] = tail_max
            for j in ctx.sig.support:
                row[f"abs_theta_{j}"] = float(abs(ctx.est_cls.theta[j]))
        if ctx.b_hat is not None:
            for j, v in ctx.b_hat.items():
                row[f"b_hat_{j}"] = v
                row[f"pred_su_{j}"] = limiting_survival(v, ctx.sig.strength)
            row["pred_limit_risk"] = limiting_risk_general(ctx.b_hat, ctx.sig.coeffs, ctx.sig.strength)
        row["bound_upper_ts"] = ctx.bound_upper
        row["bias_lb"] = ctx.bias_bounds[1]
        row["bias_ub"] = ctx.bias_bounds[0]
    elif estimator in ("topt_post", "threshold_post", "rescaled"):
        if estimator == "threshold_post":
            support = recover_support(
                ctx.est_cls, Threshold(ctx.spec.lambdas, cfg.threshold_coeff)
            )
        else:
            support = recover_support(ctx.est_cls, TopT(ctx.sig.t))
        row["support_recovery"] = int(support == ctx.sig.support)
        if estimator == "rescaled":
            est = rescale_zero_shot(ctx.est_cls, support, ctx.sig.strength)
        else:
            est = restricted_least_squares(fewshot.take(m), support)
        _fill_common(row, ctx, est)
    else:
        raise ConfigError(f"unknown estimator {estimator!r}")

    row["wall_seconds"] = time.perf_counter() - t0
    return row


@dataclass
class FewShotView:
    """A few-shot sample of m_max rows served as prefixes for smaller m."""

    full: FewShotSet

    def take(self, m: int) -> FewShotSet:
        fs = self.full
        if m is None or m == fs.m:
            return fs
        if m > fs.m:
            raise ConfigError(f"requested m={m} exceeds the sampled {fs.m}")
        return FewShotSet(Xp=fs.Xp[:m], yp=fs.yp[:m], m=m, sigma2=fs.sigma2)


def run_point(cfg: ExperimentConfig, n: int, draw_index: int) -> list[dict]:
    """All estimator rows for one (n, draw) cell of the n sweep."""
    rng_ds, rng_fs, rng_sig = _cell_rngs(cfg, _TAG_N_SWEEP, n, draw_index)
    seed = SeedRecord(base_seed=cfg.base_seed, stream_id=_TAG_N_SWEEP * 2**32 + n, draw_index=draw_index)
    ctx = _prepare_cell(cfg, n, rng_ds, rng_sig, seed=seed)

    fewshot = None
    if set(cfg.estimators) & {"topt_post", "threshold_post"}:
        fs = sample_fewshot(ctx.spec, ctx.sig, cfg.fewshot_m, cfg.fewshot_sigma2, rng_fs)
        fewshot = FewShotView(full=fs)

    rows = []
    for estimator in cfg.estimators:
        m = cfg.fewshot_m if estimator in ("topt_post", "threshold_post") else None
        rows.append(_estimator_row(cfg, ctx, estimator, "n", n, m, draw_index, fewshot))
    return rows


def run_m_draw(cfg: ExperimentConfig, draw_index: int) -> list[dict]:
    """Rows for one draw of the m sweep at fixed n.

    One classification dataset is drawn per draw; only the few-shot set
    grows across the m grid (larger m extends the same sample).
    """
    fewshot_estimators = [e for e in cfg.estimators if e in ("topt_post", "threshold_post")]
    if not fewshot_estimators or not cfg.m_grid:
        return []
    n = cfg.fixed_n_for_m_sweep
    rng_ds, rng_fs, rng_sig = _cell_rngs(cfg, _TAG_M_SWEEP, n, draw_index)
    seed = SeedRecord(base_seed=cfg.base_seed, stream_id=_TAG_M_SWEEP * 2**32 + n, draw_index=draw_index)
    ctx = _prepare_cell(cfg, n, rng_ds, rng_sig, seed=seed)
    fs = sample_fewshot(ctx.spec, ctx.sig, max(cfg.m_grid), cfg.fewshot_sigma2, rng_fs)
    fewshot = FewShotView(full=fs)

    rows = []
    for m in cfg.m_grid:
        for estimator in fewshot_estimators:
            rows.append(_estimator_row(cfg, ctx, estimator, "m", n, m, draw_index, fewshot))
    return rows


def run_ansatz_point(
    cfg: ExperimentConfig,
    n: int,
    draw_index: int,
    magnitude: float = 2.0,
    sigma2_ansatz: float | None = None,
) -> dict:
    """Task-shift error of the constant-magnitude label fixture at one cell.

    Regression labels are replaced by magnitude * sgn(y), which makes the
    multiplicative noise diagonal exactly (1/magnitude - 1) * I. Returns the
    measured shift error and the bound expressions for ratio tracking; the
    lower bound is only evaluated when a per-coordinate signal variance is
    supplied (its premise is a random signal).
    """
    if magnitude <= 0.0 or magnitude == 1.0:
        raise ConfigError("ansatz magnitude must be positive and different from 1")
    rng_ds, _, rng_sig = _cell_rngs(cfg, _TAG_ANSATZ, n, draw_index)
    ctx = _prepare_cell(cfg, n, rng_ds, rng_sig)
    y_fixed = magnitude * ctx.ds.y_cls
    est_reg = mni(ctx.ds.X, y_fixed, ctx.factor, kind=EstimateKind.REGRESSION_MNI)
    tse = quadratic_risk(ctx.spec, ctx.est_cls.theta - est_reg.theta)
    alpha = 1.0 / magnitude - 1.0
    bound = ctx.bound_upper
    lower = None
    if sigma2_ansatz is not None:
        lower = taskshift_bound_theorem2(
            ctx.spec, n, ctx.sig.strength, LowerAnsatz(alpha=alpha, sigma2=sigma2_ansatz), cfg.rank_constant
        )
    return {
        "n": n,
        "draw": draw_index,
        "alpha": alpha,
        "task_shift_error": tse,
        "bound_upper_ts": bound,
        "bound_lower_ts": lower,
        "ratio": None if bound is None else tse / bound,
    }


# ---------------------------------------------------------------------------
# Sweep execution and aggregation


@dataclass
class SweepResult:
    config: ExperimentConfig
    header: list[str]
    rows: list[dict]
    agg_header: list[str]
    agg_rows: list[dict]
    failed_cells: list[tuple] = field(default_factory=list)
    elapsed_seconds: float = 0.0


def _error_rows(cfg: ExperimentConfig, sweep: str, n: int, draw: int, err: Exception) -> list[dict]:
    rows = []
    for estimator in cfg.estimators:
        row = _base_row(cfg, sweep, n, None, draw, estimator)
        msg = f"{type(err).__name__}: {err}"
        row["error"] = msg.replace(",", ";").replace("\n", " ")
        rows.append(row)
    return rows


def run_sweep(cfg: ExperimentConfig, jobs: int | None = None) -> SweepResult:
    """Execute every (grid point, draw) cell and aggregate over draws.

    Failed cells are recorded as error rows, excluded from aggregates, and
    reported in failed_cells. Cells run on a bounded thread pool; the heavy
    work is BLAS, which releases the GIL.
    """
    cfg.validate()
    t_start = time.perf_counter()
    if jobs is None:
        import os

        jobs = os.cpu_count() or 1

    tasks: list[tuple] = [("n", n, draw) for n in cfg.n_grid for draw in range(cfg.draws)]
    if cfg.m_grid and set(cfg.estimators) & {"topt_post", "threshold_post"}:
        tasks.extend(("m", cfg.fixed_n_for_m_sweep, draw) for draw in range(cfg.draws))

    def run_cell(task: tuple) -> tuple[tuple, list[dict], Exception | None]:
        sweep, n, draw = task
        try:
            if sweep == "n":
                return task, run_point(cfg, n, draw), None
            return task, run_m_draw(cfg, draw), None
        except Exception as err:  # record the cell as failed, keep the sweep going
            logger.error("cell %s failed: %s", task, err)
            return task, _error_rows(cfg, sweep, n, draw, err), err

    rows: list[dict] = []
    failed: list[tuple] = []
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        for task, cell_rows, err in pool.map(run_cell, tasks):
            rows.extend(cell_rows)
            if err is not None:
                failed.append(task)
            else:
                logger.info("cell %s done (%d rows)", task, len(cell_rows))

    est_order = {name: i for i, name in enumerate(cfg.estimators)}
    rows.sort(
        key=lambda r: (
            r["sweep"],
            r["n"],
            -1 if r["m"] is None else r["m"],
            r["draw"],
            est_order.get(r["estimator"], 99),
        )
    )
    header = row_schema(cfg)
    agg_header, agg_rows = aggregate(cfg, rows)
    return SweepResult(
        config=cfg,
        header=header,
        rows=rows,
        agg_header=agg_header,
        agg_rows=agg_rows,
        failed_cells=failed,
        elapsed_seconds=time.perf_counter() - t_start,
    )


def aggregate(cfg: ExperimentConfig, rows: list[dict]) -> tuple[list[str], list[dict]]:
    """Mean and unbiased (n-1) standard deviation per (point, estimator, metric)."""
    support = () if cfg.signal.dense_gaussian else cfg.signal.support
    metrics = [c for c in metric_columns(support)] + ["support_recovery"]
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        if row["error"]:
            continue
        key = (row["sweep"], row["n"], row["m"], row["estimator"])
        groups.setdefault(key, []).append(row)

    header = ["config_hash", "sweep", "n", "m", "estimator", "draws_ok"]
    for col in metrics:
        header.extend([f"{col}_mean", f"{col}_std"])

    out = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], -1 if k[2] is None else k[2], k[3])):
        members = groups[key]
        agg = {
            "config_hash": cfg.hash(),
            "sweep": key[0],
            "n": key[1],
            "m": key[2],
            "estimator": key[3],
            "draws_ok": len(members),
        }
        for col in metrics:
            vals = [r[col] for r in members if r[col] is not None]
            if not vals:
                agg[f"{col}_mean"] = None
                agg[f"{col}_std"] = None
                continue
            mean = math.fsum(vals) / len(vals)
            agg[f"{col}_mean"] = mean
            if len(vals) > 1:
                var = math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
                agg[f"{col}_std"] = math.sqrt(var)
            else:
                agg[f"{col}_std"] = None
        out.append(agg)
    return header, out


# ---------------------------------------------------------------------------
# CSV IO (UTF-8, '.' decimal, 17 significant digits, round-trip exact)


def _format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: str | Path, header: list[str], rows: list[dict]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_format_value(row.get(col)) for col in header))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path: str | Path) -> tuple[list[str], list[dict]]:
    """Parse a table written by write_csv back into typed rows."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [line for line in text.split("\n") if line]
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        row = {}
        for col, cell in zip(header, cells):
            if cell == "":
                row[col] = None
            elif column_type(col) is str:
                row[col] = cell
            elif column_type(col) is int:
                row[col] = int(cell)
            else:
                row[col] = float(cell)
        rows.append(row)
    return header, rows


# ---------------------------------------------------------------------------
# Output layout


def write_outputs(
    result: SweepResult,
    out_dir: str | Path,
    name: str = "run",
    timestamp: str | None = None,
    figures: bool = True,
    emit_gnuplot: bool = False,
) -> Path:
    """Write rows.csv, agg.csv, config.json, meta.json (and plots) for a sweep."""
    if timestamp is None:
        timestamp = time.strftime("%Y%m%dT%H%M%S")
    target = Path(out_dir) / name / timestamp
    target.mkdir(parents=True, exist_ok=True)
    write_csv(target / "rows.csv", result.header, result.rows)
    write_csv(target / "agg.csv", result.agg_header, result.agg_rows)
    (target / "config.json").write_text(
        json.dumps(result.config.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    import platform

    from . import __version__

    meta = {
        "package_version": __version__,
        "numpy_version": np.__version__,
        "config_hash": result.config.hash(),
        "elapsed_seconds": result.elapsed_seconds,
        "failed_cells": [list(t) for t in result.failed_cells],
        "rows": len(result.rows),
        "platform": platform.platform(),
        "schema": {
            "wall_seconds": "per-estimator compute seconds, excluding shared dataset/Gram prep",
            "std": "unbiased, n-1 denominator",
            "indices": "0-based",
            "k_star": "empty cell means no truncation index qualified (infinite)",
        },
    }
    (target / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    if figures:
        from .report import render_figures

        render_figures(result, target)
    if emit_gnuplot:
        from .report import emit_gnuplot_scripts

        emit_gnuplot_scripts(result, target)
    return target


# ---------------------------------------------------------------------------
# Presets (paper panel configurations at desk scale)


_PRESET_SIGNALS = {
    "fig2i": (Spiked(p=1.5, q=0.5, r=0.25), ((0, 1), (1.0, -0.5))),
    "fig2ii": (Spiked(p=1.5, q=0.5, r=0.55), ((0, 1), (1.0, -0.5))),
    "spiked_outside": (Spiked(p=1.5, q=0.5, r=0.25), ((0, 1, 7), (1.0, -0.5, -0.15))),
    "poly_u25": (PolyDecay(p=1.5, u=0.25, v=0.0), ((0, 1), (0.2, -0.1))),
    "isotropic50": (Isotropic(scale=50.0, p=1.5), ((0, 1), (1.0, -0.5))),
    "regimes_q3": (Spiked(p=1.5, q=0.3, r=0.5), ((0, 1), (0.2, -0.1))),
    "regimes_q6": (Spiked(p=1.5, q=0.6, r=0.5), ((0, 1), (0.2, -0.1))),
    "regimes_q9": (Spiked(p=1.5, q=0.9, r=0.5), ((0, 1), (0.2, -0.1))),
}

PRESET_NAMES = tuple(sorted(_PRESET_SIGNALS))


def preset(name: str, max_n: int = 1600) -> ExperimentConfig:
    """A desk-scaled panel configuration.

    The n grid doubles from 100 up to max_n; the m sweep runs at a fixed
    n of 1000 with sigma2 = 1 over 10 draws.
    """
    if name not in _PRESET_SIGNALS:
        raise UnknownPreset(f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}")
    ensemble, (support, coeffs) = _PRESET_SIGNALS[name]
    n_grid = []
    n = 100
    while n <= max_n:
        n_grid.append(n)
        n *= 2
    if not n_grid:
        n_grid = [max_n]
    cfg = ExperimentConfig(
        ensemble=ensemble,
        signal=SignalConfig(support=support, coeffs=coeffs),
        n_grid=tuple(n_grid),
        m_grid=(25, 50, 100, 200, 400),
        draws=10,
        base_seed=20240,
        fewshot_sigma2=1.0,
        estimators=("reg_mni", "cls_mni", "topt_post"),
        fixed_n_for_m_sweep=min(1000, max_n),
    )
    cfg.validate()
    return cfg
