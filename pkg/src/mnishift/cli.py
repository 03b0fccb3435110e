"""Command-line interface: ensemble inspection, sweep runs, and self checks."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .covariance import build_ensemble, effective_ranks
from .errors import MnishiftError
from .harness import PRESET_NAMES, ExperimentConfig, preset, run_sweep, write_outputs


def _load_config(spec_arg: str, max_n: int | None) -> tuple[ExperimentConfig, str]:
    """Resolve a preset name or a JSON config path to (config, run name)."""
    if spec_arg in PRESET_NAMES:
        cfg = preset(spec_arg) if max_n is None else preset(spec_arg, max_n=max_n)
        return cfg, spec_arg
    path = Path(spec_arg)
    if not path.exists():
        raise MnishiftError(
            f"{spec_arg!r} is neither a preset ({', '.join(PRESET_NAMES)}) nor a config file"
        )
    cfg = ExperimentConfig.from_json(json.loads(path.read_text(encoding="utf-8")))
    if max_n is not None:
        logging.getLogger(__name__).warning("--max-n is ignored for explicit config files")
    return cfg, path.stem


def cmd_ensemble(args: argparse.Namespace) -> int:
    cfg, _ = _load_config(args.spec, None)
    spec = build_ensemble(cfg.ensemble, args.n, dim_cap=cfg.dim_cap)
    report = effective_ranks(spec, 0, args.n, cfg.rank_constant)
    payload = {
        "d": spec.d,
        "lambda_min": float(spec.lambdas[-1]),
        "lambda_max": float(spec.lambdas[0]),
        "r0": report.r_k,
        "R0": report.R_k,
        "k_star": "infinite" if report.k_star is None else report.k_star,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    if args.preset is not None:
        cfg, name = _load_config(args.preset, args.max_n)
    else:
        cfg, name = _load_config(args.config, args.max_n)
    result = run_sweep(cfg, jobs=args.jobs)
    target = write_outputs(
        result,
        args.out,
        name=name,
        figures=not args.no_figures,
        emit_gnuplot=args.emit_gnuplot,
    )
    print(f"wrote {len(result.rows)} rows to {target}")
    if result.failed_cells:
        print(f"{len(result.failed_cells)} cells failed; see the error column in rows.csv", file=sys.stderr)
        return 1
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    from .selfcheck import run_all

    results = run_all(seed=args.seed)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name}: {res.detail}")
        failed += not res.passed
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mnishift",
        description="Simulate classification-to-regression task shift for minimum-norm interpolation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-cell progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ens = sub.add_parser("ensemble", help="print a spectrum report as JSON")
    p_ens.add_argument("--spec", required=True, help="preset name or config JSON path")
    p_ens.add_argument("--n", type=int, required=True, help="sample size the ensemble is built at")
    p_ens.set_defaults(func=cmd_ensemble)

    p_run = sub.add_parser("run", help="execute a sweep and write rows/aggregates/figures")
    group = p_run.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", help="experiment config JSON path")
    group.add_argument("--preset", choices=PRESET_NAMES, help="named preset")
    p_run.add_argument("--out", default="out", help="output root directory (default: out)")
    p_run.add_argument("--max-n", type=int, default=None, help="cap the preset n grid")
    p_run.add_argument("--jobs", type=int, default=None, help="worker threads (default: cores)")
    p_run.add_argument("--emit-gnuplot", action="store_true", help="write companion gnuplot scripts")
    p_run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_run.set_defaults(func=cmd_run)

    p_check = sub.add_parser("check", help="run the built-in invariant/oracle suite")
    p_check.add_argument("--seed", type=int, default=None, help="fixture seed override")
    p_check.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if getattr(args, "seed", None) is None and args.command == "check":
        from .selfcheck import FIXTURE_SEED

        args.seed = FIXTURE_SEED
    try:
        return args.func(args)
    except MnishiftError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
