"""Command-line entry point: ``verify <experiment> --config <path>``."""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import BudgetExceeded, ConfigError
from .experiments import EXPERIMENTS, ExperimentConfig, run, seed_from_env

log = logging.getLogger("hermrand")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="verify",
        description="Run a numerical experiment on Hermite expansions and write CSV tables.")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", required=True, help="INI file describing the experiment")
    ap.add_argument("--seed", type=int, default=None,
                    help="master seed (overrides the config and VERIFY_SEED)")
    ap.add_argument("--out", default=None, help="output directory for tables")
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--budget-modes", type=int, default=None,
                    help="largest number of modes any single sum may use")
    ap.add_argument("--workers", type=int, default=None, help="threads over trial chunks")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config)
        if cfg.experiment != args.experiment:
            raise ConfigError(f"config describes {cfg.experiment!r}, not {args.experiment!r}")
        cfg.seed = args.seed if args.seed is not None else seed_from_env(cfg.seed)
        if args.trials is not None:
            cfg.trials = args.trials
        if args.budget_modes is not None:
            cfg.budget_modes = args.budget_modes
        if args.workers is not None:
            cfg.workers = args.workers
        cfg.__post_init__()
        _check_budget(cfg)
        report = run(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    for row in report.rows:
        log.info("%s %s measured=%s pass=%s", row.experiment, row.params, row.measured, row.ok)
    failed = sum(not r.ok for r in report.rows)
    print(f"{cfg.experiment}: {len(report.rows) - failed}/{len(report.rows)} rows pass")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def _check_budget(cfg: ExperimentConfig) -> None:
    """Refuse runs whose largest partial sum exceeds ``budget_modes``."""
    from .random_series import mode_count

    mode = "oneD" if cfg.d == 1 else "radial"
    lam = None
    if cfg.experiment == "salem-zygmund":
        lam = max(float(v) for v in cfg.param("lambdas"))
    elif cfg.experiment == "continuity":
        lam = float(cfg.param("lambda_max"))
    elif cfg.experiment == "modulus":
        lam = float(cfg.param("lam"))
    elif cfg.experiment == "lp-rates":
        if 2 * int(cfg.param("n_max")) + 1 > cfg.budget_modes:
            raise BudgetExceeded(f"n_max={cfg.param('n_max')} exceeds the mode budget")
    elif cfg.experiment == "square-function":
        if int(cfg.param("n_max")) + 1 > cfg.budget_modes:
            raise BudgetExceeded(f"n_max={cfg.param('n_max')} exceeds the mode budget")
    elif cfg.experiment == "alpha-star":
        if int(cfg.param("N_max")) > cfg.budget_modes:
            raise BudgetExceeded(f"N_max={cfg.param('N_max')} exceeds the mode budget")
    if lam is not None and mode_count(lam, cfg.d, mode) > cfg.budget_modes:
        raise BudgetExceeded(f"lambda={lam} needs {mode_count(lam, cfg.d, mode)} modes, "
                             f"budget is {cfg.budget_modes}")


if __name__ == "__main__":
    sys.exit(main())
