"""Experiment configs, runners and report tables.

A config is an INI file.  Sections become dotted prefixes, so

    [experiment]
    name = lp-rates
    d = 3
    [rule]
    kind = power
    kappa = 0.5

flattens to ``experiment.name``, ``experiment.d``, ``rule.kind`` ...  Keys in
``[experiment]`` other than the common ones are experiment parameters; see
``DEFAULTS`` for every experiment's parameters and their defaults.
"""
from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigError, Degenerate
from .fitting import fit_rate
from .lp_analysis import alpha_star, estrad_prediction, lp_rate, square_function_sweep
from .random_series import (
    RandomLaw,
    bernstein_probe,
    default_grid,
    modulus_on_uniform_grid,
    salem_zygmund_experiment,
    stream_statistics,
    sup_reducer,
    trial_seed,
)
from .spectral import (
    BucketConstant,
    CoefficientRule,
    HolderBlocks,
    PowerLaw,
    SpectralLayout,
    hermite_sup_decay,
    karadzhov_ratios,
)

EXPERIMENTS = (
    "spectral-bound",
    "lp-rates",
    "alpha-star",
    "square-function",
    "salem-zygmund",
    "continuity",
    "modulus",
    "bernstein-probe",
)

COMMON_KEYS = ("name", "d", "seed", "trials", "workers", "budget_modes")

#: Default experiment parameters.  ``None`` means "derived at run time".
DEFAULTS: dict[str, dict] = {
    "spectral-bound": {"j_min": 100, "j_max": 2000, "j_points": 8, "spread_tol": 5.0,
                       "sup_n_min": 100, "sup_n_max": 5000, "sup_points": 12,
                       "sup_tol": 0.02},
    "lp-rates": {"p": [math.inf], "n_min": 200, "n_max": 2000, "n_points": 12,
                 "slope_tol": None, "band_tol": 3.0},
    "alpha-star": {"N_max": 1_000_000, "rel_tol": 0.1},
    "square-function": {"p": None, "n_min": 20, "n_max": 2000, "n_points": 16},
    "salem-zygmund": {"lambdas": [32, 64, 128, 256, 512, 1024], "spread_tol": 4.0,
                      "quantile": 0.99},
    "continuity": {"lambda_max": 4096, "lambda_min": 2, "fraction_tol": 0.01},
    "modulus": {"mu": 0.5, "nu": 0.0, "lam": 4096, "h_min": 2.0 ** -12,
                "h_max": 2.0 ** -4, "h_points": 17, "slope_tol": 0.1},
    "bernstein-probe": {"lambdas": [8, 16, 32, 64, 128, 256], "stability_tol": 0.1},
}

DEFAULT_RULES = {
    "spectral-bound": None,
    "lp-rates": None,
    "alpha-star": {"kind": "power", "kappa": 0.5},
    "square-function": {"kind": "power", "kappa": 0.5},
    # Σ j^γ max|c|² summable: |c|² = j^{1/6-1} ln(j+1)^{-2} in d = 1.
    "salem-zygmund": {"kind": "bucket", "power": -5 / 6, "log_power": -2.0},
    # Saturates the continuity condition at α = 2: j^{γ} ln(j)^2 |c|² ~ j^{-1} ln^{-1.5}.
    "continuity": {"kind": "bucket", "power": -5 / 6, "log_power": -3.5},
    "modulus": None,
    "bernstein-probe": None,
}

DEFAULT_TRIALS = {"salem-zygmund": 512, "continuity": 16, "modulus": 16,
                  "bernstein-probe": 32}


# ---------------------------------------------------------------------------
# Values and configs
# ---------------------------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return ", ".join(format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_value(text: str):
    text = text.strip()
    if "," in text:
        return [parse_value(t) for t in text.split(",") if t.strip()]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


@dataclass
class ExperimentConfig:
    experiment: str
    d: int = 1
    seed: int = 0
    trials: int | None = None
    workers: int = 1
    budget_modes: int = 1_000_000
    rule: dict | None = None
    law: dict = field(default_factory=lambda: {"kind": "rademacher"})
    params: dict = field(default_factory=dict)
    out_dir: str = "."

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        unknown = set(self.params) - set(DEFAULTS[self.experiment])
        if unknown:
            raise ConfigError(f"unknown parameters for {self.experiment}: {sorted(unknown)}")
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        if self.trials is not None and self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def param(self, key):
        return self.params.get(key, DEFAULTS[self.experiment][key])

    @property
    def n_trials(self) -> int:
        return self.trials if self.trials is not None else DEFAULT_TRIALS.get(self.experiment, 1)

    def coefficient_rule(self) -> CoefficientRule | None:
        spec = self.rule if self.rule is not None else DEFAULT_RULES[self.experiment]
        return None if spec is None else CoefficientRule.from_dict(spec)

    def random_law(self) -> RandomLaw:
        try:
            return RandomLaw.from_dict(self.law)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    # -- serialization ------------------------------------------------------

    def to_flat(self) -> dict[str, str]:
        flat = {"experiment.name": self.experiment, "experiment.d": str(self.d),
                "experiment.seed": str(self.seed), "experiment.workers": str(self.workers),
                "experiment.budget_modes": str(self.budget_modes),
                "output.dir": self.out_dir}
        if self.trials is not None:
            flat["experiment.trials"] = str(self.trials)
        for k, v in self.params.items():
            flat[f"experiment.{k}"] = format_value(v)
        if self.rule is not None:
            for k, v in self.rule.items():
                flat[f"rule.{k}"] = format_value(v)
        for k, v in self.law.items():
            flat[f"law.{k}"] = format_value(v)
        return flat

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        for key, value in self.to_flat().items():
            section, name = key.split(".", 1)
            if not cp.has_section(section):
                cp.add_section(section)
            cp.set(section, name, value)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_flat(cls, flat: dict[str, str]) -> "ExperimentConfig":
        exp, rule, law, out = {}, {}, {}, {}
        for key, value in flat.items():
            if "." not in key:
                raise ConfigError(f"key {key!r} is outside any section")
            section, name = key.split(".", 1)
            target = {"experiment": exp, "rule": rule, "law": law, "output": out}.get(section)
            if target is None:
                raise ConfigError(f"unknown section {section!r}")
            target[name] = parse_value(value)
        if "name" not in exp:
            raise ConfigError("experiment.name is required")
        params = {k: v for k, v in exp.items() if k not in COMMON_KEYS}
        try:
            return cls(
                experiment=str(exp["name"]),
                d=int(exp.get("d", 1)),
                seed=int(exp.get("seed", 0)),
                trials=int(exp["trials"]) if "trials" in exp else None,
                workers=int(exp.get("workers", 1)),
                budget_modes=int(exp.get("budget_modes", 1_000_000)),
                rule=rule or None,
                law=law or {"kind": "rademacher"},
                params=params,
                out_dir=str(out.get("dir", ".")),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable config: {exc}") from None
        flat = {f"{s}.{k}": v for s in cp.sections() for k, v in cp.items(s)}
        return cls.from_flat(flat)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_ini(text)


# ---------------------------------------------------------------------------
# Report rows and tables
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("experiment", "params", "measured", "predicted", "tolerance", "pass", "seed")


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    params: str
    measured: float
    predicted: float | None
    tolerance: float | None
    passed: bool
    seed: int

    def cells(self) -> list[str]:
        def num(v):
            if v is None:
                return ""
            if isinstance(v, float) and math.isnan(v):
                return "nan"
            return repr(float(v))

        ok = self.passed and not (isinstance(self.measured, float) and math.isnan(self.measured))
        return [self.experiment, self.params, num(self.measured), num(self.predicted),
                num(self.tolerance), "true" if ok else "false", str(self.seed)]

    @property
    def ok(self) -> bool:
        return self.cells()[5] == "true"


@dataclass
class Report:
    experiment: str
    config: ExperimentConfig
    rows: list
    summary: dict

    @property
    def all_pass(self) -> bool:
        return all(r.ok for r in self.rows)


def emit_tables(reports, out_dir, *, timestamp: str | None = None,
                empty_name: str = "report") -> list[Path]:
    """Write ``<experiment>.csv`` and ``<experiment>.summary.json`` per report.

    The CSV depends only on the rows.  The timestamp lives in the summary.
    An empty report list produces the header-only ``<empty_name>.csv``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not reports:
        path = out_dir / f"{empty_name}.csv"
        write_header_only(path)
        return [path]
    written = []
    for rep in reports:
        path = out_dir / f"{rep.experiment}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for row in rep.rows:
                w.writerow(row.cells())
        summary = {
            "experiment": rep.experiment,
            "timestamp": timestamp or time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "all_pass": rep.all_pass,
            "rows": len(rep.rows),
            "failed_rows": sum(not r.ok for r in rep.rows),
            "config": rep.config.to_flat(),
            "summary": _jsonable(rep.summary),
        }
        spath = out_dir / f"{rep.experiment}.summary.json"
        spath.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        written += [path, spath]
    return written


def write_header_only(out_path) -> None:
    with open(out_path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerow(CSV_COLUMNS)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------

def _geom_ints(lo, hi, k) -> list[int]:
    return sorted(set(int(round(v)) for v in np.geomspace(lo, hi, int(k))))


def _spectral_bound(cfg: ExperimentConfig) -> Report:
    d = cfg.d
    tol = float(cfg.param("spread_tol"))
    js = _geom_ints(cfg.param("j_min"), cfg.param("j_max"), cfg.param("j_points"))
    res = karadzhov_ratios(js, d)
    spread = res.spread
    rows = [ReportRow("spectral-bound", f"d={d};j={j}", float(r), None, tol, spread < tol, cfg.seed)
            for j, r in zip(res.j, res.ratio)]
    summary = {"d": d, "gamma": SpectralLayout(d).gamma, "j": res.j.tolist(),
               "ratio": res.ratio.tolist(), "spread": spread}
    if d == 1:
        ns = _geom_ints(cfg.param("sup_n_min"), cfg.param("sup_n_max"), cfg.param("sup_points"))
        fit, sups = hermite_sup_decay(ns)
        stol = float(cfg.param("sup_tol"))
        ok = abs(fit.slope + 1 / 12) <= stol
        rows.append(ReportRow("spectral-bound", f"d=1;sup-decay;n={ns[0]}..{ns[-1]}",
                              fit.slope, -1 / 12, stol, ok, cfg.seed))
        summary["sup_decay"] = {"n": ns, "sup": sups, "fit": fit.to_dict()}
    return Report("spectral-bound", cfg, rows, summary)


def _lp_rates(cfg: ExperimentConfig) -> Report:
    d = cfg.d
    ps = cfg.param("p")
    ps = ps if isinstance(ps, list) else [ps]
    ns = _geom_ints(cfg.param("n_min"), cfg.param("n_max"), cfg.param("n_points"))
    rows, summary = [], {}
    for p in ps:
        p = float(p)
        r = lp_rate(d, p, ns)
        pred = r.prediction
        tol = cfg.param("slope_tol")
        if pred.regime == "above":
            tol = 0.03 if tol is None else float(tol)
            ok = abs(r.fit.slope - pred.exponent) <= tol and r.band_ratio < float(cfg.param("band_tol"))
        else:
            tol = 0.05 if tol is None else float(tol)
            ok = r.fit.slope <= pred.exponent + tol
        for n, v in zip(ns, r.values):
            rows.append(ReportRow("lp-rates", f"d={d};p={format_value(p)};n={n}", v, None, None,
                                  True, cfg.seed))
        rows.append(ReportRow("lp-rates", f"d={d};p={format_value(p)};slope;regime={pred.regime}",
                              r.fit.slope, pred.exponent, tol, ok, cfg.seed))
        summary[format_value(p)] = {"regime": pred.regime, "exponent": pred.exponent,
                                    "fit": r.fit.to_dict(), "band_ratio": r.band_ratio,
                                    "n": ns, "values": r.values}
    return Report("lp-rates", cfg, rows, summary)


def rule_label(rule: CoefficientRule) -> str:
    """Compact comma-free description such as ``power:kappa=0.5:c0=1.0``."""
    data = rule.to_dict()
    kind = data.pop("kind")
    return ":".join([str(kind)] + [f"{k}={format_value(v)}" for k, v in data.items()])


def predicted_critical_p(rule: CoefficientRule, d: int) -> float | None:
    """min(2d/(d-4κ), ∞) for power laws, None for other rules."""
    if not isinstance(rule, PowerLaw):
        return None
    return 2 * d / (d - 4 * rule.kappa) if rule.kappa < d / 4 else math.inf


def _alpha_star(cfg: ExperimentConfig) -> Report:
    rule = cfg.coefficient_rule()
    res = alpha_star(rule, cfg.d, int(cfg.param("N_max")))
    pred = predicted_critical_p(rule, cfg.d)
    tol = float(cfg.param("rel_tol"))
    if pred is None:
        ok = True
    elif math.isinf(pred):
        ok = res.bounded
    else:
        ok = math.isfinite(res.d_over_alpha) and abs(res.d_over_alpha - pred) <= tol * pred
    rows = [ReportRow("alpha-star", f"d={cfg.d};rule={rule_label(rule)}",
                      res.d_over_alpha, pred, tol, ok, cfg.seed)]
    summary = {"alpha_star": res.alpha_star, "d_over_alpha": res.d_over_alpha,
               "bounded": res.bounded, "fit": res.fit.to_dict() if res.fit else None}
    return Report("alpha-star", cfg, rows, summary)


def _square_function(cfg: ExperimentConfig) -> Report:
    d = cfg.d
    rule = cfg.coefficient_rule()
    crit = predicted_critical_p(rule, d)
    if crit is None or math.isinf(crit):
        crit = alpha_star(rule, d).d_over_alpha
    ps = cfg.param("p")
    if ps is None:
        if not math.isfinite(crit):
            raise ConfigError("square-function needs p when the critical exponent is infinite")
        ps = [crit - 1, crit + 2]
    ps = ps if isinstance(ps, list) else [ps]
    ns = _geom_ints(cfg.param("n_min"), cfg.param("n_max"), cfg.param("n_points"))
    lambdas = [4 * n + d for n in ns]
    rows, summary = [], {"critical_p": crit}
    for p in ps:
        p = float(p)
        sw = square_function_sweep(rule, d, p, lambdas)
        expect = "stabilizes" if p < crit else "diverges"
        for lam, v in zip(lambdas, sw.values):
            rows.append(ReportRow("square-function", f"d={d};p={format_value(p)};lambda={lam}",
                                  v, None, None, True, cfg.seed))
        rows.append(ReportRow("square-function", f"d={d};p={format_value(p)};slope;expect={expect}",
                              sw.slope, 0.0 if expect == "stabilizes" else None, 0.05,
                              sw.verdict == expect, cfg.seed))
        summary[format_value(p)] = {"slope": sw.slope, "cauchy_tail": sw.cauchy_tail,
                                    "verdict": sw.verdict, "expected": expect,
                                    "lambdas": lambdas, "values": sw.values}
    return Report("square-function", cfg, rows, summary)


def _salem_zygmund(cfg: ExperimentConfig) -> Report:
    d = cfg.d
    rule = cfg.coefficient_rule()
    if rule is None:
        raise ConfigError("salem-zygmund needs a rule")
    if d >= 2 and cfg.rule is None:
        rule = BucketConstant(power=-1.0, log_power=-2.0)
    q = float(cfg.param("quantile"))
    rep = salem_zygmund_experiment(rule, cfg.random_law(), d, cfg.param("lambdas"),
                                   cfg.n_trials, cfg.seed, workers=cfg.workers)
    if q not in rep.normalized_ratio:
        raise ConfigError(f"quantile must be one of {sorted(rep.normalized_ratio)}")
    tol = float(cfg.param("spread_tol"))
    spread = rep.spread(q)
    spread_full = rep.spread(q, full=True)
    rows = []
    for i, lam in enumerate(rep.lambdas):
        rows.append(ReportRow("salem-zygmund", f"d={d};lambda={format_value(lam)};q={q};half-range",
                              rep.normalized_ratio[q][i], None, None, True, cfg.seed))
        rows.append(ReportRow("salem-zygmund", f"d={d};lambda={format_value(lam)};q={q};full-range",
                              rep.normalized_ratio_full[q][i], None, None, True, cfg.seed))
    rows.append(ReportRow("salem-zygmund", f"d={d};spread;half-range", spread, None, tol,
                          spread < tol, cfg.seed))
    rows.append(ReportRow("salem-zygmund", f"d={d};spread;full-range", spread_full, None, tol,
                          spread_full < tol, cfg.seed))
    summary = {"lambdas": rep.lambdas, "rho": rep.rho, "rho_full": rep.rho_full,
               "sup_quantiles": rep.sup_quantiles, "normalized_ratio": rep.normalized_ratio,
               "normalized_ratio_full": rep.normalized_ratio_full, "spread": spread,
               "spread_full": spread_full, "trials": rep.trials}
    return Report("salem-zygmund", cfg, rows, summary)


def continuity_blocks(rule, law, d, lambda_max, seeds, workers=1, lambda_min=2):
    """Sup norms of dyadic blocks u_K = Σ_{2^{K-1} < λ_n <= 2^K} c_n X_n φ_n.

    Returns (cutoffs, sups) with sups of shape (len(seeds), blocks).
    """
    mode = "oneD" if d == 1 else "radial"
    K_lo = int(math.floor(math.log2(lambda_min)))
    K_hi = int(math.floor(math.log2(lambda_max)))
    cutoffs = [2.0 ** K for K in range(K_lo, K_hi + 1)]
    grid = default_grid(cutoffs[-1], mode, d)
    sups = stream_statistics(rule, law, d, mode, grid, seeds, cutoffs, sup_reducer,
                             blocks=True, workers=workers)
    return cutoffs, sups


def _continuity(cfg: ExperimentConfig) -> Report:
    rule = cfg.coefficient_rule()
    seeds = [trial_seed(cfg.seed, t) for t in range(cfg.n_trials)]
    cutoffs, sups = continuity_blocks(rule, cfg.random_law(), cfg.d, cfg.param("lambda_max"),
                                      seeds, cfg.workers, cfg.param("lambda_min"))
    running = np.cumsum(sups, axis=1)
    frac = sups[:, -1] / running[:, -1]
    tol = float(cfg.param("fraction_tol"))
    rows = [ReportRow("continuity", f"d={cfg.d};trial={t};lambda_max={format_value(cutoffs[-1])}",
                      float(f), None, tol, bool(f < tol), cfg.seed)
            for t, f in enumerate(frac)]
    summary = {"cutoffs": cutoffs, "block_sups": sups.tolist(), "final_fraction": frac.tolist(),
               "passing_trials": int(np.count_nonzero(frac < tol)), "trials": len(seeds)}
    return Report("continuity", cfg, rows, summary)


def modulus_h_values(h_min, h_max, points) -> list[float]:
    return np.geomspace(h_min, h_max, int(points)).tolist()


def _modulus(cfg: ExperimentConfig) -> Report:
    return modulus_experiment(cfg)


def modulus_experiment(cfg: ExperimentConfig) -> Report:
    """Fit m(h) ~ h^slope for random series under the dyadic Hölder condition.

    The rule defaults to :class:`HolderBlocks` with the configured μ, ν.  The
    grid spacing is h_min / 2 over the whole truncation domain.  The residual
    r(h) = ln m(h) - μ ln h is regressed on ln|ln h| and reported against the
    θ of the theorem's case table.
    """
    d = cfg.d
    if d != 1:
        raise ConfigError("the modulus experiment runs in d = 1")
    mu, nu = float(cfg.param("mu")), float(cfg.param("nu"))
    if not 0 <= mu <= 1:
        raise ConfigError("the modulus experiment needs 0 <= mu <= 1")
    rule = cfg.coefficient_rule() or HolderBlocks(mu, nu, d)
    lam = float(cfg.param("lam"))
    hs = modulus_h_values(cfg.param("h_min"), cfg.param("h_max"), cfg.param("h_points"))
    spacing = hs[0] / 2
    grid = default_grid(lam, "oneD", 1, spacing)
    seeds = [trial_seed(cfg.seed, t) for t in range(cfg.n_trials)]

    def reducer(field_):
        return np.array([modulus_on_uniform_grid(row, spacing, hs) for row in field_])

    mods = stream_statistics(rule, cfg.random_law(), 1, "oneD", grid, seeds, [lam], reducer,
                             workers=cfg.workers)[:, 0, :]
    tol = float(cfg.param("slope_tol"))
    theta = theta_prediction(mu, nu)
    rows, slopes, drifts = [], [], []
    for t, m in enumerate(mods):
        if not np.any(m > 0):
            rows.append(ReportRow("modulus", f"mu={mu};nu={nu};trial={t};degenerate",
                                  0.0, None, None, True, cfg.seed))
            slopes.append(math.nan)
            drifts.append(math.nan)
            continue
        try:
            fit = fit_rate(list(zip(hs, m)))
        except Degenerate:
            slopes.append(math.nan)
            drifts.append(math.nan)
            rows.append(ReportRow("modulus", f"mu={mu};nu={nu};trial={t}", math.nan, mu, tol,
                                  False, cfg.seed))
            continue
        resid = np.log(m) - mu * np.log(hs)
        drift = float(np.polyfit(np.log(np.abs(np.log(hs))), resid, 1)[0])
        slopes.append(fit.slope)
        drifts.append(drift)
        rows.append(ReportRow("modulus", f"mu={mu};nu={nu};trial={t}", fit.slope, mu, tol,
                              abs(fit.slope - mu) <= tol, cfg.seed))
    summary = {"mu": mu, "nu": nu, "theta": theta, "lambda": lam, "h": hs,
               "modulus": mods.tolist(), "slopes": slopes, "loglog_drift": drifts,
               "grid_spacing": spacing, "truncation_scale": math.pi / math.sqrt(lam)}
    return Report("modulus", cfg, rows, summary)


def theta_prediction(mu: float, nu: float):
    """Log exponent θ of the modulus law, or 'differentiable'."""
    if 0 < mu < 1:
        return 0.5 + nu
    if mu == 0:
        return 1 + nu
    if nu >= -0.5:
        return 1 + nu
    if nu >= -1:
        return 0.5
    return "differentiable"


def _bernstein_probe(cfg: ExperimentConfig) -> Report:
    lams = [float(v) for v in cfg.param("lambdas")]
    fit = bernstein_probe(cfg.d, lams, cfg.n_trials, cfg.seed)
    half = len(lams) // 2
    lo = bernstein_probe(cfg.d, lams[:half], cfg.n_trials, cfg.seed)
    hi = bernstein_probe(cfg.d, lams[half:], cfg.n_trials, cfg.seed)
    tol = float(cfg.param("stability_tol"))
    stable = abs(lo.slope - hi.slope) <= tol
    rows = [ReportRow("bernstein-probe", f"d={cfg.d};lambda={format_value(lam)}",
                      math.exp(y), None, None, True, cfg.seed) for lam, (_, y) in zip(lams, fit.pairs)]
    rows.append(ReportRow("bernstein-probe", f"d={cfg.d};slope", fit.slope, None, None,
                          0 < fit.slope <= 1, cfg.seed))
    rows.append(ReportRow("bernstein-probe", f"d={cfg.d};window-difference",
                          abs(lo.slope - hi.slope), 0.0, tol, stable, cfg.seed))
    summary = {"fit": fit.to_dict(), "low_window": lo.to_dict(), "high_window": hi.to_dict()}
    return Report("bernstein-probe", cfg, rows, summary)


RUNNERS: dict[str, Callable[[ExperimentConfig], Report]] = {
    "spectral-bound": _spectral_bound,
    "lp-rates": _lp_rates,
    "alpha-star": _alpha_star,
    "square-function": _square_function,
    "salem-zygmund": _salem_zygmund,
    "continuity": _continuity,
    "modulus": _modulus,
    "bernstein-probe": _bernstein_probe,
}


def run(cfg: ExperimentConfig, out_dir=None, timestamp: str | None = None) -> Report:
    """Run one experiment and write its CSV and summary."""
    report = RUNNERS[cfg.experiment](cfg)
    emit_tables([report], out_dir if out_dir is not None else cfg.out_dir, timestamp=timestamp)
    return report


def seed_from_env(default: int, var: str = "VERIFY_SEED") -> int:
    value = os.environ.get(var)
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{var} must be an integer, got {value!r}") from None
