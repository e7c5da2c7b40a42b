"""Command-line front end: configs, orchestration, artifacts, verification.

One experiment per config file.  All randomness flows from the config's
master seed; a missing seed is a validation error.  Artifacts embed the
config hash, the seed, and the tool version, and re-runs with the same
config are byte-identical regardless of the worker count.

Exit codes: 0 success, 2 config parse error, 3 validation error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .anticonc import anticonc_envelope, concentration_profile, sample_sup_drifted_bm_seeded
from .dgp import (ErrorLaw, FixedEquallySpaced, Interior, Boundary, RandomDesign,
                  ScenarioSpec, get_truth)
from .experiments import (berry_esseen_gap, default_t_grid, empirical_cdf_from_samples,
                          fit_rate, localization_diagnostics, lse_stat_many)
from .limits import (EmpiricalCdf, LimitSpec, frozen_table, limit_cdf_table,
                     limit_spec_for, read_table, sample_D_alpha_many, write_table)
from .oracle import drift_Q, oracle_limit_cdf, oracle_rates, local_average
from .paths import derived_rng

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_IO = 0, 2, 3, 4

EXPERIMENTS = ("chernoff-table", "berry-esseen", "oracle-clt", "anticonc-probe",
               "localization", "fit-rate")


class ConfigError(Exception):
    pass


def _expect_keys(d: dict, where: str, required: set[str], optional: set[str] = frozenset()):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping")
    unknown = set(d) - required - set(optional)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def scenario_from_config(cfg: dict) -> ScenarioSpec:
    _expect_keys(cfg, "scenario", {"truth", "point"}, {"design", "error"})
    truth = get_truth(cfg["truth"])
    pt = cfg["point"]
    _expect_keys(pt, "scenario.point", {"kind"}, {"x0", "rho"})
    if pt["kind"] == "interior":
        point = Interior(x0=float(pt.get("x0", truth.x0)))
    elif pt["kind"] == "boundary":
        point = Boundary(rho=float(pt["rho"]))
    else:
        raise ConfigError(f"unknown point kind {pt['kind']!r}")
    dz = cfg.get("design", {"kind": "fixed"})
    _expect_keys(dz, "scenario.design", {"kind"}, {"lambda0", "beta", "kappa"})
    if dz["kind"] == "fixed":
        design = FixedEquallySpaced(lambda0=float(dz.get("lambda0", 1.0)))
    elif dz["kind"] in ("uniform", "beta-regular"):
        design = RandomDesign(kind=dz["kind"], beta=float(dz.get("beta", math.inf)),
                              kappa=float(dz.get("kappa", 0.0)),
                              x0=point.x0 if isinstance(point, Interior) else 0.0)
    else:
        raise ConfigError(f"unknown design kind {dz['kind']!r}")
    ez = cfg.get("error", {"kind": "rademacher"})
    _expect_keys(ez, "scenario.error", {"kind"}, {"scale"})
    error = ErrorLaw(kind=ez["kind"], scale=float(ez.get("scale", 1.0)))
    try:
        return ScenarioSpec(truth=truth, point=point, design=design, error=error)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(x) if isinstance(x, float) else str(x) for x in row) + "\n")


def _provenance(cfg: dict, seed: int) -> dict:
    return {"spec_hash": config_hash(cfg), "seed": seed, "tool_version": __version__}


def _limit_reference(cfg: dict, scenario: ScenarioSpec, t_grid, seed: int):
    """Limit CDF values on the t-grid, from a frozen or freshly built table."""
    name = cfg.get("limit_table", "auto")
    if name != "auto":
        table = frozen_table(name)
        idx = np.searchsorted(table.t_grid, t_grid)
        if np.any(idx >= len(table.t_grid)) or np.any(np.abs(table.t_grid[idx] - t_grid) > 1e-12):
            raise ConfigError("frozen table does not cover the requested t-grid")
        return table.probs[idx]
    lspec = limit_spec_for(scenario, step=float(cfg.get("step", 1e-3)))
    table = limit_cdf_table(lspec, t_grid, int(cfg.get("limit_reps", 100_000)), seed + 1)
    return table.probs


def _cost_estimate(cfg: dict) -> float:
    """Rough replication cost in element operations."""
    kind = cfg["experiment"]
    if kind == "berry-esseen":
        return float(sum(cfg["n_grid"]) * cfg["n_reps"])
    if kind == "oracle-clt":
        return float(sum(cfg["n_grid"]) * cfg["n_reps"])
    if kind == "chernoff-table":
        return float(cfg["n_reps"]) * (2 * cfg.get("T", 3.0) / cfg.get("step", 1e-3))
    if kind == "anticonc-probe":
        return float(cfg["n_samples"]) / cfg.get("step", 1e-3) * len(cfg.get("drifts", [1]))
    if kind == "localization":
        return float(cfg["n"]) * cfg["n_reps"]
    return 0.0


def run_chernoff_table(cfg: dict, out: Path, seed: int, workers: int) -> dict:
    alpha = int(cfg.get("alpha", 1))
    step = float(cfg.get("step", 1e-3))
    T = float(cfg.get("T", 3.0))
    n_reps = int(cfg["n_reps"])
    t_grid = np.asarray(cfg.get("t_grid", np.round(np.arange(-10, 11) / 5.0, 10)), dtype=float)
    samples = sample_D_alpha_many(alpha, T, step, seed, n_reps)
    ecdf = empirical_cdf_from_samples(samples, t_grid, n_reps, seed)
    path = out / f"chernoff_alpha{alpha}.csv"
    write_table(path, ecdf, config_hash(cfg))
    p_at_0 = float(np.interp(0.0, ecdf.t_grid, ecdf.probs))
    return {"artifact": str(path), "p_leq_0": p_at_0}


def run_berry_esseen(cfg: dict, out: Path, seed: int, workers: int) -> dict:
    scenario = scenario_from_config(cfg["scenario"])
    n_grid = [int(n) for n in cfg["n_grid"]]
    n_reps = int(cfg["n_reps"])
    t_grid = np.asarray(cfg.get("t_grid", default_t_grid()), dtype=float)
    ref = _limit_reference(cfg, scenario, t_grid, seed)
    rows, gaps = [], []
    for j, n in enumerate(n_grid):
        stats = lse_stat_many(scenario, n, n_reps, seed + 1000 * (j + 1), workers=workers)
        ecdf = empirical_cdf_from_samples(stats, t_grid, n_reps, seed)
        gaps.append(float(np.max(np.abs(ecdf.probs - ref))))
        rows.extend((n, float(t), float(p)) for t, p in zip(t_grid, ecdf.probs))
    csv_path = out / "berry_esseen.csv"
    _write_csv(csv_path, ["n", "t", "prob"], rows)
    rate = fit_rate(list(zip(n_grid, gaps)))
    return {"artifact": str(csv_path), "E_n": gaps, "n_grid": n_grid,
            "slope": rate.slope, "intercept": rate.intercept, "n_reps": n_reps}


def run_oracle_clt(cfg: dict, out: Path, seed: int, workers: int) -> dict:
    scenario = scenario_from_config(cfg["scenario"])
    n_grid = [int(n) for n in cfg["n_grid"]]
    n_reps = int(cfg["n_reps"])
    h1 = float(cfg.get("h1", 1.0))
    h2 = float(cfg.get("h2", 1.0))
    Q = drift_Q(scenario)
    rows = []
    from .dgp import gen_sample

    for j, n in enumerate(n_grid):
        rates = oracle_rates(scenario, n)
        x_star = scenario.x_star(n)
        f_star = float(scenario.truth(x_star))
        stats = np.empty(n_reps)
        for i in range(n_reps):
            rng = derived_rng(seed + 1000 * (j + 1), i)
            sample = gen_sample(scenario, n, rng)
            value = local_average(x_star, rates.r_n, h1, h2, sample)
            stats[i] = rates.omega_inv * (value - f_star)
        s = np.sort(stats)
        grid = np.linspace(s[0], s[-1], 512)
        emp = np.searchsorted(s, grid, side="right") / n_reps
        ref = oracle_limit_cdf(grid, h1, h2, scenario.sigma, scenario.lambda0, Q)
        ks = float(np.max(np.abs(emp - ref)))
        rows.append((n, ks))
    csv_path = out / "oracle_clt.csv"
    _write_csv(csv_path, ["n", "ks"], rows)
    return {"artifact": str(csv_path), "ks": {str(n): k for n, k in rows}}


def run_anticonc_probe(cfg: dict, out: Path, seed: int, workers: int) -> dict:
    step = float(cfg.get("step", 2e-4))
    n_samples = int(cfg["n_samples"])
    eps_grid = np.asarray(cfg.get("eps_grid", [1e-1, 1e-2, 1e-3]), dtype=float)
    rows = []
    for j, dz in enumerate(cfg["drifts"]):
        _expect_keys(dz, "drifts entry", {"kind"}, {"mu", "b", "t"})
        if dz["kind"] == "none":
            drift, b = (lambda h: np.zeros_like(h)), 0.0
        elif dz["kind"] == "linear":
            mu = float(dz["mu"])
            drift, b = (lambda h, mu=mu: mu * h), abs(mu)
        elif dz["kind"] == "linquad":
            bq, tl = float(dz["b"]), float(dz.get("t", 0.0))
            drift = lambda h, bq=bq, tl=tl: bq * h ** 2 - tl * h
            b = 2 * abs(bq) + abs(tl)  # Lipschitz constant on [0, 1]
        else:
            raise ConfigError(f"unknown drift kind {dz['kind']!r}")
        samples = sample_sup_drifted_bm_seeded(drift, step, seed + 1000 * (j + 1), n_samples)
        prof = concentration_profile(samples, eps_grid, b)
        for eps, level, env, ratio in zip(prof.eps_grid, prof.levels,
                                          prof.envelopes(), prof.ratios()):
            rows.append((float(eps), float(level), float(env), float(ratio), n_samples, float(b)))
    csv_path = out / "anticonc_probe.csv"
    _write_csv(csv_path, ["eps", "level", "envelope", "ratio", "n_samples", "b"], rows)
    fitted_K = max(r[3] for r in rows)
    return {"artifact": str(csv_path), "fitted_K": fitted_K}


def run_localization(cfg: dict, out: Path, seed: int, workers: int) -> dict:
    scenario = scenario_from_config(cfg["scenario"])
    rep = localization_diagnostics(scenario, int(cfg["n"]), int(cfg["n_reps"]),
                                   float(cfg.get("K_t", 3.0)), float(cfg.get("K_tau", 3.0)),
                                   seed, workers=workers)
    return {"freq_stat_exceeds": rep.freq_stat_exceeds,
            "freq_touch_exceeds": rep.freq_touch_exceeds,
            "t_threshold": rep.t_threshold, "tau_threshold": rep.tau_threshold}


def run_fit_rate(cfg: dict, out: Path, seed: int, workers: int) -> dict:
    if "pairs" in cfg:
        pairs = [(float(n), float(e)) for n, e in cfg["pairs"]]
    else:
        with open(cfg["summary"]) as fh:
            summary = json.load(fh)
        pairs = list(zip(summary["n_grid"], summary["E_n"]))
    rate = fit_rate(pairs)
    return {"slope": rate.slope, "intercept": rate.intercept}


_RUNNERS = {
    "chernoff-table": run_chernoff_table,
    "berry-esseen": run_berry_esseen,
    "oracle-clt": run_oracle_clt,
    "anticonc-probe": run_anticonc_probe,
    "localization": run_localization,
    "fit-rate": run_fit_rate,
}

_SCHEMAS = {
    "chernoff-table": ({"experiment", "seed", "n_reps"},
                       {"alpha", "step", "T", "t_grid", "output_dir", "budget", "full_scale"}),
    "berry-esseen": ({"experiment", "seed", "scenario", "n_grid", "n_reps"},
                     {"t_grid", "limit_table", "limit_reps", "step", "output_dir",
                      "budget", "full_scale"}),
    "oracle-clt": ({"experiment", "seed", "scenario", "n_grid", "n_reps"},
                   {"h1", "h2", "output_dir", "budget", "full_scale"}),
    "anticonc-probe": ({"experiment", "seed", "drifts", "n_samples"},
                       {"eps_grid", "step", "output_dir", "budget", "full_scale"}),
    "localization": ({"experiment", "seed", "scenario", "n", "n_reps"},
                     {"K_t", "K_tau", "output_dir", "budget", "full_scale"}),
    "fit-rate": ({"experiment", "seed"}, {"pairs", "summary", "output_dir", "budget"}),
}


def load_config(path: str):
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    return cfg


def validate_config(cfg: dict, expected_kind: str | None = None) -> None:
    kind = cfg.get("experiment")
    if kind not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
    if expected_kind is not None and kind != expected_kind:
        raise ConfigError(f"config is for {kind!r}, invoked as {expected_kind!r}")
    required, optional = _SCHEMAS[kind]
    _expect_keys(cfg, "config", required, optional)
    if not isinstance(cfg["seed"], int):
        raise ConfigError("seed must be an integer (no silent nondeterminism)")
    if kind != "fit-rate" and "scenario" in cfg:
        scenario_from_config(cfg["scenario"])


def run_experiment(cfg: dict, out_dir: str | Path, workers: int = 1,
                   seed_override: int | None = None, full_scale: bool = False,
                   dry_run: bool = False) -> dict:
    """Execute a validated config; returns the JSON-serializable summary."""
    kind = cfg["experiment"]
    seed = int(seed_override if seed_override is not None else cfg["seed"])
    if full_scale and "full_scale" in cfg:
        cfg = {**cfg, **cfg["full_scale"]}
    cfg_wo = {k: v for k, v in cfg.items() if k != "full_scale"}
    cost = _cost_estimate(cfg_wo)
    budget = cfg.get("budget")
    if dry_run:
        return {"experiment": kind, "estimated_cost": cost, "dry_run": True}
    if budget is not None and cost > float(budget):
        raise ConfigError(f"estimated cost {cost:.3g} exceeds budget {budget}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    result = _RUNNERS[kind](cfg_wo, out, seed, workers)
    result.update(_provenance(cfg_wo, seed))
    result["experiment"] = kind
    result["runtime_seconds"] = round(time.time() - t0, 3)
    summary_path = out / f"{kind.replace('-', '_')}_summary.json"
    with open(summary_path, "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
    return result


def verify_artifact(path: str | Path) -> dict:
    """Recheck invariants of a stored artifact; raises ValueError on failure."""
    path = Path(path)
    if not path.exists():
        raise OSError(f"artifact {path} does not exist")
    if path.suffix == ".json":
        with open(path) as fh:
            data = json.load(fh)
        for key in ("spec_hash", "seed", "tool_version"):
            if key not in data:
                raise ValueError(f"{path}: missing provenance field {key!r}")
        return {"artifact": str(path), "status": "pass"}
    if path.suffix != ".csv":
        raise ValueError(f"{path}: unknown artifact type")
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if "prob" in header:
        j = header.index("prob")
        last_by_group: dict[str, float] = {}
        gcol = header.index("n") if "n" in header else None
        for i, row in enumerate(rows, start=2):
            p = float(row[j])
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{path}: row {i}: prob {p} outside [0, 1]")
            g = row[gcol] if gcol is not None else ""
            if "t" in header and last_by_group.get(g, -1.0) - p > 1e-12:
                raise ValueError(f"{path}: row {i}: probs not nondecreasing in t")
            last_by_group[g] = p
    return {"artifact": str(path), "status": "pass", "rows": len(rows)}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isolab",
                                     description="isotonic limit-law simulation lab")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in EXPERIMENTS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True, help="path to the YAML config")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed-override", type=int, default=None)
        p.add_argument("--full-scale", action="store_true")
        p.add_argument("--dry-run", action="store_true")
    v = sub.add_parser("verify", help="verify a stored artifact")
    v.add_argument("artifact", help="path to a CSV or JSON artifact")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            report = verify_artifact(args.artifact)
            print(json.dumps(report, indent=2))
            return EXIT_OK
        cfg = load_config(args.config)
        validate_config(cfg, expected_kind=args.command)
        out_dir = args.out or cfg.get("output_dir", "results")
        result = run_experiment(cfg, out_dir, workers=args.workers,
                                seed_override=args.seed_override,
                                full_scale=args.full_scale, dry_run=args.dry_run)
    except ConfigError as exc:
        msg = str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_PARSE if "parse error" in msg else EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(json.dumps(result, indent=2, sort_keys=True, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
