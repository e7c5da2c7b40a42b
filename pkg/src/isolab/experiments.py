"""Monte Carlo harness for distributional-approximation rate experiments.

Samples the standardized isotonic least-squares statistic across
replications, builds empirical CDFs on a t-grid, measures sup-gaps
against a limit reference, and fits log-log decay rates.  All randomness
flows from one master seed through counter-derived per-replication
streams, so results are bit-identical under any worker schedule.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dgp import INF, FixedEquallySpaced, Interior, ScenarioSpec, gen_design, gen_sample
from .isotonic import _pava_value_at
from .limits import EmpiricalCdf
from .oracle import oracle_rates
from .paths import derived_rng

__all__ = [
    "RateFit",
    "DiagnosticsReport",
    "standardized_lse_stat",
    "lse_stat_many",
    "empirical_cdf",
    "empirical_cdf_from_samples",
    "berry_esseen_gap",
    "fit_rate",
    "localization_diagnostics",
]

_BLOCK = 2000  # fixed replication block size; must not depend on worker count


@dataclass(frozen=True)
class RateFit:
    """OLS fit of log E_n on log n."""

    ns: np.ndarray
    gaps: np.ndarray
    slope: float
    intercept: float
    residuals: np.ndarray


@dataclass(frozen=True)
class DiagnosticsReport:
    """Exceedance frequencies for the localization events."""

    freq_stat_exceeds: float
    freq_touch_exceeds: float
    t_threshold: float
    tau_threshold: float
    n_reps: int


def _eval_index(xs: np.ndarray, x_star: float) -> int:
    """Design index realizing the left-continuous step convention at x*."""
    k = int(np.searchsorted(xs, x_star, side="left"))
    return min(k, len(xs) - 1)


def standardized_lse_stat(spec: ScenarioSpec, n: int, rng: np.random.Generator) -> float:
    """One draw of omega_n^-1 (fhat_n(x*) - f0(x*))."""
    if n < 10:
        raise ValueError("n must be >= 10")
    sample = gen_sample(spec, n, rng)
    x_star = spec.x_star(n)
    k = _eval_index(sample.xs, x_star)
    value, _, _ = _pava_value_at(sample.ys, k)
    rates = oracle_rates(spec, n)
    return rates.omega_inv * (value - float(spec.truth(x_star)))


def _stat_block(spec: ScenarioSpec, n: int, master_seed: int, lo: int, hi: int,
                with_touch: bool = False):
    """Statistics for replications [lo, hi); one derived stream per rep."""
    x_star = spec.x_star(n)
    rates = oracle_rates(spec, n)
    fixed = isinstance(spec.design, FixedEquallySpaced)
    if fixed:
        xs = gen_design(spec, n)
        f0 = spec.truth(xs)
        k = _eval_index(xs, x_star)
    f_star = float(spec.truth(x_star))
    stats = np.empty(hi - lo)
    touch = np.empty(hi - lo) if with_touch else None
    for i in range(lo, hi):
        rng = derived_rng(master_seed, i)
        if fixed:
            ys = f0 + spec.error.draw(n, rng)
        else:
            xs = gen_design(spec, n, rng)
            ys = spec.truth(xs) + spec.error.draw(n, rng)
            k = _eval_index(xs, x_star)
        value, blo, bhi = _pava_value_at(ys, k)
        stats[i - lo] = rates.omega_inv * (value - f_star)
        if with_touch:
            h1 = (x_star - xs[blo]) / rates.r_n
            h2 = (xs[bhi - 1] - x_star) / rates.r_n
            touch[i - lo] = max(h1, h2)
    return (stats, touch) if with_touch else stats


def lse_stat_many(spec: ScenarioSpec, n: int, n_reps: int, master_seed: int,
                  workers: int = 1) -> np.ndarray:
    """Batch of standardized LSE statistics, schedule-independent.

    Replications are cut into fixed-size blocks; per-replication streams
    make the result identical for any ``workers`` count.
    """
    blocks = [(lo, min(lo + _BLOCK, n_reps)) for lo in range(0, n_reps, _BLOCK)]
    if workers <= 1 or len(blocks) == 1:
        parts = [_stat_block(spec, n, master_seed, lo, hi) for lo, hi in blocks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_stat_block, spec, n, master_seed, lo, hi)
                    for lo, hi in blocks]
            parts = [f.result() for f in futs]
    return np.concatenate(parts)


def empirical_cdf_from_samples(samples: np.ndarray, t_grid, n_reps: int,
                               seed: int) -> EmpiricalCdf:
    t_grid = np.asarray(t_grid, dtype=float)
    s = np.sort(np.asarray(samples, dtype=float))
    probs = np.searchsorted(s, t_grid, side="right") / len(s)
    return EmpiricalCdf(t_grid=t_grid, probs=probs, n_reps=n_reps, seed=seed)


def empirical_cdf(sampler, t_grid, n_reps: int, master_seed: int) -> EmpiricalCdf:
    """Empirical CDF of ``sampler(rng) -> float`` over derived streams."""
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    samples = np.array([sampler(derived_rng(master_seed, i)) for i in range(n_reps)])
    return empirical_cdf_from_samples(samples, t_grid, n_reps, master_seed)


def berry_esseen_gap(ecdf: EmpiricalCdf, limit) -> float:
    """Sup over the t-grid of |empirical - limit| CDF values.

    ``limit`` is a second :class:`EmpiricalCdf` on the same grid or a
    callable CDF.
    """
    if isinstance(limit, EmpiricalCdf):
        if len(limit.t_grid) != len(ecdf.t_grid) or np.any(limit.t_grid != ecdf.t_grid):
            raise ValueError("t-grids do not match")
        ref = limit.probs
    else:
        ref = np.asarray(limit(ecdf.t_grid), dtype=float)
    return float(np.max(np.abs(ecdf.probs - ref)))


def default_t_grid() -> np.ndarray:
    """One-sided t-grid {l/5 : 1 <= l <= 10}."""
    return np.arange(1, 11) / 5.0


def symmetric_t_grid() -> np.ndarray:
    return np.arange(-10, 11) / 5.0


def fit_rate(pairs) -> RateFit:
    """OLS slope of log E_n on log n (natural logs)."""
    ns = np.array([p[0] for p in pairs], dtype=float)
    gaps = np.array([p[1] for p in pairs], dtype=float)
    if len(ns) < 3:
        raise ValueError("need at least 3 (n, E_n) pairs")
    if np.any(gaps <= 0):
        raise ValueError("E_n values must be positive")
    x, y = np.log(ns), np.log(gaps)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return RateFit(ns=ns, gaps=gaps, slope=float(slope), intercept=float(intercept),
                   residuals=resid)


def localization_thresholds(spec: ScenarioSpec, n: int, K_t: float,
                            K_tau: float) -> tuple[float, float]:
    logn = math.log(n)
    t_n = K_t * math.sqrt(logn)
    alpha = spec.truth.alpha
    if isinstance(spec.point, Interior):
        expo = 0.0 if alpha == INF else 1.0 / (2 * alpha)
        tau_n = K_tau * logn ** expo if alpha < INF else K_tau * math.sqrt(logn)
    else:
        crit = 0.0 if alpha == INF else 1.0 / (2 * alpha + 1)
        if spec.point.rho < crit:
            tau_n = K_tau * math.sqrt(logn)
        else:
            expo = 0.0 if alpha == INF else 1.0 / (2 * alpha)
            tau_n = K_tau * logn ** expo
    return t_n, tau_n


def localization_diagnostics(spec: ScenarioSpec, n: int, n_reps: int, K_t: float,
                             K_tau: float, seed: int, workers: int = 1) -> DiagnosticsReport:
    """Frequencies of the statistic and touch-point exceedance events.

    Events: |standardized statistic| > K_t sqrt(log n), and
    max(h1*, h2*) > K_tau (log n)^(1/2 alpha) (square root in the
    fast-shrinking boundary regime).
    """
    t_n, tau_n = localization_thresholds(spec, n, K_t, K_tau)
    blocks = [(lo, min(lo + _BLOCK, n_reps)) for lo in range(0, n_reps, _BLOCK)]
    if workers <= 1 or len(blocks) == 1:
        parts = [_stat_block(spec, n, seed, lo, hi, with_touch=True) for lo, hi in blocks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_stat_block, spec, n, seed, lo, hi, True)
                    for lo, hi in blocks]
            parts = [f.result() for f in futs]
    stats = np.concatenate([p[0] for p in parts])
    touch = np.concatenate([p[1] for p in parts])
    return DiagnosticsReport(
        freq_stat_exceeds=float(np.mean(np.abs(stats) > t_n)),
        freq_touch_exceeds=float(np.mean(touch > tau_n)),
        t_threshold=t_n,
        tau_threshold=tau_n,
        n_reps=n_reps,
    )
