"""Oracle local-average estimator and its Gaussian limit.

Implements the rate-optimal bandwidth and convergence-rate formulas for
the local average estimator that knows the truth's smoothness, the drift
polynomial describing the limiting mean, the Taylor bias of window
averages, and the closed-form Gaussian limit CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .dgp import INF, Boundary, Interior, RandomDesign, ScenarioSpec
from .isotonic import RegressionSample

__all__ = [
    "DriftSpec",
    "OracleRates",
    "oracle_rates",
    "drift_Q",
    "local_average",
    "bias_expansion",
    "oracle_limit_cdf",
]


@dataclass(frozen=True)
class DriftSpec:
    """Polynomial drift Q(h) = sum of coef * h^power with Q(0) = 0."""

    powers: tuple[float, ...] = ()
    coefs: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.powers) != len(self.coefs):
            raise ValueError("powers and coefs must have equal length")
        if any(p <= 0 for p in self.powers):
            raise ValueError("powers must be positive so that Q(0) = 0")

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        out = np.zeros_like(h)
        for p, c in zip(self.powers, self.coefs):
            if p == int(p):
                out += c * h ** int(p)  # keeps sign for negative h
            else:
                out += c * np.sign(h) * np.abs(h) ** p
        return out

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coefs)

    @staticmethod
    def zero() -> "DriftSpec":
        return DriftSpec()


@dataclass(frozen=True)
class OracleRates:
    """Bandwidth, local rate, and oracle distributional-approximation rate."""

    r_n: float
    omega_inv: float
    B_n: float


def _branch(spec: ScenarioSpec) -> str:
    """Which of the three bandwidth regimes the scenario falls in."""
    if isinstance(spec.point, Interior):
        return "interior"
    alpha = spec.truth.alpha
    crit = 0.0 if alpha == INF else 1.0 / (2 * alpha + 1)
    rho = spec.point.rho
    if rho < crit:
        return "boundary-sub"
    if rho == crit:
        return "boundary-crit"
    return "boundary-super"


def oracle_rates(spec: ScenarioSpec, n: int) -> OracleRates:
    """Optimal bandwidth r_n, local rate (n r_n)^(1/2), and the oracle rate.

    The oracle rate is returned as an order of magnitude (powers of n and
    log n evaluated at this n); the unspecified absolute constant is not
    modelled.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    alpha = spec.truth.alpha
    alpha_star = spec.truth.alpha_star
    branch = _branch(spec)
    logn = math.log(n)
    random = isinstance(spec.design, RandomDesign)
    beta = spec.design.beta if random else INF

    if branch == "interior":
        expo = 0.0 if alpha == INF else 1.0 / (2 * alpha + 1)
        r_n = n ** (-expo)
    elif branch == "boundary-sub":
        rho = spec.point.rho
        r_n = n ** (-(1 - 2 * rho * (alpha - 1)) / 3)
    else:
        r_n = n ** (-spec.point.rho)
    omega_inv = math.sqrt(n * r_n)

    def pw(e: float, log_pow: float = 0.0) -> float:
        return n ** e * logn ** log_pow

    terms: list[float] = []
    noise_log = 1.0 if (alpha < INF and random) else 0.0
    if branch in ("interior", "boundary-crit"):
        a_expo = 0.5 if alpha == INF else alpha / (2 * alpha + 1)
        terms.append(pw(-a_expo, noise_log))
        if alpha_star < INF:
            terms.append(pw(-(alpha_star - alpha) / (2 * alpha + 1)))
        if alpha < INF and beta < INF:
            terms.append(pw(-beta / (2 * alpha + 1)))
    elif branch == "boundary-sub":
        rho = spec.point.rho
        terms.append(pw(-(1 - (2 * alpha + 1) * rho) / 3))
        if alpha_star < INF:
            terms.append(pw(-rho * (alpha_star - alpha)))
    else:  # boundary-super
        rho = spec.point.rho
        terms.append(pw(-(1 - rho) / 2, noise_log))
        if alpha < INF:
            terms.append(pw(-((2 * alpha + 1) * rho - 1) / 2))
    return OracleRates(r_n=r_n, omega_inv=omega_inv, B_n=max(terms))


def drift_Q(spec: ScenarioSpec) -> DriftSpec:
    """Drift polynomial of the limiting distribution for this scenario."""
    alpha = spec.truth.alpha
    if alpha == INF:
        return DriftSpec.zero()
    a = int(alpha)
    d = spec.truth.deriv_alpha
    branch = _branch(spec)
    if branch == "interior":
        return DriftSpec(powers=(a + 1,), coefs=(d / math.factorial(a + 1),))
    if branch == "boundary-sub":
        return DriftSpec(powers=(2,), coefs=(d / (2 * math.factorial(a - 1)),))
    if branch == "boundary-crit":
        powers = tuple(float(l + 1) for l in range(1, a + 1))
        coefs = tuple(d / (math.factorial(a - l) * math.factorial(l + 1)) for l in range(1, a + 1))
        return DriftSpec(powers=powers, coefs=coefs)
    return DriftSpec.zero()


def local_average(x_star: float, r_n: float, h1: float, h2: float,
                  sample: RegressionSample) -> float:
    """Mean response over the window [x* - h1 r_n, x* + h2 r_n]."""
    lo, hi = x_star - h1 * r_n, x_star + h2 * r_n
    mask = (sample.xs >= lo) & (sample.xs <= hi)
    count = int(mask.sum())
    if count == 0:
        raise ValueError("window contains no design points")
    return float(sample.ys[mask].mean())


def bias_expansion(spec: ScenarioSpec, n: int, h1: float, h2: float) -> tuple[float, float]:
    """Leading Taylor term of the window-average bias and remainder order.

    Returns (leading, remainder_order) for the normalized mean bias of
    the window [x* - h1 r_n, x* + h2 r_n].  Flat truths give (0, 0).
    """
    alpha = spec.truth.alpha
    if alpha == INF:
        return 0.0, 0.0
    a = int(alpha)
    alpha_star = spec.truth.alpha_star
    rates = oracle_rates(spec, n)
    r_n = rates.r_n
    d = spec.truth.deriv_alpha
    if isinstance(spec.point, Interior):
        lead = d / math.factorial(a + 1) * (h2 ** (a + 1) - h1 ** (a + 1)) / (h1 + h2) * r_n ** a
        rem = r_n ** a / (n * r_n)
        if alpha_star < INF:
            rem = max(rem, r_n ** alpha_star)
        return lead, rem
    x_n = spec.x_star(n)
    lead = 0.0
    for l in range(1, a + 1):
        lead += (d / (math.factorial(a - l) * math.factorial(l + 1))
                 * (h2 ** (l + 1) - (-h1) ** (l + 1)) / (h1 + h2)
                 * x_n ** (a - l) * r_n ** l)
    rem = max(x_n ** (a - l) * r_n ** l / (n * r_n) for l in range(1, a + 1))
    if alpha_star < INF:
        a2 = int(alpha_star)
        rem = max(rem, max(x_n ** (a2 - l) * r_n ** l for l in range(1, a2 + 1)))
    return lead, rem


def oracle_limit_cdf(t, h1: float, h2: float, sigma: float, lambda0: float,
                     Q: DriftSpec) -> np.ndarray | float:
    """Gaussian limit CDF of the standardized oracle statistic.

    Mean (Q(h2) - Q(-h1)) / (h1 + h2); variance sigma^2 / (lambda0 (h1 + h2)).
    """
    if h1 + h2 <= 0:
        raise ValueError("need h1 + h2 > 0")
    mu = float(Q(np.array([h2]))[0] - Q(np.array([-h1]))[0]) / (h1 + h2)
    sd = sigma / math.sqrt(lambda0 * (h1 + h2))
    out = norm.cdf(t, loc=mu, scale=sd)
    return float(out) if np.isscalar(t) else out
