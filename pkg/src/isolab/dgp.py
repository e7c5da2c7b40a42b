"""Synthetic regression scenarios: truths, designs, and error laws.

A scenario pins down everything needed to simulate one draw of the
regression model Y_i = f0(X_i) + xi_i: a truth function with its local
smoothness metadata (first and second non-vanishing derivative orders),
the evaluation point (interior, or a boundary point shrinking like
n^-rho), the design (fixed equally spaced or random), and a mean-zero
sub-exponential error law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .isotonic import RegressionSample

__all__ = [
    "TruthSpec",
    "Interior",
    "Boundary",
    "FixedEquallySpaced",
    "RandomDesign",
    "ErrorLaw",
    "ScenarioSpec",
    "builtin_truths",
    "get_truth",
    "gen_design",
    "gen_errors",
    "gen_sample",
]

INF = math.inf


@dataclass(frozen=True)
class TruthSpec:
    """Monotone truth with local smoothness metadata at its base point.

    ``alpha`` is the order of the first non-vanishing derivative at the
    evaluation base point, ``alpha_star`` the second (possibly inf);
    ``deriv_alpha`` / ``deriv_alpha_star`` the corresponding derivative
    values.
    """

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    x0: float
    alpha: float
    alpha_star: float
    deriv_alpha: float
    deriv_alpha_star: float = 0.0

    def __call__(self, x):
        return self.f(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Interior:
    x0: float

    def __post_init__(self):
        if not 0 < self.x0 < 1:
            raise ValueError("interior point must lie in (0, 1)")


@dataclass(frozen=True)
class Boundary:
    """Evaluation at x_n = n^-rho shrinking to the left boundary."""

    rho: float

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")


@dataclass(frozen=True)
class FixedEquallySpaced:
    """Deterministic design, locally equally spaced with gap 1/(lambda0 n).

    lambda0 = 1 gives the canonical global design X_i = i/n.
    """

    lambda0: float = 1.0

    def __post_init__(self):
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")


@dataclass(frozen=True)
class RandomDesign:
    """i.i.d. design from a density bounded away from 0 on [0, 1].

    kind 'uniform': pi = 1.  kind 'beta-regular': pi(x) proportional to
    1 + kappa * (x - x0)^beta, normalized on [0, 1]; kappa is capped so
    the density stays within [1/2, 3/2].
    """

    kind: str = "uniform"
    beta: float = INF
    kappa: float = 0.0
    x0: float = 0.5

    def __post_init__(self):
        if self.kind not in ("uniform", "beta-regular"):
            raise ValueError(f"unknown random design kind {self.kind!r}")
        if self.kind == "beta-regular":
            if not (self.beta >= 1 and self.beta < INF):
                raise ValueError("beta-regular design needs finite beta >= 1")
            if abs(self.kappa) > 0.5:
                raise ValueError("kappa must keep the density within [1/2, 3/2]")

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            return np.ones_like(x)
        raw = 1.0 + self.kappa * (x - self.x0) ** self.beta
        norm = self._norm_const()
        return raw / norm

    def _norm_const(self) -> float:
        if self.kind == "uniform":
            return 1.0
        b = self.beta
        # integral of 1 + kappa (x - x0)^b over [0, 1]
        integral = 1.0 + self.kappa * ((1 - self.x0) ** (b + 1) - (-self.x0) ** (b + 1)) / (b + 1)
        return float(integral)

    def lambda0_at(self, x0: float) -> float:
        return float(self.density(np.array([x0]))[0])


@dataclass(frozen=True)
class ErrorLaw:
    """Mean-zero sub-exponential error law.

    Supported kinds: rademacher, gaussian, laplace, centered-exponential.
    ``scale`` is the kind-specific parameter (std dev for gaussian, scale
    for laplace, mean 1/rate for centered exponential; ignored for
    rademacher).
    """

    kind: str = "rademacher"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("rademacher", "gaussian", "laplace",
                             "centered-exponential", "none"):
            raise ValueError(f"unknown error law {self.kind!r}")
        if self.kind != "none" and self.scale <= 0:
            raise ValueError("scale must be positive")

    @property
    def sigma(self) -> float:
        """Standard deviation of the law."""
        if self.kind == "rademacher":
            return 1.0
        if self.kind == "gaussian":
            return self.scale
        if self.kind == "laplace":
            return self.scale * math.sqrt(2.0)
        if self.kind == "none":  # degenerate, testing only
            return 0.0
        return self.scale  # centered exponential with mean parameter = sd

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "rademacher":
            return rng.integers(0, 2, size=n) * 2.0 - 1.0
        if self.kind == "gaussian":
            return rng.standard_normal(n) * self.scale
        if self.kind == "laplace":
            return rng.laplace(0.0, self.scale, size=n)
        if self.kind == "none":
            return np.zeros(n)
        return rng.exponential(self.scale, size=n) - self.scale


_CAT: dict[str, TruthSpec] = {}


def _register(spec: TruthSpec):
    _CAT[spec.name] = spec
    return spec


# module-level truth functions (picklable, unlike lambdas)
def _f_linear(x):
    return x


def _f_exp(x):
    return np.exp(x)


def _f_cubic(x):
    return (x - 0.5) ** 3


def _f_cubic_quintic(x):
    return (x - 0.5) ** 3 + (x - 0.5) ** 5


def _f_quad_quartic_origin(x):
    return x ** 2 + x ** 4


def _f_quad2(x):
    return 2.0 * x ** 2


def _f_quart4(x):
    return 4.0 * x ** 4


def _f_constant(x):
    return np.zeros_like(x)


_register(TruthSpec("linear", _f_linear, x0=0.5, alpha=1, alpha_star=INF, deriv_alpha=1.0))
_register(TruthSpec("exp", _f_exp, x0=0.5, alpha=1, alpha_star=2,
                    deriv_alpha=math.exp(0.5), deriv_alpha_star=math.exp(0.5)))
_register(TruthSpec("cubic", _f_cubic, x0=0.5, alpha=3, alpha_star=INF,
                    deriv_alpha=6.0))
_register(TruthSpec("cubic-quintic", _f_cubic_quintic, x0=0.5,
                    alpha=3, alpha_star=5, deriv_alpha=6.0, deriv_alpha_star=120.0))
_register(TruthSpec("quad-quartic-origin", _f_quad_quartic_origin, x0=0.0,
                    alpha=2, alpha_star=4, deriv_alpha=2.0, deriv_alpha_star=24.0))
_register(TruthSpec("quad2", _f_quad2, x0=0.5, alpha=1, alpha_star=2,
                    deriv_alpha=2.0, deriv_alpha_star=4.0))
_register(TruthSpec("quart4", _f_quart4, x0=0.5, alpha=1, alpha_star=2,
                    deriv_alpha=2.0, deriv_alpha_star=12.0))
_register(TruthSpec("constant", _f_constant, x0=0.5, alpha=INF, alpha_star=INF,
                    deriv_alpha=0.0))


def builtin_truths() -> dict[str, TruthSpec]:
    """Catalog of named truth functions with smoothness metadata."""
    return dict(_CAT)


def get_truth(name: str) -> TruthSpec:
    try:
        return _CAT[name]
    except KeyError:
        raise KeyError(f"unknown truth {name!r}; available: {sorted(_CAT)}") from None


@dataclass(frozen=True)
class ScenarioSpec:
    """Full experiment description for one regression scenario."""

    truth: TruthSpec
    point: Interior | Boundary
    design: FixedEquallySpaced | RandomDesign = field(default_factory=FixedEquallySpaced)
    error: ErrorLaw = field(default_factory=ErrorLaw)

    def __post_init__(self):
        a, a2 = self.truth.alpha, self.truth.alpha_star
        if isinstance(self.point, Interior) and a < INF:
            if int(a) % 2 != 1 or self.truth.deriv_alpha <= 0:
                raise ValueError("interior point needs odd alpha with positive derivative")
        if a < INF and a2 < a + 1:
            raise ValueError("alpha_star must be at least alpha + 1")

    @property
    def sigma(self) -> float:
        return self.error.sigma

    @property
    def lambda0(self) -> float:
        if isinstance(self.design, FixedEquallySpaced):
            return self.design.lambda0
        return self.design.lambda0_at(self.x0)

    @property
    def x0(self) -> float:
        return self.point.x0 if isinstance(self.point, Interior) else 0.0

    def x_star(self, n: int) -> float:
        """Evaluation point: x0 for interior, n^-rho at the boundary."""
        if isinstance(self.point, Interior):
            return self.point.x0
        return float(n) ** (-self.point.rho)


def gen_design(spec: ScenarioSpec, n: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Sorted design points for one replication."""
    if n < 1:
        raise ValueError("n must be >= 1")
    design = spec.design
    if isinstance(design, FixedEquallySpaced):
        if design.lambda0 == 1.0:
            return np.arange(1, n + 1) / n
        # locally equally spaced with gap 1/(lambda0 n), centered at x0
        gap = 1.0 / (design.lambda0 * n)
        x0 = spec.x0 if isinstance(spec.point, Interior) else 0.0
        k = int(round(x0 / gap))
        xs = x0 + (np.arange(1, n + 1) - k) * gap
        if xs[0] < 0 or xs[-1] > 1:
            raise ValueError("lambda0 grid does not fit in [0, 1] for this n")
        return xs
    if rng is None:
        raise ValueError("random design requires an rng")
    if design.kind == "uniform":
        return np.sort(rng.uniform(0.0, 1.0, size=n))
    # beta-regular: inverse-CDF on a fine grid (CDF is a closed-form
    # polynomial; the inverse is tabulated once per call)
    grid = np.linspace(0.0, 1.0, 1 << 14)
    pdf = design.density(grid)
    cdf = np.concatenate([[0.0], np.cumsum((pdf[1:] + pdf[:-1]) / 2 * np.diff(grid))])
    cdf /= cdf[-1]
    u = rng.uniform(0.0, 1.0, size=n)
    return np.sort(np.interp(u, cdf, grid))


def gen_errors(spec: ScenarioSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    return spec.error.draw(n, rng)


def gen_sample(spec: ScenarioSpec, n: int, rng: np.random.Generator) -> RegressionSample:
    """One draw of the regression model, with truth values recorded."""
    xs = gen_design(spec, n, rng)
    f0 = spec.truth(xs)
    ys = f0 + gen_errors(spec, n, rng)
    return RegressionSample(xs=xs, ys=ys, truth=f0)
