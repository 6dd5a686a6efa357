"""Arena geometry: distance and link-gain laws and the interference
expectations built on them.

Link gain under free-space loss is ``h = lambda**2 / d**2`` (normalised so a
link at one wavelength has unit gain). Analytic expectations use the Gaussian
approximation of the inter-node distance, giving ``F_H(h) = exp(-C/h)`` with
``C = k**2 lambda**2 / (4 b**2)``, and truncate the gain support to
``[1/delta_M**2, 1/delta_m**2]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numerics import DEFAULT_TOL, DomainError, Tolerance, exp1_scaled, exp_integral_e1, integrate_unit


@dataclass(frozen=True)
class Arena:
    """Square arena of side ``b`` metres at carrier wavelength ``lam``.

    ``k`` is the shape constant of the Gaussian distance approximation
    (3.5 for a uniform square). Everything else is derived.
    """

    b: float = 6.0
    lam: float = 0.1
    k: float = 3.5
    d_m: float = field(init=False)
    d_M: float = field(init=False)
    delta_m: float = field(init=False)
    delta_M: float = field(init=False)
    C: float = field(init=False)

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"side length b must be > 0, got {self.b}")
        if not self.lam > 0:
            raise ValueError(f"wavelength must be > 0, got {self.lam}")
        if not self.k > 0:
            raise ValueError(f"shape constant k must be > 0, got {self.k}")
        d_m = self.lam
        d_M = math.sqrt(2.0) * self.b
        if not d_m < d_M:
            raise ValueError("wavelength must be shorter than the arena diagonal")
        object.__setattr__(self, "d_m", d_m)
        object.__setattr__(self, "d_M", d_M)
        object.__setattr__(self, "delta_m", 1.0)
        object.__setattr__(self, "delta_M", d_M / self.lam)
        object.__setattr__(self, "C", self.k**2 * self.lam**2 / (4.0 * self.b**2))

    @property
    def sigma1(self) -> float:
        """Standard deviation of the equivalent Gaussian node placement."""
        return self.b / self.k

    @property
    def xi_min(self) -> float:
        # delta_m**2 * C, lower E1 argument of every truncated expectation
        return self.delta_m**2 * self.C

    @property
    def xi_max(self) -> float:
        # delta_M**2 * C == k**2 / 2
        return 0.5 * self.k**2

    @property
    def h_min(self) -> float:
        return 1.0 / self.delta_M**2

    @property
    def h_max(self) -> float:
        return 1.0 / self.delta_m**2


@dataclass(frozen=True)
class PathLossModel:
    D_max_antenna: float
    h_t: float = 1.0
    h_r: float = 1.0

    def __post_init__(self):
        for name in ("D_max_antenna", "h_t", "h_r"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


class DistanceModel(enum.Enum):
    EXACT_UNIFORM_SQUARE = "exact"
    GAUSSIAN_APPROX = "gaussian"


def near_field_boundary(m: PathLossModel, a: Arena) -> tuple[float, float]:
    """Return ``(d1, d2)``: the near-field limit and the free-space breakpoint."""
    d1 = 2.0 * m.D_max_antenna**2 / a.lam
    d2 = 4.0 * m.h_t * m.h_r / a.lam
    return d1, d2


def gain_from_distance(a: Arena, d: float) -> float:
    if not d > 0:
        raise DomainError(f"distance must be > 0, got {d}")
    return a.lam**2 / d**2


def is_receivable(a: Arena, d: float) -> bool:
    """Direct reception is impossible inside the minimum distance ``d_m``."""
    return d >= a.d_m


def _exact_square_cdf(x: float) -> float:
    if x <= 0:
        return 0.0
    if x <= 1:
        return x * x * (0.5 * x * x - 8.0 / 3.0 * x + math.pi)
    if x < math.sqrt(2.0):
        x2 = x * x
        return (4.0 / 3.0 * math.sqrt(x2 - 1.0) * (2.0 * x2 + 1.0)
                - (0.5 * x2 * x2 + 2.0 * x2 - 1.0 / 3.0)
                + 2.0 * x2 * (math.asin(1.0 / x) - math.acos(1.0 / x)))
    return 1.0


def distance_cdf(a: Arena, model: DistanceModel, d: float) -> float:
    """CDF of the distance between two random nodes of the arena."""
    if d < 0:
        raise DomainError(f"distance must be >= 0, got {d}")
    if model is DistanceModel.EXACT_UNIFORM_SQUARE:
        return min(1.0, max(0.0, _exact_square_cdf(d / a.b)))
    return -math.expm1(-(a.k**2) * d**2 / (4.0 * a.b**2))


def gain_cdf(a: Arena, h: float) -> float:
    if not h > 0:
        raise DomainError(f"gain must be > 0, got {h}")
    return math.exp(-a.C / h)


def gain_pdf(a: Arena, h: float) -> float:
    if not h > 0:
        raise DomainError(f"gain must be > 0, got {h}")
    return a.C / h**2 * math.exp(-a.C / h)


def mean_gain(a: Arena) -> float:
    """Mean link gain over the truncated support, ``C [E1(xi_m) - E1(xi_M)]``."""
    if a.xi_min >= a.xi_max:
        return 0.0
    return a.C * (exp_integral_e1(a.xi_min) - exp_integral_e1(a.xi_max))


def _shifted_e1_difference(a: Arena, shift):
    # exp(shift) * [E1(xi_m + shift) - E1(xi_M + shift)] without overflow
    lo = a.xi_min + shift
    hi = a.xi_max + shift
    return (exp1_scaled(lo) * np.exp(-a.xi_min)
            - exp1_scaled(hi) * np.exp(-a.xi_max))


def cond_mean_gain(a: Arena, gamma: float, h_i: float) -> float:
    """Normalised conditional average interference seen by an MMSE receiver
    whose own link has gain ``h_i`` and target SIR ``gamma``.

    ``E[H|h_i] = C exp(C gamma/h_i) [E1(xi_m + C gamma/h_i) - E1(xi_M + C gamma/h_i)]``
    """
    if not h_i > 0:
        raise DomainError(f"gain must be > 0, got {h_i}")
    if gamma < 0:
        raise DomainError(f"target SIR must be >= 0, got {gamma}")
    if a.xi_min >= a.xi_max:
        return 0.0
    return float(a.C * _shifted_e1_difference(a, a.C * gamma / h_i))


def uniform_delay(tau: np.ndarray) -> np.ndarray:
    """Density of a chip delay uniform on [0, 1]."""
    return np.ones_like(tau)


def async_cond_mean_gain(a: Arena, gamma: float, h_i: float,
                         delay_density: Callable[[np.ndarray], np.ndarray] = uniform_delay,
                         tol: Tolerance = DEFAULT_TOL) -> float:
    """Delay-averaged conditional interference for asynchronous MMSE.

    Each interferer contributes two partial symbols, weighted ``tau`` and
    ``1 - tau``; the expectation over ``tau`` is taken numerically against
    ``delay_density`` on [0, 1].
    """
    if not h_i > 0:
        raise DomainError(f"gain must be > 0, got {h_i}")
    if gamma < 0:
        raise DomainError(f"target SIR must be >= 0, got {gamma}")
    if a.xi_min >= a.xi_max:
        return 0.0
    scale = a.C * gamma / h_i

    def integrand(tau):
        tau = np.asarray(tau, dtype=float)
        w = np.concatenate([tau, 1.0 - tau])
        both = a.C * w * _shifted_e1_difference(a, scale * w)
        return (both[: tau.size] + both[tau.size:]) * delay_density(tau)

    return integrate_unit(integrand, tol)


def prob_from_threshold(a: Arena, T: float) -> float:
    """Probability that a link gain reaches ``T``: ``1 - exp(-C/T)``."""
    if not T > 0:
        raise DomainError(f"threshold must be > 0, got {T}")
    return -math.expm1(-a.C / T)


def threshold_from_prob(a: Arena, p: float) -> float:
    if not 0 < p < 1:
        raise DomainError(f"link probability must lie in (0, 1), got {p}")
    return a.C / -math.log1p(-p)


def prob_from_range(a: Arena, d_r: float) -> float:
    """Link probability equivalent to a reliable transmission range ``d_r``."""
    if not d_r > 0:
        raise DomainError(f"range must be > 0, got {d_r}")
    return distance_cdf(a, DistanceModel.GAUSSIAN_APPROX, d_r)
