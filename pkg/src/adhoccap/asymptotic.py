"""Large-system capacity of CDMA ad hoc networks.

For a target SIR ``gamma`` every receiver reduces to a gain threshold ``T``:
a link is usable when its gain reaches ``T``, so the link probability is
``p = 1 - exp(-C/T)``. The receivers differ only in how ``T`` depends on the
load ``alpha = N/L``:

========================  ===============================================
matched filter            ``T = gamma/SNR + alpha gamma E_H``
decorrelator (sync)       ``T = gamma / (SNR (1 - alpha))``
decorrelator (async)      ``T = gamma / (SNR (1 - 2 alpha))``
MMSE                      ``T = gamma/SNR + alpha gamma E[H | h = T]``
========================  ===============================================

Asynchronous MMSE replaces the conditional interference with its average over
a uniform chip delay. The matched filter behaves identically in both timing
modes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import geometry
from .geometry import Arena
from .numerics import DEFAULT_TOL, DomainError, Tolerance, solve_monotone


class ReceiverKind(enum.Enum):
    MATCHED_FILTER = "mf"
    DECORRELATOR = "decorrelator"
    MMSE = "mmse"


class TimingMode(enum.Enum):
    SYNCHRONOUS = "sync"
    ASYNCHRONOUS = "async"


class InfeasibleError(ValueError):
    """Requested load or link probability cannot be supported."""


@dataclass(frozen=True)
class PowerBudget:
    """Transmit power cap as ``SNR_c = P_max / sigma**2``; ``None`` is unlimited."""

    snr_c: Optional[float] = None

    def __post_init__(self):
        if self.snr_c is not None and not self.snr_c > 0:
            raise ValueError(f"snr_c must be > 0, got {self.snr_c}")

    @classmethod
    def unlimited(cls) -> "PowerBudget":
        return cls(None)

    @classmethod
    def max_snr(cls, snr_c: float) -> "PowerBudget":
        return cls(float(snr_c))

    @property
    def is_unlimited(self) -> bool:
        return self.snr_c is None

    @property
    def inv_snr(self) -> float:
        return 0.0 if self.snr_c is None else 1.0 / self.snr_c

    def __str__(self):
        return "inf" if self.snr_c is None else f"{self.snr_c:g}"


@dataclass(frozen=True)
class SystemConfig:
    arena: Arena = field(default_factory=Arena)
    receiver: ReceiverKind = ReceiverKind.MMSE
    timing: TimingMode = TimingMode.SYNCHRONOUS
    power: PowerBudget = field(default_factory=PowerBudget)
    gamma: float = 5.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"target SIR gamma must be > 0, got {self.gamma}")


@dataclass(frozen=True)
class CapacityResult:
    alpha_max: float
    feasible: bool
    threshold_T: float
    link_prob: float
    required_snr: Optional[float] = None


@dataclass(frozen=True)
class ThroughputPoint:
    n_per_area: int
    cdma_sync: float
    cdma_async: float
    gupta_kumar: float
    rate_R: float = 1.0
    d_cont_sync: float = math.nan
    d_ceil_sync: float = math.nan
    d_cont_async: float = math.nan
    d_ceil_async: float = math.nan


def load_limit(cfg: SystemConfig) -> float:
    """Hard load ceiling independent of power: 1 (sync) or 1/2 (async)
    for the decorrelator, unbounded otherwise."""
    if cfg.receiver is ReceiverKind.DECORRELATOR:
        return 1.0 if cfg.timing is TimingMode.SYNCHRONOUS else 0.5
    return math.inf


def interference_fn(cfg: SystemConfig, tol: Tolerance = DEFAULT_TOL) -> Callable[[float], float]:
    """Conditional interference ``h -> E[H|h]`` matching the config's timing."""
    a, g = cfg.arena, cfg.gamma
    if cfg.receiver is ReceiverKind.MMSE and cfg.timing is TimingMode.ASYNCHRONOUS:
        return lambda h: geometry.async_cond_mean_gain(a, g, h, tol=tol)
    return lambda h: geometry.cond_mean_gain(a, g, h)


def _bound(T: float, interference: float, gamma: float, power: PowerBudget) -> float:
    # largest alpha with gamma/SNR_c + alpha*gamma*I <= T
    if interference <= 0:
        return math.inf
    return T / (gamma * interference) - power.inv_snr / interference


def max_load(cfg: SystemConfig, p: float, tol: Tolerance = DEFAULT_TOL) -> CapacityResult:
    """Supremum load ``alpha`` at which links still succeed with probability ``p``.

    Loads must stay strictly below ``alpha_max``; a nonpositive bound is
    reported as ``feasible=False`` with ``alpha_max = 0``.
    """
    a, g = cfg.arena, cfg.gamma
    T = geometry.threshold_from_prob(a, p)

    if cfg.receiver is ReceiverKind.MATCHED_FILTER:
        bound = _bound(T, geometry.mean_gain(a), g, cfg.power)
    elif cfg.receiver is ReceiverKind.DECORRELATOR:
        limit = load_limit(cfg)
        if cfg.power.is_unlimited:
            bound = limit
        else:
            # SIR = SNR h (1 - alpha/limit)
            bound = limit * (1.0 - g / (T * cfg.power.snr_c))
    else:
        bound = _bound(T, interference_fn(cfg, tol)(T), g, cfg.power)

    feasible = bound > 0
    return CapacityResult(
        alpha_max=bound if feasible else 0.0,
        feasible=feasible,
        threshold_T=T,
        link_prob=p,
        required_snr=cfg.power.snr_c,
    )


def solve_threshold(cfg: SystemConfig, alpha: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Smallest gain ``T`` such that every link with ``h >= T`` meets ``gamma``
    at load ``alpha``.

    Returns 0.0 when every link qualifies (e.g. an unconstrained decorrelator,
    or MMSE at loads it can fully suppress). Raises :class:`InfeasibleError`
    when no link can meet the target.
    """
    if not alpha > 0:
        raise DomainError(f"load alpha must be > 0, got {alpha}")
    a, g, s = cfg.arena, cfg.gamma, cfg.power.inv_snr
    limit = load_limit(cfg)

    if cfg.receiver is ReceiverKind.DECORRELATOR:
        if alpha >= limit:
            raise InfeasibleError(
                f"alpha exceeds decorrelator {cfg.timing.value} limit {limit:g}")
        if cfg.power.is_unlimited:
            return 0.0
        return g / ((1.0 - alpha / limit) * cfg.power.snr_c)

    if cfg.receiver is ReceiverKind.MATCHED_FILTER:
        return g * s + alpha * g * geometry.mean_gain(a)

    interference = interference_fn(cfg, tol)

    # Dimensionless and increasing in h: 1 - gamma s/h - alpha gamma E[H|h]/h.
    def margin(log_h: float) -> float:
        h = math.exp(log_h)
        return 1.0 - g * s / h - alpha * g * interference(h) / h

    lo = math.log(a.C * 1e-12)
    if margin(lo) >= 0:
        return 0.0
    hi = math.log(max(a.C, g * s, 1e-300)) + 1.0
    while margin(hi) <= 0:
        hi += 2.0
        if hi > 700:
            raise InfeasibleError(f"no gain threshold supports alpha={alpha:g}")
    return math.exp(solve_monotone(margin, lo, hi, Tolerance(1e-15, 1e-14, tol.max_iter)))


def achievable_prob(cfg: SystemConfig, alpha: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Largest link probability sustainable at load ``alpha``.

    1.0 means every pair qualifies asymptotically (unconstrained
    decorrelator below its load limit, or a fully suppressing MMSE).
    """
    T = solve_threshold(cfg, alpha, tol)
    if T == 0.0:
        return 1.0
    return geometry.prob_from_threshold(cfg.arena, T)


def required_snr(cfg: SystemConfig, alpha: float, p: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Minimum ``P_t / sigma**2`` for link probability ``p`` at load ``alpha``.

    ``math.inf`` marks an infeasible pair (nonpositive denominator).
    """
    if alpha < 0:
        raise DomainError(f"load alpha must be >= 0, got {alpha}")
    a, g = cfg.arena, cfg.gamma
    T = geometry.threshold_from_prob(a, p)
    if cfg.receiver is ReceiverKind.MATCHED_FILTER:
        denom = T - alpha * g * geometry.mean_gain(a)
    elif cfg.receiver is ReceiverKind.DECORRELATOR:
        denom = T * (1.0 - alpha / load_limit(cfg))
    else:
        denom = T - alpha * g * interference_fn(cfg, tol)(T) if alpha > 0 else T
    if denom <= 0:
        return math.inf
    return g / denom


def diameter_map(a: Arena, D: int) -> tuple[float, float, float]:
    """Range, link probability and gain threshold that let any pair connect
    in at most ``D`` hops across the arena diagonal."""
    if D < 1:
        raise DomainError(f"diameter must be >= 1, got {D}")
    d_r = math.sqrt(2.0) * a.b / D
    p = -math.expm1(-(a.k**2) / (2.0 * D * D))
    T = a.lam**2 * D * D / (2.0 * a.b**2)
    return d_r, p, T


def capacity_for_diameter(cfg: SystemConfig, D: int, tol: Tolerance = DEFAULT_TOL) -> CapacityResult:
    _, p, _ = diameter_map(cfg.arena, D)
    return max_load(cfg, p, tol)


def diameter_from_threshold(a: Arena, T: float) -> float:
    """Continuous hop count implied by threshold ``T`` (inverse of ``diameter_map``)."""
    return a.b / a.lam * math.sqrt(2.0 * T)


def achievable_diameter(cfg: SystemConfig, alpha: float, tol: Tolerance = DEFAULT_TOL) -> tuple[float, int | float]:
    """Continuous diameter at load ``alpha`` and its integer ceiling (at least 1).

    Infeasible loads give ``(inf, inf)``.
    """
    try:
        T = solve_threshold(cfg, alpha, tol)
    except InfeasibleError:
        return math.inf, math.inf
    d = diameter_from_threshold(cfg.arena, T)
    # guard the ceiling against roundoff just above an integer
    return d, max(1, math.ceil(d - 1e-9))


def gupta_kumar(n: int, rate: float = 1.0) -> float:
    """Random-access reference ``R / sqrt(N ln N)`` with unit constant."""
    if n < 2:
        raise DomainError("Gupta-Kumar reference needs N >= 2 (ln 1 = 0)")
    return rate / math.sqrt(n * math.log(n))


def throughput_curves(cfg: SystemConfig, n_values: Sequence[int], L: int,
                      rate: float = 1.0, tol: Tolerance = DEFAULT_TOL) -> list[ThroughputPoint]:
    """Per-node throughput ``R / D(N)`` for synchronous and asynchronous
    transmission against the Gupta-Kumar reference."""
    if L < 1:
        raise DomainError(f"spreading gain must be >= 1, got {L}")
    sync_cfg = SystemConfig(cfg.arena, cfg.receiver, TimingMode.SYNCHRONOUS, cfg.power, cfg.gamma)
    async_cfg = SystemConfig(cfg.arena, cfg.receiver, TimingMode.ASYNCHRONOUS, cfg.power, cfg.gamma)
    points = []
    for n in n_values:
        if n < 1:
            raise DomainError(f"node count must be positive, got {n}")
        ds, cs = achievable_diameter(sync_cfg, n / L, tol)
        da, ca = achievable_diameter(async_cfg, n / L, tol)
        points.append(ThroughputPoint(
            n_per_area=n,
            cdma_sync=0.0 if math.isinf(cs) else rate / cs,
            cdma_async=0.0 if math.isinf(ca) else rate / ca,
            gupta_kumar=gupta_kumar(n, rate),
            rate_R=rate,
            d_cont_sync=ds, d_ceil_sync=cs,
            d_cont_async=da, d_ceil_async=ca,
        ))
    return points
