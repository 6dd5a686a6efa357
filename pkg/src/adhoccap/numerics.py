"""Special functions and small numeric kernels used across the package.

The exponential integral is evaluated in two regimes:

* ``x <= 2``: the convergent power series
  ``E1(x) = -euler_gamma - ln(x) - sum_{k>=1} (-x)^k / (k * k!)``;
* ``x > 2``: the continued fraction for ``exp(x) * E1(x)`` evaluated with the
  modified Lentz algorithm.

The crossover sits at ``x = 2`` (``EXP1_CROSSOVER``): the series loses about
``exp(x) * eps`` to cancellation, the continued fraction needs fewer than 50
terms from there on. Relative error stays below 1e-13 on both sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

EULER_GAMMA = 0.57721566490153286061
EXP1_CROSSOVER = 2.0

_SERIES_TERMS = 40
_CF_MAX_ITER = 400
_CF_EPS = 1e-15
_TINY = 1e-300


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class BracketError(ValueError):
    """Root-finding bracket does not contain a sign change."""


class ConvergenceError(RuntimeError):
    """Iterative routine exhausted its budget.

    ``best_estimate`` carries the last iterate so callers can still inspect it.
    """

    def __init__(self, message: str, best_estimate: float = math.nan):
        super().__init__(message)
        self.best_estimate = best_estimate


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


DEFAULT_TOL = Tolerance()


def _as_positive_array(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("exponential integral requires x > 0")
    return arr


def _series_e1(x: np.ndarray) -> np.ndarray:
    term = np.ones_like(x)
    acc = np.zeros_like(x)
    for k in range(1, _SERIES_TERMS + 1):
        term = term * (-x) / k
        acc += term / k
    return -EULER_GAMMA - np.log(x) - acc


def _cf_scaled_e1(x: np.ndarray) -> np.ndarray:
    # exp(x) * E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...))), modified Lentz.
    b = x + 1.0
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, _CF_MAX_ITER + 1):
        an = -float(i * i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if np.all(np.abs(delta - 1.0) < _CF_EPS):
            return h
    raise ConvergenceError("continued fraction for E1 did not converge")


def exp1_scaled(x):
    """Return ``exp(x) * E1(x)`` for ``x > 0`` (scalar or array).

    Stays finite for large ``x`` where ``exp(x)`` alone would overflow; the
    conditional interference terms need exactly this product.
    """
    arr = _as_positive_array(x)
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    small = flat <= EXP1_CROSSOVER
    if np.any(small):
        xs = flat[small]
        out[small] = np.exp(xs) * _series_e1(xs)
    if np.any(~small):
        out[~small] = _cf_scaled_e1(flat[~small])
    out = out.reshape(np.shape(arr))
    return float(out) if np.ndim(arr) == 0 else out


def exp_integral_e1(x):
    """Exponential integral ``E1(x) = int_x^inf exp(-t)/t dt`` for ``x > 0``.

    Accepts scalars or arrays. Raises :class:`DomainError` for ``x <= 0``.
    """
    arr = _as_positive_array(x)
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    small = flat <= EXP1_CROSSOVER
    if np.any(small):
        out[small] = _series_e1(flat[small])
    if np.any(~small):
        xl = flat[~small]
        out[~small] = np.exp(-xl) * _cf_scaled_e1(xl)
    out = out.reshape(np.shape(arr))
    return float(out) if np.ndim(arr) == 0 else out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _gauss(f: Callable, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals = np.asarray(f(mid + half * _GL_NODES), dtype=float)
    return float(half * np.dot(_GL_WEIGHTS, vals))


def integrate_unit(f: Callable[[np.ndarray], np.ndarray], tol: Tolerance = DEFAULT_TOL) -> float:
    """Integrate ``f`` over [0, 1] by globally adaptive Gauss-Legendre bisection.

    ``f`` must accept a numpy array of abscissae and return values of the same
    shape. Each panel is estimated with a 16-point rule and checked against
    the sum over its two halves; the panel with the largest discrepancy is
    split until the total estimated error drops below ``tol.abs_tol`` (or
    ``tol.rel_tol`` times the magnitude). ``max_iter`` bounds the number of
    splits; running out raises :class:`ConvergenceError` carrying the best
    estimate.
    """
    whole = _gauss(f, 0.0, 1.0)
    left = _gauss(f, 0.0, 0.5)
    right = _gauss(f, 0.5, 1.0)
    err0 = abs(left + right - whole) / 2
    # panel: (a, b, value, error estimate)
    panels = [(0.0, 0.5, left, err0), (0.5, 1.0, right, err0)]

    for _ in range(tol.max_iter):
        total = sum(p[2] for p in panels)
        err = sum(p[3] for p in panels)
        if not (math.isfinite(total) and math.isfinite(err)):
            raise ConvergenceError("integrand produced non-finite values", total)
        if err <= max(tol.abs_tol, tol.rel_tol * abs(total)):
            return total
        idx = max(range(len(panels)), key=lambda i: panels[i][3])
        a, b, coarse, _ = panels.pop(idx)
        m = 0.5 * (a + b)
        l_val = _gauss(f, a, m)
        r_val = _gauss(f, m, b)
        e = abs(l_val + r_val - coarse) / 2
        panels.append((a, m, l_val, e))
        panels.append((m, b, r_val, e))

    total = sum(p[2] for p in panels)
    raise ConvergenceError(
        f"integrate_unit did not reach tolerance after {tol.max_iter} refinements", total
    )


def solve_monotone(f: Callable[[float], float], lo: float, hi: float,
                   tol: Tolerance = DEFAULT_TOL) -> float:
    """Find the root of a monotone ``f`` inside ``[lo, hi]``.

    Regula falsi with the Illinois modification, falling back to a bisection
    step whenever the secant step fails to shrink the bracket by half.
    Deterministic for identical inputs.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if math.isnan(flo) or math.isnan(fhi) or (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")

    x = lo
    side = 0
    width = hi - lo
    for _ in range(tol.max_iter):
        x = (lo * fhi - hi * flo) / (fhi - flo)
        if not (lo < x < hi):
            x = 0.5 * (lo + hi)
        fx = f(x)
        if abs(fx) <= tol.abs_tol or (hi - lo) <= tol.rel_tol * abs(x):
            return x
        if (fx > 0) == (fhi > 0):
            hi, fhi = x, fx
            if side == 1:
                flo *= 0.5
            side = 1
        else:
            lo, flo = x, fx
            if side == -1:
                fhi *= 0.5
            side = -1
        if hi - lo > 0.5 * width:
            # secant stalled; force a bisection step
            m = 0.5 * (lo + hi)
            fm = f(m)
            if fm == 0:
                return m
            if (fm > 0) == (fhi > 0):
                hi, fhi = m, fm
            else:
                lo, flo = m, fm
            side = 0
        width = hi - lo
    raise ConvergenceError(f"solve_monotone did not converge on [{lo}, {hi}]", x)
