"""Double-exponential quadrature for power-law integrands on (0, inf).

Every integral in the package has the shape ``t**w * core(t)`` near 0 and decays
like ``t**d`` at infinity. The range is cut at ``split_point`` (plus any caller
supplied breakpoints, e.g. kinks of a profile); finite pieces use the tanh-sinh
map and the tail uses an exp-sinh map, so both endpoint singularities are
absorbed by the transform. Each piece halves its step until two consecutive
levels agree to ``rel_tol``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import DivergentIntegral, QuadratureFailure

__all__ = ["QuadConfig", "Integrand", "QuadResult", "quad_integrate"]

_HALF_PI = 0.5 * math.pi
# e**-45 ~ 3e-20: terms beyond this fraction of the endpoint scale are dropped
_DECAY_TARGET = 45.0
_MIN_LEVEL = 3
# also covers exponentially decaying cores described with a large decay exponent
_MIN_SPAN = 3.0
# weight exponents closer than this to -1 get a power substitution
_SUBSTITUTE_BELOW = 0.25


@dataclass(frozen=True)
class QuadConfig:
    rel_tol: float = 1e-10
    max_level: int = 12
    split_point: float = 1.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_level < _MIN_LEVEL:
            raise ValueError(f"max_level must be >= {_MIN_LEVEL}")
        if not self.split_point > 0:
            raise ValueError("split_point must be positive")


@dataclass(frozen=True)
class Integrand:
    """``f(t) = t**weight_exp * core(t)``; ``f ~ t**decay_exp`` as t -> inf.

    ``core`` must accept and return numpy arrays.
    """

    core: Callable[[np.ndarray], np.ndarray]
    weight_exp: float = 0.0
    decay_exp: float = -math.inf

    def __call__(self, t: np.ndarray) -> np.ndarray:
        if self.weight_exp == 0.0:
            return self.core(t)
        return t**self.weight_exp * self.core(t)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    evaluations: int

    def __iter__(self):
        # allows ``value, err = quad_integrate(...)``
        yield self.value
        yield self.error


def _finite_map(a: float, b: float, x: np.ndarray):
    u = _HALF_PI * np.sinh(x)
    width = b - a
    # distance to each endpoint computed directly, never as a difference
    from_a = width / (1.0 + np.exp(-2.0 * u))
    from_b = width / (1.0 + np.exp(2.0 * u))
    t = np.where(x < 0, a + from_a, b - from_b)
    w = width * _HALF_PI * np.cosh(x) / (2.0 * np.cosh(u) ** 2)
    return t, w


def _tail_map(a: float, x: np.ndarray):
    v = _HALF_PI * np.sinh(x)
    ev = np.exp(v)
    return a + a * ev, a * ev * _HALF_PI * np.cosh(x)


def _span_for(power: float) -> float:
    """Half-width in x so that an endpoint behaving like ``dist**power`` is negligible."""
    power = max(power, 1e-3)
    need = _DECAY_TARGET / power
    return max(math.asinh(need / _HALF_PI), _MIN_SPAN)


class _Piece:
    """One interval handled by a fixed transform, refined by halving the step."""

    def __init__(self, f, lo: float, hi: float, lo_power: float, hi_power: float):
        self.f = f
        self.lo, self.hi = lo, hi
        self.infinite = math.isinf(hi)
        if self.infinite:
            # x -> -inf approaches ``lo`` like exp(pi/2 sinh x); x -> +inf is the tail
            self.x_lo = -_span_for(1.0)
            self.x_hi = _span_for(-(hi_power + 1.0))
            # keep t representable; cores are expected to underflow gracefully
            self.x_hi = min(self.x_hi, math.asinh(700.0 / _HALF_PI))
        else:
            # the map runs to ``lo`` like exp(-pi sinh|x|), hence the factor 2
            self.x_lo = -_span_for(2.0 * (lo_power + 1.0))
            self.x_hi = _span_for(2.0)
            self.x_lo = max(self.x_lo, -math.asinh(350.0 / _HALF_PI))
        self.level = -1
        self.raw_sum = 0.0
        self.evaluations = 0
        self.truncation = 0.0
        self.lo_power = lo_power

    def _terms(self, x: np.ndarray) -> np.ndarray:
        if self.infinite:
            t, w = _tail_map(self.lo, x)
        else:
            t, w = _finite_map(self.lo, self.hi, x)
        with np.errstate(all="ignore"):
            vals = self.f(t) * w
        self.evaluations += x.size
        bad = ~np.isfinite(vals)
        if bad.any():
            # overflow is only tolerated at the far ends where the terms are negligible
            far = (np.abs(x) > 0.75 * max(-self.x_lo, self.x_hi)) | (w == 0) | (t == self.lo)
            if np.any(bad & ~far):
                raise QuadratureFailure(
                    f"non-finite integrand on [{self.lo:g}, {self.hi:g}] "
                    f"at t={t[bad & ~far][0]:.6g}")
            vals = np.where(bad, 0.0, vals)
        return vals

    def refine(self) -> float:
        """Advance one level and return the current estimate."""
        self.level += 1
        h = 2.0**-self.level
        if self.level == 0:
            j = np.arange(math.ceil(self.x_lo / h), math.floor(self.x_hi / h) + 1)
        else:
            j = np.arange(math.ceil((self.x_lo / h - 1) / 2), math.floor((self.x_hi / h - 1) / 2) + 1)
            j = 2 * j + 1
            j = j[(j * h >= self.x_lo) & (j * h <= self.x_hi)]
        terms = self._terms(j * h)
        self.raw_sum += math.fsum(terms)
        if self.level == 0:
            self._estimate_truncation(h)
        return h * self.raw_sum

    def _estimate_truncation(self, h: float) -> None:
        # magnitude of the outermost terms, a proxy for what lies beyond
        edge = np.array([self.x_lo, self.x_hi])
        with np.errstate(all="ignore"):
            vals = np.abs(self._terms(edge))
        vals = vals[np.isfinite(vals)]
        self.truncation = float(vals.sum()) if vals.size else 0.0


def _pieces(breaks: Iterable[float], upper: float) -> list[tuple[float, float]]:
    pts = sorted({float(b) for b in breaks if 0.0 < b < upper})
    edges = [0.0, *pts, upper]
    return list(zip(edges[:-1], edges[1:]))


def quad_integrate(integrand: Integrand | Callable, quad: QuadConfig | None = None, *,
                   breaks: Iterable[float] = (), upper: float = math.inf) -> QuadResult:
    """Integrate over (0, upper), splitting at ``quad.split_point`` and ``breaks``.

    A bare callable is treated as an integrand smooth at 0 with fast decay.

    Returns a :class:`QuadResult` that also unpacks as ``(value, error)``. The
    error estimate is the change between the last two levels plus the size of
    the dropped end terms, summed over pieces.
    """
    quad = quad or QuadConfig()
    if not isinstance(integrand, Integrand):
        integrand = Integrand(integrand)
    w, d = integrand.weight_exp, integrand.decay_exp
    if not w > -1.0:
        raise DivergentIntegral(f"weight exponent {w} at 0 must exceed -1")
    if math.isinf(upper) and not d < -1.0:
        raise DivergentIntegral(f"decay exponent {d} at infinity must be below -1")
    if not upper > 0:
        raise ValueError("upper limit must be positive")

    total = 0.0
    err = 0.0
    evals = 0
    for lo, hi in _pieces([quad.split_point, *breaks], upper):
        lo_power = w if lo == 0.0 else 0.0
        hi_power = d if math.isinf(hi) else 0.0
        if lo == 0.0 and w + 1.0 < _SUBSTITUTE_BELOW and not math.isinf(hi):
            # v = t**(w+1) turns t**w dt into dv/(w+1): the piece becomes bounded
            k = w + 1.0
            core = integrand.core
            piece = _Piece(lambda v: core(v ** (1.0 / k)) / k, 0.0, hi**k, 0.0, 0.0)
        else:
            piece = _Piece(integrand, lo, hi, lo_power, hi_power)
        value, change = _converge(piece, quad, lo, hi)
        evals += piece.evaluations
        total += value
        err += change + piece.truncation
    return QuadResult(total, err, evals)


def _converge(piece: _Piece, quad: QuadConfig, lo: float, hi: float) -> tuple[float, float]:
    prev = None
    value = None
    while piece.level < quad.max_level:
        value = piece.refine()
        if prev is not None and piece.level >= _MIN_LEVEL:
            diff = abs(value - prev)
            if diff <= quad.rel_tol * abs(value) or (value == 0.0 and prev == 0.0):
                return value, diff
        prev = value
    raise QuadratureFailure(
        f"no convergence on [{lo:g}, {hi:g}] by level {quad.max_level}: "
        f"last two levels gave {prev!r} and {value!r}")
