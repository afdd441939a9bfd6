"""Radial test functions ``u(t)`` with derivative access.

Each profile knows its breakpoints (kinks), its support and the power-law
exponents of ``u`` and ``u'`` at the origin and at infinity; the weighted-norm
code uses those exponents to check convergence before integrating.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .params import CknParams

__all__ = [
    "ExtremalProfile",
    "CutoffProfile",
    "SampledProfile",
    "SumProfile",
    "RadialProfile",
    "dilate_profile",
    "bump_profile",
]


@dataclass(frozen=True)
class ExtremalProfile:
    """``amplitude * (lam + t**kappa)**(-decay)``."""

    lam: float
    kappa: float
    decay: float
    amplitude: float = 1.0

    kind = "extremal"

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam!r}")
        if not self.kappa > 0 or not self.decay > 0:
            raise ValueError("kappa and decay must be positive")

    @classmethod
    def from_params(cls, params: CknParams, lam: float = 1.0,
                    amplitude: float = 1.0) -> "ExtremalProfile":
        return cls(float(lam), float(params.kappa), float(params.decay), float(amplitude))

    @classmethod
    def from_family(cls, params: CknParams, A: float, B: float) -> "ExtremalProfile":
        """``A (1 + B t**kappa)**(-decay)`` rewritten as a member with ``lam = 1/B``."""
        if not B > 0:
            raise ValueError("B must be positive")
        decay = float(params.decay)
        return cls(1.0 / B, float(params.kappa), decay, A * B ** (-decay))

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return self.amplitude * (self.lam + t**self.kappa) ** (-self.decay)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        k, m = self.kappa, self.decay
        return -self.amplitude * m * k * t ** (k - 1) * (self.lam + t**k) ** (-m - 1)

    breakpoints = ()
    support = math.inf

    @property
    def origin_exps(self) -> tuple[float, float]:
        return 0.0, self.kappa - 1.0

    @property
    def tail_exps(self) -> tuple[float, float]:
        return -self.kappa * self.decay, -self.kappa * self.decay - 1.0


@dataclass(frozen=True)
class CutoffProfile:
    """Compactly supported Lipschitz approximation of the extremal.

    Equal to the extremal on ``[1/k, k]``, frozen at its value for ``t < 1/k``
    and ramped linearly to zero on ``[k, k+1]``.
    """

    lam: float
    k: int
    kappa: float
    decay: float

    kind = "cutoff"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam!r}")

    @classmethod
    def from_params(cls, params: CknParams, lam: float, k: int) -> "CutoffProfile":
        return cls(float(lam), int(k), float(params.kappa), float(params.decay))

    def _core(self, t):
        return (self.lam + np.maximum(t, 1.0 / self.k) ** self.kappa) ** (-self.decay)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        ramp = np.maximum(0.0, np.minimum(0.0, self.k - t) + 1.0)
        return ramp * self._core(t)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        k, kap, m = self.k, self.kappa, self.decay
        core = self._core(t)
        with np.errstate(all="ignore"):
            dcore = np.where(t > 1.0 / k,
                             -m * kap * t ** (kap - 1) * (self.lam + t**kap) ** (-m - 1), 0.0)
        out = np.where(t < k, dcore, (k + 1 - t) * dcore - core)
        return np.where(t < k + 1, out, 0.0)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted({1.0 / self.k, float(self.k), float(self.k + 1)}))

    @property
    def support(self) -> float:
        return float(self.k + 1)

    origin_exps = (0.0, 0.0)
    tail_exps = None


@dataclass(frozen=True)
class SampledProfile:
    """Piecewise linear profile through ``(grid[i], values[i])``.

    Constant left of the first knot; zero right of the last knot, which must
    then carry the value 0 when ``compact`` is set.
    """

    grid: tuple[float, ...]
    values: tuple[float, ...]
    compact: bool = True

    kind = "sampled"

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-D of equal length >= 2")
        if grid[0] < 0 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be nonnegative and strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if self.compact and values[-1] != 0.0:
            raise ValueError("a compactly supported profile must end at value 0")
        object.__setattr__(self, "grid", tuple(grid.tolist()))
        object.__setattr__(self, "values", tuple(values.tolist()))

    @property
    def knots(self) -> np.ndarray:
        return np.asarray(self.grid)

    @property
    def nodal_values(self) -> np.ndarray:
        return np.asarray(self.values)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        right = 0.0 if self.compact else self.values[-1]
        return np.interp(t, self.grid, self.values, right=right)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        g = self.knots
        slopes = np.diff(self.nodal_values) / np.diff(g)
        idx = np.searchsorted(g, t, side="right") - 1
        inside = (idx >= 0) & (idx < slopes.size)
        return np.where(inside, slopes[np.clip(idx, 0, slopes.size - 1)], 0.0)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(g for g in self.grid if g > 0)

    @property
    def support(self) -> float:
        return self.grid[-1] if self.compact else math.inf

    origin_exps = (0.0, 0.0)

    @property
    def tail_exps(self):
        # a non-compact sampled profile is constant at infinity
        return None if self.compact else (0.0, 0.0)

    @classmethod
    def from_csv(cls, path: str | Path, compact: bool = True) -> "SampledProfile":
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
        grid, values = [], []
        for row in rows[1:]:
            grid.append(float(row[0]))
            values.append(float(row[1]))
        return cls(tuple(grid), tuple(values), compact)

    def to_rows(self) -> list[tuple[float, float]]:
        return list(zip(self.grid, self.values))


@dataclass(frozen=True)
class SumProfile:
    """Pointwise sum of profiles, e.g. an extremal plus a small sampled bump."""

    terms: tuple

    kind = "sum"

    def value(self, t):
        return sum(term.value(t) for term in self.terms)

    def derivative(self, t):
        return sum(term.derivative(t) for term in self.terms)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        pts = set()
        for term in self.terms:
            pts.update(term.breakpoints)
        return tuple(sorted(pts))

    @property
    def support(self) -> float:
        return max(term.support for term in self.terms)

    @property
    def origin_exps(self) -> tuple[float, float]:
        exps = [term.origin_exps for term in self.terms]
        return min(e[0] for e in exps), min(e[1] for e in exps)

    @property
    def tail_exps(self):
        exps = [term.tail_exps for term in self.terms if term.tail_exps is not None]
        if not exps:
            return None
        return max(e[0] for e in exps), max(e[1] for e in exps)


RadialProfile = Union[ExtremalProfile, CutoffProfile, SampledProfile, SumProfile]


def dilate_profile(profile: RadialProfile, scale: float) -> RadialProfile:
    """Return ``t -> u(scale * t)``.

    An extremal stays in its family: ``(lam + (s t)**k)**-m`` equals
    ``s**(-k m) (lam / s**k + t**k)**-m``.
    """
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale!r}")
    if scale == 1:
        return profile
    if isinstance(profile, ExtremalProfile):
        sk = scale**profile.kappa
        return ExtremalProfile(profile.lam / sk, profile.kappa, profile.decay,
                               profile.amplitude * sk ** (-profile.decay))
    if isinstance(profile, SampledProfile):
        return SampledProfile(tuple(g / scale for g in profile.grid), profile.values,
                              profile.compact)
    if isinstance(profile, SumProfile):
        return SumProfile(tuple(dilate_profile(t, scale) for t in profile.terms))
    raise TypeError(f"cannot dilate a {profile.kind} profile")


def bump_profile(center: float, width: float, amplitude: float, points: int = 9) -> SampledProfile:
    """Piecewise linear tent-shaped bump on ``[center/width, center*width]`` (log-symmetric)."""
    if not width > 1:
        raise ValueError("width must exceed 1")
    grid = np.geomspace(center / width, center * width, points)
    shape = 1.0 - np.abs(np.linspace(-1.0, 1.0, points))
    return SampledProfile(tuple(grid), tuple(amplitude * shape))
