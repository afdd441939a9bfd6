"""Radially symmetric model spaces given by a sphere density.

A model is described by its sphere density ``sigma(t)``, the derivative of the
ball volume ``m(B_t)`` around the base point. Euclidean space, uniformly scaled
cones and the curvature-envelope model are pure power laws
``sigma(t) = c * n * omega_n * t**(n-1)``; tabulated models multiply the
Euclidean density by a piecewise linear relative density.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NoLimit
from .params import unit_ball_volume

__all__ = [
    "RadialMeasure",
    "ball_volume",
    "doubling_constant",
    "origin_density",
    "normalize",
    "log_grid",
    "parse_model_spec",
]

KINDS = ("euclidean", "cone", "envelope_ricci", "tabulated")
_ORIGIN_TOL = 1e-9
_ORIGIN_MAX_K = 40


@dataclass(frozen=True)
class RadialMeasure:
    n: int
    kind: str = "euclidean"
    c: float = 1.0
    b0: float = 0.0
    knots: tuple[float, ...] = ()
    densities: tuple[float, ...] = ()
    _omega: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.kind == "cone" and not self.c > 0:
            raise ValueError(f"cone density factor must be positive, got {self.c!r}")
        if self.kind == "envelope_ricci" and not self.b0 >= 0:
            raise ValueError(f"b0 must be nonnegative, got {self.b0!r}")
        if self.kind == "tabulated":
            knots = tuple(float(k) for k in self.knots)
            dens = tuple(float(d) for d in self.densities)
            if not knots or len(knots) != len(dens):
                raise ValueError("tabulated model needs equally many knots and densities")
            if any(k <= 0 for k in knots):
                raise ValueError("tabulated knots must be positive")
            if any(b <= a for a, b in zip(knots, knots[1:])):
                raise ValueError("tabulated knots must be strictly increasing")
            if any(not d > 0 for d in dens):
                raise ValueError("tabulated densities must be positive")
            object.__setattr__(self, "knots", knots)
            object.__setattr__(self, "densities", dens)
        object.__setattr__(self, "_omega", unit_ball_volume(self.n))

    # constructors -----------------------------------------------------------
    @classmethod
    def euclidean(cls, n: int) -> "RadialMeasure":
        return cls(n)

    @classmethod
    def cone(cls, n: int, c: float) -> "RadialMeasure":
        return cls(n, "cone", c=float(c))

    @classmethod
    def envelope_ricci(cls, n: int, b0: float) -> "RadialMeasure":
        return cls(n, "envelope_ricci", b0=float(b0))

    @classmethod
    def tabulated(cls, n: int, knots, densities) -> "RadialMeasure":
        return cls(n, "tabulated", knots=tuple(knots), densities=tuple(densities))

    @classmethod
    def from_csv(cls, path: str | Path, n: int) -> "RadialMeasure":
        """Load ``t, relative_density`` rows; the first line must be a header."""
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row and not row[0].lstrip().startswith("#")]
        if not rows:
            raise ValueError(f"{path}: empty table")
        header, body = rows[0], rows[1:]
        try:
            float(header[0])
        except ValueError:
            pass
        else:
            raise ValueError(f"{path}: header line required")
        knots, dens = [], []
        for lineno, row in enumerate(body, start=2):
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected two columns")
            knots.append(float(row[0]))
            dens.append(float(row[1]))
        for a, b in zip(knots, knots[1:]):
            if b <= a:
                raise ValueError(f"{path}: t column must be strictly increasing ({a} then {b})")
        return cls.tabulated(n, knots, dens)

    # geometry ---------------------------------------------------------------
    @property
    def omega(self) -> float:
        """Volume of the Euclidean unit ball in this dimension."""
        return self._omega

    @property
    def power_factor(self) -> float | None:
        """Constant ratio ``sigma / sigma_euclidean`` for power-law kinds, else None."""
        if self.kind == "euclidean":
            return 1.0
        if self.kind == "cone":
            return self.c
        if self.kind == "envelope_ricci":
            return math.exp((self.n - 1) * self.b0)
        return None

    @property
    def is_power_law(self) -> bool:
        return self.kind != "tabulated"

    @property
    def breaks(self) -> tuple[float, ...]:
        """Radii where ``sigma`` has kinks."""
        return self.knots if self.kind == "tabulated" else ()

    @property
    def flags(self) -> tuple[str, ...]:
        if self.kind == "cone" and self.c > 1:
            return ("cone density factor c > 1 exceeds the Euclidean density",)
        return ()

    def relative_density(self, t):
        """``sigma(t) / (n omega_n t**(n-1))``."""
        t = np.asarray(t, dtype=float)
        if self.is_power_law:
            return np.full_like(t, self.power_factor)
        return np.interp(t, self.knots, self.densities)

    def sigma(self, t):
        t = np.asarray(t, dtype=float)
        return self.relative_density(t) * (self.n * self._omega) * t ** (self.n - 1)

    def ball_volume(self, R: float) -> float:
        if not R > 0:
            raise ValueError(f"radius must be positive, got {R!r}")
        n, w = self.n, self._omega
        if self.is_power_law:
            return self.power_factor * w * R**n
        # piecewise linear density times t**(n-1) integrates in closed form
        knots, dens = self.knots, self.densities
        total = dens[0] * w * min(R, knots[0]) ** n
        for t0, t1, d0, d1 in zip(knots, knots[1:], dens, dens[1:]):
            if R <= t0:
                break
            hi = min(R, t1)
            slope = (d1 - d0) / (t1 - t0)
            base = d0 - slope * t0
            total += n * w * (base * (hi**n - t0**n) / n
                              + slope * (hi ** (n + 1) - t0 ** (n + 1)) / (n + 1))
        if R > knots[-1]:
            total += dens[-1] * w * (R**n - knots[-1] ** n)
        return total

    def ball_volumes(self, radii) -> np.ndarray:
        """Vectorised ``ball_volume``; radii must be nonnegative."""
        R = np.asarray(radii, dtype=float)
        n, w = self.n, self._omega
        if self.is_power_law:
            return self.power_factor * w * R**n
        knots = np.asarray(self.knots)
        dens = np.asarray(self.densities)
        cum = np.array([0.0] + [self.ball_volume(k) for k in knots])
        idx = np.searchsorted(knots, R, side="right")  # knots[idx-1] <= R < knots[idx]
        out = np.empty_like(R)
        first = idx == 0
        out[first] = dens[0] * w * R[first] ** n
        last = idx == knots.size
        out[last] = cum[-1] + dens[-1] * w * (R[last] ** n - knots[-1] ** n)
        mid = ~(first | last)
        if mid.any():
            i = idx[mid] - 1
            t0, t1 = knots[i], knots[i + 1]
            slope = (dens[i + 1] - dens[i]) / (t1 - t0)
            base = dens[i] - slope * t0
            hi = R[mid]
            out[mid] = cum[i + 1] + n * w * (base * (hi**n - t0**n) / n
                                             + slope * (hi ** (n + 1) - t0 ** (n + 1)) / (n + 1))
        return out

    def scaled(self, factor: float) -> "RadialMeasure":
        """The same space with its measure multiplied by ``factor``."""
        if self.kind == "tabulated":
            return RadialMeasure.tabulated(self.n, self.knots,
                                           [d * factor for d in self.densities])
        return RadialMeasure.cone(self.n, self.power_factor * factor)

    def describe(self) -> str:
        if self.kind == "euclidean":
            return f"euclidean:n={self.n}"
        if self.kind == "cone":
            return f"cone:n={self.n},c={self.c!r}"
        if self.kind == "envelope_ricci":
            return f"envelope:n={self.n},b0={self.b0!r}"
        return f"table:n={self.n},knots={len(self.knots)}"


def ball_volume(model: RadialMeasure, R: float) -> float:
    return model.ball_volume(R)


def log_grid(lo: float = 1e-3, hi: float = 1e3, num: int = 61) -> np.ndarray:
    return np.geomspace(lo, hi, num)


def doubling_constant(model: RadialMeasure, grid=None) -> float:
    """Smallest ``C0`` with ``m(B_R)/m(B_rho) <= C0 (R/rho)**n`` over grid pairs rho < R.

    Computed in one pass: with ``v = m(B_t)/t**n`` the answer is the largest
    ``v[j] / min(v[:j])``. A single radius has no pairs and gives 1.
    """
    grid = log_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid.size == 1:
        return 1.0
    v = model.ball_volumes(grid) / grid**model.n
    running_min = np.minimum.accumulate(v)[:-1]
    return float(np.max(v[1:] / running_min))


def origin_density(model: RadialMeasure) -> float:
    """``m(B_rho) / (omega_n rho**n)`` followed down ``rho = 2**-k`` until it settles."""
    prev = None
    for k in range(_ORIGIN_MAX_K + 1):
        rho = 2.0**-k
        ratio = model.ball_volume(rho) / (model.omega * rho**model.n)
        if prev is not None and abs(ratio - prev) <= _ORIGIN_TOL * max(abs(ratio), 1e-300):
            return ratio
        prev = ratio
    raise NoLimit(f"density ratio still moving at rho = 2**-{_ORIGIN_MAX_K} (last {prev!r})")


def normalize(model: RadialMeasure) -> RadialMeasure:
    """Rescale the measure so that its origin density is 1."""
    if model.kind == "euclidean":
        return model
    density = origin_density(model)
    if not 0 < density < math.inf:
        raise ValueError(f"origin density {density!r} cannot be normalized")
    if model.kind == "tabulated":
        return RadialMeasure.tabulated(model.n, model.knots,
                                       [d / density for d in model.densities])
    return RadialMeasure.cone(model.n, model.power_factor / density)


def parse_model_spec(spec: str) -> RadialMeasure:
    """Parse ``euclidean:n=4``, ``cone:n=4,c=0.5``, ``envelope:n=4,b0=0.3`` or
    ``table:path.csv,n=4``."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    opts: dict[str, str] = {}
    path = None
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            if path is not None:
                raise ValueError(f"model spec {spec!r}: unexpected {item!r}")
            path = key
            continue
        opts[key.strip()] = value.strip()
    if "n" not in opts:
        raise ValueError(f"model spec {spec!r} must give n")
    n = int(opts.pop("n"))
    if kind == "euclidean":
        model = RadialMeasure.euclidean(n)
    elif kind == "cone":
        model = RadialMeasure.cone(n, float(opts.pop("c")))
    elif kind in ("envelope", "envelope_ricci"):
        model = RadialMeasure.envelope_ricci(n, float(opts.pop("b0")))
    elif kind in ("table", "tabulated"):
        if path is None:
            raise ValueError(f"model spec {spec!r} needs a CSV path")
        model = RadialMeasure.from_csv(path, n)
        path = None
    else:
        raise ValueError(f"unknown model kind {kind!r} in {spec!r}")
    if opts or path is not None:
        raise ValueError(f"model spec {spec!r}: unused options {sorted(opts) or path}")
    return model
