"""Per-segment quadrature rules for piecewise linear profiles on a knot grid.

On the segment ``[t_i, t_{i+1}]`` a piecewise linear ``u`` is
``u_i + (u_{i+1} - u_i) * s`` with ``s`` the fractional position, so the
r- and q-integrals reduce to weighted sums over fixed nodes::

    sum_k weight[i, k] * |u_i + (u_{i+1} - u_i) * frac[i, k]|**r

and the gradient integral is exactly ``|u_{i+1} - u_i|**p * gcoef[i]``.
The r- and q-terms share one weight array because ``gamma*r == beta*q``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .params import CknParams
from .radial import RadialMeasure

__all__ = ["SegmentRule", "build_segment_rule", "log_knots"]

DEFAULT_NODES = 8


@dataclass(frozen=True, eq=False)
class SegmentRule:
    knots: np.ndarray
    frac: np.ndarray
    weight: np.ndarray
    gcoef: np.ndarray

    @property
    def segments(self) -> int:
        return self.gcoef.size


def log_knots(support_radius: float, grid_size: int, inner_ratio: float = 1e-4) -> np.ndarray:
    """Origin plus ``grid_size - 1`` log-spaced knots on ``[inner_ratio*R, R]``."""
    if grid_size < 3:
        raise ValueError("grid_size must be at least 3")
    if not support_radius > 0:
        raise ValueError("support_radius must be positive")
    return np.concatenate(([0.0], np.geomspace(support_radius * inner_ratio, support_radius,
                                               grid_size - 1)))


def _pieces(a: float, b: float, breaks) -> list[tuple[float, float]]:
    inner = [x for x in breaks if a < x < b]
    edges = [a, *inner, b]
    return list(zip(edges[:-1], edges[1:]))


def _gauss_piece(c: float, d: float, expo: float, nodes: int, density):
    """Nodes and weights for ``int_c^d t**expo * density(t) * f(t) dt``.

    A piece starting at the origin absorbs ``t**expo`` into a Gauss-Jacobi rule.
    """
    if c == 0.0:
        x, w = roots_jacobi(nodes, 0.0, expo)
        t = 0.5 * d * (1.0 + x)
        w = w * (0.5 * d) ** (expo + 1.0) * density(t)
        return t, w
    x, w = roots_legendre(nodes)
    t = 0.5 * (d - c) * x + 0.5 * (d + c)
    return t, 0.5 * (d - c) * w * t**expo * density(t)


def build_segment_rule(model: RadialMeasure, params: CknParams, knots,
                       nodes: int = DEFAULT_NODES) -> SegmentRule:
    knots = np.asarray(knots, dtype=float)
    if knots.ndim != 1 or knots.size < 2 or np.any(np.diff(knots) <= 0) or knots[0] < 0:
        raise ValueError("knots must be nonnegative and strictly increasing")
    if knots[0] > 0:
        knots = np.concatenate(([0.0], knots))
    n = model.n
    surface = n * model.omega

    def density(t):
        return surface * model.relative_density(t)

    expo_r = float(params.gamma * params.r) + n - 1.0
    expo_g = float(-params.mu) + n - 1.0  # alpha*p = -mu
    p = float(params.p)
    breaks = model.breaks
    segs = knots.size - 1
    per_seg = [_pieces(a, b, breaks) for a, b in zip(knots[:-1], knots[1:])]
    width = nodes * max(len(pc) for pc in per_seg)
    frac = np.zeros((segs, width))
    weight = np.zeros((segs, width))
    gcoef = np.empty(segs)
    power = model.power_factor
    for i, pieces in enumerate(per_seg):
        a, b = knots[i], knots[i + 1]
        h = b - a
        ts, ws, gint = [], [], 0.0
        for c, d in pieces:
            t, w = _gauss_piece(c, d, expo_r, nodes, density)
            ts.append(t)
            ws.append(w)
            if power is None:
                tg, wg = _gauss_piece(c, d, expo_g, nodes, density)
                gint += math.fsum(wg)
        if power is not None:
            e = expo_g + 1.0
            gint = power * surface * (b**e - a**e) / e
        t = np.concatenate(ts)
        frac[i, :t.size] = (t - a) / h
        weight[i, :t.size] = np.concatenate(ws)
        gcoef[i] = gint / h**p
    return SegmentRule(knots, frac, weight, gcoef)
