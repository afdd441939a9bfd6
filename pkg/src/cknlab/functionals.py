"""The three weighted integrals of the CKN inequality for radial profiles.

For a radial ``u`` on a radial model with sphere density ``sigma``::

    T_r    = int t**(gamma r) |u|**r  sigma dt
    T_grad = int t**(alpha p) |u'|**p sigma dt
    T_q    = int t**(beta q)  |u|**q  sigma dt

and the CKN quotient is ``T_grad**(a/p) * T_q**((1-a)/q) / T_r**(1/r)``; its
infimum over profiles is ``1/C_opt``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProfile, DivergentIntegral
from .params import CknParams
from .profiles import ExtremalProfile, RadialProfile
from .quadrature import Integrand, QuadConfig, quad_integrate
from .radial import RadialMeasure

__all__ = ["WeightedNorms", "weighted_norms", "ckn_quotient", "extremal_quotient"]


@dataclass(frozen=True)
class WeightedNorms:
    T_r: float
    T_grad: float
    T_q: float | None
    est_errors: tuple[float, float, float | None]

    def scaled(self, factor: float) -> "WeightedNorms":
        tq = None if self.T_q is None else factor * self.T_q
        eq = None if self.est_errors[2] is None else factor * self.est_errors[2]
        return WeightedNorms(factor * self.T_r, factor * self.T_grad, tq,
                             (factor * self.est_errors[0], factor * self.est_errors[1], eq))

    def to_dict(self) -> dict:
        return {"T_r": self.T_r, "T_grad": self.T_grad, "T_q": self.T_q,
                "est_errors": {"T_r": self.est_errors[0], "T_grad": self.est_errors[1],
                               "T_q": self.est_errors[2]}}


def _term(model: RadialMeasure, base_exp: float, power: float, field, origin: float,
          tail, upper: float, breaks, quad: QuadConfig, label: str):
    """``int t**base_exp |field(t)|**power sigma(t) dt`` with exponent pre-checks."""
    n = model.n
    surface = n * model.omega
    w = base_exp + n - 1 + power * origin
    if not w > -1:
        raise DivergentIntegral(f"{label}: integrand ~ t**{w:g} at 0 is not integrable")
    if math.isinf(upper):
        if tail is None:
            raise DivergentIntegral(f"{label}: profile has no decay information at infinity")
        d = base_exp + n - 1 + power * tail
        if not d < -1:
            raise DivergentIntegral(f"{label}: integrand ~ t**{d:g} at infinity is not integrable")
    else:
        d = -math.inf
    shift = base_exp + n - 1 - w

    def core(t):
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.abs(field(t)) ** power
            if shift != 0.0:
                vals = vals * t**shift
        return surface * model.relative_density(t) * vals

    return quad_integrate(Integrand(core, w, d), quad, breaks=breaks, upper=upper)


def weighted_norms(model: RadialMeasure, params: CknParams, profile: RadialProfile,
                   quad: QuadConfig | None = None, *, include_q: bool | None = None
                   ) -> WeightedNorms:
    """Evaluate ``(T_r, T_grad, T_q)``; ``T_q`` is skipped (None) when ``a == 1``
    unless ``include_q`` forces it."""
    quad = quad or QuadConfig()
    if include_q is None:
        include_q = params.a != 1
    r, p, q = float(params.r), float(params.p), float(params.q)
    upper = float(profile.support)
    breaks = sorted(set(profile.breakpoints) | set(model.breaks))
    origin = profile.origin_exps
    tail = profile.tail_exps
    t_val = None if tail is None else tail[0]
    t_der = None if tail is None else tail[1]
    common = dict(upper=upper, breaks=breaks, quad=quad)

    res_r = _term(model, float(params.gamma * params.r), r, profile.value, origin[0], t_val,
                  label="T_r", **common)
    res_g = _term(model, float(-params.mu), p, profile.derivative, origin[1], t_der,
                  label="T_grad", **common)
    if include_q:
        res_q = _term(model, float(params.beta * params.q), q, profile.value, origin[0], t_val,
                      label="T_q", **common)
        tq, eq = res_q.value, res_q.error
    else:
        tq = eq = None
    return WeightedNorms(res_r.value, res_g.value, tq, (res_r.error, res_g.error, eq))


def ckn_quotient(norms: WeightedNorms, params: CknParams) -> float:
    """``T_grad**(a/p) * T_q**((1-a)/q) / T_r**(1/r)``; the q-factor is 1 when a = 1."""
    if not norms.T_r > 0:
        raise DegenerateProfile("T_r vanishes: the quotient is undefined for this profile")
    a, p, q, r = float(params.a), float(params.p), float(params.q), float(params.r)
    value = norms.T_grad ** (a / p) / norms.T_r ** (1.0 / r)
    if params.a != 1:
        if norms.T_q is None:
            raise ValueError("T_q is required when a < 1")
        value *= norms.T_q ** ((1.0 - a) / q)
    return value


def extremal_quotient(model: RadialMeasure, params: CknParams, lam: float = 1.0,
                      quad: QuadConfig | None = None) -> float:
    profile = ExtremalProfile.from_params(params, lam)
    return ckn_quotient(weighted_norms(model, params, profile, quad), params)
