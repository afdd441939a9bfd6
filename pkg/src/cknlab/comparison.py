"""Comparison functionals F, G, H0 and the volume-growth bound they imply.

With ``c1 = q(p-1)/(q-p)`` and the extremal ``u = (lam + t**kappa)**(-(p-1)/(q-p))``:

* ``F(lam) = (1/c1) int d**(gamma r) (lam + d**kappa)**(-c1) dm`` on a model,
  equivalently ``(1/c1) int m(B_h) psi(h) dh`` after the layer-cake change of
  variables;
* ``G`` is ``F`` on Euclidean space, a pure power ``G(lam) = lam**g_exp G(1)``;
* ``F'(lam) = -int d**(gamma r) (lam + d**kappa)**(-(c1+1)) dm``.

At the extremal the three CKN integrals are ``T_r = -F'``, ``T_q = c1 F`` and
``T_grad = K**p (c1 F + lam F')`` (``K`` the gradient factor), so the CKN
inequality becomes a first-order differential inequality for ``F`` whose
equality case is solved by ``G``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constant import copt_quadrature
from .errors import DivergentIntegral, DomainError, InvalidConstant
from .params import CknParams
from .quadrature import Integrand, QuadConfig, quad_integrate
from .radial import RadialMeasure, ball_volume

__all__ = [
    "G_of", "G_quadrature", "F_of", "F_prime", "ode_residual_G", "H0_of", "h0_residual",
    "ineq_slack_F", "gamma_coeff", "gamma_tilde_coeff", "psi_kernel", "psi_sign_change",
    "psi_moment", "psi_moment_bound", "moment_obstruction", "volume_lower_bound", "SandwichRow",
    "SandwichReport", "growth_sandwich", "ComparisonCurve", "comparison_curve",
    "default_lambda_grid", "chart_distortion_constant", "copt_from_G1", "SANDWICH_TOL",
]

SANDWICH_TOL = 1e-10
_CONSTANT_TOL = 1e-12


class _Exps:
    """Float copies of the exponents used throughout, computed per call."""

    def __init__(self, params: CknParams):
        self.n = params.n
        self.p = float(params.p)
        self.q = float(params.q)
        self.r = float(params.r)
        self.a = float(params.a)
        self.kappa = float(params.kappa)
        self.gr = float(params.gamma * params.r)
        self.c1 = float(params.c1)
        self.K = float(params.grad_factor)
        self.g = float(params.g_exp)
        self.lead = float(params.kappa * params.c1 - params.gamma * params.r)
        self.zero_q = params.a == 1
        self.qa = 0.0 if self.zero_q else self.p * (1 - self.a) / (self.a * self.q)
        self.pa = self.p / (self.a * self.r)


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam!r}")
    return lam


def _bracket(e: _Exps, lam: float, h):
    return -e.gr * lam + e.lead * h**e.kappa


def psi_kernel(params: CknParams, lam: float, h):
    """``h**(gamma r - 1) [-gamma r lam + (kappa c1 - gamma r) h**kappa]
    / (lam + h**kappa)**(c1 + 1)``."""
    e = _Exps(params)
    h = np.asarray(h, dtype=float)
    return h ** (e.gr - 1) * _bracket(e, lam, h) / (lam + h**e.kappa) ** (e.c1 + 1)


def psi_sign_change(params: CknParams, lam: float) -> float | None:
    """Radius where the bracket of ``psi`` vanishes, or None if it never does.

    The root solves ``h**kappa = gamma r lam / (kappa c1 - gamma r)``; with
    ``gamma < 0`` the right side is negative on the whole admissible set, so
    ``psi`` keeps one sign and None is the expected answer there.
    """
    e = _Exps(params)
    lam = _check_lam(lam)
    if e.lead == 0:
        return None
    target = e.gr * lam / e.lead
    if not target > 0:
        return None
    return target ** (1.0 / e.kappa)


def _layer_integral(e: _Exps, lam: float, mass_ratio, quad, breaks=(), upper=math.inf):
    """``int (m(B_h)/h**n) h**(n + gamma r - 1) bracket / (lam+h**kappa)**(c1+1) dh``."""

    def core(h):
        return mass_ratio(h) * _bracket(e, lam, h) / (lam + h**e.kappa) ** (e.c1 + 1)

    w = e.n + e.gr - 1
    d = w + e.kappa - e.kappa * (e.c1 + 1)
    return quad_integrate(Integrand(core, w, d), quad, breaks=breaks, upper=upper)


def G_quadrature(params: CknParams, lam: float, quad: QuadConfig | None = None) -> float:
    """``G(lam)`` straight from its one-dimensional integral."""
    e = _Exps(params)
    lam = _check_lam(lam)
    omega = RadialMeasure.euclidean(e.n).omega
    res = _layer_integral(e, lam, lambda h: omega, quad)
    return res.value / e.c1


@lru_cache(maxsize=64)
def _G1(params: CknParams, quad: QuadConfig | None) -> float:
    return G_quadrature(params, 1.0, quad)


def G_of(params: CknParams, lam: float, quad: QuadConfig | None = None, *,
         method: str = "power") -> float:
    """``G(lam)``: ``lam**g_exp * G(1)`` (default) or full quadrature."""
    lam = _check_lam(lam)
    if method == "quadrature":
        return G_quadrature(params, lam, quad)
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    return lam ** float(params.g_exp) * _G1(params, quad)


def _mass_ratio(model: RadialMeasure):
    if model.is_power_law:
        c = model.power_factor * model.omega
        return lambda h: c
    n = model.n
    return lambda h: model.ball_volumes(h) / h**n


def F_of(model: RadialMeasure, params: CknParams, lam: float,
         quad: QuadConfig | None = None, *, route: str = "kernel") -> float:
    """``F(lam)`` on a model.

    ``route="kernel"`` integrates ``m(B_h)`` against ``psi``; ``route="direct"``
    integrates the defining radial integral against the sphere density.
    """
    e = _Exps(params)
    lam = _check_lam(lam)
    if route == "kernel":
        res = _layer_integral(e, lam, _mass_ratio(model), quad, breaks=model.breaks)
        return res.value / e.c1
    if route == "direct":
        return _radial_power_integral(model, e, lam, e.c1, quad) / e.c1
    raise ValueError(f"unknown route {route!r}")


def _radial_power_integral(model: RadialMeasure, e: _Exps, lam: float, power: float,
                           quad) -> float:
    """``int t**(gamma r) (lam + t**kappa)**(-power) sigma(t) dt``."""
    surface = model.n * model.omega
    w = e.gr + e.n - 1
    d = w - e.kappa * power
    if not d < -1:
        raise DivergentIntegral(f"integrand ~ t**{d:g} at infinity is not integrable")

    def core(t):
        return surface * model.relative_density(t) * (lam + t**e.kappa) ** (-power)

    return quad_integrate(Integrand(core, w, d), quad, breaks=model.breaks).value


def F_prime(model: RadialMeasure, params: CknParams, lam: float,
            quad: QuadConfig | None = None) -> float:
    e = _Exps(params)
    lam = _check_lam(lam)
    return -_radial_power_integral(model, e, lam, e.c1 + 1.0, quad)


def gamma_coeff(params: CknParams, C: float) -> float:
    """``C**(p/a) K**p c1**(p(1-a)/(aq))``, the coefficient of the differential inequality."""
    e = _Exps(params)
    return C ** (e.p / e.a) * e.K**e.p * e.c1**e.qa


def gamma_tilde_coeff(params: CknParams, quad: QuadConfig | None = None,
                      copt: float | None = None) -> float:
    copt = copt_quadrature(params, quad) if copt is None else copt
    return gamma_coeff(params, copt)


def _ode_sides(e: _Exps, coeff: float, value: float, deriv: float, lam: float):
    lhs = (-deriv) ** e.pa
    inner = e.c1 * value + lam * deriv
    rhs = coeff * inner * value**e.qa
    return lhs, rhs


def ode_residual_G(params: CknParams, lam: float, quad: QuadConfig | None = None, *,
                   copt: float | None = None) -> float:
    """Relative residual ``(LHS - RHS)/RHS`` of the sharp ODE satisfied by ``G``.

    ``G`` and ``G'`` are both computed by quadrature (not from the power law).
    """
    e = _Exps(params)
    lam = _check_lam(lam)
    model = RadialMeasure.euclidean(e.n)
    G = G_quadrature(params, lam, quad)
    Gp = F_prime(model, params, lam, quad)
    lhs, rhs = _ode_sides(e, gamma_tilde_coeff(params, quad, copt), G, Gp, lam)
    return (lhs - rhs) / rhs


def H0_of(params: CknParams, C: float, lam: float, quad: QuadConfig | None = None, *,
          copt: float | None = None) -> float:
    """``(C_opt/C)**(n/a) G(lam)``."""
    copt = copt_quadrature(params, quad) if copt is None else copt
    return (copt / C) ** (params.n / float(params.a)) * G_of(params, lam, quad)


def h0_residual(params: CknParams, C: float, lam: float, quad: QuadConfig | None = None, *,
                copt: float | None = None) -> float:
    """Relative residual of the ODE with coefficient ``gamma_coeff(C)`` at ``H0``.

    ``H0`` is a pure power so ``H0' = g_exp H0 / lam`` exactly.
    """
    e = _Exps(params)
    lam = _check_lam(lam)
    copt = copt_quadrature(params, quad) if copt is None else copt
    H = H0_of(params, C, lam, quad, copt=copt)
    lhs, rhs = _ode_sides(e, gamma_coeff(params, C), H, e.g * H / lam, lam)
    return (lhs - rhs) / rhs


def ineq_slack_F(model: RadialMeasure, params: CknParams, C: float, lam: float,
                 quad: QuadConfig | None = None) -> float:
    """``RHS - LHS`` of the differential inequality for ``F``; negative means violated."""
    e = _Exps(params)
    lam = _check_lam(lam)
    F = F_of(model, params, lam, quad)
    Fp = F_prime(model, params, lam, quad)
    lhs, rhs = _ode_sides(e, gamma_coeff(params, C), F, Fp, lam)
    return rhs - lhs


def psi_moment(params: CknParams, lam: float, h0: float,
               quad: QuadConfig | None = None) -> float:
    """``int_0^h0 h**n psi(h) dh`` by quadrature."""
    e = _Exps(params)
    lam = _check_lam(lam)
    return _layer_integral(e, lam, lambda h: 1.0, quad, upper=float(h0)).value


def _moment_bracket(e: _Exps, lam: float, h0: float) -> float:
    s = e.n + e.gr
    return -e.gr * lam * h0**s / s + e.lead * h0 ** (s + e.kappa) / (s + e.kappa)


def psi_moment_bound(params: CknParams, lam: float, h0: float) -> float:
    """Closed-form upper bound on ``psi_moment`` from ``lam + h**kappa >= lam``."""
    e = _Exps(params)
    lam = _check_lam(lam)
    return lam ** (-e.c1 - 1) * _moment_bracket(e, lam, float(h0))


def moment_obstruction(params: CknParams, lam: float, h0: float) -> float:
    """``lam**eta`` times the moment bracket; tends to 0 as ``lam -> inf``."""
    e = _Exps(params)
    lam = _check_lam(lam)
    return lam ** float(params.eta) * _moment_bracket(e, lam, float(h0))


def _check_constant(C: float, copt: float) -> None:
    if C < copt * (1 - _CONSTANT_TOL):
        raise InvalidConstant(f"C = {C!r} is below the optimal constant {copt!r}")


def volume_lower_bound(params: CknParams, C: float, C0: float, rho: float,
                       quad: QuadConfig | None = None, *, copt: float | None = None) -> float:
    """``C0**-1 (C_opt/C)**(n/a) omega_n rho**n``."""
    copt = copt_quadrature(params, quad) if copt is None else copt
    _check_constant(C, copt)
    if not C0 >= 1:
        raise DomainError(f"doubling constant C0 must be >= 1, got {C0!r}")
    if not rho > 0:
        raise DomainError(f"radius must be positive, got {rho!r}")
    omega = RadialMeasure.euclidean(params.n).omega
    return (copt / C) ** (params.n / float(params.a)) * omega * rho**params.n / C0


@dataclass(frozen=True)
class SandwichRow:
    rho: float
    lower: float
    volume: float
    upper: float
    passed: bool

    @property
    def lower_slack(self) -> float:
        return (self.volume - self.lower) / self.volume

    @property
    def upper_slack(self) -> float:
        return (self.upper - self.volume) / self.volume


@dataclass(frozen=True)
class SandwichReport:
    rows: tuple[SandwichRow, ...]
    C: float
    C0: float
    copt: float

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)


def growth_sandwich(model: RadialMeasure, params: CknParams, C: float, C0: float, rho_grid,
                    quad: QuadConfig | None = None, *, copt: float | None = None,
                    tol: float = SANDWICH_TOL) -> SandwichReport:
    """Check ``lower <= m(B_rho) <= C0 omega_n rho**n`` at each radius.

    Both comparisons allow a relative ``tol`` so that sharp cases, where the
    bound is attained, are not decided by rounding.
    """
    copt = copt_quadrature(params, quad) if copt is None else copt
    rows = []
    for rho in np.asarray(rho_grid, dtype=float):
        lower = volume_lower_bound(params, C, C0, rho, copt=copt)
        vol = ball_volume(model, rho)
        upper = C0 * model.omega * rho**model.n
        ok = bool(lower <= vol * (1 + tol) and vol <= upper * (1 + tol))
        rows.append(SandwichRow(float(rho), lower, vol, upper, ok))
    return SandwichReport(tuple(rows), float(C), float(C0), copt)


def default_lambda_grid() -> np.ndarray:
    return np.geomspace(1e-2, 1e2, 13)


@dataclass(frozen=True)
class ComparisonCurve:
    lam: np.ndarray
    F: np.ndarray
    G: np.ndarray
    H0: np.ndarray
    F_prime: np.ndarray
    ode_residual_G: np.ndarray
    ineq_slack_F: np.ndarray
    C: float
    copt: float
    gamma_coeff: float
    gamma_tilde_coeff: float

    COLUMNS = ("lambda", "F", "G", "H0", "F_prime", "ode_residual_G", "ineq_slack_F")

    def rows(self):
        return list(zip(self.lam, self.F, self.G, self.H0, self.F_prime,
                        self.ode_residual_G, self.ineq_slack_F))


def comparison_curve(model: RadialMeasure, params: CknParams, C: float, lam_grid=None,
                     quad: QuadConfig | None = None, *, copt: float | None = None
                     ) -> ComparisonCurve:
    """Evaluate every column at each ``lam``; ``G`` by quadrature, not the power law."""
    lam_grid = default_lambda_grid() if lam_grid is None else np.asarray(lam_grid, dtype=float)
    copt = copt_quadrature(params, quad) if copt is None else copt
    e = _Exps(params)
    gam = gamma_coeff(params, C)
    gam_t = gamma_coeff(params, copt)
    d1 = (copt / C) ** (e.n / e.a)
    euclid = RadialMeasure.euclidean(e.n)
    cols = {k: [] for k in ("F", "G", "H0", "Fp", "res", "slack")}
    for lam in lam_grid:
        F = F_of(model, params, lam, quad)
        Fp = F_prime(model, params, lam, quad)
        G = G_quadrature(params, lam, quad)
        Gp = F_prime(euclid, params, lam, quad)
        lhs, rhs = _ode_sides(e, gam_t, G, Gp, lam)
        flhs, frhs = _ode_sides(e, gam, F, Fp, lam)
        cols["F"].append(F)
        cols["G"].append(G)
        cols["H0"].append(d1 * G)
        cols["Fp"].append(Fp)
        cols["res"].append((lhs - rhs) / rhs)
        cols["slack"].append(frhs - flhs)
    arr = {k: np.array(v) for k, v in cols.items()}
    return ComparisonCurve(lam_grid, arr["F"], arr["G"], arr["H0"], arr["Fp"], arr["res"],
                           arr["slack"], float(C), copt, gam, gam_t)


def chart_distortion_constant(params: CknParams, C: float, eps: float) -> float:
    """Constant after a chart whose metric is within a factor ``1+eps`` of Euclidean."""
    n, p, q, r, a = params.n, float(params.p), float(params.q), float(params.r), float(params.a)
    base = 1.0 + eps
    return base ** (n / (2 * r)) * base ** (a * n / (2 * p) + n * (1 - a) / (2 * q) + a / 2) * C


def copt_from_G1(params: CknParams, G1: float) -> float:
    """Solve the power-law substitution of the sharp ODE for ``C_opt`` given ``G(1)``."""
    e = _Exps(params)
    bracket = e.K**e.p * e.c1**e.qa * (e.n * (e.p - 1) / e.p) * G1 ** (e.p / e.n)
    return ((-e.g) ** e.pa / bracket) ** (e.a / e.p)
