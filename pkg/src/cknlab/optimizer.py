"""Numerical minimization of the CKN quotient over radial profiles.

Two searches are offered. ``minimize_family`` moves along the two-parameter
extremal family ``A (1 + B t**kappa)**(-m)``; on Euclidean space the quotient
is constant there, which the result reports as a flatness probe. ``minimize_grid``
optimizes nodal values of a piecewise linear, compactly supported profile by
hierarchical coordinate descent (see :mod:`cknlab.kernels`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .constant import copt_quadrature
from .errors import NonConvergence
from .functionals import ckn_quotient, weighted_norms
from .params import CknParams
from .profiles import ExtremalProfile, RadialProfile, SampledProfile
from .quadrature import QuadConfig
from .radial import RadialMeasure, log_grid
from .segments import build_segment_rule, log_knots

__all__ = [
    "MinimizeConfig",
    "MinimizeResult",
    "minimize_family",
    "minimize_grid",
    "BestConstantReport",
    "best_constant",
    "best_constant_report",
    "profile_quotient",
    "FLATNESS_PROBES",
]

METHODS = ("simplex", "golden_section", "coordinate_descent")
INITS = ("random", "extremal")
# (A, B) pairs probed along the extremal family
FLATNESS_PROBES = ((1.0, 0.1), (1.0, 1.0), (1.0, 10.0), (3.0, 1.0))
_RESTARTS = 3
_INITIAL_STEP = 1e-3


@dataclass(frozen=True)
class MinimizeConfig:
    method: str = "simplex"
    max_iters: int = 500
    x_tol: float = 1e-12
    f_tol: float = 1e-7
    grid_size: int = 256
    support_radius: float = 50.0
    init: str = "random"
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}, got {self.init!r}")
        if not self.x_tol > 0 or not self.f_tol > 0:
            raise ValueError("tolerances must be positive")
        if self.grid_size < 16:
            raise ValueError(f"grid_size must be >= 16, got {self.grid_size}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not self.support_radius > 0:
            raise ValueError("support_radius must be positive")

    def to_dict(self) -> dict:
        return {"method": self.method, "max_iters": self.max_iters, "x_tol": self.x_tol,
                "f_tol": self.f_tol, "grid_size": self.grid_size,
                "support_radius": self.support_radius, "init": self.init, "seed": self.seed}


@dataclass(frozen=True)
class MinimizeResult:
    best_quotient: float
    best_profile: RadialProfile
    iterations: int
    converged: bool
    history: tuple[float, ...]
    method: str
    seed: int | None = None
    probes: tuple[tuple[float, float, float], ...] = ()
    flatness: float | None = None
    evaluations: int = 0
    backend: str | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "best_quotient": self.best_quotient,
            "iterations": self.iterations,
            "converged": self.converged,
            "evaluations": self.evaluations,
            "seed": self.seed,
            "history": list(self.history),
        }
        if self.probes:
            out["flatness"] = self.flatness
            out["probes"] = [{"A": A, "B": B, "quotient": v} for A, B, v in self.probes]
        if isinstance(self.best_profile, ExtremalProfile):
            out["best_profile"] = {"kind": "extremal", "lam": self.best_profile.lam,
                                   "amplitude": self.best_profile.amplitude}
        else:
            out["best_profile"] = {"kind": self.best_profile.kind,
                                   "knots": len(self.best_profile.grid)}
        if self.backend:
            out["backend"] = self.backend
        out.update(self.extra)
        return out


def profile_quotient(model: RadialMeasure, params: CknParams, profile: RadialProfile,
                     quad: QuadConfig | None = None) -> float:
    return ckn_quotient(weighted_norms(model, params, profile, quad), params)


def _family_quotient(model, params, quad, A, B):
    return profile_quotient(model, params, ExtremalProfile.from_family(params, A, B), quad)


def minimize_family(model: RadialMeasure, params: CknParams, cfg: MinimizeConfig | None = None,
                    quad: QuadConfig | None = None) -> MinimizeResult:
    """Minimize over ``(A, B)`` of the extremal family and probe its flatness.

    ``simplex`` runs Nelder-Mead on ``(log A, log B)`` with restarts from a
    shrinking simplex; ``golden_section`` searches ``log B`` alone since ``A``
    cancels exactly.
    """
    cfg = cfg or MinimizeConfig()
    if cfg.method == "coordinate_descent":
        raise ValueError("coordinate_descent applies to grid profiles; use minimize_grid")
    probes = tuple((A, B, _family_quotient(model, params, quad, A, B))
                   for A, B in FLATNESS_PROBES)
    values = [v for _, _, v in probes]
    flatness = (max(values) - min(values)) / min(values)

    best = {"f": math.inf, "x": (0.0, 0.0)}
    history: list[float] = []
    evals = 0

    def objective(logA, logB):
        nonlocal evals
        evals += 1
        f = _family_quotient(model, params, quad, math.exp(logA), math.exp(logB))
        if f < best["f"]:
            best["f"], best["x"] = f, (logA, logB)
        return f

    def record(*_):
        history.append(best["f"])

    converged = False
    iterations = 0
    if cfg.method == "simplex":
        x0 = np.zeros(2)
        scale = 1.0
        for _ in range(_RESTARTS):
            simplex = np.array([x0, x0 + [scale, 0.0], x0 + [0.0, scale]])
            res = minimize(lambda x: objective(x[0], x[1]), x0, method="Nelder-Mead",
                           callback=record,
                           options={"initial_simplex": simplex,
                                    "xatol": max(cfg.x_tol, 1e-8),
                                    "fatol": cfg.f_tol * max(best["f"], 1e-300),
                                    "maxiter": cfg.max_iters})
            iterations += res.nit
            converged = bool(res.success)
            x0 = np.array(best["x"])
            scale *= 0.1
    else:
        iterations, converged = _golden(lambda b: objective(0.0, b), math.log(0.01),
                                        math.log(100.0), max(cfg.x_tol, 1e-8), cfg.max_iters,
                                        record)
    if not converged:
        raise NonConvergence(f"{cfg.method} search did not converge in {cfg.max_iters} iterations")
    logA, logB = best["x"]
    profile = ExtremalProfile.from_family(params, math.exp(logA), math.exp(logB))
    return MinimizeResult(best["f"], profile, iterations, converged, tuple(history), cfg.method,
                          probes=probes, flatness=flatness, evaluations=evals)


def _golden(f, lo, hi, tol, max_iters, record):
    """Golden-section search on ``[lo, hi]``; a flat ``f`` simply shrinks the interval."""
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv * (hi - lo)
    x2 = lo + inv * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for it in range(1, max_iters + 1):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv * (hi - lo)
            f2 = f(x2)
        record()
        if hi - lo < tol:
            return it, True
    return max_iters, False


def _initial_values(params: CknParams, knots: np.ndarray, cfg: MinimizeConfig) -> np.ndarray:
    if cfg.init == "extremal":
        kappa, decay = float(params.kappa), float(params.decay)
        u = (1.0 + knots**kappa) ** (-decay)
    else:
        u = np.random.default_rng(cfg.seed).uniform(0.0, 1.0, knots.size)
    u[-1] = 0.0
    return u


def minimize_grid(model: RadialMeasure, params: CknParams, cfg: MinimizeConfig | None = None,
                  quad: QuadConfig | None = None, *, initial=None) -> MinimizeResult:
    """Coordinate descent on nodal values over log-spaced knots plus the origin.

    One iteration is one sweep over all levels of hat directions. The run has
    converged when a sweep lowers the quotient by less than ``f_tol``
    (relative). The reported ``best_quotient`` is recomputed from the final
    profile with the adaptive quadrature; the in-loop value from the segment
    rules is kept as ``grid_quotient``.
    """
    cfg = cfg or MinimizeConfig(method="coordinate_descent")
    if cfg.method != "coordinate_descent":
        raise ValueError("minimize_grid uses method='coordinate_descent'")
    knots = log_knots(cfg.support_radius, cfg.grid_size)
    rule = build_segment_rule(model, params, knots)
    u = np.array(initial, dtype=float) if initial is not None \
        else _initial_values(params, knots, cfg)
    if u.shape != knots.shape:
        raise ValueError(f"initial values must have {knots.size} entries")
    u = np.maximum(u, 0.0)
    u[-1] = 0.0
    if not u.max() > 0:
        raise ValueError("initial profile is identically zero")

    r, q, p, a = float(params.r), float(params.q), float(params.p), float(params.a)
    wq = 0.0 if params.a == 1 else (1 - a) / q
    top = max(int(math.log2(knots.size - 1)) - 1, 0)
    levels = np.arange(top, -1, -1)
    scale = float(u.max())
    steps = np.full((levels.size, knots.size), _INITIAL_STEP * scale)

    sr, sq, sg = kernels.segment_terms(u, rule.frac, rule.weight, rule.gcoef, r, q, p, wq != 0)
    prev = _grid_objective(sr.sum(), sq.sum(), sg.sum(), 1 / r, wq, a / p)
    start = math.exp(prev)
    history: list[float] = []
    evals = 0
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        J, ev = kernels.cd_sweep(u, rule.frac, rule.weight, rule.gcoef, r, q, p,
                                 1 / r, wq, a / p, steps, levels, cfg.x_tol * scale)
        evals += ev
        J = min(J, prev)  # every accepted move lowers the objective
        history.append(math.exp(J))
        gain = 1.0 - math.exp(J - prev)
        prev = J
        if gain < cfg.f_tol:
            converged = True
            break
    if not converged:
        raise NonConvergence(
            f"grid search still improving after {cfg.max_iters} sweeps "
            f"(quotient {math.exp(prev)!r})")
    profile = SampledProfile(tuple(knots), tuple(u))
    best = profile_quotient(model, params, profile, quad)
    return MinimizeResult(best, profile, it, converged, tuple(history), cfg.method,
                          seed=cfg.seed if initial is None and cfg.init == "random" else None,
                          evaluations=evals, backend=kernels.BACKEND,
                          extra={"grid_quotient": math.exp(prev), "initial_quotient": start,
                                 "init": cfg.init if initial is None else "given"})


def _grid_objective(tr, tq, tg, wr, wq, wg):
    if tr <= 0 or tg <= 0 or (wq and tq <= 0):
        return math.inf
    out = wg * math.log(tg) - wr * math.log(tr)
    return out + wq * math.log(tq) if wq else out


@dataclass(frozen=True)
class BestConstantReport:
    quotient_route: float
    volume_route: float
    copt: float
    min_density_ratio: float
    family: MinimizeResult

    @property
    def relative_gap(self) -> float:
        return abs(self.quotient_route - self.volume_route) / self.volume_route

    def to_dict(self) -> dict:
        return {"best_constant": self.quotient_route, "volume_route": self.volume_route,
                "relative_gap": self.relative_gap, "copt_euclidean": self.copt,
                "min_density_ratio": self.min_density_ratio,
                "family_flatness": self.family.flatness}


def best_constant_report(model: RadialMeasure, params: CknParams,
                         cfg: MinimizeConfig | None = None, quad: QuadConfig | None = None,
                         *, radii=None, copt: float | None = None) -> BestConstantReport:
    """``1/min quotient`` over the extremal family, and the volume-implied value
    ``C_opt * (inf_rho m(B_rho)/(omega_n rho**n))**(-a/n)``."""
    family = minimize_family(model, params, cfg, quad)
    copt = copt_quadrature(params, quad) if copt is None else copt
    radii = log_grid() if radii is None else np.asarray(radii, dtype=float)
    ratio = float(np.min(model.ball_volumes(radii) / (model.omega * radii**model.n)))
    volume = copt * ratio ** (-float(params.a) / params.n)
    return BestConstantReport(1.0 / family.best_quotient, volume, copt, ratio, family)


def best_constant(model: RadialMeasure, params: CknParams, cfg: MinimizeConfig | None = None,
                  quad: QuadConfig | None = None) -> float:
    return best_constant_report(model, params, cfg, quad).quotient_route
