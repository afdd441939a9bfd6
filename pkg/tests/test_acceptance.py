"""Acceptance criteria, each at its stated tolerance.

Every test records one ``PASS``/``FAIL``/``SKIP`` line (shown in the terminal
summary and printed immediately) and then asserts, so a failing criterion
fails its test.
"""
from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from cknlab.comparison import (
    F_of,
    F_prime,
    G_of,
    G_quadrature,
    growth_sandwich,
    h0_residual,
    ode_residual_G,
)
from cknlab.constant import copt_quadrature
from cknlab.functionals import ckn_quotient, weighted_norms
from cknlab.optimizer import MinimizeConfig, best_constant_report, minimize_grid
from cknlab.params import RawParams, derive, dilation_residual, validate
from cknlab.profiles import ExtremalProfile, SampledProfile, SumProfile, bump_profile, \
    dilate_profile
from cknlab.radial import RadialMeasure, doubling_constant

from conftest import ACCEPTANCE_LINES

BASE = (4, "2", "2.5", "1")
LAMS = (0.1, 1.0, 10.0)


def record(tag: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {tag}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def quotient(model, params, profile):
    return ckn_quotient(weighted_norms(model, params, profile), params)


# criteria 1-3 are also run at a second admissible point
POINTS = [pytest.param(BASE, id="base"), pytest.param((5, "2", "2.5", "0.5"), id="n5")]


def _derived(point):
    return derive(RawParams(*point))


@pytest.mark.parametrize("point", POINTS)
def test_criterion_01_parameter_identities(point):
    t0 = time.perf_counter()
    params = _derived(point)
    F = Fraction
    checks = {
        "dilation_residual = 0": dilation_residual(params) == 0,
        "a/p+(1-a)/q-1/r = a/n": params.a / params.p + (1 - params.a) / params.q
        - 1 / params.r == params.a / params.n,
        "theta = s": params.theta == params.s,
    }
    if point == BASE:
        checks["derived values"] = (
            (params.r, params.theta, params.s, params.a, params.nu, params.gamma, params.kappa,
             params.g_exp) == (3, 2, 2, F(4, 9), 3, F(-2, 3), 1, -3))
    elapsed = time.perf_counter() - t0
    failed = [k for k, v in checks.items() if not v]
    record(f"criterion 1 {point}", not failed and elapsed < 1.0,
           f"{len(checks)} exact identities, failed={failed}, {elapsed:.3f}s")


@pytest.mark.parametrize("point", POINTS)
def test_criterion_02_power_law(point):
    t0 = time.perf_counter()
    params = _derived(point)
    g = float(params.g_exp)
    G1 = G_quadrature(params, 1.0)
    worst = max(abs(G_quadrature(params, lam) * lam ** -g / G1 - 1) for lam in LAMS)
    elapsed = time.perf_counter() - t0
    record(f"criterion 2 {point}", worst < 1e-8 and elapsed < 10,
           f"max |G(lam) lam**{-g:g} / G(1) - 1| = {worst:.2e} (< 1e-8), {elapsed:.2f}s")


@pytest.mark.parametrize("point", POINTS)
def test_criterion_03_ode_residuals(point):
    params = _derived(point)
    copt = copt_quadrature(params)
    res_G = max(abs(ode_residual_G(params, lam, copt=copt)) for lam in LAMS)
    res_H = max(abs(h0_residual(params, m * copt, lam, copt=copt))
                for lam in LAMS for m in (1.0, 2.0))
    record(f"criterion 3 {point}", res_G < 1e-6 and res_H < 1e-6,
           f"G residual {res_G:.2e}, H0 residual {res_H:.2e} (< 1e-6)")


def test_criterion_04_F_G_identities():
    params = _derived(BASE)
    worst = {}
    cases = [("euclidean", RadialMeasure.euclidean(4), 1.0)]
    cases += [(f"cone c={c}", RadialMeasure.cone(4, c), c) for c in (0.25, 0.5, 0.9)]
    cases += [(f"envelope b0={b}", RadialMeasure.envelope_ricci(4, b), math.exp(3 * b))
              for b in (0.1, 0.5)]
    for name, model, factor in cases:
        worst[name] = max(rel(F_of(model, params, lam), factor * G_of(params, lam))
                          for lam in LAMS)
    top = max(worst.values())
    record("criterion 4", top < 1e-8, f"max relative deviation {top:.2e} over {len(cases)} "
           "models (< 1e-8)")


def test_criterion_05_derivative_consistency():
    params = _derived(BASE)
    errs = []
    for model in (RadialMeasure.euclidean(4), RadialMeasure.cone(4, 0.5)):
        for lam in (0.5, 2.0):
            h = 1e-5 * lam
            fd = (F_of(model, params, lam + h) - F_of(model, params, lam - h)) / (2 * h)
            errs.append(rel(F_prime(model, params, lam), fd))
    record("criterion 5", max(errs) < 1e-5,
           f"max relative error vs central difference {max(errs):.2e} (< 1e-5)")


def test_criterion_06_extremal_optimality():
    t0 = time.perf_counter()
    params = _derived(BASE)
    model = RadialMeasure.euclidean(4)
    copt = copt_quadrature(params)
    qs = [quotient(model, params, ExtremalProfile.from_params(params, lam)) for lam in LAMS]
    spread = (max(qs) - min(qs)) / min(qs)
    vs_copt = max(abs(q * copt - 1) for q in qs)
    base_q = qs[1]
    base_prof = ExtremalProfile.from_params(params, 1.0)
    drops = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        bump = bump_profile(float(np.exp(rng.uniform(math.log(0.1), math.log(10.0)))),
                            float(rng.uniform(1.5, 4.0)), 1e-2)
        drops.append(base_q - quotient(model, params, SumProfile((base_prof, bump))))
    grid_gaps = []
    for seed in range(5):
        res = minimize_grid(model, params, MinimizeConfig(method="coordinate_descent",
                                                          seed=seed))
        grid_gaps.append(res.best_quotient / base_q - 1)
    elapsed = time.perf_counter() - t0
    ok = (spread < 1e-8 and vs_copt < 1e-8 and max(drops) <= 1e-9
          and max(abs(g) for g in grid_gaps) < 1e-2 and elapsed < 120)
    record("criterion 6", ok,
           f"lambda spread {spread:.1e}, |Q*C_opt-1| {vs_copt:.1e}, worst perturbation drop "
           f"{max(drops):.1e}, grid gaps {[f'{g:.1e}' for g in grid_gaps]}, {elapsed:.1f}s")


def test_criterion_07_cone_sharpness():
    params = _derived(BASE)
    copt = copt_quadrature(params)
    a_n = float(params.a) / params.n
    errs, sandwich = [], []
    for c in (0.25, 0.5, 0.9):
        model = RadialMeasure.cone(4, c)
        rep = best_constant_report(model, params, MinimizeConfig(method="simplex"), copt=copt)
        want = c ** -a_n * copt
        errs += [rel(rep.quotient_route, want), rel(rep.volume_route, want)]
        sharp = growth_sandwich(model, params, want, 1.0, [0.5, 1, 2, 10], copt=copt)
        slack = max(abs(r.lower_slack) for r in sharp.rows)
        too_small = growth_sandwich(model, params, copt, 1.0, [0.5, 1, 2, 10], copt=copt)
        sandwich.append(sharp.passed and slack < 1e-10 and not too_small.passed)
    record("criterion 7", max(errs) < 1e-4 and all(sandwich),
           f"max route error {max(errs):.1e} (< 1e-4), sandwich pass/zero-slack/fail "
           f"pattern holds for {sum(sandwich)}/3 cones")


def test_criterion_08_euclidean_sandwich():
    params = _derived(BASE)
    copt = copt_quadrature(params)
    rep = growth_sandwich(RadialMeasure.euclidean(4), params, copt, 1.0, [0.5, 1, 2, 10],
                          copt=copt)
    worst = max(max(abs(r.lower_slack), abs(r.upper_slack)) for r in rep.rows)
    record("criterion 8", rep.passed and worst < 1e-10,
           f"max relative gap on either side {worst:.1e} (< 1e-10)")


def test_criterion_09_envelope_doubling():
    b0 = 0.3
    got = doubling_constant(RadialMeasure.envelope_ricci(4, b0))
    want = math.exp(3 * b0)
    # The envelope measure is e**(3 b0) times Euclidean, so every volume ratio is
    # exactly (R/rho)**n and the doubling constant is 1; the stated target is the
    # density factor. Left failing on purpose; see the decisions ledger.
    record("criterion 9", rel(got, want) < 1e-9,
           f"doubling_constant = {got:.16g}, target e**(3*0.3) = {want:.16g}, "
           f"relative gap {rel(got, want):.2e} (< 1e-9)")


def test_criterion_10_dilation_invariance():
    params = _derived(BASE)
    model = RadialMeasure.euclidean(4)
    sampled = SampledProfile((0.0, 0.2, 0.7, 1.5, 3.0, 6.0), (1.0, 0.9, 0.6, 0.3, 0.1, 0.0))
    errs = []
    for prof in (ExtremalProfile.from_params(params, 1.0), sampled):
        q0 = quotient(model, params, prof)
        errs += [rel(quotient(model, params, dilate_profile(prof, s)), q0) for s in (0.5, 3.0)]
    record("criterion 10", max(errs) < 1e-10,
           f"max relative change under dilation {max(errs):.1e} (< 1e-10)")


def test_criterion_11_second_parameter_point():
    raw = RawParams(5, "2", "3", "0.5")
    report = validate(raw)
    if not report.ok:
        line = (f"SKIP criterion 11 (5, 2, 3, 0.5): inadmissible, violated "
                f"{list(report.violations)}; criteria 1-3 are run at (5, 2, 2.5, 0.5) instead")
        ACCEPTANCE_LINES.append(line)
        print(line)
        pytest.skip(line)
    point = (5, "2", "3", "0.5")
    test_criterion_01_parameter_identities(point)
    test_criterion_02_power_law(point)
    test_criterion_03_ode_residuals(point)
