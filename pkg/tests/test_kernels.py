from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cknlab import kernels
from cknlab.functionals import weighted_norms
from cknlab.kernels import _fallback
from cknlab.profiles import SampledProfile
from cknlab.radial import RadialMeasure
from cknlab.segments import build_segment_rule, log_knots

from conftest import make_params

try:
    from cknlab.kernels import _kernels
except ImportError:  # pragma: no cover - only without a compiler
    _kernels = None

needs_compiled = pytest.mark.skipif(_kernels is None, reason="compiled extension not built")

PARAMS = make_params()
EXPS = (3.0, 2.5, 2.0)
WEIGHTS = (1 / 3, (1 - 4 / 9) / 2.5, (4 / 9) / 2)
TAB = RadialMeasure.tabulated(4, (0.3, 1.0, 4.0), (1.0, 1.6, 0.7))


def _rule(model, K=64, R=20.0):
    return build_segment_rule(model, PARAMS, log_knots(R, K))


def _start(K, seed):
    u = np.random.default_rng(seed).uniform(size=K)
    u[-1] = 0.0
    return u


def _sweeps(mod, rule, u, count=2):
    K = u.size
    levels = np.arange(max(int(np.log2(K - 1)) - 1, 0), -1, -1)
    steps = np.full((levels.size, K), 1e-3 * u.max())
    out = []
    for _ in range(count):
        out.append(mod.cd_sweep(u, rule.frac, rule.weight, rule.gcoef, *EXPS, *WEIGHTS,
                                steps, levels, 1e-14))
    return out, steps


class TestSegmentRule:
    @pytest.mark.parametrize("model", [RadialMeasure.euclidean(4), RadialMeasure.cone(4, 0.4),
                                       TAB], ids=lambda m: m.kind)
    def test_matches_adaptive_quadrature(self, model):
        rule = _rule(model)
        u = np.maximum(1.0 - np.log1p(rule.knots) / np.log1p(20.0), 0.0)
        u[-1] = 0.0
        sr, sq, sg = _fallback.segment_terms(u, rule.frac, rule.weight, rule.gcoef, *EXPS)
        norms = weighted_norms(model, PARAMS, SampledProfile(tuple(rule.knots), tuple(u)))
        # cubic integrand in the segment variable: exact up to rounding
        assert sr.sum() == pytest.approx(norms.T_r, rel=1e-10)
        assert sg.sum() == pytest.approx(norms.T_grad, rel=1e-10)
        assert sq.sum() == pytest.approx(norms.T_q, rel=1e-6)

    def test_knots(self):
        k = log_knots(50.0, 256)
        assert k[0] == 0 and k[1] == pytest.approx(50e-4) and k[-1] == pytest.approx(50.0)
        assert k.size == 256 and np.all(np.diff(k) > 0)
        with pytest.raises(ValueError):
            log_knots(50.0, 2)


@needs_compiled
class TestParity:
    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.sampled_from([17, 33, 64]))
    def test_segment_terms(self, seed, K):
        rule = _rule(RadialMeasure.euclidean(4), K)
        u = _start(K, seed)
        for a, b in zip(_fallback.segment_terms(u, rule.frac, rule.weight, rule.gcoef, *EXPS),
                        _kernels.segment_terms(u, rule.frac, rule.weight, rule.gcoef, *EXPS)):
            np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-300)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("model", [RadialMeasure.euclidean(4), TAB], ids=lambda m: m.kind)
    def test_sweeps_bitwise(self, seed, model):
        rule = _rule(model)
        u_py, u_c = _start(64, seed), _start(64, seed)
        res_py, steps_py = _sweeps(_fallback, rule, u_py)
        res_c, steps_c = _sweeps(_kernels, rule, u_c)
        assert res_py == res_c
        assert np.array_equal(u_py, u_c)
        assert np.array_equal(steps_py, steps_c)

    @pytest.mark.skipif(os.environ.get("CKN_FORCE_PYTHON") == "1",
                        reason="fallback forced by CKN_FORCE_PYTHON")
    def test_default_backend_is_compiled(self):
        assert kernels.BACKEND == "compiled"


def test_sweep_lowers_objective_and_keeps_constraints():
    rule = _rule(RadialMeasure.euclidean(4))
    u = _start(64, 5)
    sr, sq, sg = _fallback.segment_terms(u, rule.frac, rule.weight, rule.gcoef, *EXPS)
    before = _fallback._objective(sr.sum(), sq.sum(), sg.sum(), *WEIGHTS)
    (res1, res2), _ = _sweeps(_fallback, rule, u)
    assert res2[0] <= res1[0] < before
    assert np.all(u >= 0) and u[-1] == 0


def test_env_var_forces_fallback():
    env = dict(os.environ, CKN_FORCE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from cknlab import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
