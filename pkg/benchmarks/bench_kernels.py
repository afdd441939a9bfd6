"""Time the compiled coordinate-descent kernels against the numpy fallback.

Both backends run the same sweeps from the same start on the same segment
rule; the script checks that they return identical objectives and profiles.

    python3 benchmarks/bench_kernels.py --grid-size 256 --sweeps 3 --repeat 5
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from cknlab.kernels import _fallback
from cknlab.params import RawParams, derive
from cknlab.radial import RadialMeasure
from cknlab.segments import build_segment_rule, log_knots

try:
    from cknlab.kernels import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def _setup(grid_size: int, radius: float, seed: int):
    params = derive(RawParams.from_mapping({"n": 4, "p": "2", "q": "2.5", "mu": "1"}))
    model = RadialMeasure.euclidean(params.n)
    knots = log_knots(radius, grid_size)
    rule = build_segment_rule(model, params, knots)
    u0 = np.random.default_rng(seed).uniform(size=grid_size)
    u0[-1] = 0.0
    r, q, p, a = (float(x) for x in (params.r, params.q, params.p, params.a))
    weights = (1 / r, (1 - a) / q, a / p)
    return rule, u0, (r, q, p), weights


def _run(mod, rule, u0, exps, weights, sweeps):
    u = u0.copy()
    K = u.size
    levels = np.arange(max(int(np.log2(K - 1)) - 1, 0), -1, -1)
    steps = np.full((levels.size, K), 1e-3 * u.max())
    obj = None
    t0 = time.perf_counter()
    for _ in range(sweeps):
        obj, _ = mod.cd_sweep(u, rule.frac, rule.weight, rule.gcoef, *exps, *weights,
                              steps, levels, 1e-14)
    return time.perf_counter() - t0, obj, u


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid-size", type=int, default=256)
    ap.add_argument("--support-radius", type=float, default=50.0)
    ap.add_argument("--sweeps", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rule, u0, exps, weights = _setup(args.grid_size, args.support_radius, args.seed)
    backends = [("python", _fallback)]
    if _compiled is not None:
        backends.append(("compiled", _compiled))
    else:
        print("compiled extension not available; timing the fallback only")
    results = {}
    for name, mod in backends:
        times = []
        for _ in range(args.repeat):
            dt, obj, u = _run(mod, rule, u0, exps, weights, args.sweeps)
            times.append(dt)
        results[name] = (statistics.median(times), obj, u)
        print(f"{name:9s} median {results[name][0]:.4f} s over {args.repeat} runs "
              f"(K={args.grid_size}, {args.sweeps} sweeps), objective {obj:.16e}")
    if len(results) == 2:
        (tp, op, up), (tc, oc, uc) = results["python"], results["compiled"]
        same = op == oc and np.array_equal(up, uc)
        print(f"speedup   {tp / tc:.1f}x; outputs identical: {same}")
        return 0 if same else 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
