"""Command-line front end.

Every command resolves its inputs into a run spec, computes, and writes its
files atomically under ``--out-dir``; each file carries the run spec and the
parameter set (a ``# `` comment block in CSV, ``run_spec``/``params`` keys in
JSON). Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .comparison import (
    G_of,
    comparison_curve,
    copt_from_G1,
    growth_sandwich,
)
from .constant import compare_closed_form, copt_quadrature
from .errors import CKNError, NumericalError
from .functionals import ckn_quotient, weighted_norms
from .io import csv_text, fmt_float, read_json, to_json, write_atomic
from .optimizer import MinimizeConfig, best_constant_report, minimize_family, minimize_grid
from .params import CknParams, RawParams, derive, dilation_residual, format_exact
from .profiles import ExtremalProfile, SumProfile, bump_profile
from .quadrature import QuadConfig
from .radial import RadialMeasure, doubling_constant, log_grid, origin_density, parse_model_spec

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
COMMANDS = ("params", "copt", "extremal-check", "curves", "volume-bound", "audit", "minimize")
DEFAULT_P, DEFAULT_Q, DEFAULT_MU, DEFAULT_N = "2", "2.5", "1", 4
EXTREMAL_LAMBDAS = (0.1, 1.0, 10.0)
PERTURBATIONS = 20
PERTURBATION_AMPLITUDE = 1e-2


@dataclass
class RunSpec:
    command: str
    raw: RawParams
    model_spec: str
    out_dir: Path
    quad: QuadConfig
    allow_endpoint: bool = False
    options: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "params": self.raw.to_dict(),
            "allow_endpoint": self.allow_endpoint,
            "model": self.model_spec,
            "out_dir": str(self.out_dir),
            "quad": {"rel_tol": self.quad.rel_tol, "max_level": self.quad.max_level,
                     "split_point": self.quad.split_point},
            "options": self.options,
            "version": __version__,
        }


def params_record(params: CknParams) -> dict[str, Any]:
    """Flat record: exact text for every field plus a ``*_float`` companion."""
    out: dict[str, Any] = {}
    for key, value in params.to_dict().items():
        out[key] = value
        if key != "n":
            out[f"{key}_float"] = float(params.float_dict()[key])
    return out


def _header(spec: RunSpec, params: CknParams) -> list[str]:
    return [
        "run_spec: " + json.dumps(_jsonable(spec.to_dict()), sort_keys=True),
        "params: " + json.dumps(params.to_dict(), sort_keys=True),
    ]


def _jsonable(obj):
    # float formatting inside comment lines follows the file-wide convention
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _json_doc(spec: RunSpec, params: CknParams, body: dict[str, Any]) -> str:
    doc = {"run_spec": spec.to_dict(), "params": params_record(params)}
    doc.update(body)
    return to_json(doc)


# ---------------------------------------------------------------- commands

def cmd_params(spec: RunSpec, params: CknParams) -> dict[str, str]:
    body = {
        "checks": {
            "exponent_identity": format_exact(params.exponent_identity()),
            "dilation_residual": format_exact(dilation_residual(params)),
            "eta": format_exact(params.eta),
            "eta_plus_one": format_exact(params.eta + 1),
        },
        "general_conditions": params.general_conditions(),
    }
    text = _json_doc(spec, params, body)
    return {"params.json": text}


def cmd_copt(spec: RunSpec, params: CknParams) -> dict[str, str]:
    delta_opt = spec.options["delta"]
    delta = float(params.nu) if delta_opt is None else float(delta_opt)
    cmp = compare_closed_form(params, delta, spec.quad)
    G1 = G_of(params, 1.0, spec.quad)
    body = {
        "copt_quadrature": cmp.quadrature,
        "copt_from_G1": copt_from_G1(params, G1),
        "G1": G1,
        "copt_closed_form": {
            "experimental": True,
            "delta": delta,
            "delta_source": "nu (default)" if delta_opt is None else "user",
            "value": cmp.closed_form,
            "ratio_to_quadrature": cmp.ratio,
        },
    }
    return {"copt.json": _json_doc(spec, params, body)}


def perturbation_table(model: RadialMeasure, params: CknParams, quad: QuadConfig,
                       count: int = PERTURBATIONS, amplitude: float = PERTURBATION_AMPLITUDE):
    """Quotients of the extremal plus fixed-seed sampled bumps; seed ``i`` is row ``i``."""
    base_profile = ExtremalProfile.from_params(params, 1.0)
    base = ckn_quotient(weighted_norms(model, params, base_profile, quad), params)
    rows = []
    for seed in range(count):
        rng = np.random.default_rng(seed)
        center = float(np.exp(rng.uniform(math.log(0.1), math.log(10.0))))
        width = float(rng.uniform(1.5, 4.0))
        bump = bump_profile(center, width, amplitude)
        value = ckn_quotient(weighted_norms(model, params, SumProfile((base_profile, bump)),
                                            quad), params)
        rows.append((seed, center, width, amplitude, value, value - base))
    return base, rows


def cmd_extremal_check(spec: RunSpec, params: CknParams) -> dict[str, str]:
    model = RadialMeasure.euclidean(params.n)
    copt = copt_quadrature(params, spec.quad)
    quotients = []
    for lam in EXTREMAL_LAMBDAS:
        prof = ExtremalProfile.from_params(params, lam)
        quotients.append(ckn_quotient(weighted_norms(model, params, prof, spec.quad), params))
    spread = (max(quotients) - min(quotients)) / min(quotients)
    base, rows = perturbation_table(model, params, spec.quad)
    worst = min(r[5] for r in rows)
    body = {
        "inverse_copt": 1.0 / copt,
        "extremal_quotients": [{"lambda": lam, "quotient": v}
                               for lam, v in zip(EXTREMAL_LAMBDAS, quotients)],
        "lambda_spread": spread,
        "max_relative_deviation_from_inverse_copt":
            max(abs(v * copt - 1.0) for v in quotients),
        "perturbations": len(rows),
        "min_perturbation_change": worst,
    }
    table = csv_text(["seed", "center", "width", "amplitude", "quotient", "change"], rows,
                     _header(spec, params))
    return {"extremal_check.json": _json_doc(spec, params, body),
            "perturbations.csv": table}


def cmd_curves(spec: RunSpec, params: CknParams, model: RadialMeasure) -> dict[str, str]:
    copt = copt_quadrature(params, spec.quad)
    C = spec.options["C_multiple"] * copt
    lam_grid = None
    if spec.options.get("lambdas"):
        lam_grid = np.array(spec.options["lambdas"], dtype=float)
    curve = comparison_curve(model, params, C, lam_grid, spec.quad, copt=copt)
    comments = _header(spec, params) + [
        "constants: " + json.dumps(_jsonable({
            "C": curve.C, "copt": curve.copt, "gamma_coeff": curve.gamma_coeff,
            "gamma_tilde_coeff": curve.gamma_tilde_coeff}), sort_keys=True)]
    return {"curves.csv": csv_text(list(curve.COLUMNS), curve.rows(), comments)}


def cmd_volume_bound(spec: RunSpec, params: CknParams, model: RadialMeasure) -> dict[str, str]:
    copt = copt_quadrature(params, spec.quad)
    C = spec.options["C_multiple"] * copt
    report = growth_sandwich(model, params, C, spec.options["C0"], spec.options["rho"],
                             spec.quad, copt=copt)
    rows = [(r.rho, r.lower, r.volume, r.upper, r.lower_slack, r.upper_slack, r.passed)
            for r in report.rows]
    comments = _header(spec, params) + [
        f"C: {fmt_float(C)}", f"copt: {fmt_float(copt)}",
        "verdict: " + ("PASS" if report.passed else "FAIL")]
    text = csv_text(["rho", "lower_bound", "volume", "upper_bound", "lower_slack",
                     "upper_slack", "verdict"], rows, comments)
    return {"volume_bound.csv": text}


def cmd_audit(spec: RunSpec, params: CknParams, model: RadialMeasure) -> dict[str, str]:
    grid = log_grid()
    body: dict[str, Any] = {
        "model": model.describe(),
        "doubling_constant": doubling_constant(model, grid),
        "doubling_grid": {"lo": float(grid[0]), "hi": float(grid[-1]), "points": int(grid.size)},
        "origin_density": origin_density(model),
        "flags": list(model.flags),
    }
    report = best_constant_report(model, params, MinimizeConfig(method="simplex"), spec.quad)
    body["best_constant"] = report.to_dict()
    return {"audit.json": _json_doc(spec, params, body)}


def cmd_minimize(spec: RunSpec, params: CknParams, model: RadialMeasure) -> dict[str, str]:
    o = spec.options
    cfg = MinimizeConfig(method=o["method"], max_iters=o["max_iters"], x_tol=o["x_tol"],
                         f_tol=o["f_tol"], grid_size=o["grid_size"],
                         support_radius=o["support_radius"], init=o["init"], seed=o["seed"])
    files = {}
    if cfg.method == "coordinate_descent":
        result = minimize_grid(model, params, cfg, spec.quad)
        files["best_profile.csv"] = csv_text(["t", "u"], result.best_profile.to_rows(),
                                             _header(spec, params))
    else:
        result = minimize_family(model, params, cfg, spec.quad)
    body = result.to_dict()
    body.pop("backend", None)  # keep files independent of the build
    if model.power_factor is not None:
        # the extremal value on a power-law model: c**(a/n) / C_opt
        factor = model.power_factor ** (float(params.a) / params.n)
        body["reference_quotient"] = factor / copt_quadrature(params, spec.quad)
    body["config"] = cfg.to_dict()
    files["minimize.json"] = _json_doc(spec, params, body)
    return files


# ---------------------------------------------------------------- parsing

def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("parameters")
    g.add_argument("--n", type=int, help="dimension (default: from --model, else 4)")
    g.add_argument("--p", help=f"gradient exponent (default {DEFAULT_P})")
    g.add_argument("--q", help=f"q exponent (default {DEFAULT_Q})")
    g.add_argument("--mu", help=f"weight exponent (default {DEFAULT_MU})")
    g.add_argument("--params-file", type=Path, help="JSON object with n, p, q, mu")
    g.add_argument("--allow-endpoint", action="store_true",
                   help="accept r = np/(n-p), the a = 1 endpoint")
    common.add_argument("--model", default=None,
                        help='model spec, e.g. "euclidean:n=4", "cone:n=4,c=0.5", '
                             '"envelope:n=4,b0=0.3", "table:path.csv,n=4"')
    common.add_argument("--out-dir", type=Path, default=Path("cknlab_out"),
                        help="directory for output files (default: cknlab_out)")
    common.add_argument("--rel-tol", type=float, default=1e-10, help="quadrature tolerance")
    common.add_argument("--max-level", type=int, default=12, help="quadrature refinement cap")

    parser = argparse.ArgumentParser(
        prog="cknlab",
        description="Sharp CKN constants, comparison functionals and volume-growth audits "
                    "on radial model spaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("params", parents=[common], help="derive and print the parameter record")
    p = sub.add_parser("copt", parents=[common], help="optimal constant (quadrature + closed form)")
    p.add_argument("--delta", type=float, default=None,
                   help="value for the undefined delta of the closed form (default: nu)")
    sub.add_parser("extremal-check", parents=[common],
                   help="quotient at extremals and under fixed-seed perturbations")
    for name, helptext in (("curves", "F, G, H0 comparison curve CSV"),
                           ("volume-bound", "volume growth sandwich report")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--C-multiple", dest="C_multiple", type=float, default=1.0,
                       help="assumed constant as a multiple of C_opt")
        if name == "curves":
            p.add_argument("--lambdas", type=_float_list, default=None)
        else:
            p.add_argument("--C0", type=float, default=1.0, help="doubling constant")
            p.add_argument("--rho", type=_float_list, default=[0.5, 1.0, 2.0, 10.0])
    sub.add_parser("audit", parents=[common],
                   help="doubling constant, origin density and implied best constant")
    p = sub.add_parser("minimize", parents=[common], help="minimize the CKN quotient")
    p.add_argument("--method", choices=("simplex", "golden_section", "coordinate_descent"),
                   default="simplex")
    p.add_argument("--grid-size", type=int, default=256)
    p.add_argument("--support-radius", type=float, default=50.0)
    p.add_argument("--init", choices=("random", "extremal"), default="random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--f-tol", type=float, default=1e-7)
    p.add_argument("--x-tol", type=float, default=1e-12)
    return parser


def _resolve_raw(args, model_n: int | None) -> RawParams:
    data: dict[str, Any] = {}
    if args.params_file is not None:
        loaded = read_json(args.params_file)
        if not isinstance(loaded, dict):
            raise ValueError(f"{args.params_file}: expected a JSON object")
        data.update(loaded)
    for key in ("n", "p", "q", "mu"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    data.setdefault("n", model_n if model_n is not None else DEFAULT_N)
    data.setdefault("p", DEFAULT_P)
    data.setdefault("q", DEFAULT_Q)
    if "mu" not in data and "μ" not in data:
        data["mu"] = DEFAULT_MU
    return RawParams.from_mapping(data)


_OPTION_KEYS = {
    "copt": ("delta",),
    "curves": ("C_multiple", "lambdas"),
    "volume-bound": ("C_multiple", "C0", "rho"),
    "minimize": ("method", "grid_size", "support_radius", "init", "seed", "max_iters",
                 "f_tol", "x_tol"),
}


def resolve(args) -> tuple[RunSpec, CknParams, RadialMeasure]:
    model = parse_model_spec(args.model) if args.model else None
    raw = _resolve_raw(args, model.n if model else None)
    if model is None:
        model = RadialMeasure.euclidean(raw.n)
    if model.n != raw.n:
        raise ValueError(f"model dimension {model.n} differs from n = {raw.n}")
    params = derive(raw, allow_endpoint=args.allow_endpoint)
    options = {k: getattr(args, k) for k in _OPTION_KEYS.get(args.command, ())}
    if "C_multiple" in options and not options["C_multiple"] > 0:
        raise ValueError(f"--C-multiple must be positive, got {options['C_multiple']!r}")
    quad = QuadConfig(rel_tol=args.rel_tol, max_level=args.max_level)
    spec = RunSpec(args.command, raw, args.model or model.describe(), args.out_dir, quad,
                   args.allow_endpoint, options)
    return spec, params, model


def run(spec: RunSpec, params: CknParams, model: RadialMeasure) -> dict[str, Path]:
    handlers: dict[str, Callable[..., dict[str, str]]] = {
        "params": lambda: cmd_params(spec, params),
        "copt": lambda: cmd_copt(spec, params),
        "extremal-check": lambda: cmd_extremal_check(spec, params),
        "curves": lambda: cmd_curves(spec, params, model),
        "volume-bound": lambda: cmd_volume_bound(spec, params, model),
        "audit": lambda: cmd_audit(spec, params, model),
        "minimize": lambda: cmd_minimize(spec, params, model),
    }
    files = handlers[spec.command]()
    return {name: write_atomic(spec.out_dir / name, text) for name, text in files.items()}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec, params, model = resolve(args)
        written = run(spec, params, model)
    except NumericalError as exc:
        print(f"cknlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (CKNError, ValueError, OSError, KeyError) as exc:
        what = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"cknlab: invalid input: {what}", file=sys.stderr)
        return EXIT_INVALID
    if spec.command == "params":
        sys.stdout.write(written["params.json"].read_text(encoding="utf-8"))
    for name, path in written.items():
        print(f"wrote {path}", file=sys.stderr if spec.command == "params" else sys.stdout)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
