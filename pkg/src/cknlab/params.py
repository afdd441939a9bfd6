"""Admissible CKN parameter sets, derived exponents and a few special functions.

Derivation runs in exact rational arithmetic (:class:`fractions.Fraction`); floats
only appear where the numbers meet quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from decimal import Decimal
from fractions import Fraction
from typing import Any, Mapping

from .errors import DomainError, InvalidParams

__all__ = [
    "RawParams",
    "CknParams",
    "ValidationReport",
    "validate",
    "derive",
    "dilation_exponent",
    "dilation_residual",
    "gamma_fn",
    "unit_ball_volume",
    "format_exact",
    "to_fraction",
]


def to_fraction(value: Any) -> Fraction:
    """Coerce ints, strings, Decimals and finite floats to an exact Fraction.

    Floats go through their shortest repr, so ``2.5`` and ``0.1`` become the
    decimals the caller typed rather than the binary expansion.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not parameters")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite parameter {value!r}")
        return Fraction(repr(value))
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise ValueError(f"non-finite parameter {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if text.lower() in {"nan", "inf", "+inf", "-inf", "infinity", "-infinity"}:
            raise ValueError(f"non-finite parameter {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def format_exact(value: Fraction | int) -> str:
    """Exact text form: a terminating decimal when one exists, else ``num/den``."""
    value = Fraction(value)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    if value.denominator == 1:
        return str(value.numerator)
    places = max(twos, fives)
    scaled = value * 10**places
    text = format(Decimal(scaled.numerator).scaleb(-places), "f")
    return text


@dataclass(frozen=True)
class RawParams:
    n: int
    p: Fraction
    q: Fraction
    mu: Fraction

    def __post_init__(self):
        n = self.n
        if isinstance(n, (Fraction, float, str, Decimal)):
            n_frac = to_fraction(n)
            if n_frac.denominator != 1:
                raise ValueError(f"dimension must be an integer, got {n!r}")
            n = int(n_frac)
        if not isinstance(n, int) or isinstance(n, bool):
            raise TypeError(f"dimension must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", n)
        for name in ("p", "q", "mu"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RawParams":
        mu = data["mu"] if "mu" in data else data["μ"]
        return cls(n=data["n"], p=data["p"], q=data["q"], mu=mu)

    def to_dict(self) -> dict[str, str | int]:
        return {"n": self.n, "p": format_exact(self.p), "q": format_exact(self.q),
                "mu": format_exact(self.mu)}


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(raw: RawParams, *, allow_endpoint: bool = False) -> ValidationReport:
    """Check the chained inequalities ``1<p<p+mu<n`` and ``1<=q<r<np/(n-p)``.

    ``allow_endpoint`` relaxes only the last link to ``r <= np/(n-p)``; equality
    there is exactly the ``a = 1`` case.
    """
    n, p, q, mu = raw.n, raw.p, raw.q, raw.mu
    bad = []
    if n < 2:
        bad.append("n >= 2")
    if not 1 < p:
        bad.append("1 < p")
    if not p < p + mu:
        bad.append("p < p+mu")
    if not p + mu < n:
        bad.append("p+mu < n")
    if not 1 <= q:
        bad.append("1 <= q")
    if p == 1:
        bad.append("q < p(q-1)/(p-1)")
        bad.append("p(q-1)/(p-1) < np/(n-p)")
        return ValidationReport(tuple(bad))
    r = p * (q - 1) / (p - 1)
    if not q < r:
        bad.append("q < p(q-1)/(p-1)")
    if n != p:
        sobolev = n * p / (n - p)
        holds = r <= sobolev if allow_endpoint else r < sobolev
        if not holds:
            bad.append("p(q-1)/(p-1) <= np/(n-p)" if allow_endpoint
                       else "p(q-1)/(p-1) < np/(n-p)")
    return ValidationReport(tuple(bad))


@dataclass(frozen=True)
class CknParams:
    """Validated parameters with every derived exponent, all exact rationals."""

    n: int
    p: Fraction
    q: Fraction
    mu: Fraction
    r: Fraction
    theta: Fraction
    s: Fraction
    a: Fraction
    nu: Fraction
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    sigma: Fraction
    kappa: Fraction
    g_exp: Fraction

    @property
    def raw(self) -> RawParams:
        return RawParams(self.n, self.p, self.q, self.mu)

    @property
    def decay(self) -> Fraction:
        """Exponent m in ``u = (lam + t**kappa)**(-m)``."""
        return (self.p - 1) / (self.q - self.p)

    @property
    def c1(self) -> Fraction:
        """``(r(p-1) - (q-p)) / (q-p)``, which simplifies to ``q(p-1)/(q-p)``."""
        return (self.r * (self.p - 1) - (self.q - self.p)) / (self.q - self.p)

    @property
    def grad_factor(self) -> Fraction:
        """``p(n-p-mu) / ((n-p)(q-p))``: the constant in ``|u'|`` of the extremal."""
        return self.p * (self.n - self.p - self.mu) / ((self.n - self.p) * (self.q - self.p))

    @property
    def weight_r(self) -> Fraction:
        """Power of ``d`` in the r-term (``gamma*r = -s``); equal to ``beta*q``."""
        return self.gamma * self.r

    @property
    def eta(self) -> Fraction:
        return -self.q * (self.p - 1) / (self.q - self.p) - 1 - self.g_exp

    def exponent_identity(self) -> Fraction:
        """``a/p + (1-a)/q - 1/r - a/n``; zero on the admissible set."""
        return self.a / self.p + (1 - self.a) / self.q - 1 / self.r - self.a / self.n

    def general_conditions(self) -> dict[str, bool]:
        """The conditions of the general CKN family, evaluated at these exponents.

        Recorded for inspection; ``sigma`` enters only through these checks.
        """
        n, p, q, r, a = self.n, self.p, self.q, self.r, self.a
        al, be, ga, si = self.alpha, self.beta, self.gamma, self.sigma
        balance_lhs = 1 / r + ga / n
        grad_side = 1 / p + (al - 1) / n
        return {
            "p,q >= 1": p >= 1 and q >= 1,
            "r > 0": r > 0,
            "0 <= a <= 1": 0 <= a <= 1,
            "1/p + alpha/n > 0": 1 / p + al / n > 0,
            "1/q + beta/n > 0": 1 / q + be / n > 0,
            "1/r + gamma/n > 0": balance_lhs > 0,
            "gamma = a*sigma + (1-a)*beta": ga == a * si + (1 - a) * be,
            "dimension balance": balance_lhs == a * grad_side + (1 - a) * (1 / q + be / n),
            "0 <= alpha - sigma (a > 0)": a == 0 or 0 <= al - si,
            "alpha - sigma <= 1 (a > 0, balanced)": not (a > 0 and grad_side == balance_lhs)
            or al - si <= 1,
        }

    def to_dict(self) -> dict[str, str | int]:
        out: dict[str, str | int] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = value if f.name == "n" else format_exact(value)
        return out

    def float_dict(self) -> dict[str, float]:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}


def derive(raw: RawParams, *, allow_endpoint: bool = False) -> CknParams:
    report = validate(raw, allow_endpoint=allow_endpoint)
    if not report.ok:
        raise InvalidParams(report.violations)
    n, p, q, mu = raw.n, raw.p, raw.q, raw.mu
    r = p * (q - 1) / (p - 1)
    theta = s = n * mu / (n - p)
    nu = n * p - q * (n - p)
    a = n * (q - p) / ((q - 1) * nu)
    alpha = -mu / p
    beta = -theta / q
    gamma = -s / r
    sigma = (gamma - (1 - a) * beta) / a
    kappa = (n - p - mu) / (n - p) * p / (p - 1)
    g_exp = ((q - p) * (p - 1) * n - p * q * (p - 1)) / (p * (q - p))
    params = CknParams(n, p, q, mu, r, theta, s, a, nu, alpha, beta, gamma, sigma,
                       kappa, g_exp)

    broken = []
    if not 0 < a <= 1:
        broken.append("0 < a <= 1")
    if params.exponent_identity() != 0:
        broken.append("a/p + (1-a)/q - 1/r = a/n")
    if dilation_residual(params) != 0:
        broken.append("dilation exponent = 0")
    if not n + gamma * r - 1 > -1:
        broken.append("n + gamma*r - 1 > -1")
    if not n + gamma * r - 1 - kappa * q * (p - 1) / (q - p) < -1:
        broken.append("n + gamma*r - 1 - kappa*q(p-1)/(q-p) < -1")
    if broken:
        raise InvalidParams(broken)
    return params


def dilation_exponent(n, p, q, r, a, alpha, beta, gamma):
    """Power of the dilation factor left over after rescaling ``u(x) -> u(lam x)``.

    Works for any exponents of the general family; zero means the inequality is
    dilation invariant.
    """
    return (-alpha * a - n * a / p + a - n * (1 - a) / q - beta * (1 - a) + n / r + gamma)


def dilation_residual(params: CknParams):
    return dilation_exponent(params.n, params.p, params.q, params.r, params.a,
                             params.alpha, params.beta, params.gamma)


def gamma_fn(x: float) -> float:
    """Euler's Gamma on the positive axis; raises OverflowError past ~171.6."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"gamma_fn requires x > 0, got {x!r}")
    return math.gamma(x)


def unit_ball_volume(n: int | float) -> float:
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n!r}")
    return math.pi ** (n / 2) / gamma_fn(n / 2 + 1)
