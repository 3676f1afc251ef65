"""Closed-form quasi-Einstein solution families as (f, phi, h) profile triples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Optional

import numpy as np

from .errors import (
    ComplexExponentError,
    DegenerateExponentError,
    DomainError,
    InadmissibleParametersError,
    NoRealBranchError,
)
from .geometry import Profile

ROOT_TOL = 1e-12

# Default sampling window of a power-law family, in u = (a - rN) xi + c.
POWER_LAW_U_WINDOW = (0.0, 4.0)


def ab_constants(n: int, m: int, k: float) -> tuple[float, float]:
    a = (n - 2) * k - m
    b = m * (2 * k + 1) - (n - 2) * k**2
    return a, b


def root_quadratic(n: int, m: int, r: float, k: float, z: float) -> float:
    """r(r-1) z^2 - 2r(k+a) z + (a^2 - b); its roots are the constant-z solutions."""
    a, b = ab_constants(n, m, k)
    return r * (r - 1) * z**2 - 2 * r * (k + a) * z + (a * a - b)


def _root_residual(n, m, r, k, N) -> float:
    a, b = ab_constants(n, m, k)
    terms = (r * (r - 1) * N**2, 2 * r * (k + a) * N, a * a - b)
    scale = max(1.0, *(abs(t) for t in terms))
    return abs(terms[0] - terms[1] + terms[2]) / scale


@dataclass(frozen=True)
class FamilyParams:
    k: float
    c: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    branch: Literal["plus", "minus"] = "plus"

    def __post_init__(self):
        if not self.k > 0:
            raise InadmissibleParametersError(f"k must be positive, got {self.k}")
        if not (self.c1 > 0 and self.c2 > 0 and self.c3 > 0):
            raise InadmissibleParametersError("c1, c2, c3 must be positive")
        if self.branch not in ("plus", "minus"):
            raise InadmissibleParametersError(f"branch must be 'plus' or 'minus', got {self.branch!r}")


@dataclass(frozen=True)
class Family:
    """A constructed triple plus the constants that determined it."""

    f: Profile
    phi: Profile
    h: Profile
    domain: tuple[float, float]
    constants: dict
    window: Optional[tuple[float, float]] = None


def theorem4_roots(n: int, m: int, r: float, k: float) -> tuple[float, float]:
    """(N_plus, N_minus) for r != 1."""
    if r == 1:
        raise InadmissibleParametersError("r = 1 is handled by theorem5_family")
    if not r > 0:
        raise InadmissibleParametersError(f"r must be positive, got {r}")
    a, b = ab_constants(n, m, k)
    disc = r**2 * (k + a) ** 2 - r * (r - 1) * (a * a - b)
    if r * (k + a) ** 2 < (r - 1) * (a * a - b):
        raise NoRealBranchError(
            f"r(k+a)^2 = {r * (k + a) ** 2!r} < (r-1)(a^2-b) = {(r - 1) * (a * a - b)!r}"
        )
    sq = math.sqrt(max(disc, 0.0))
    denom = r * (r - 1)
    return (r * (k + a) + sq) / denom, (r * (k + a) - sq) / denom


def _power_law(n, m, r, k, N, params: FamilyParams, tag: str) -> Family:
    a, b = ab_constants(n, m, k)
    D = a - r * N
    if D == 0.0 or abs(D) <= 1e-12 * max(1.0, abs(a), abs(r * N)):
        raise DegenerateExponentError(f"a - rN = {D!r}: power-law exponents are undefined")
    c = params.c
    bound = -c / D
    domain = (bound, math.inf) if D > 0 else (-math.inf, bound)
    u_lo, u_hi = POWER_LAW_U_WINDOW
    w = sorted(((u_lo - c) / D, (u_hi - c) / D))
    window = (w[0], w[1])

    def power(coef, expo, name):
        def u(x):
            return D * x + c

        return Profile(
            value=lambda x: coef * u(x) ** expo,
            d1=lambda x: coef * expo * D * u(x) ** (expo - 1),
            d2=lambda x: coef * expo * (expo - 1) * D**2 * u(x) ** (expo - 2),
            domain=domain,
            name=name,
            window=window,
        )

    f = power(params.c1, -1.0 / D, f"{tag}.f")
    h = power(params.c2, -N / D, f"{tag}.h")
    phi = power(params.c3, -k / D, f"{tag}.phi")
    constants = {
        "a": a,
        "b": b,
        "N": N,
        "a_minus_rN": D,
        "root_residual": _root_residual(n, m, r, k, N),
        "domain_bound": bound,
        "domain_side": "above" if D > 0 else "below",
    }
    return Family(f, phi, h, domain, constants, window)


def theorem4_family(n: int, m: int, r: float, params: FamilyParams) -> Family:
    N_plus, N_minus = theorem4_roots(n, m, r, params.k)
    N = N_plus if params.branch == "plus" else N_minus
    fam = _power_law(n, m, r, params.k, N, params, "theorem4")
    if fam.constants["root_residual"] > ROOT_TOL:
        raise InadmissibleParametersError(
            f"N={N!r} fails its quadratic to {fam.constants['root_residual']:.2e}"
        )
    fam.constants.update({"N_plus": N_plus, "N_minus": N_minus, "branch": params.branch})
    return fam


def theorem5_N(n: int, m: int, k: float) -> float:
    a, b = ab_constants(n, m, k)
    # k + a written without cancellation, and zero up to roundoff counts as zero
    s = (n - 1) * k - m
    if abs(s) <= ROOT_TOL * max(1.0, abs(m), abs((n - 1) * k)):
        raise InadmissibleParametersError("k + a = 0: no constant-z solution at r = 1")
    return (a * a - b) / (2 * s)


def theorem5_family(n: int, m: int, params: FamilyParams) -> Family:
    k = params.k
    N = theorem5_N(n, m, k)
    fam = _power_law(n, m, 1.0, k, N, params, "theorem5")
    a, b = fam.constants["a"], fam.constants["b"]
    lin = abs(2 * (k + a) * N - (a * a - b)) / max(1.0, abs(a * a - b))
    if lin > ROOT_TOL:
        raise InadmissibleParametersError(f"N={N!r} fails 2(k+a)N = a^2-b to {lin:.2e}")
    # the half-space bound written with the r = 1 root substituted in
    alt_bound = -2 * params.c * (k + a) / (a * a + b + 2 * k * a)
    if abs(alt_bound - fam.constants["domain_bound"]) > 1e-12 * max(1.0, abs(alt_bound)):
        raise InadmissibleParametersError("inconsistent half-space bound")
    fam.constants["root_residual"] = lin
    return fam


@dataclass(frozen=True)
class ExpNullParams:
    k1: float = 1.0
    k2: float = 1.0
    A: float = 0.0
    B: float = 0.0
    c1_h: float = 1.0
    c2_h: float = 0.0

    def __post_init__(self):
        if not (self.k1 > 0 and self.k2 > 0):
            raise InadmissibleParametersError("k1 and k2 must be positive")
        if self.c1_h == 0 and self.c2_h == 0:
            raise InadmissibleParametersError("h must not vanish identically")


def exp_null_bracket(n: int, m: int, A: float, B: float) -> float:
    return (n - 2) * B**2 - m * A**2 - 2 * m * A * B


def exp_null_C(n: int, m: int, r: float, A: float, B: float) -> float:
    return r**2 * B**2 + r * exp_null_bracket(n, m, A, B)


def _exp_profile(coef, rate, name, window) -> Profile:
    return Profile(
        value=lambda x: coef * np.exp(rate * x),
        d1=lambda x: coef * rate * np.exp(rate * x),
        d2=lambda x: coef * rate**2 * np.exp(rate * x),
        name=name,
        window=window,
    )


def two_exponential(c1: float, s1: float, c2: float, s2: float, name: str, window=None) -> Profile:
    return Profile(
        value=lambda x: c1 * np.exp(s1 * x) + c2 * np.exp(s2 * x),
        d1=lambda x: c1 * s1 * np.exp(s1 * x) + c2 * s2 * np.exp(s2 * x),
        d2=lambda x: c1 * s1**2 * np.exp(s1 * x) + c2 * s2**2 * np.exp(s2 * x),
        name=name,
        window=window,
    )


EXP_NULL_WINDOW = (-1.0, 1.0)


def exp_null_family(
    n: int, m: int, r: float, params: ExpNullParams, C: Optional[float] = None
) -> Family:
    """f = k1 e^{A xi}, phi = k2 e^{B xi}, h the two-exponential solution.

    ``C`` overrides the exponent constant; used only to test alternative claimed values.
    """
    p = params
    C_formula = exp_null_C(n, m, r, p.A, p.B)
    C_used = C_formula if C is None else float(C)
    if C_used < 0:
        raise ComplexExponentError(f"C = {C_used!r} < 0 gives complex exponents")
    sq = math.sqrt(C_used)
    s_plus = (-r * p.B + sq) / r
    s_minus = (-r * p.B - sq) / r
    w = EXP_NULL_WINDOW
    f = _exp_profile(p.k1, p.A, "exp_null.f", w)
    phi = _exp_profile(p.k2, p.B, "exp_null.phi", w)
    h = two_exponential(p.c1_h, s_plus, p.c2_h, s_minus, "exp_null.h", w)
    constants = {
        "C": C_used,
        "C_formula": C_formula,
        "bracket": exp_null_bracket(n, m, p.A, p.B),
        "exponent_plus": s_plus,
        "exponent_minus": s_minus,
    }
    return Family(f, phi, h, f.domain, constants, w)


@dataclass(frozen=True)
class CauchyEulerParams:
    c1_h: float = 1.0
    c2_h: float = 0.0
    half_line: int = 1

    def __post_init__(self):
        if self.half_line not in (1, -1):
            raise InadmissibleParametersError("half_line must be +1 or -1")
        if self.c1_h == 0 and self.c2_h == 0:
            raise InadmissibleParametersError("h must not vanish identically")


def cauchy_euler_regime(n: int, m: int, r: float) -> tuple[str, float]:
    """Regime name and lambda, comparing 9 with (40m - 8(n-2))/r exactly."""
    rq = Fraction(r)
    rhs = Fraction(40 * m - 8 * (n - 2)) / rq
    if Fraction(9) > rhs:
        regime = "two-real-roots"
    elif Fraction(9) == rhs:
        regime = "double-root"
    else:
        regime = "complex-roots"
    lam = 0.5 * math.sqrt(abs(9 - float(rhs)))
    return regime, lam


def cauchy_euler_coefficient(n: int, m: int, r: float) -> float:
    """q in xi^2 h'' + 4 xi h' + q h = 0."""
    return (10 * m - 2 * (n - 2)) / r


CAUCHY_EULER_WINDOW = (0.1, 10.0)


def cauchy_euler_family(n: int, m: int, r: float, params: CauchyEulerParams) -> Family:
    regime, lam = cauchy_euler_regime(n, m, r)
    s = params.half_line
    c1, c2 = params.c1_h, params.c2_h
    domain = (0.0, math.inf) if s > 0 else (-math.inf, 0.0)
    window = CAUCHY_EULER_WINDOW if s > 0 else (-CAUCHY_EULER_WINDOW[1], -CAUCHY_EULER_WINDOW[0])

    # h as a function of t = |xi| = s*xi; d/dxi = s d/dt, d2/dxi2 = d2/dt2.
    if regime == "two-real-roots":
        p1, p2 = -1.5 + lam, -1.5 - lam

        def ht(t):
            return c1 * t**p1 + c2 * t**p2

        def dht(t):
            return c1 * p1 * t ** (p1 - 1) + c2 * p2 * t ** (p2 - 1)

        def ddht(t):
            return c1 * p1 * (p1 - 1) * t ** (p1 - 2) + c2 * p2 * (p2 - 1) * t ** (p2 - 2)

    elif regime == "double-root":

        def ht(t):
            return t**-1.5 * (c1 + c2 * np.log(t))

        def dht(t):
            return t**-2.5 * (-1.5 * (c1 + c2 * np.log(t)) + c2)

        def ddht(t):
            return t**-3.5 * (3.75 * (c1 + c2 * np.log(t)) - 4.0 * c2)

    else:

        def ht(t):
            L = lam * np.log(t)
            return t**-1.5 * (c1 * np.sin(L) + c2 * np.cos(L))

        def dht(t):
            L = lam * np.log(t)
            S, Cc = c1 * np.sin(L) + c2 * np.cos(L), c1 * np.cos(L) - c2 * np.sin(L)
            return t**-2.5 * (-1.5 * S + lam * Cc)

        def ddht(t):
            L = lam * np.log(t)
            S, Cc = c1 * np.sin(L) + c2 * np.cos(L), c1 * np.cos(L) - c2 * np.sin(L)
            # d/dt [t^-2.5 (-1.5 S + lam Cc)], with S' = lam Cc / t, Cc' = -lam S / t
            return t**-3.5 * ((3.75 - lam**2) * S - 4.0 * lam * Cc)

    def sq(x):
        return np.asarray(x, dtype=float) ** 2

    f = Profile(sq, lambda x: 2.0 * np.asarray(x, dtype=float), lambda x: np.full(np.shape(x), 2.0),
                domain=domain, name="cauchy_euler.f", window=window)
    phi = Profile(sq, lambda x: 2.0 * np.asarray(x, dtype=float), lambda x: np.full(np.shape(x), 2.0),
                  domain=domain, name="cauchy_euler.phi", window=window)
    h = Profile(
        value=lambda x: ht(s * np.asarray(x, dtype=float)),
        d1=lambda x: s * dht(s * np.asarray(x, dtype=float)),
        d2=lambda x: ddht(s * np.asarray(x, dtype=float)),
        domain=domain,
        name="cauchy_euler.h",
        window=window,
    )
    constants = {
        "regime": regime,
        "lambda": lam,
        "q": cauchy_euler_coefficient(n, m, r),
        "discriminant": 9 - (40 * m - 8 * (n - 2)) / r,
    }
    return Family(f, phi, h, domain, constants, window)


def cauchy_euler_residual(n: int, m: int, r: float, h: Profile, xi) -> np.ndarray:
    """xi^2 h'' + 4 xi h' + q h."""
    x = np.asarray(xi, dtype=float)
    if np.any(x == 0):
        raise DomainError("the Cauchy-Euler equation is singular at xi = 0")
    v, d1, d2 = h.eval(x)
    return x**2 * d2 + 4 * x * d1 + cauchy_euler_coefficient(n, m, r) * v
