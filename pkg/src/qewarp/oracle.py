"""Finite-difference curvature oracle.

A deliberately naive second route to the curvature: build the full metric
matrix of a (multiply) warped product from profile *values* only, then get
Christoffel symbols and Ricci by nested central differences. Nothing here
uses the closed forms or the profile derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import curvature
from .geometry import Direction, Profile, Signature, WarpedSpec

FD_STEP = 1e-4
ORACLE_TOL = 1e-5


@dataclass(frozen=True)
class FiberMetric:
    """A fiber metric on R^dim in explicit coordinates."""

    dim: int
    matrix: Callable[[np.ndarray], np.ndarray]
    ricci_constant: float

    @classmethod
    def space_form(cls, dim: int, ricci_constant: float = 0.0, signs: Sequence[int] | None = None):
        """Flat pseudo-Euclidean fiber, or a Riemannian space form with Ric = ricci_constant * g.

        Curved fibers use conformally flat coordinates, 4/(1 + K|y|^2)^2 delta, with
        sectional curvature K = ricci_constant / (dim - 1).
        """
        if ricci_constant == 0.0:
            s = np.ones(dim) if signs is None else np.asarray(signs, dtype=float)
            if s.shape != (dim,) or not np.all(np.abs(s) == 1.0):
                raise ValueError(f"fiber signs must be {dim} entries of +-1")
            return cls(dim, lambda y: np.diag(s), 0.0)
        if dim < 2:
            raise ValueError("a one-dimensional fiber is Ricci-flat")
        K = ricci_constant / (dim - 1)
        return cls(dim, lambda y: np.eye(dim) * 4.0 / (1.0 + K * float(np.dot(y, y))) ** 2, ricci_constant)


def warped_metric(
    signature: Signature, direction: Direction, phi: Profile,
    fibers: Sequence[tuple[Profile, FiberMetric]],
) -> Callable[[np.ndarray], np.ndarray]:
    """g/phi^2 + sum_a w_a^2 g_{F_a}, as a function of the stacked coordinates."""
    n = signature.n
    eps = signature.as_array()
    alpha = direction.as_array()
    dims = [fm.dim for _, fm in fibers]
    N = n + sum(dims)

    def metric(p: np.ndarray) -> np.ndarray:
        xi = float(np.dot(alpha, p[:n]))
        g = np.zeros((N, N))
        g[:n, :n] = np.diag(eps) / float(phi.value(np.float64(xi))) ** 2
        start = n
        for (w, fm), d in zip(fibers, dims):
            g[start:start + d, start:start + d] = float(w.value(np.float64(xi))) ** 2 * fm.matrix(p[start:start + d])
            start += d
        return g

    return metric


def christoffel_fd(metric, p: np.ndarray, s: float = FD_STEP) -> np.ndarray:
    """gamma[i, j, k] = Gamma_ij^k from central differences of the metric."""
    N = len(p)
    dg = np.empty((N, N, N))
    for l in range(N):
        e = np.zeros(N)
        e[l] = s
        dg[l] = (metric(p + e) - metric(p - e)) / (2 * s)
    ginv = np.linalg.inv(metric(p))
    # lowered[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    lowered = dg + np.transpose(dg, (1, 0, 2)) - np.transpose(dg, (1, 2, 0))
    return 0.5 * np.einsum("kl,ijl->ijk", ginv, lowered)


def ricci_fd(metric, p: np.ndarray, s: float = FD_STEP) -> np.ndarray:
    N = len(p)
    gam = christoffel_fd(metric, p, s)
    dgam = np.empty((N, N, N, N))
    for a in range(N):
        e = np.zeros(N)
        e[a] = s
        dgam[a] = (christoffel_fd(metric, p + e, s) - christoffel_fd(metric, p - e, s)) / (2 * s)
    t1 = np.einsum("kijk->ij", dgam)
    t2 = np.einsum("jikk->ij", dgam)
    t3 = np.einsum("klk,ijl->ij", gam, gam)
    t4 = np.einsum("jlk,ikl->ij", gam, gam)
    return t1 - t2 + t3 - t4


def hessian_fd(metric, func: Callable[[np.ndarray], float], p: np.ndarray, s: float = FD_STEP) -> np.ndarray:
    N = len(p)
    grad = np.empty(N)
    second = np.empty((N, N))
    f0 = func(p)
    for i in range(N):
        ei = np.zeros(N)
        ei[i] = s
        grad[i] = (func(p + ei) - func(p - ei)) / (2 * s)
        second[i, i] = (func(p + ei) - 2 * f0 + func(p - ei)) / s**2
        for j in range(i + 1, N):
            ej = np.zeros(N)
            ej[j] = s
            second[i, j] = second[j, i] = (
                func(p + ei + ej) - func(p + ei - ej) - func(p - ei + ej) + func(p - ei - ej)
            ) / (4 * s * s)
    gam = christoffel_fd(metric, p, s)
    return second - np.einsum("ijk,k->ij", gam, grad)


# --- engine-vs-oracle comparison --------------------------------------------------


@dataclass(frozen=True)
class OracleCase:
    spec: WarpedSpec
    fiber: FiberMetric
    point: np.ndarray
    fiber_point: np.ndarray


def compare(case: OracleCase, s: float = FD_STEP) -> dict:
    """Max absolute deviation between engine and oracle, per curvature object."""
    spec, fm = case.spec, case.fiber
    n, m = spec.n, spec.m
    x, y = np.asarray(case.point, dtype=float), np.asarray(case.fiber_point, dtype=float)
    xi = float(np.dot(spec.alpha, x))

    base_metric = warped_metric(spec.signature, spec.direction, spec.phi, [])
    full_metric = warped_metric(spec.signature, spec.direction, spec.phi, [(spec.f, fm)])
    full_p = np.concatenate([x, y])

    def f_of(p):
        return float(spec.f.value(np.float64(np.dot(spec.alpha, p[:n]))))

    def h_of(p):
        return float(spec.h.value(np.float64(np.dot(spec.alpha, p[:n]))))

    dev = {}
    dev["christoffel"] = np.max(np.abs(christoffel_fd(base_metric, x, s) - curvature.christoffel_conformal(spec, x)))
    dev["hessian_f"] = np.max(np.abs(hessian_fd(base_metric, f_of, x, s) - curvature.hessian_conformal(spec, "f", x)))
    dev["hessian_h"] = np.max(np.abs(hessian_fd(base_metric, h_of, x, s) - curvature.hessian_conformal(spec, "h", x)))
    dev["ricci_conformal"] = np.max(np.abs(ricci_fd(base_metric, x, s) - curvature.ricci_conformal(spec, x)))

    block = curvature.warped_ricci(spec, x)
    ric = ricci_fd(full_metric, full_p, s)
    gF = fm.matrix(y)
    dev["warped_ricci_base"] = np.max(np.abs(ric[:n, :n] - block.base_ricci))
    dev["warped_ricci_fiber"] = np.max(np.abs(ric[n:, n:] - block.fiber_coeff * gF))
    dev["warped_ricci_mixed"] = np.max(np.abs(ric[:n, n:]))

    hess = hessian_fd(full_metric, h_of, full_p, s)
    dev["hess_h_base"] = np.max(np.abs(hess[:n, :n] - block.hess_h_base))
    dev["hess_h_fiber"] = np.max(np.abs(hess[n:, n:] - block.hess_h_fiber_coeff * gF))
    dev["hess_h_mixed"] = np.max(np.abs(hess[:n, n:]))

    hval = h_of(full_p)
    be = curvature.bakry_emery(spec, x)
    be_fd = ric - (spec.r / hval) * hess
    dev["bakry_emery_base"] = np.max(np.abs(be_fd[:n, :n] - be.base))
    dev["bakry_emery_fiber"] = np.max(np.abs(be_fd[n:, n:] - be.fiber_coeff * gF))
    out = {k: float(v) for k, v in dev.items()}
    out["xi"] = xi
    return out


# --- random smooth specs ----------------------------------------------------------


def _exp_sin(scale: float, rate: float, amp: float, freq: float, shift: float, name: str) -> Profile:
    """scale * exp(rate*xi + amp*sin(freq*xi + shift)), always positive."""

    def g(x):
        x = np.asarray(x, dtype=float)
        return scale * np.exp(rate * x + amp * np.sin(freq * x + shift))

    def u1(x):
        return rate + amp * freq * np.cos(freq * np.asarray(x, dtype=float) + shift)

    def u2(x):
        return -amp * freq**2 * np.sin(freq * np.asarray(x, dtype=float) + shift)

    return Profile(
        value=g,
        d1=lambda x: g(x) * u1(x),
        d2=lambda x: g(x) * (u1(x) ** 2 + u2(x)),
        name=name,
    )


def random_case(rng: np.random.Generator, flat_phi: bool = False) -> OracleCase:
    n = int(rng.integers(3, 5))
    m = int(rng.integers(1, 4))
    eps = tuple(int(v) for v in rng.choice([-1, 1], size=n))
    sig = Signature(eps)
    alpha = rng.normal(size=n)
    if -1 in eps and 1 in eps and rng.uniform() < 0.3:
        # a null direction along one timelike and one spacelike axis
        alpha = np.zeros(n)
        alpha[eps.index(-1)] = alpha[eps.index(1)] = rng.uniform(0.5, 1.5)
    direction = Direction.from_alpha(sig, alpha)
    f = _exp_sin(rng.uniform(0.5, 2.0), rng.uniform(-0.6, 0.6), rng.uniform(0, 0.4),
                 rng.uniform(0.5, 2.0), rng.uniform(0, math.pi), "rand.f")
    phi = Profile.constant(1.0, "rand.phi") if flat_phi else _exp_sin(
        rng.uniform(0.5, 2.0), rng.uniform(-0.6, 0.6), rng.uniform(0, 0.4),
        rng.uniform(0.5, 2.0), rng.uniform(0, math.pi), "rand.phi")
    h = _exp_sin(rng.uniform(0.5, 2.0), rng.uniform(-0.6, 0.6), rng.uniform(0, 0.4),
                 rng.uniform(0.5, 2.0), rng.uniform(0, math.pi), "rand.h")
    r = float(rng.choice([1.0, 2.0, 3.0, rng.uniform(0.5, 4.0)]))
    if m == 1:
        lam = 0.0
        fiber = FiberMetric.space_form(1, 0.0, signs=[int(rng.choice([-1, 1]))])
    elif rng.uniform() < 0.5:
        lam = 0.0
        fiber = FiberMetric.space_form(m, 0.0, signs=rng.choice([-1, 1], size=m))
    else:
        lam = float(rng.uniform(-2.0, 2.0))
        fiber = FiberMetric.space_form(m, lam)
    rho = 0.0 if direction.causal_class == 0 else float(rng.uniform(-1.0, 1.0))
    if direction.causal_class == 0:
        lam = 0.0
        fiber = FiberMetric.space_form(m, 0.0)
    spec = WarpedSpec(n, m, r, rho, lam, sig, direction, f, phi, h)
    point = rng.uniform(-0.5, 0.5, size=n)
    fiber_point = rng.uniform(-0.3, 0.3, size=m)
    return OracleCase(spec, fiber, point, fiber_point)


def run_oracle(seed: int, count: int = 20, flat_phi: bool = False) -> dict:
    """Seeded engine-vs-oracle comparison; deterministic for a given (seed, count)."""
    rng = np.random.default_rng(seed)
    cases = []
    worst = 0.0
    for idx in range(count):
        case = random_case(rng, flat_phi=flat_phi)
        dev = compare(case)
        case_max = max(v for k, v in dev.items() if k != "xi")
        worst = max(worst, case_max)
        cases.append({
            "index": idx,
            "n": case.spec.n,
            "m": case.spec.m,
            "r": case.spec.r,
            "eps": list(case.spec.signature.eps),
            "causal_class": case.spec.causal_class,
            "lambda_F": case.spec.lambda_F,
            "max_deviation": case_max,
            "deviations": dev,
        })
    return {
        "seed": seed,
        "count": count,
        "flat_phi": flat_phi,
        "step": FD_STEP,
        "tolerance": ORACLE_TOL,
        "max_deviation": worst,
        "verdict": "pass" if worst <= ORACLE_TOL else "fail",
        "cases": cases,
    }
