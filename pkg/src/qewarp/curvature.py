"""Pointwise curvature of the warped product (R^n, g/phi^2) x_f F^m.

Every object is evaluated at a single base point. Partial derivatives of a
profile u(xi) are u_{,x_i} = alpha_i u' and u_{,x_i x_j} = alpha_i alpha_j u''.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import (
    InvalidPotentialError,
    InvalidWarpingError,
    SingularConformalFactorError,
)
from .geometry import Profile, WarpedSpec, xi_at


@dataclass(frozen=True)
class Jet:
    """Value, coordinate gradient and coordinate Hessian of a profile at a point."""

    value: float
    grad: np.ndarray
    hess: np.ndarray
    d1: float
    d2: float


def _jet(p: Profile, alpha: np.ndarray, xi: float) -> Jet:
    v, d1, d2 = (float(t) for t in p.eval(xi))
    return Jet(v, alpha * d1, np.outer(alpha, alpha) * d2, d1, d2)


def _phi_jet(spec: WarpedSpec, point) -> Jet:
    xi = xi_at(spec.direction, point)
    phi = _jet(spec.phi, spec.alpha, xi)
    if phi.value == 0.0:
        raise SingularConformalFactorError(f"phi vanishes at xi={xi!r}")
    return phi


def christoffel_conformal(spec: WarpedSpec, point) -> np.ndarray:
    """Christoffel symbols of g/phi^2, indexed ``gamma[i, j, k]`` = Gamma_ij^k."""
    phi = _phi_jet(spec, point)
    n, eps = spec.n, spec.eps
    ratio = phi.grad / phi.value
    gamma = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if i == j == k:
                    gamma[i, j, k] = -ratio[i]
                elif i == j:
                    gamma[i, j, k] = eps[i] * eps[k] * ratio[k]
                elif k == i:
                    gamma[i, j, k] = -ratio[j]
                elif k == j:
                    gamma[i, j, k] = -ratio[i]
    return gamma


def _conformal_hessian(u: Jet, phi: Jet, eps: np.ndarray) -> np.ndarray:
    ratio = phi.grad / phi.value
    hess = u.hess + np.outer(u.grad, ratio) + np.outer(ratio, u.grad)
    hess = hess - np.diag(eps * np.sum(eps * ratio * u.grad))
    return hess


def hessian_conformal(spec: WarpedSpec, which: Literal["f", "h", "phi"], point) -> np.ndarray:
    phi = _phi_jet(spec, point)
    xi = xi_at(spec.direction, point)
    u = _jet(getattr(spec, which), spec.alpha, xi)
    return _conformal_hessian(u, phi, spec.eps)


def ricci_conformal(spec: WarpedSpec, point) -> np.ndarray:
    phi = _phi_jet(spec, point)
    n, eps = spec.n, spec.eps
    lap = float(np.sum(eps * np.diag(phi.hess)))
    grad2 = float(np.sum(eps * phi.grad**2))
    ric = (n - 2) * phi.hess / phi.value
    ric = ric + np.diag(eps) * (lap / phi.value - (n - 1) * grad2 / phi.value**2)
    return ric


def _laplacian_conformal(u: Jet, phi: Jet, eps: np.ndarray, n: int) -> float:
    return float(
        phi.value**2 * np.sum(eps * np.diag(u.hess))
        - (n - 2) * phi.value * np.sum(eps * phi.grad * u.grad)
    )


@dataclass(frozen=True)
class CurvatureBlock:
    base_ricci: np.ndarray
    fiber_coeff: float
    mixed_is_zero: bool
    hess_h_base: np.ndarray
    hess_h_fiber_coeff: float


def warped_ricci(spec: WarpedSpec, point) -> CurvatureBlock:
    """Ricci tensor of g/phi^2 + f^2 g_F and the Hessian of h, split into blocks.

    The fiber blocks are returned as coefficients of g_F.
    """
    phi = _phi_jet(spec, point)
    xi = xi_at(spec.direction, point)
    f = _jet(spec.f, spec.alpha, xi)
    if f.value <= 0.0:
        raise InvalidWarpingError(f"warping function f={f.value!r} is not positive at xi={xi!r}")
    h = _jet(spec.h, spec.alpha, xi)
    n, m, eps = spec.n, spec.m, spec.eps

    base = ricci_conformal(spec, point) - (m / f.value) * _conformal_hessian(f, phi, eps)
    lap_f = _laplacian_conformal(f, phi, eps, n)
    if m == 1:
        gamma = -f.value * lap_f
    else:
        grad_f2 = phi.value**2 * float(np.sum(eps * f.grad**2))
        gamma = spec.lambda_F - f.value * lap_f - (m - 1) * grad_f2
    hess_h = _conformal_hessian(h, phi, eps)
    hess_h_fiber = f.value * phi.value**2 * float(np.sum(eps * f.grad * h.grad))
    return CurvatureBlock(base, float(gamma), True, hess_h, hess_h_fiber)


@dataclass(frozen=True)
class BakryEmery:
    """r-Bakry-Emery tensor Ric - (r/h) Hess h, with its residual against rho * metric."""

    base: np.ndarray
    fiber_coeff: float
    base_residual: np.ndarray
    fiber_residual: float


def bakry_emery(spec: WarpedSpec, point) -> BakryEmery:
    block = warped_ricci(spec, point)
    xi = xi_at(spec.direction, point)
    h = float(spec.h(xi))
    if h <= 0.0:
        raise InvalidPotentialError(f"potential h={h!r} is not positive at xi={xi!r}")
    phi = float(spec.phi(xi))
    f = float(spec.f(xi))
    base = block.base_ricci - (spec.r / h) * block.hess_h_base
    fiber = block.fiber_coeff - (spec.r / h) * block.hess_h_fiber_coeff
    metric_base = np.diag(spec.eps) / phi**2
    return BakryEmery(
        base=base,
        fiber_coeff=fiber,
        base_residual=base - spec.rho * metric_base,
        fiber_residual=fiber - spec.rho * f**2,
    )


# --- base B = (R^n, g/phi^2) x_f F^m, closed forms in xi --------------------------


def laplacian_base(spec: WarpedSpec, which: Literal["f", "h"], point) -> float:
    """Laplacian on B of a profile, via the closed form with eps_i0 = causal class."""
    xi = xi_at(spec.direction, point)
    u, du, ddu = (float(t) for t in getattr(spec, which).eval(xi))
    f, df, _ = (float(t) for t in spec.f.eval(xi))
    phi, dphi, _ = (float(t) for t in spec.phi.eval(xi))
    if f <= 0.0:
        raise InvalidWarpingError(f"warping function f={f!r} is not positive at xi={xi!r}")
    if phi == 0.0:
        raise SingularConformalFactorError(f"phi vanishes at xi={xi!r}")
    e = spec.causal_class
    return phi**2 * e * (ddu - (spec.n - 2) * dphi * du / phi) + spec.m * e * phi**2 * du * df / f


def grad_norm_base(spec: WarpedSpec, which: Literal["f", "h"], point) -> float:
    xi = xi_at(spec.direction, point)
    _, du, _ = (float(t) for t in getattr(spec, which).eval(xi))
    phi = float(spec.phi(xi))
    if phi == 0.0:
        raise SingularConformalFactorError(f"phi vanishes at xi={xi!r}")
    return spec.causal_class * phi**2 * du**2


def mixed_hessian(spec: WarpedSpec, point, fiber_slope=None) -> np.ndarray:
    """Hess h(X_i, Y_j) = h_{,x_i y_j} - (f_{,x_i}/f) h_{,y_j} as an n x m array.

    ``fiber_slope`` adds sum_j s_j y_j to h, a test hook for injected fiber dependence.
    """
    xi = xi_at(spec.direction, point)
    f, df, _ = (float(t) for t in spec.f.eval(xi))
    slope = np.zeros(spec.m) if fiber_slope is None else np.asarray(fiber_slope, dtype=float)
    h_xy = np.zeros((spec.n, spec.m))  # profiles of xi have no x-y cross partials
    return h_xy - np.outer(spec.alpha * df / f, slope)
