"""Numerical families: the implicit (x, z) family and the null-direction linear ODE for h.

Both are integrated with classical RK4 on a fixed nominal grid. Every nominal
step is taken once whole and once as two halves; the halves are kept and
|halves - whole| / 15 is the local error estimate. A step whose estimate
exceeds the tolerance is split recursively until it passes or underflows.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, IntegrationError, NearSingularityError
from .families import ab_constants
from .geometry import Profile

Rhs = Callable[[float, np.ndarray], np.ndarray]

MAX_SPLIT_DEPTH = 20


@dataclass(frozen=True)
class IntegratorConfig:
    step: float = 1e-3
    tolerance: float = 1e-8
    max_steps: int = 1_000_000
    singularity_guard: float = 1e-6

    def __post_init__(self):
        if not (self.step > 0 and self.tolerance > 0 and self.max_steps > 0 and self.singularity_guard > 0):
            raise ValueError("integrator settings must all be positive")


def rk4_step(rhs: Rhs, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + h / 2, y + h / 2 * k1)
    k3 = rhs(t + h / 2, y + h / 2 * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _error_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a)))) / 15.0


def doubled_step(rhs: Rhs, t: float, y: np.ndarray, h: float, tol: float, depth: int = 0):
    """Advance by h with step-halving error control; returns (y_new, error_estimate)."""
    whole = rk4_step(rhs, t, y, h)
    mid = rk4_step(rhs, t, y, h / 2)
    halves = rk4_step(rhs, t + h / 2, mid, h / 2)
    err = _error_norm(halves, whole)
    if np.all(np.isfinite(halves)) and err <= tol:
        return halves, err
    if depth >= MAX_SPLIT_DEPTH:
        raise IntegrationError(f"step underflow at xi={t!r} (step {h!r}, error {err!r})")
    y1, e1 = doubled_step(rhs, t, y, h / 2, tol, depth + 1)
    y2, e2 = doubled_step(rhs, t + h / 2, y1, h / 2, tol, depth + 1)
    return y2, e1 + e2


@dataclass
class Trajectory:
    xi: np.ndarray
    states: np.ndarray
    local_error: np.ndarray
    status: str
    rhs: Rhs = field(repr=False)
    step: float = 1e-3

    def state_at(self, xi: float) -> np.ndarray:
        """State at an arbitrary xi, re-integrated from the nearest earlier node."""
        nodes = self.xi
        lo, hi = (nodes[0], nodes[-1]) if nodes[-1] >= nodes[0] else (nodes[-1], nodes[0])
        if not lo <= xi <= hi:
            raise DomainError(f"xi={xi!r} outside integrated range [{lo!r}, {hi!r}]")
        sgn = 1.0 if nodes[-1] >= nodes[0] else -1.0
        idx = int(np.searchsorted(sgn * nodes, sgn * xi, side="right")) - 1
        idx = min(max(idx, 0), len(nodes) - 1)
        t, y = float(nodes[idx]), self.states[idx].copy()
        gap = xi - t
        if gap == 0.0:
            return y
        n_sub = max(1, math.ceil(abs(gap) / (self.step / 2) - 1e-9))
        h = gap / n_sub
        for _ in range(n_sub):
            y = rk4_step(self.rhs, t, y, h)
            t += h
        return y


def integrate(rhs: Rhs, xi0: float, y0, xi_end: float, cfg: IntegratorConfig,
              guard: Optional[Callable[[float, np.ndarray], bool]] = None) -> Trajectory:
    y = np.asarray(y0, dtype=float)
    span = xi_end - xi0
    if span == 0:
        raise ValueError("empty integration range")
    n_steps = max(1, int(round(abs(span) / cfg.step)))
    h = span / n_steps
    xs, ys, errs = [xi0], [y.copy()], [0.0]
    status = "range_end"
    if n_steps > cfg.max_steps:
        n_steps = cfg.max_steps
        status = "max_steps"
    t = xi0
    for i in range(n_steps):
        if guard is not None and guard(t, y):
            status = "singularity"
            break
        y, err = doubled_step(rhs, t, y, h, cfg.tolerance)
        t = xi0 + (i + 1) * h
        xs.append(t)
        ys.append(y.copy())
        errs.append(err)
    return Trajectory(np.array(xs), np.array(ys), np.array(errs), status, rhs, abs(h))


# --- implicit family ------------------------------------------------------------


def v_of_z(n: int, m: int, r: float, k: float, z: float, delta: float = 1e-6) -> float:
    a, b = ab_constants(n, m, k)
    denom = r * (r - 1) * z**2 - 2 * r * (k + a) * z + a * a - b
    if abs(denom) <= delta:
        raise NearSingularityError(f"v(z) denominator {denom!r} within {delta} of zero at z={z!r}")
    return r * (a - r * z) / denom


@dataclass(frozen=True)
class ImplicitSystem:
    """z' = x Q(z)/r, x' = (a - rz) x^2 with f'/f = x, phi'/phi = kx, h'/h = xz."""

    n: int
    m: int
    r: float
    k: float

    @property
    def ab(self) -> tuple[float, float]:
        return ab_constants(self.n, self.m, self.k)

    def z_rate(self, x, z):
        a, b = self.ab
        r, k = self.r, self.k
        return (a * a - b) / r * x - 2 * (k + a) * x * z + (r - 1) * x * z**2

    def x_rate(self, x, z):
        a, _ = self.ab
        return (a - self.r * z) * x**2

    def rhs(self, xi: float, s: np.ndarray) -> np.ndarray:
        x, z = s[0], s[1]
        return np.array([self.x_rate(x, z), self.z_rate(x, z), x, self.k * x, x * z])


def v_antiderivative(n: int, m: int, r: float, k: float) -> Callable[[np.ndarray], np.ndarray]:
    """A primitive of v(z) = r(a - rz)/Q(z) on any interval free of roots of Q."""
    a, b = ab_constants(n, m, k)
    A, B, C = r * (r - 1), -2 * r * (k + a), a * a - b
    if A == 0:
        # Q is linear: r(a - z)/(Bz + C)
        if B == 0:
            return lambda z: r * (a * np.asarray(z) - np.asarray(z) ** 2 / 2) / C
        return lambda z: r * (-np.asarray(z) / B + (a + C / B) / B * np.log(np.abs(B * np.asarray(z) + C)))
    # r(a - rz) = p Q'(z) + q
    p = -r * r / (2 * A)
    q = r * a - p * B
    disc = B * B - 4 * A * C
    if disc < 0:
        w = math.sqrt(-disc)

        def inv_q(z):
            return 2.0 / w * np.arctan((2 * A * z + B) / w)
    elif disc > 0:
        w = math.sqrt(disc)

        def inv_q(z):
            return np.log(np.abs((2 * A * z + B - w) / (2 * A * z + B + w))) / w
    else:
        def inv_q(z):
            return -2.0 / (2 * A * z + B)

    return lambda z: p * np.log(np.abs(A * np.asarray(z) ** 2 + B * np.asarray(z) + C)) + q * inv_q(np.asarray(z))

@dataclass
class ImplicitFamily:
    system: ImplicitSystem
    trajectory: Trajectory
    f: Profile
    phi: Profile
    h: Profile

    @property
    def status(self) -> str:
        return self.trajectory.status

    def table_rows(self):
        tr = self.trajectory
        for xi, s, e in zip(tr.xi, tr.states, tr.local_error):
            x, z, lf, lp, lh = s
            yield {"xi": xi, "x": x, "z": z, "f": math.exp(lf), "phi": math.exp(lp),
                   "h": math.exp(lh), "local_error": e}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["xi", "x", "z", "f", "phi", "h", "local_error"]
        w.writerow(cols)
        for row in self.table_rows():
            w.writerow([repr(float(row[c])) for c in cols])
        return buf.getvalue()


def _tabulated(trajectory: Trajectory, fn, name: str) -> Profile:
    lo, hi = sorted((float(trajectory.xi[0]), float(trajectory.xi[-1])))
    span = hi - lo
    # the table's end nodes are closed; keep the open domain a hair wider
    pad = 1e-9 * max(1.0, span)

    def make(which):
        def ev(x):
            arr = np.asarray(x, dtype=float)
            out = np.empty(arr.shape)
            for idx, xv in np.ndenumerate(arr):
                xc = min(max(float(xv), lo), hi)
                out[idx] = fn(xc, trajectory.state_at(xc))[which]
            return out if arr.ndim else float(out)

        return ev

    return Profile(make(0), make(1), make(2), domain=(lo - pad, hi + pad), name=name, window=(lo, hi))


def integrate_implicit_family(
    n: int, m: int, r: float, k: float, x0: float, z0: float, xi_range,
    cfg: IntegratorConfig = IntegratorConfig(),
    f0: float = 1.0, phi0: float = 1.0, h0: float = 1.0,
) -> ImplicitFamily:
    if x0 == 0:
        raise ValueError("x0 must be nonzero")
    if not (f0 > 0 and phi0 > 0 and h0 > 0):
        raise ValueError("initial f, phi, h must be positive")
    system = ImplicitSystem(n, m, r, k)
    y0 = [x0, z0, math.log(f0), math.log(phi0), math.log(h0)]
    xi0, xi1 = (float(v) for v in xi_range)
    delta = cfg.singularity_guard

    def guard(xi, s):
        x = abs(s[0])
        return x > 1.0 / delta or x * cfg.step > 0.25 or not np.all(np.isfinite(s))

    tr = integrate(system.rhs, xi0, y0, xi1, cfg, guard)
    if len(tr.xi) < 2:
        raise IntegrationError("singularity guard triggered before the first step")

    def jets(_xi, s):
        x, z, lf, lp, lh = s
        dx = system.x_rate(x, z)
        dz = system.z_rate(x, z)
        y, dy = x * z, dx * z + x * dz
        f, phi, h = math.exp(lf), math.exp(lp), math.exp(lh)
        return {
            "f": (f, x * f, (dx + x * x) * f),
            "phi": (phi, k * x * phi, (k * dx + k * k * x * x) * phi),
            "h": (h, y * h, (dy + y * y) * h),
        }

    def pick(name):
        return lambda xi, s: jets(xi, s)[name]

    return ImplicitFamily(
        system, tr,
        _tabulated(tr, pick("f"), "implicit.f"),
        _tabulated(tr, pick("phi"), "implicit.phi"),
        _tabulated(tr, pick("h"), "implicit.h"),
    )


def implicit_relation_residual(fam: ImplicitFamily, delta: float = 1e-6) -> np.ndarray:
    """Per-node |ln|x| - ln|x0| - int_{z0}^{z} v(s) ds|, the first integral of the system.

    The integral uses the closed-form antiderivative of the rational v(z), so it is
    independent of the integrator. It assumes z does not cross a root of Q. Exactly zero along exact solutions.
    """
    sysm = fam.system
    xs = fam.trajectory.states[:, 0]
    zs = fam.trajectory.states[:, 1]
    out = np.zeros(len(zs))
    if np.all(zs == zs[0]):
        # z sits on a root of Q, the relation is vacuous; compare x with its closed form
        d = sysm.ab[0] - sysm.r * zs[0]
        t = fam.trajectory.xi - fam.trajectory.xi[0]
        exact = xs[0] / (1.0 - d * xs[0] * t)
        return np.abs(np.log(np.abs(xs)) - np.log(np.abs(exact)))

    prim = v_antiderivative(sysm.n, sysm.m, sysm.r, sysm.k)
    integral = prim(zs) - prim(zs[0])
    out = np.abs(np.log(np.abs(xs)) - math.log(abs(xs[0])) - integral)
    return out


# --- null-direction linear ODE for h ----------------------------------------------


@dataclass
class NullSolution:
    trajectory: Trajectory
    h: Profile


def solve_null_h(
    n: int, m: int, r: float, f: Profile, phi: Profile, h0: float, h0_prime: float,
    xi_range, cfg: IntegratorConfig = IntegratorConfig(),
) -> NullSolution:
    """Integrate -r f phi h'' - 2r f phi' h' + [(n-2) f phi'' - m phi f'' - 2m phi' f'] h = 0."""
    xi0, xi1 = (float(v) for v in xi_range)
    grid = np.linspace(xi0, xi1, 11)
    fv, pv = f(grid), phi(grid)
    if np.any(fv <= 0) or np.any(pv <= 0):
        raise DomainError("f and phi must be positive on the integration range")

    def coeffs(xi):
        F, dF, ddF = (float(t) for t in f.eval(xi))
        P, dP, ddP = (float(t) for t in phi.eval(xi))
        if F <= 0 or P <= 0:
            raise DomainError(f"f or phi not positive at xi={xi!r}")
        lead = -r * F * P
        return lead, -2 * r * F * dP, (n - 2) * F * ddP - m * P * ddF - 2 * m * dP * dF

    def hpp(xi, h, dh):
        lead, c1, c0 = coeffs(xi)
        return -(c1 * dh + c0 * h) / lead

    def rhs(xi, s):
        return np.array([s[1], hpp(xi, s[0], s[1])])

    tr = integrate(rhs, xi0, [h0, h0_prime], xi1, cfg)
    h = _tabulated(tr, lambda xi, s: (s[0], s[1], hpp(xi, s[0], s[1])), "null_ode.h")
    return NullSolution(tr, h)
