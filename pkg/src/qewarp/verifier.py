"""Residuals of the quasi-Einstein equation systems, the Kim-Kim constant and assemblies.

The PDE and ODE residuals are written out term by term from the printed
equations and do not reuse the tensor assembly in :mod:`qewarp.curvature`,
so the two paths can check each other.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AssemblyRejectedError, InvalidRequestError, PreconditionError, SpecError
from .geometry import Profile, WarpedSpec
from .curvature import grad_norm_base, laplacian_base

TOLERANCE_PROFILES = {"analytic": 1e-9, "numeric": 1e-6}
MU_SPREAD_RTOL = 1e-8
ASSEMBLY_TOL = 1e-8


def _scale(*terms) -> np.ndarray:
    return np.maximum(1.0, np.max(np.abs(np.stack(np.broadcast_arrays(*terms))), axis=0))


@dataclass(frozen=True)
class Section:
    """Worst residual of one equation family over the samples.

    ``max_scaled`` divides each residual by max(1, largest term magnitude) and is
    what the verdict compares against the tolerance.
    """

    max_abs: float
    max_scaled: float
    argmax_xi: Optional[float]
    tolerance: float
    passed: bool

    @classmethod
    def from_values(cls, xis, residual, scale, tolerance) -> "Section":
        res = np.abs(np.asarray(residual, dtype=float))
        scaled = res / np.asarray(scale, dtype=float)
        if res.size == 0:
            return cls(0.0, 0.0, None, tolerance, True)
        i = int(np.argmax(scaled))
        ms = float(scaled[i])
        return cls(float(np.max(res)), ms, float(np.asarray(xis)[i]), tolerance, bool(ms < tolerance))


def _points(spec: WarpedSpec, xis) -> np.ndarray:
    """Accept either xi values or an array of base points (one per row)."""
    xis = np.asarray(xis, dtype=float)
    if xis.ndim == 2:
        xis = xis @ spec.alpha
    xis = np.atleast_1d(xis)
    if xis.size == 0:
        raise InvalidRequestError("empty sample set")
    return xis


# --- PDE system on the base -----------------------------------------------------


def _pde_batch(spec: WarpedSpec, xis: np.ndarray) -> dict:
    """Residuals and term scales of the PDE system, with a leading sample axis."""
    n, m, r, rho, lam = spec.n, spec.m, spec.r, spec.rho, spec.lambda_F
    eps, al = spec.eps, spec.alpha
    xis = np.asarray(xis, dtype=float)
    f, df, ddf = (np.asarray(t, dtype=float)[:, None] for t in spec.f.eval(xis))
    h, dh, ddh = (np.asarray(t, dtype=float)[:, None] for t in spec.h.eval(xis))
    p, dp, ddp = (np.asarray(t, dtype=float)[:, None] for t in spec.phi.eval(xis))
    F1, H1, P1 = df * al, dh * al, dp * al
    a2 = al * al

    iu, ju = np.triu_indices(n, 1)
    aa = al[iu] * al[ju]
    off_terms = np.stack([
        (n - 2) * f * h * ddp * aa,
        -r * f * p * ddh * aa,
        -m * h * p * ddf * aa,
        -m * h * P1[:, iu] * F1[:, ju],
        -m * h * P1[:, ju] * F1[:, iu],
        -r * f * P1[:, iu] * H1[:, ju],
        -r * f * P1[:, ju] * H1[:, iu],
    ])
    offdiag = off_terms.sum(axis=0)
    offdiag_scale = np.maximum(1.0, np.max(np.abs(off_terms), axis=0))

    sum_terms = np.stack([
        f * h * p * ddp * a2,
        -(n - 1) * f * h * P1**2,
        m * h * p * P1 * F1,
        r * f * p * P1 * H1,
    ]) * eps
    ksum = sum_terms.sum(axis=(0, 2))[:, None]
    diag_terms = np.stack([
        p * (n - 2) * f * h * ddp * a2,
        p * -r * f * p * ddh * a2,
        p * -m * h * p * ddf * a2,
        p * -2 * m * h * P1 * F1,
        p * -2 * r * f * P1 * H1,
        eps * ksum,
        -eps * rho * f * h,
    ])
    diag = diag_terms.sum(axis=0)
    diag_scale = np.maximum(np.maximum(1.0, np.max(np.abs(diag_terms), axis=0)),
                            np.max(np.abs(sum_terms), axis=(0, 2))[:, None])

    if m == 1:
        fiber_terms = np.stack([
            -h * p**2 * ddf * a2,
            (n - 2) * h * p * P1 * F1,
            -r * p**2 * F1 * H1,
        ]) * eps
        rhs = rho * f * h
    else:
        fiber_terms = np.stack([
            -f * h * p**2 * ddf * a2,
            (n - 2) * f * h * p * P1 * F1,
            -(m - 1) * h * p**2 * F1**2,
            -r * f * p**2 * F1 * H1,
        ]) * eps
        rhs = h * (rho * f**2 - lam)
    fiber = fiber_terms.sum(axis=(0, 2))[:, None] - rhs
    fiber_scale = np.maximum.reduce([
        np.ones_like(fiber), np.max(np.abs(fiber_terms), axis=(0, 2))[:, None],
        np.abs(h * rho * f**2), np.abs(h * lam) * np.ones_like(fiber),
    ])

    return {
        "pde_offdiag": (offdiag, offdiag_scale),
        "pde_diag": (diag, diag_scale),
        "pde_fiber": (fiber, fiber_scale),
    }


def pde_residuals(spec: WarpedSpec, xi: float) -> dict:
    """Residuals (lhs - rhs) and term scales of the PDE system at the base point of xi."""
    batch = _pde_batch(spec, np.array([float(xi)]))
    return {name: (res[0], sc[0]) for name, (res, sc) in batch.items()}


def residual_pde(spec: WarpedSpec, sample_xis, tolerance: float = TOLERANCE_PROFILES["analytic"]) -> dict:
    xis = _points(spec, sample_xis)
    out = {}
    for name, (res, sc) in _pde_batch(spec, xis).items():
        if res.shape[1] == 0:
            out[name] = Section.from_values([], [], [], tolerance)
            continue
        k = np.argmax(np.abs(res) / sc, axis=1)
        rows = np.arange(len(xis))
        out[name] = Section.from_values(xis, res[rows, k], sc[rows, k], tolerance)
    return out


# --- reduced ODE system in xi --------------------------------------------------


def ode_residuals(spec: WarpedSpec, xi) -> dict:
    """Reduced ODE residuals E1, E2, E3 (lhs - rhs) and their term scales, vectorized in xi."""
    n, m, r, rho, lam = spec.n, spec.m, spec.r, spec.rho, spec.lambda_F
    q = float(spec.causal_class)
    f, df, ddf = spec.f.eval(xi)
    h, dh, ddh = spec.h.eval(xi)
    p, dp, ddp = spec.phi.eval(xi)
    t1 = (
        (n - 2) * f * h * ddp, -r * f * p * ddh, -m * h * p * ddf,
        -2 * m * h * dp * df, -2 * r * f * dp * dh,
    )
    out = {"E1": (sum(t1), _scale(*t1))}
    if spec.causal_class != 0:
        t2 = (
            q * f * h * p * ddp, -q * (n - 1) * f * h * dp**2,
            q * m * h * p * dp * df, q * r * f * p * dp * dh, -rho * f * h,
        )
        if m == 1:
            t3 = (
                -q * h * p**2 * ddf, q * (n - 2) * h * p * dp * df,
                -q * r * p**2 * df * dh, -rho * f * h,
            )
        else:
            t3 = (
                -q * f * h * p**2 * ddf, q * (n - 2) * f * h * p * dp * df,
                -q * (m - 1) * h * p**2 * df**2, -q * r * f * p**2 * df * dh,
                -h * rho * f**2, h * lam,
            )
        out["E2"] = (sum(t2), _scale(*t2))
        out["E3"] = (sum(t3), _scale(*t3))
    return out


def residual_ode(spec: WarpedSpec, sample_xis, tolerance: float = TOLERANCE_PROFILES["analytic"]) -> Section:
    xis = _points(spec, sample_xis)
    if spec.causal_class == 0 and (spec.rho != 0 or spec.lambda_F != 0):
        raise SpecError("a null direction requires rho = lambda_F = 0")
    res = ode_residuals(spec, xis)
    scaled = np.max(np.stack([np.abs(v) / s for v, s in res.values()]), axis=0)
    raw = np.max(np.stack([np.abs(v) for v, _ in res.values()]), axis=0)
    i = int(np.argmax(scaled))
    return Section(float(np.max(raw)), float(scaled[i]), float(xis[i]), tolerance,
                   bool(scaled[i] < tolerance))


# --- Kim-Kim constant -------------------------------------------------------------


def kimkim_mu_values(spec: WarpedSpec, sample_xis) -> np.ndarray:
    """h Lap_B h + (r-1)|grad_B h|^2 + rho h^2 along the samples."""
    xis = _points(spec, sample_xis)
    out = np.empty(xis.size)
    for i, xi in enumerate(xis):
        pt = spec.point_for_xi(xi)
        h = float(spec.h(xi))
        out[i] = (
            h * laplacian_base(spec, "h", pt)
            + (spec.r - 1) * grad_norm_base(spec, "h", pt)
            + spec.rho * h * h
        )
    return out


@dataclass(frozen=True)
class MuTrace:
    xis: list
    values: list
    mean: float
    spread: float
    constant: bool


def kimkim_mu(spec: WarpedSpec, sample_xis, tolerance: Optional[float] = None,
              report_only: bool = False) -> MuTrace:
    xis = _points(spec, sample_xis)
    if not report_only:
        tol = TOLERANCE_PROFILES["analytic"] if tolerance is None else tolerance
        sections = residual_pde(spec, xis, tol)
        bad = [k for k, s in sections.items() if not s.passed]
        if bad:
            raise PreconditionError(f"spec is not certified quasi-Einstein (failed: {', '.join(bad)})")
    mu = kimkim_mu_values(spec, xis)
    mean = float(np.mean(mu))
    spread = float(np.max(mu) - np.min(mu))
    return MuTrace([float(x) for x in xis], [float(v) for v in mu], mean, spread,
                   bool(spread <= MU_SPREAD_RTOL * (1 + abs(mean))))


# --- assemblies -------------------------------------------------------------------


@dataclass(frozen=True)
class EinsteinCertificate:
    granted: bool
    certified_mu: float
    fiber2_mu: float
    fiber2_dim: int
    mismatch: float
    einstein_constant: float
    total_dimension: int


def einstein_assembly(spec: WarpedSpec, fiber2_mu: float, sample_xis,
                      tolerance: Optional[float] = None) -> EinsteinCertificate:
    """Certify (R^n x_f F1^m) x_h F2^r as Einstein with constant rho.

    Conditions: the base is quasi-Einstein, F2 is Einstein with Ricci constant
    ``fiber2_mu`` and dimension r, and the Kim-Kim constant of h equals fiber2_mu.
    """
    if not spec.is_integral:
        raise PreconditionError(f"second fiber needs integer dimension r, got r={spec.r!r}")
    trace = kimkim_mu(spec, sample_xis, tolerance)
    if not trace.constant:
        raise PreconditionError(f"Kim-Kim expression is not constant (spread {trace.spread:.3e})")
    r_dim = int(spec.r)
    if r_dim == 1 and fiber2_mu != 0:
        raise AssemblyRejectedError(trace.mean, fiber2_mu)
    mismatch = abs(trace.mean - fiber2_mu)
    if mismatch > ASSEMBLY_TOL * (1 + abs(trace.mean)):
        raise AssemblyRejectedError(trace.mean, fiber2_mu)
    return EinsteinCertificate(True, trace.mean, float(fiber2_mu), r_dim, mismatch, spec.rho,
                               spec.n + spec.m + r_dim)


@dataclass(frozen=True)
class MixedHessianResult:
    passed: bool
    max_abs: float


def mixed_hessian_check(spec: WarpedSpec, sample_xis, fiber_slope=None) -> MixedHessianResult:
    from .curvature import mixed_hessian

    worst = 0.0
    for xi in _points(spec, sample_xis):
        worst = max(worst, float(np.max(np.abs(mixed_hessian(spec, spec.point_for_xi(xi), fiber_slope)))))
    return MixedHessianResult(worst == 0.0, worst)


def bump_perturbation(p: Profile, amplitude: float, center: float, width: float) -> Profile:
    """p * (1 + amplitude * exp(-((xi - center)/width)^2))."""
    c, w, A = float(center), float(width), float(amplitude)

    def g(x):
        return np.exp(-(((np.asarray(x, dtype=float) - c) / w) ** 2))

    bump = Profile(
        value=lambda x: 1.0 + A * g(x),
        d1=lambda x: A * g(x) * (-2 * (np.asarray(x, dtype=float) - c) / w**2),
        d2=lambda x: A * g(x) * ((4 * (np.asarray(x, dtype=float) - c) ** 2 / w**4) - 2 / w**2),
        name="bump",
    )
    return p.times(bump)


# --- reports ----------------------------------------------------------------------


@dataclass
class ResidualReport:
    tolerance_profile: str
    tolerance: float
    samples: int
    sections: dict
    mu_trace: list
    mu_xis: list
    mu_mean: float
    mu_spread: float
    mu_constant: bool
    extra: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return all(s.passed for s in self.sections.values()) and self.mu_constant

    @property
    def failed(self) -> list:
        names = [k for k, s in self.sections.items() if not s.passed]
        if not self.mu_constant:
            names.append("kimkim_mu")
        return names

    def to_dict(self) -> dict:
        return {
            "tolerance_profile": self.tolerance_profile,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "verdict": "pass" if self.verdict else "fail",
            "failed": self.failed,
            "sections": {k: asdict(v) for k, v in self.sections.items()},
            "mu_mean": self.mu_mean,
            "mu_spread": self.mu_spread,
            "mu_constant": self.mu_constant,
            "kimkim_mu_trace": [{"xi": x, "mu": v} for x, v in zip(self.mu_xis, self.mu_trace)],
            "extra": self.extra,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ResidualReport":
        trace = d.get("kimkim_mu_trace", [])
        return cls(
            tolerance_profile=d["tolerance_profile"],
            tolerance=d["tolerance"],
            samples=d["samples"],
            sections={k: Section(**v) for k, v in d["sections"].items()},
            mu_trace=[t["mu"] for t in trace],
            mu_xis=[t["xi"] for t in trace],
            mu_mean=d["mu_mean"],
            mu_spread=d["mu_spread"],
            mu_constant=d["mu_constant"],
            extra=d.get("extra", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "ResidualReport":
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        lines = [f"verdict: {'PASS' if self.verdict else 'FAIL'}  "
                 f"(profile {self.tolerance_profile}, tol {self.tolerance:.0e}, {self.samples} samples)"]
        lines.append(f"{'equation':<14} {'max_abs':>12} {'max_scaled':>12} {'at_xi':>12}  status")
        for name, s in self.sections.items():
            at = "-" if s.argmax_xi is None else f"{s.argmax_xi:.6g}"
            lines.append(f"{name:<14} {s.max_abs:12.3e} {s.max_scaled:12.3e} {at:>12}  "
                         f"{'ok' if s.passed else 'VIOLATED'}")
        lines.append(f"{'kimkim_mu':<14} mean {self.mu_mean:.12g}  spread {self.mu_spread:.3e}  "
                     f"{'constant' if self.mu_constant else 'NOT CONSTANT'}")
        return "\n".join(lines) + "\n"

    def mu_csv(self) -> str:
        rows = ["xi,mu"] + [f"{x!r},{v!r}" for x, v in zip(self.mu_xis, self.mu_trace)]
        return "\n".join(rows) + "\n"


def dumps(obj) -> str:
    """Canonical JSON used for every machine-readable output."""
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def verify(spec: WarpedSpec, samples: int = 101, profile: str = "analytic",
           sample_xis: Optional[Sequence[float]] = None) -> ResidualReport:
    if profile not in TOLERANCE_PROFILES:
        raise InvalidRequestError(f"unknown tolerance profile {profile!r}")
    tol = TOLERANCE_PROFILES[profile]
    xis = spec.sample_xis(samples) if sample_xis is None else _points(spec, sample_xis)
    sections = residual_pde(spec, xis, tol)
    sections["ode_system"] = residual_ode(spec, xis, tol)
    trace = kimkim_mu(spec, xis, report_only=True)
    return ResidualReport(profile, tol, int(len(xis)), sections, trace.values, trace.xis,
                          trace.mean, trace.spread, trace.constant)
