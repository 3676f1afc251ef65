"""JSON form of a WarpedSpec.

A document carries n, m, r, rho, lambda_F, eps, alpha, an optional sampling
window, and a ``family`` object whose ``type`` selects the constructor:

    theorem4      k, branch, c, c1, c2, c3
    theorem5      k, c, c1, c2, c3
    exp_null      k1, k2, A, B, c1_h, c2_h, optional C override
    cauchy_euler  c1_h, c2_h, half_line
    implicit      k, x0, z0, xi_range, step, tolerance, f0, phi0, h0
    null_ode      f, phi (expressions), h0, h0_prime, xi_range, step, tolerance
    custom        f, phi, h (expressions), optional domain
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import families as fam
from .errors import SpecError
from .expr import expression_profile
from .geometry import Direction, Signature, WarpedSpec
from .ode import IntegratorConfig, integrate_implicit_family, solve_null_h

FAMILY_TYPES = ("theorem4", "theorem5", "exp_null", "cauchy_euler", "implicit", "null_ode", "custom")


@dataclass(frozen=True)
class ResolvedSpec:
    spec: WarpedSpec
    family_type: str
    constants: dict


def _num(d: dict, key: str, default: Any = None) -> float:
    if key not in d:
        if default is None:
            raise SpecError(f"missing key {key!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecError(f"{key!r} must be a number, got {v!r}")
    return float(v)


def _pair(d: dict, key: str) -> tuple[float, float]:
    v = d.get(key)
    if not (isinstance(v, list) and len(v) == 2):
        raise SpecError(f"{key!r} must be a two-element list")
    return float(v[0]), float(v[1])


def _integrator(d: dict) -> IntegratorConfig:
    return IntegratorConfig(step=_num(d, "step", 1e-3), tolerance=_num(d, "tolerance", 1e-8))


def _family_params(d: dict) -> fam.FamilyParams:
    return fam.FamilyParams(
        k=_num(d, "k"), c=_num(d, "c", 1.0), c1=_num(d, "c1", 1.0), c2=_num(d, "c2", 1.0),
        c3=_num(d, "c3", 1.0), branch=d.get("branch", "plus"),
    )


def build_family(n: int, m: int, r: float, d: dict):
    """Construct (f, phi, h, window, constants) from a family object."""
    kind = d.get("type")
    if kind == "theorem4":
        out = fam.theorem4_family(n, m, r, _family_params(d))
    elif kind == "theorem5":
        if r != 1:
            raise SpecError(f"theorem5 requires r = 1, got r={r!r}")
        out = fam.theorem5_family(n, m, _family_params(d))
    elif kind == "exp_null":
        params = fam.ExpNullParams(
            k1=_num(d, "k1", 1.0), k2=_num(d, "k2", 1.0), A=_num(d, "A", 0.0), B=_num(d, "B", 0.0),
            c1_h=_num(d, "c1_h", 1.0), c2_h=_num(d, "c2_h", 0.0),
        )
        out = fam.exp_null_family(n, m, r, params, C=d.get("C"))
    elif kind == "cauchy_euler":
        params = fam.CauchyEulerParams(
            c1_h=_num(d, "c1_h", 1.0), c2_h=_num(d, "c2_h", 0.0), half_line=int(_num(d, "half_line", 1.0)),
        )
        out = fam.cauchy_euler_family(n, m, r, params)
    elif kind == "implicit":
        k = _num(d, "k")
        res = integrate_implicit_family(
            n, m, r, k, _num(d, "x0"), _num(d, "z0"), _pair(d, "xi_range"), _integrator(d),
            f0=_num(d, "f0", 1.0), phi0=_num(d, "phi0", 1.0), h0=_num(d, "h0", 1.0),
        )
        a, b = fam.ab_constants(n, m, k)
        tr = res.trajectory
        constants = {"a": a, "b": b, "status": tr.status, "xi_end": float(tr.xi[-1]),
                     "nodes": int(len(tr.xi)), "max_local_error": float(max(tr.local_error))}
        return res.f, res.phi, res.h, res.f.window, constants
    elif kind == "null_ode":
        f = expression_profile(str(d.get("f", "1")), "null_ode.f")
        phi = expression_profile(str(d.get("phi", "1")), "null_ode.phi")
        sol = solve_null_h(n, m, r, f, phi, _num(d, "h0", 1.0), _num(d, "h0_prime", 0.0),
                           _pair(d, "xi_range"), _integrator(d))
        tr = sol.trajectory
        constants = {"status": tr.status, "nodes": int(len(tr.xi))}
        return f, phi, sol.h, sol.h.window, constants
    elif kind == "custom":
        domain = _pair(d, "domain") if "domain" in d else (-math.inf, math.inf)
        profiles = [expression_profile(str(d[key]), f"custom.{key}", domain)
                    for key in ("f", "phi", "h") if key in d]
        if len(profiles) != 3:
            raise SpecError("custom family needs expressions for f, phi and h")
        return (*profiles, None, {})
    else:
        raise SpecError(f"unknown family type {kind!r}; expected one of {', '.join(FAMILY_TYPES)}")
    return out.f, out.phi, out.h, out.window, dict(out.constants)


def spec_from_dict(doc: dict) -> ResolvedSpec:
    if not isinstance(doc, dict):
        raise SpecError("spec document must be a JSON object")
    for key in ("n", "m", "r", "eps", "alpha", "family"):
        if key not in doc:
            raise SpecError(f"missing key {key!r}")
    n, m = doc["n"], doc["m"]
    if not (isinstance(n, int) and isinstance(m, int)):
        raise SpecError("n and m must be integers")
    r = _num(doc, "r")
    sig = Signature(tuple(int(e) for e in doc["eps"]))
    direction = Direction.from_alpha(sig, [float(a) for a in doc["alpha"]])
    family = doc["family"]
    if not isinstance(family, dict):
        raise SpecError("family must be an object")
    f, phi, h, window, constants = build_family(n, m, r, family)
    if "window" in doc:
        window = _pair(doc, "window")
    spec = WarpedSpec(
        n=n, m=m, r=r, rho=_num(doc, "rho", 0.0), lambda_F=_num(doc, "lambda_F", 0.0),
        signature=sig, direction=direction, f=f, phi=phi, h=h, family=dict(family), window=window,
    )
    lo, hi = spec.domain
    constants.setdefault("domain_lower", lo)
    constants.setdefault("domain_upper", hi)
    return ResolvedSpec(spec, family["type"], constants)


def spec_to_dict(spec: WarpedSpec) -> dict:
    if spec.family is None:
        raise SpecError("spec was not built from a family document and cannot be serialized")
    doc = {
        "n": spec.n,
        "m": spec.m,
        "r": spec.r,
        "rho": spec.rho,
        "lambda_F": spec.lambda_F,
        "eps": list(spec.signature.eps),
        "alpha": list(spec.direction.alpha),
        "family": dict(spec.family),
    }
    if spec.window is not None:
        doc["window"] = list(spec.window)
    return doc


def load_spec(path: str | Path) -> ResolvedSpec:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return spec_from_dict(doc)
