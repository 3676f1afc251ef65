import math

import numpy as np
import pytest

from qewarp import families as fam
from qewarp.geometry import Direction, Profile, Signature, WarpedSpec


def power_profile(expo: float, name: str = "p") -> Profile:
    return Profile(
        value=lambda x: np.asarray(x, dtype=float) ** expo,
        d1=lambda x: expo * np.asarray(x, dtype=float) ** (expo - 1),
        d2=lambda x: expo * (expo - 1) * np.asarray(x, dtype=float) ** (expo - 2),
        domain=(0.0, math.inf),
        name=name,
    )


def exp_profile(rate: float, coef: float = 1.0, name: str = "e") -> Profile:
    return Profile(
        value=lambda x: coef * np.exp(rate * np.asarray(x, dtype=float)),
        d1=lambda x: coef * rate * np.exp(rate * np.asarray(x, dtype=float)),
        d2=lambda x: coef * rate**2 * np.exp(rate * np.asarray(x, dtype=float)),
        name=name,
    )


def spacelike(n: int, alpha=None) -> tuple[Signature, Direction]:
    """A Lorentzian signature with a generic spacelike direction."""
    sig = Signature((-1,) + (1,) * (n - 1))
    a = [0.3, 1.0, 0.5] + [0.2] * (n - 3) if alpha is None else alpha
    return sig, Direction.from_alpha(sig, a)


def timelike(n: int) -> tuple[Signature, Direction]:
    sig = Signature((-1,) + (1,) * (n - 1))
    return sig, Direction.from_alpha(sig, [1.0, 0.3, 0.2] + [0.1] * (n - 3))


def null(n: int) -> tuple[Signature, Direction]:
    sig = Signature((-1,) + (1,) * (n - 1))
    return sig, Direction.from_alpha(sig, [1.0, 1.0] + [0.0] * (n - 2))


def spec_from_family(n, m, r, family, sd=None, rho=0.0, lambda_F=0.0) -> WarpedSpec:
    sig, d = spacelike(n) if sd is None else sd
    return WarpedSpec(n, m, r, rho, lambda_F, sig, d, family.f, family.phi, family.h,
                      window=family.window)


def power_law_spec(n=3, m=1, k=1.0, r=2.0, branch="plus", sd=None, **kw) -> WarpedSpec:
    return spec_from_family(n, m, r, fam.theorem4_family(n, m, r, fam.FamilyParams(k=k, branch=branch, **kw)), sd)


def r_one_spec(n=4, m=2, k=1.0, sd=None, **kw) -> WarpedSpec:
    return spec_from_family(n, m, 1.0, fam.theorem5_family(n, m, fam.FamilyParams(k=k, **kw)), sd)


@pytest.fixture
def t4_spec():
    return power_law_spec()


@pytest.fixture
def t5_spec():
    return r_one_spec()
