import math

import numpy as np
import numpy.testing as npt
import pytest

from qewarp import families as fam
from qewarp.errors import (
    ComplexExponentError,
    DegenerateExponentError,
    InadmissibleParametersError,
    NoRealBranchError,
)
from qewarp.geometry import profile_consistency_check
from qewarp.verifier import residual_ode, residual_pde

from conftest import null, spec_from_family


def test_ab_and_roots_worked_cell():
    assert fam.ab_constants(3, 1, 1.0) == (0.0, 2.0)
    Np, Nm = fam.theorem4_roots(3, 1, 2.0, 1.0)
    assert Np == pytest.approx(1 + math.sqrt(2), abs=1e-15)
    assert Nm == pytest.approx(1 - math.sqrt(2), abs=1e-15)


def test_power_law_rejects_r_one_and_no_real_branch():
    with pytest.raises(InadmissibleParametersError):
        fam.theorem4_roots(3, 1, 1.0, 1.0)
    # n=3, m=3, k=3: a=0, b=12, so 4.5 < 6 at r = 1/2
    a, b = fam.ab_constants(3, 3, 3.0)
    r = 0.5
    assert r * (3 + a) ** 2 < (r - 1) * (a * a - b)
    with pytest.raises(NoRealBranchError):
        fam.theorem4_roots(3, 3, r, 3.0)


T4_CELLS = [(3, 1, 1.0, 2.0), (4, 2, 0.5, 3.0), (5, 3, 2.0, 3.0), (6, 1, 1.5, 2.0), (4, 1, 1.0, 4.0)]


@pytest.mark.parametrize("n, m, k, r", T4_CELLS)
@pytest.mark.parametrize("branch", ["plus", "minus"])
def test_power_law_family_properties(n, m, k, r, branch):
    try:
        family = fam.theorem4_family(n, m, r, fam.FamilyParams(k=k, branch=branch, c=0.7, c1=1.3, c2=0.8, c3=2.0))
    except DegenerateExponentError:
        pytest.skip("a - rN = 0 on this branch")
    N = family.constants["N"]
    assert abs(fam.root_quadratic(n, m, r, k, N)) < 1e-12 * max(1.0, r * r * N * N)
    xs = spec_from_family(n, m, r, family).sample_xis(41)
    f, df, _ = family.f.eval(xs)
    p, dp, _ = family.phi.eval(xs)
    npt.assert_allclose(dp / p - k * df / f, 0.0, atol=1e-12)
    assert np.all(f > 0) and np.all(family.h(xs) > 0)
    for prof in (family.f, family.phi, family.h):
        assert profile_consistency_check(prof, xs[::5]).passed
    spec = spec_from_family(n, m, r, family)
    assert residual_ode(spec, xs).passed
    assert all(s.passed for s in residual_pde(spec, xs).values())


def test_power_law_domain_is_half_space():
    family = fam.theorem4_family(3, 1, 2.0, fam.FamilyParams(k=1.0))
    D = family.constants["a_minus_rN"]
    bound = family.constants["domain_bound"]
    assert bound == pytest.approx(-1.0 / D)
    assert family.domain == (-math.inf, bound) if D < 0 else (bound, math.inf)


def test_r_one_worked_cell():
    family = fam.theorem5_family(4, 2, fam.FamilyParams(k=1.0, c=0.5, c1=3.0))
    c = family.constants
    assert (c["a"], c["b"], c["N"], c["a_minus_rN"]) == (0.0, 4.0, -2.0, 2.0)
    assert 2 * (1.0 + c["a"]) * c["N"] == c["a"] ** 2 - c["b"]
    xs = np.array([0.0, 1.0, 3.0])
    npt.assert_allclose(family.f(xs), 3.0 * (2 * xs + 0.5) ** -0.5, rtol=1e-15)
    assert c["domain_bound"] == pytest.approx(-2 * 0.5 * 1.0 / (0.0 + 4.0 + 0.0))


def test_r_one_rejects_k_plus_a_zero():
    # n=3, m=2: a = k - 2, so k + a = 0 at k = 1
    with pytest.raises(InadmissibleParametersError):
        fam.theorem5_family(3, 2, fam.FamilyParams(k=1.0))


@pytest.mark.parametrize("bad", [dict(k=0.0), dict(k=-1.0), dict(k=1.0, c1=0.0), dict(k=1.0, branch="up")])
def test_family_params_validation(bad):
    with pytest.raises(InadmissibleParametersError):
        fam.FamilyParams(**bad)


def test_exp_null_constants_trivial():
    family = fam.exp_null_family(4, 2, 3.0, fam.ExpNullParams(c1_h=1.0, c2_h=2.0))
    assert family.constants["C"] == 0.0
    npt.assert_allclose(family.h(np.linspace(-1, 1, 5)), 3.0)


@pytest.mark.parametrize("n", [3, 4, 5, 10])
@pytest.mark.parametrize("r", [1.0, 2.0, 3.0])
def test_exp_null_special_case_C_is_r_squared(n, r):
    A = math.sqrt(n - 1) - 1
    assert fam.exp_null_bracket(n, 1, A, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert fam.exp_null_C(n, 1, r, A, 1.0) == pytest.approx(r * r, abs=1e-13)


@pytest.mark.parametrize("A, B, m, r", [(0.3, 0.5, 1, 2.0), (0.2, 0.7, 2, 3.0), (-0.4, 0.9, 1, 1.0), (1.0, 2.0, 3, 2.5)])
def test_exp_null_reduced_ode(A, B, m, r):
    n = 4
    family = fam.exp_null_family(n, m, r, fam.ExpNullParams(k1=1.5, k2=0.5, A=A, B=B, c1_h=1.0, c2_h=0.3))
    xs = np.linspace(-0.9, 0.9, 37)
    h, dh, ddh = family.h.eval(xs)
    res = -r * ddh - 2 * r * B * dh + fam.exp_null_bracket(n, m, A, B) * h
    assert np.max(np.abs(res)) < 1e-10


def test_exp_null_complex_exponent():
    # bracket strongly negative with B = 0 gives C < 0
    with pytest.raises(ComplexExponentError):
        fam.exp_null_family(3, 2, 2.0, fam.ExpNullParams(A=1.0, B=0.0))


@pytest.mark.parametrize(
    "n, m, r, regime",
    [(12, 1, 8.0, "two-real-roots"), (3, 2, 8.0, "double-root"), (3, 1, 2.0, "complex-roots"), (3, 1, 4.0, "two-real-roots")],
)
def test_cauchy_euler_regimes(n, m, r, regime):
    got, lam = fam.cauchy_euler_regime(n, m, r)
    assert got == regime
    disc = 9 - (40 * m - 8 * (n - 2)) / r
    assert lam == pytest.approx(0.5 * math.sqrt(abs(disc)))


@pytest.mark.parametrize("n, m, r", [(12, 1, 8.0), (3, 2, 8.0), (3, 1, 2.0), (5, 1, 10.0), (3, 1, 4.0)])
@pytest.mark.parametrize("half_line", [1, -1])
@pytest.mark.parametrize("c1, c2", [(1.0, 0.0), (0.4, 1.3)])
def test_cauchy_euler_ode(n, m, r, half_line, c1, c2):
    family = fam.cauchy_euler_family(n, m, r, fam.CauchyEulerParams(c1_h=c1, c2_h=c2, half_line=half_line))
    xs = half_line * np.geomspace(0.1, 10.0, 61)
    res = fam.cauchy_euler_residual(n, m, r, family.h, xs)
    assert np.max(np.abs(res)) < 1e-9
    assert profile_consistency_check(family.h, xs[1:-1:6]).passed


def test_cauchy_euler_reduction_identity():
    """f = phi = xi^2 substituted into the null ODE equals r times the Cauchy-Euler form."""
    n, m, r = 5, 2, 3.0
    family = fam.cauchy_euler_family(n, m, r, fam.CauchyEulerParams(c1_h=0.7, c2_h=0.2))
    xs = np.linspace(0.2, 8.0, 25)
    f, df, ddf = family.f.eval(xs)
    p, dp, ddp = family.phi.eval(xs)
    h, dh, ddh = family.h.eval(xs)
    null_ode = -r * f * p * ddh - 2 * r * f * dp * dh + ((n - 2) * f * ddp - m * p * ddf - 2 * m * dp * df) * h
    ce = xs**2 * ddh + 4 * xs * dh + fam.cauchy_euler_coefficient(n, m, r) * h
    npt.assert_allclose(null_ode, -r * xs**2 * ce, atol=1e-9 * np.max(np.abs(r * xs**2 * xs**2 * ddh)))


def test_null_families_pass_residuals():
    sd = null(4)
    fam1 = fam.exp_null_family(4, 2, 3.0, fam.ExpNullParams(A=0.2, B=0.7, c2_h=2.0))
    fam2 = fam.cauchy_euler_family(4, 2, 3.0, fam.CauchyEulerParams(c1_h=1.0, c2_h=0.5, half_line=-1))
    for family in (fam1, fam2):
        spec = spec_from_family(4, 2, 3.0, family, sd)
        xs = spec.sample_xis(51)
        assert all(s.passed for s in residual_pde(spec, xs).values())
        assert residual_ode(spec, xs).passed
