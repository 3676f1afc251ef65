import numpy as np
import numpy.testing as npt
import pytest

from qewarp import curvature as cv
from qewarp import oracle
from qewarp.errors import InvalidPotentialError, InvalidWarpingError, SingularConformalFactorError
from qewarp.geometry import Direction, Profile, Signature, WarpedSpec

from conftest import exp_profile, null, spacelike, power_law_spec, r_one_spec, timelike

ONE = Profile.constant(1.0)


def axis_spec(phi, f=ONE, h=ONE, eps=(1, 1, 1), m=1, lambda_F=0.0, rho=0.0):
    sig = Signature(eps)
    return WarpedSpec(len(eps), m, 2.0, rho, lambda_F, sig, Direction.from_alpha(sig, (1,) + (0,) * (len(eps) - 1)),
                      f, phi, h)


def test_christoffel_flat_is_zero():
    assert np.all(cv.christoffel_conformal(axis_spec(ONE), [0.1, 0.2, 0.3]) == 0.0)


def test_christoffel_exponential_phi():
    spec = axis_spec(exp_profile(1.0))
    pt = np.array([0.4, -1.0, 2.0])
    g = cv.christoffel_conformal(spec, pt)
    # gamma[i, j, k] = Gamma_ij^k, zero-based
    assert g[0, 0, 0] == pytest.approx(-1.0)
    assert g[1, 1, 0] == pytest.approx(1.0)
    assert g[0, 1, 1] == pytest.approx(-1.0)
    assert g[1, 2, 0] == 0.0 and g[1, 2, 2] == 0.0
    fd = oracle.christoffel_fd(oracle.warped_metric(spec.signature, spec.direction, spec.phi, []), pt)
    npt.assert_allclose(g, fd, atol=1e-7)


@pytest.mark.parametrize("seed", range(5))
def test_christoffel_symmetric(seed):
    case = oracle.random_case(np.random.default_rng(seed))
    g = cv.christoffel_conformal(case.spec, case.point)
    npt.assert_array_equal(g, np.transpose(g, (1, 0, 2)))


def test_hessian_flat_is_plain_second_partials():
    f = exp_profile(0.7, 2.0)
    sig, d = spacelike(4)
    spec = WarpedSpec(4, 1, 2.0, 0.0, 0.0, sig, d, f, ONE, ONE)
    pt = spec.point_for_xi(0.3)
    expected = np.outer(spec.alpha, spec.alpha) * float(f.d2(np.float64(0.3)))
    npt.assert_allclose(cv.hessian_conformal(spec, "f", pt), expected, rtol=1e-14)


def test_hessian_constant_f_is_zero():
    sig, d = timelike(3)
    spec = WarpedSpec(3, 1, 2.0, 0.0, 0.0, sig, d, Profile.constant(2.0), exp_profile(0.4), ONE)
    assert np.all(cv.hessian_conformal(spec, "f", [0.1, 0.5, -0.2]) == 0.0)


@pytest.mark.parametrize("seed", range(8))
def test_hessian_matches_definition(seed):
    case = oracle.random_case(np.random.default_rng(100 + seed))
    spec, pt = case.spec, case.point
    gam = cv.christoffel_conformal(spec, pt)
    xi = float(np.dot(spec.alpha, pt))
    for which in ("f", "h"):
        _, d1, d2 = (float(t) for t in getattr(spec, which).eval(xi))
        direct = np.outer(spec.alpha, spec.alpha) * d2 - np.einsum("ijk,k->ij", gam, spec.alpha * d1)
        hess = cv.hessian_conformal(spec, which, pt)
        npt.assert_allclose(hess, direct, atol=1e-12 * max(1.0, np.max(np.abs(direct))))
        npt.assert_allclose(hess, hess.T, atol=1e-12)


@pytest.mark.parametrize("phi", [ONE, Profile.constant(3.5), Profile.constant(-2.0)])
def test_ricci_constant_phi_is_flat(phi):
    assert np.all(cv.ricci_conformal(axis_spec(phi), [1.0, 2.0, 3.0]) == 0.0)


def test_ricci_exponential_phi_against_oracle():
    spec = axis_spec(exp_profile(1.0))
    pt = np.array([0.2, 0.1, -0.3])
    ric = cv.ricci_conformal(spec, pt)
    npt.assert_allclose(np.diag(ric), [0.0, -1.0, -1.0], atol=1e-14)
    fd = oracle.ricci_fd(oracle.warped_metric(spec.signature, spec.direction, spec.phi, []), pt)
    npt.assert_allclose(ric, fd, atol=1e-5)


def test_warped_ricci_product_of_flat_factors():
    block = cv.warped_ricci(axis_spec(ONE, m=3), [0.0, 1.0, 2.0])
    assert np.all(block.base_ricci == 0.0) and block.fiber_coeff == 0.0 and block.mixed_is_zero


@pytest.mark.parametrize("seed", range(6))
def test_warped_blocks_symmetric(seed):
    case = oracle.random_case(np.random.default_rng(200 + seed))
    block = cv.warped_ricci(case.spec, case.point)
    npt.assert_allclose(block.base_ricci, block.base_ricci.T, atol=1e-12)
    npt.assert_allclose(block.hess_h_base, block.hess_h_base.T, atol=1e-12)


@pytest.mark.parametrize("spec", [power_law_spec(), power_law_spec(5, 3, 2.0, 3.0), r_one_spec()])
def test_bakry_emery_vanishes_on_families(spec):
    for xi in spec.sample_xis(100):
        be = cv.bakry_emery(spec, spec.point_for_xi(xi))
        assert np.max(np.abs(be.base_residual)) < 1e-9 * max(1.0, np.max(np.abs(be.base)))
        assert abs(be.fiber_residual) < 1e-9 * max(1.0, abs(be.fiber_coeff))


def test_bakry_emery_constants():
    spec = axis_spec(Profile.constant(2.0), f=Profile.constant(3.0), h=Profile.constant(0.5), m=2)
    be = cv.bakry_emery(spec, [0.3, 0.3, 0.3])
    assert np.all(be.base == 0.0) and be.fiber_coeff == 0.0


def test_bakry_emery_null_exponential():
    from qewarp import families as fam

    family = fam.exp_null_family(3, 1, 2.0, fam.ExpNullParams(A=0.3, B=0.5, c2_h=0.5))
    sig, d = null(3)
    spec = WarpedSpec(3, 1, 2.0, 0.0, 0.0, sig, d, family.f, family.phi, family.h)
    for xi in np.linspace(-0.8, 0.8, 9):
        assert np.max(np.abs(cv.bakry_emery(spec, spec.point_for_xi(xi)).base_residual)) < 1e-12


def test_bakry_emery_scale_invariance_in_h():
    spec = power_law_spec()
    pt = spec.point_for_xi(spec.sample_xis(5)[2])
    a = cv.bakry_emery(spec, pt)
    b = cv.bakry_emery(spec.with_(h=spec.h.scaled(7.3)), pt)
    npt.assert_allclose(b.base, a.base, atol=1e-12)
    assert b.fiber_coeff == pytest.approx(a.fiber_coeff, abs=1e-12)


def test_laplacian_and_gradient_constant_h():
    spec = axis_spec(exp_profile(0.3), f=exp_profile(0.2))
    assert cv.laplacian_base(spec, "h", [0.1, 0, 0]) == 0.0
    assert cv.grad_norm_base(spec, "h", [0.1, 0, 0]) == 0.0


def test_laplacian_and_gradient_null_direction():
    sig, d = null(4)
    spec = WarpedSpec(4, 2, 2.0, 0.0, 0.0, sig, d, exp_profile(0.4), exp_profile(-0.3), exp_profile(1.1))
    for xi in (-1.0, 0.0, 2.0):
        assert cv.laplacian_base(spec, "h", spec.point_for_xi(xi)) == 0.0
        assert cv.grad_norm_base(spec, "h", spec.point_for_xi(xi)) == 0.0


def test_laplacian_linear_h_flat():
    h = Profile(lambda x: np.asarray(x) + 10.0, lambda x: np.ones(np.shape(x)), lambda x: np.zeros(np.shape(x)))
    spec = axis_spec(ONE, h=h)
    assert cv.laplacian_base(spec, "h", [0.5, 0, 0]) == 0.0
    assert cv.grad_norm_base(spec, "h", [0.5, 0, 0]) == 1.0


def test_laplacian_matches_trace_of_full_hessian():
    # Lap_B h = trace of the (n+m)-dimensional Hessian of h on base x_f F.
    case = oracle.random_case(np.random.default_rng(7))
    spec = case.spec
    block = cv.warped_ricci(spec, case.point)
    phi = float(spec.phi(np.float64(np.dot(spec.alpha, case.point))))
    trace = float(np.sum(spec.eps * phi**2 * np.diag(block.hess_h_base)))
    f = float(spec.f(np.float64(np.dot(spec.alpha, case.point))))
    trace += spec.m * block.hess_h_fiber_coeff / f**2
    assert cv.laplacian_base(spec, "h", case.point) == pytest.approx(trace, rel=1e-12, abs=1e-12)


def test_invalid_profiles_raise():
    zero = Profile.constant(0.0)
    with pytest.raises(SingularConformalFactorError):
        cv.ricci_conformal(axis_spec(zero), [0, 0, 0])
    with pytest.raises(InvalidWarpingError):
        cv.warped_ricci(axis_spec(ONE, f=Profile.constant(-1.0)), [0, 0, 0])
    with pytest.raises(InvalidPotentialError):
        cv.bakry_emery(axis_spec(ONE, h=Profile.constant(-1.0)), [0, 0, 0])


def test_mixed_hessian_zero_and_injected():
    spec = power_law_spec()
    pt = spec.point_for_xi(spec.sample_xis(3)[1])
    assert np.all(cv.mixed_hessian(spec, pt) == 0.0)
    assert np.max(np.abs(cv.mixed_hessian(spec, pt, fiber_slope=[0.1]))) > 0.0
