import math

import numpy as np
import pytest
from scipy import integrate

from coxjumps.errors import DomainError
from coxjumps.hazard_models import (
    CIR,
    CMY,
    IGOU,
    CgfQuery,
    GammaOU,
    LevyKernel,
    analyticity_radius,
    as_levy_kernel,
    cgf,
    cgf_by_quadrature,
    cgf_derivatives_at_i,
    kernel_integrals,
)
from coxjumps.kernels import CmyDensity, ConstantKernel, ExponentialKernel, SeparableKernel
from coxjumps.numerics import CauchySettings, cauchy_derivatives


def cir_bond(theta, kappa, sigma, lam, tau):
    """E[exp(-int_0^tau lambda_s ds)] of a CIR intensity (affine bond price)."""
    gamma = math.sqrt(theta**2 + 2 * sigma**2)
    grow = math.expm1(gamma * tau)
    denom = (gamma + theta) * grow + 2 * gamma
    B = 2 * grow / denom
    A = (2 * theta * kappa / sigma**2) * math.log(2 * gamma * math.exp((theta + gamma) * tau / 2) / denom)
    return math.exp(A - B * lam)


def mean_by_cauchy(model, t, T):
    """E[Lambda_T | F_t] as Psi'(0) / i."""
    derivs = cauchy_derivatives(
        lambda u: cgf(model, CgfQuery(u, t, T), check_branch=False),
        0.0,
        1,
        CauchySettings(radius=0.1, nodes=32),
    )
    return (derivs[1] / 1j).real


@pytest.fixture
def cir():
    return CIR(theta=2.0, kappa=1.0, sigma=0.5, lambda_t=1.0)


@pytest.fixture
def gamma_ou():
    return GammaOU(theta=1.0, a=2.0, b=4.0, lambda0=0.5)


@pytest.fixture
def ig_ou():
    return IGOU(theta=1.0, a=1.0, b=2.0, lambda0=0.5)


@pytest.fixture
def cmy():
    return CMY(C=1.0, M=2.0, Y=0.5, sigma_fn=ConstantKernel(1.0))


def test_cgf_vanishes_at_zero(cir, gamma_ou, ig_ou, cmy):
    for model in (cir, gamma_ou, ig_ou, cmy):
        assert cgf(model, CgfQuery(0.0, 0.0, 1.0)) == 0


def test_cgf_degenerate_window():
    model = CIR(2.0, 1.0, 0.5, 1.0, hazard_t=0.7)
    assert cgf(model, CgfQuery(2.0, 1.0, 1.0)) == pytest.approx(1.4j)


def test_cir_matches_bond_price(cir):
    value = cgf(cir, CgfQuery(1j, 0.0, 1.5))
    assert abs(value.imag) < 1e-12
    assert math.exp(value.real) == pytest.approx(cir_bond(2.0, 1.0, 0.5, 1.0, 1.5), rel=1e-12)


def test_cir_mean(cir):
    tau = 1.0
    expected = cir.kappa * tau + (cir.lambda_t - cir.kappa) * -math.expm1(-cir.theta * tau) / cir.theta
    assert mean_by_cauchy(cir, 0.0, tau) == pytest.approx(expected, rel=1e-8)


def test_cir_positivity_condition():
    with pytest.raises(DomainError, match="theta\\*kappa"):
        CIR(theta=0.5, kappa=0.5, sigma=1.0, lambda_t=1.0)


@pytest.mark.parametrize("u", [1j, 0.7, -1.3 + 0.2j, 2.5, 0.5j])
def test_ou_closed_forms_match_quadrature(gamma_ou, ig_ou, u):
    for model in (gamma_ou, ig_ou):
        q = CgfQuery(u, 0.0, 1.3)
        assert cgf(model, q) == pytest.approx(cgf_by_quadrature(model, q), rel=1e-9, abs=1e-12)


def test_ou_removable_singularity(gamma_ou):
    # iu = theta * b
    q = CgfQuery(-4j, 0.0, 0.1)
    assert cgf(gamma_ou, q) == pytest.approx(cgf_by_quadrature(gamma_ou, q), rel=1e-9)


@pytest.mark.parametrize("model_name", ["gamma_ou", "ig_ou"])
def test_ou_mean(model_name, request):
    model = request.getfixturevalue(model_name)
    tau = 2.0
    weight = -math.expm1(-model.theta * tau) / model.theta
    expected = model.lambda0 * weight + model.a / model.b * (tau - weight)
    assert mean_by_cauchy(model, 0.0, tau) == pytest.approx(expected, rel=1e-8)


def test_cmy_transform_undefined(cmy):
    with pytest.raises(DomainError):
        cgf(cmy, CgfQuery(-5j, 0.0, 1.0))


def test_reversed_window(cir):
    with pytest.raises(DomainError):
        CgfQuery(1j, 1.0, 0.5)
    with pytest.raises(DomainError):
        cgf_derivatives_at_i(cir, 1.0, 0.5, 2)


def test_analyticity_radius(gamma_ou, ig_ou, cmy):
    assert analyticity_radius(gamma_ou, 0.0, 1.0, cap=10.0) == pytest.approx(4.5)
    assert analyticity_radius(ig_ou, 0.0, 1.0, cap=10.0) == pytest.approx(0.9)
    assert analyticity_radius(cmy, 0.0, 1.0) == 0.25
    assert analyticity_radius(cmy, 0.0, 1.0, cap=10.0) == pytest.approx(2.7)


def test_cmy_closed_forms_match_generic_kernel():
    for Y in (-0.5, 0.0, 0.5):
        for compensated in (True, False):
            model = CMY(1.0, 2.0, Y, ConstantKernel(0.8), compensated=compensated)
            closed = kernel_integrals(model, 0.0, 1.0, 4)
            generic = kernel_integrals(as_levy_kernel(model), 0.0, 1.0, 4)
            assert generic.log_m0 == pytest.approx(closed.log_m0, rel=1e-7)
            assert generic.first == pytest.approx(closed.first, rel=1e-7)
            assert generic.powers == pytest.approx(closed.powers, rel=1e-7)


def test_cmy_cgf_matches_generic_kernel():
    model = CMY(1.0, 2.0, 0.5, ExponentialKernel(1.0, 1.0))
    q = CgfQuery(0.8 + 0.3j, 0.0, 1.0)
    assert cgf(as_levy_kernel(model), q) == pytest.approx(cgf(model, q), rel=1e-7)


def test_levy_derivatives_match_cauchy(cmy):
    derivs = cgf_derivatives_at_i(cmy, 0.0, 1.0, 6)
    assert derivs.diagnostics["route"] == "kernel_integrals"
    assert derivs.n == 7
    numeric = cauchy_derivatives(lambda u: cgf(cmy, CgfQuery(u, 0.0, 1.0)), 1j, 6)
    assert derivs.c0 == pytest.approx(numeric[0].real, rel=1e-10)
    for k in range(1, 7):
        assert derivs.c[k - 1] == pytest.approx((numeric[k] / 1j**k).real, rel=1e-6)


def test_numeric_derivatives_are_real(cir, gamma_ou, ig_ou):
    for model in (cir, gamma_ou, ig_ou):
        derivs = cgf_derivatives_at_i(model, 0.0, 1.0, 5)
        assert derivs.diagnostics["route"] == "cauchy"
        assert len(derivs.c) == 5
        assert all(np.isfinite(derivs.c))
        # mean and variance of the exponentially tilted hazard
        assert derivs.c[0] > 0 and derivs.c[1] > 0


def test_cir_second_survival_term(cir):
    # E[Lambda e^{-Lambda}] = -d/dx E[e^{-x Lambda}] at x = 1; x Lambda is an integrated CIR
    tau, h = 1.0, 1e-5

    def scaled(x):
        return cir_bond(cir.theta, x * cir.kappa, math.sqrt(x) * cir.sigma, x * cir.lambda_t, tau)

    expected = -(scaled(1 + h) - scaled(1 - h)) / (2 * h)
    derivs = cgf_derivatives_at_i(cir, 0.0, tau, 1)
    assert math.exp(derivs.c0) * derivs.c[0] == pytest.approx(expected, rel=1e-7)


def test_degenerate_derivatives():
    model = CIR(2.0, 1.0, 0.5, 1.0, hazard_t=2.0)
    derivs = cgf_derivatives_at_i(model, 1.0, 1.0, 3)
    assert derivs.c0 == pytest.approx(-2.0)
    assert derivs.c == (2.0, 0.0, 0.0)
    assert derivs.diagnostics["route"] == "closed_form"


def gamma_ou_tilted_cumulant(model, tau, k):
    """c_k of a Gamma-OU hazard from the k-th derivative of its Levy exponent."""
    th, a, b = model.theta, model.a, model.b

    def integrand(r):
        w = -math.expm1(-th * r) / th
        return w**k / (b + w) ** (k + 1)

    value = th * a * b * math.factorial(k) * integrate.quad(integrand, 0.0, tau, epsrel=1e-13, epsabs=0)[0]
    if k == 1:
        value += model.lambda0 * -math.expm1(-th * tau) / th
    return value


def test_gamma_ou_derivatives_up_to_order_32(gamma_ou):
    derivs = cgf_derivatives_at_i(gamma_ou, 0.0, 1.0, 32)
    assert derivs.diagnostics["route"] == "cauchy"
    assert derivs.diagnostics["radius"] == pytest.approx(4.0)
    for k in range(1, 33):
        # round-off of the circle sum grows like k!/r^k
        rel = 1e-6 if k <= 16 else 1e-3
        assert derivs.c[k - 1] == pytest.approx(gamma_ou_tilted_cumulant(gamma_ou, 1.0, k), rel=rel)


@pytest.mark.parametrize("model_name", ["cir", "gamma_ou", "ig_ou"])
def test_default_circle_matches_small_circle(model_name, request):
    model = request.getfixturevalue(model_name)
    wide = cgf_derivatives_at_i(model, 0.0, 1.0, 4)
    small = cgf_derivatives_at_i(model, 0.0, 1.0, 4, cauchy=CauchySettings(radius=0.25, nodes=64))
    assert wide.diagnostics["radius"] > small.diagnostics["radius"]
    assert wide.c == pytest.approx(small.c, rel=1e-7)


@pytest.fixture
def levy_kernel(cmy):
    return as_levy_kernel(cmy)


@pytest.mark.parametrize("model_name", ["cir", "gamma_ou", "ig_ou", "cmy", "levy_kernel"])
@pytest.mark.parametrize("u", [0.3, 1.7, 4.0, 0.8 + 0.3j])
def test_conjugate_symmetry(model_name, u, request):
    # Psi(-conj(u)) = conj(Psi(u)) for a real-valued hazard
    model = request.getfixturevalue(model_name)
    value = cgf(model, CgfQuery(u, 0.0, 1.0))
    mirrored = cgf(model, CgfQuery(-complex(u).conjugate(), 0.0, 1.0))
    assert mirrored == pytest.approx(value.conjugate(), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("compensated", [True, False])
def test_zero_kernel_cgf(compensated):
    density = CmyDensity(1.0, 2.0, 0.5)
    model = LevyKernel(
        sigma_fn=SeparableKernel(ConstantKernel(0.0), 1.0),
        levy_density=density,
        z_domain=density.z_domain,
        lambda_t=0.3,
        compensated=compensated,
    )
    for u in (0.5, -2.0, 1j, 1.5 + 0.5j):
        assert cgf(model, CgfQuery(u, 0.0, 1.0)) == pytest.approx(0.3j * u, abs=1e-14)
