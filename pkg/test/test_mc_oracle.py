import logging
import math
from dataclasses import replace

import numpy as np
import pytest

from coxjumps.errors import ConfigurationError
from coxjumps.hazard_models import CIR, CMY, IGOU, CgfQuery, GammaOU, LevyKernel, cgf
from coxjumps.kernels import CmyDensity, ConstantKernel, ExponentialKernel, SeparableKernel
from coxjumps.mc_oracle import (
    McConfig,
    block_rng,
    mc_characteristic_function,
    mc_jump_times,
    mc_mean_increment,
    mc_survival,
    mc_survival_many,
    poisson_tail,
    sample_increments,
    sample_peaks,
    simulate_lambda,
)
from coxjumps.survival_bell import survival_probabilities

SIGMAS = 4.0
CMY_DENSITY = CmyDensity(1.0, 2.0, 0.5)


@pytest.fixture
def gamma_ou():
    return GammaOU(theta=1.0, a=2.0, b=4.0, lambda0=0.5)


@pytest.fixture
def small_run():
    return McConfig(n_paths=20_000, seed=7, time_step=1e-2, jump_trunc_eps=1e-3, block_size=5_000)


def assert_brackets(model, t, T, config, allowance=0.0):
    ns = [1, 2, 3]
    analytic = dict(survival_probabilities(model, t, T, ns))
    for n, estimate in zip(ns, mc_survival_many(model, t, T, ns, config=config)):
        gap = abs(estimate.mean - analytic[n].probability)
        assert gap <= SIGMAS * estimate.std_error + allowance, (n, estimate, analytic[n].probability)


def test_poisson_tail():
    values = poisson_tail(np.array([0.0, 2.0]), 3)
    assert np.allclose(values, [1.0, 5 * math.exp(-2)], rtol=1e-14)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        McConfig(n_paths=10)
    with pytest.raises(ConfigurationError):
        McConfig(seed=-1)
    with pytest.raises(ConfigurationError):
        McConfig(jump_trunc_eps=0.0)
    config = McConfig(n_paths=25_000, block_size=10_000)
    assert config.n_blocks == 3
    assert [config.block_length(b) for b in range(3)] == [10_000, 10_000, 5_000]


def test_simulate_lambda_blocks(gamma_ou):
    config = McConfig(n_paths=1_200, seed=3, block_size=500)
    blocks = list(simulate_lambda(gamma_ou, 0.0, 1.0, config))
    assert [len(b) for b in blocks] == [500, 500, 200]
    assert all(np.all(b > 0) for b in blocks)


def test_reproducible_across_workers(gamma_ou):
    serial = McConfig(n_paths=2_000, seed=11, block_size=500)
    parallel = McConfig(n_paths=2_000, seed=11, block_size=500, workers=2)
    first = mc_survival(gamma_ou, 0.0, 1.0, 2, config=serial)
    assert mc_survival(gamma_ou, 0.0, 1.0, 2, config=serial) == first
    assert mc_survival(gamma_ou, 0.0, 1.0, 2, config=parallel).mean == first.mean
    other_seed = mc_survival(gamma_ou, 0.0, 1.0, 2, config=McConfig(n_paths=2_000, seed=12, block_size=500))
    assert other_seed.mean != first.mean
    assert first.seed == 11 and first.n_paths == 2_000 and len(first.model_digest) == 16


def test_gamma_ou_bracket(gamma_ou, small_run):
    assert_brackets(gamma_ou, 0.0, 1.0, small_run)


def test_ig_ou_bracket(small_run):
    assert_brackets(IGOU(1.0, 1.0, 2.0, 0.5), 0.0, 1.0, small_run, allowance=1e-3)


def test_cir_bracket():
    config = McConfig(n_paths=20_000, seed=5, time_step=5e-3, block_size=5_000)
    assert_brackets(CIR(2.0, 1.0, 0.5, 1.0), 0.0, 1.0, config, allowance=1e-3)


def test_cmy_bracket(small_run):
    assert_brackets(CMY(1.0, 2.0, 0.5, ConstantKernel(1.0)), 0.0, 1.0, small_run)


def test_uncompensated_gamma_bracket(small_run):
    # first-order truncation remainder: eps must be far below the mean jump
    config = replace(small_run, jump_trunc_eps=1e-6)
    model = CMY(1.0, 2.0, 0.0, ConstantKernel(1.0), lambda_t=0.2, compensated=False)
    assert_brackets(model, 0.0, 1.0, config)


@pytest.mark.parametrize("model_name", ["gamma_ou", "ig_ou"])
def test_ou_mean_increment(model_name, small_run):
    model = GammaOU(1.0, 2.0, 4.0, 0.5) if model_name == "gamma_ou" else IGOU(1.0, 1.0, 2.0, 0.5)
    tau = 1.0
    weight = -math.expm1(-model.theta * tau) / model.theta
    expected = model.lambda0 * weight + model.a / model.b * (tau - weight)
    estimate = mc_mean_increment(model, 0.0, tau, small_run)
    assert abs(estimate.mean - expected) <= SIGMAS * estimate.std_error + 1e-4


def test_compensated_increment_is_centred(small_run):
    estimate = mc_mean_increment(CMY(1.0, 2.0, 0.5, ConstantKernel(1.0)), 0.0, 1.0, small_run)
    assert abs(estimate.mean) <= SIGMAS * estimate.std_error


def test_characteristic_function(gamma_ou, small_run):
    us = [0.5, 1.0, -2.0, 3.0]
    for est in mc_characteristic_function(gamma_ou, 0.0, 1.0, us, small_run):
        exact = np.exp(cgf(gamma_ou, CgfQuery(est.u, 0.0, 1.0)))
        assert abs(est.value.real - exact.real) <= SIGMAS * est.std_error_re + 1e-12
        assert abs(est.value.imag - exact.imag) <= SIGMAS * est.std_error_im + 1e-12


def test_jump_time_estimator(gamma_ou, small_run):
    for n in (1, 2):
        smoothed = mc_survival(gamma_ou, 0.0, 1.5, n, config=small_run)
        direct = mc_jump_times(gamma_ou, 1.5, n, config=small_run)
        combined = math.hypot(smoothed.std_error, direct.std_error)
        assert abs(smoothed.mean - direct.mean) <= SIGMAS * combined
        assert smoothed.std_error <= direct.std_error


def test_truncation_too_coarse():
    config = McConfig(n_paths=1_000, jump_trunc_eps=0.5)
    with pytest.raises(ConfigurationError, match="jump_trunc_eps"):
        mc_survival(CMY(1.0, 2.0, 0.5, ConstantKernel(1.0)), 0.0, 1.0, 1, config=config)


@pytest.mark.parametrize(
    "model, time_step, eps",
    [
        (CIR(2.0, 1.0, 0.5, 1.0), 5e-3, 1e-3),
        (GammaOU(1.0, 2.0, 4.0, 0.5), 1e-2, 1e-3),
        (IGOU(1.0, 1.0, 2.0, 0.5), 1e-2, 1e-3),
        (CMY(1.0, 2.0, 0.0, ConstantKernel(1.0), lambda_t=0.2, compensated=False), 1e-2, 1e-6),
    ],
    ids=["cir", "gamma_ou", "ig_ou", "gamma_uncompensated"],
)
def test_jump_time_estimator_matches_survival(model, time_step, eps):
    config = McConfig(n_paths=20_000, seed=13, time_step=time_step, jump_trunc_eps=eps, block_size=5_000)
    for n in (1, 2, 3):
        smoothed = mc_survival(model, 0.0, 1.0, n, config=config)
        direct = mc_jump_times(model, 1.0, n, config=config)
        combined = math.hypot(smoothed.std_error, direct.std_error)
        assert abs(smoothed.mean - direct.mean) <= 3 * combined, (n, smoothed, direct)
        assert smoothed.std_error <= direct.std_error


def test_compensated_path_peak(small_run):
    model = CMY(1.0, 2.0, 0.5, ConstantKernel(1.0))
    terminal = sample_increments(model, 0.0, 1.0, small_run, block_rng(3, 0), 2_000)
    peak = sample_peaks(model, 0.0, 1.0, small_run, block_rng(3, 0), 2_000)
    assert np.all(peak >= 0.0)
    assert np.all(peak >= terminal - 1e-8)
    # the compensated path drifts down between jumps
    assert np.mean(peak > terminal + 1e-3) > 0.5


def test_compensated_jump_times_use_running_maximum(small_run, caplog):
    model = CMY(1.0, 2.0, 0.5, ConstantKernel(1.0))
    smoothed = mc_survival(model, 0.0, 1.0, 1, config=small_run)
    with caplog.at_level(logging.WARNING, logger="coxjumps.mc_oracle"):
        direct = mc_jump_times(model, 1.0, 1, config=small_run)
    assert "compensated" in caplog.text
    assert 0.0 <= direct.mean <= 1.0
    # Lambda_T can be negative, so the Poisson-mixture value exceeds 1
    assert smoothed.mean > 1.0
    assert smoothed.mean - direct.mean > SIGMAS * math.hypot(smoothed.std_error, direct.std_error)


CHARACTERISTIC_GRID = [0.25, 0.5, 1.0, -2.0, 3.0]


@pytest.mark.parametrize(
    "model, time_step, allowance",
    [
        (CIR(2.0, 1.0, 0.5, 1.0), 5e-3, 1e-3),
        (IGOU(1.0, 1.0, 2.0, 0.5), 1e-2, 1e-3),
        (CMY(1.0, 2.0, 0.5, ConstantKernel(1.0)), 1e-2, 1e-3),
        (
            LevyKernel(SeparableKernel(ExponentialKernel(1.0, 1.0), 1.0), CMY_DENSITY, CMY_DENSITY.z_domain),
            1e-2,
            1e-3,
        ),
    ],
    ids=["cir", "ig_ou", "cmy", "levy_kernel"],
)
def test_characteristic_function_all_models(model, time_step, allowance):
    config = McConfig(n_paths=20_000, seed=17, time_step=time_step, jump_trunc_eps=1e-3, block_size=5_000)
    for est in mc_characteristic_function(model, 0.0, 1.0, CHARACTERISTIC_GRID, config):
        exact = np.exp(cgf(model, CgfQuery(est.u, 0.0, 1.0)))
        assert abs(est.value.real - exact.real) <= SIGMAS * est.std_error_re + allowance, est
        assert abs(est.value.imag - exact.imag) <= SIGMAS * est.std_error_im + allowance, est


@pytest.mark.parametrize("compensated", [True, False])
def test_zero_kernel_samples(compensated, small_run):
    density = CmyDensity(1.0, 2.0, 0.5)
    model = LevyKernel(
        SeparableKernel(ConstantKernel(0.0), 1.0), density, density.z_domain, lambda_t=0.3, compensated=compensated
    )
    for block in simulate_lambda(model, 0.0, 1.0, replace(small_run, n_paths=1_000, block_size=500)):
        assert np.all(block == 0.0)
    estimate = mc_survival(model, 0.0, 1.0, 2, config=small_run)
    assert estimate.mean == pytest.approx(1.3 * math.exp(-0.3), rel=1e-14)
    assert estimate.std_error == 0.0


@pytest.mark.parametrize(
    "model",
    [
        CIR(2.0, 1.0, 0.5, 1.0),
        GammaOU(1.0, 2.0, 4.0, 0.5),
        IGOU(1.0, 1.0, 2.0, 0.5),
        CMY(1.0, 2.0, 0.5, ConstantKernel(1.0), lambda_t=0.4),
    ],
    ids=["cir", "gamma_ou", "ig_ou", "cmy"],
)
def test_degenerate_window_has_no_spread(model, small_run):
    estimate = mc_survival(model, 0.5, 0.5, 2, config=small_run)
    lam = model.accumulated_hazard
    assert estimate.mean == pytest.approx(math.exp(-lam) * (1 + lam), rel=1e-14)
    assert estimate.std_error == 0.0
