import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from critspde.field import TimeSeries, TorusGrid, from_physical, sobolev_norms
from critspde.noise import NoiseModel
from critspde.simulate import (
    BlowUpError,
    ParabolicityError,
    StepperConfig,
    StopRule,
    build_equation,
    estimate_smr_constants,
    mean_functional,
    short_time_ratio,
    simulate_path,
    step,
    strong_residual,
)
from critspde.space_index import DomainError, TimeWeightIndex


def coeffs(grid, func):
    return from_physical(grid, func(*grid.points()))


def test_symbols():
    g = TorusGrid(2, 8)
    assert np.array_equal(build_equation("heat", grid=g).symbol, -g.ksq)
    ch = build_equation("cahn-hilliard", grid=g)
    assert np.array_equal(ch.symbol, -(g.ksq**2)) and ch.order == 4
    aniso = build_equation("heat", grid=g, diffusion=np.diag([2.0, 0.5]))
    kx, ky = g.k_axes
    assert np.allclose(aniso.symbol, -(2 * kx**2 + 0.5 * ky**2))
    with pytest.raises(DomainError):
        build_equation("navier-stokes", grid=g)
    with pytest.raises(DomainError):
        build_equation("burgers", grid=g)


def test_burgers_and_cahn_hilliard_drifts():
    g = TorusGrid(1, 32)
    rhs = build_equation("burgers", grid=g)
    c = coeffs(g, np.sin)
    # -(u^2)_x for u = sin x is -sin(2x)
    assert np.allclose(rhs.drift(c), coeffs(g, lambda x: -np.sin(2 * x)), atol=1e-15)
    ch = build_equation("cahn-hilliard", grid=g)
    u = lambda x: 0.5 * np.cos(x)
    # laplacian of u^3 - u
    phi = lambda x: (0.5 * np.cos(x)) ** 3 - 0.5 * np.cos(x)
    lap = -g.ksq * coeffs(g, phi)
    assert np.allclose(ch.drift(coeffs(g, u)), lap, atol=1e-14)


def test_zero_stays_zero():
    g = TorusGrid(1, 16)
    rhs = build_equation("allen-cahn", grid=g)
    c = np.zeros(g.shape, dtype=complex)
    for scheme in ("exponential", "semi-implicit"):
        assert np.all(step(c, rhs, np.zeros(1), 0.1, scheme) == 0)


def test_exponential_exact_on_linear_modes():
    g = TorusGrid(1, 32)
    rhs = build_equation("heat", grid=g)
    c0 = coeffs(g, lambda x: np.cos(3 * x) + 0.5 * np.sin(7 * x))
    res = simulate_path(StepperConfig("exponential", 0.01, 0.5), rhs, c0)
    exact = c0 * np.exp(-g.ksq * 0.5)
    assert np.allclose(res.final[0], exact, rtol=1e-13, atol=1e-16)


def test_stop_rules():
    g = TorusGrid(1, 16)
    rhs = build_equation("heat", grid=g)
    c0 = coeffs(g, np.cos)
    cfg = StepperConfig("exponential", 0.01, 0.2)
    never = simulate_path(cfg, rhs, c0, StopRule.sup_norm(0, 2, np.inf, g))
    assert never.hit_index[0] == -1 and never.mesh.size == 21
    now = simulate_path(cfg, rhs, c0, StopRule.sup_norm(0, 2, 0.0, g))
    assert now.hit_index[0] == 0


def test_hitting_time_matches_decay():
    g = TorusGrid(1, 16)
    rhs = build_equation("heat", grid=g)
    c0 = coeffs(g, lambda x: 2 * np.cos(x))
    level = 0.5
    # ||2 cos x||_2 e^{-t} = level at t* = log(2 sqrt(pi) / level)
    t_star = math.log(2 * math.sqrt(math.pi) / level)
    dt = 0.01
    rule = StopRule(lambda t, c: -sobolev_norms(g, c, 0.0, 2.0), -level)
    res = simulate_path(StepperConfig("exponential", dt, 3.0), rhs, c0, rule)
    assert abs(res.hit_index[0] - t_star / dt) <= 1


def test_strong_residual_modes():
    g = TorusGrid(1, 32)
    rhs = build_equation("allen-cahn", grid=g)
    c0 = coeffs(g, lambda x: 0.5 * np.sin(x))
    res = simulate_path(StepperConfig("semi-implicit", 0.01, 0.5), rhs, c0)
    assert strong_residual(res.series(0), rhs) < 1e-13
    zero = TimeSeries(res.mesh, np.zeros_like(res.states[:, 0]), g)
    assert strong_residual(zero, build_equation("heat", grid=g)) == 0.0
    # an unrelated series leaves an order-one defect
    junk = TimeSeries(res.mesh, res.states[::-1, 0], g)
    assert strong_residual(junk, rhs) > 0.1
    with pytest.raises(DomainError):
        strong_residual(res.series(0), rhs, quadrature="simpson")


def test_trapezoid_residual_is_first_order():
    g = TorusGrid(1, 32)
    rhs = build_equation("allen-cahn", grid=g)
    c0 = coeffs(g, lambda x: 0.5 * np.sin(x))
    dts = [0.02, 0.01, 0.005]
    errs = []
    for dt in dts:
        res = simulate_path(StepperConfig("semi-implicit", dt, 0.5), rhs, c0)
        errs.append(strong_residual(res.series(0), rhs, quadrature="trapezoid"))
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert 0.8 < slope < 1.2


def test_residual_with_noise_uses_increments():
    g = TorusGrid(1, 16)
    rhs = build_equation("heat", grid=g, noise=NoiseModel("gradient", coeffs=np.array([[0.5]])))
    c0 = coeffs(g, np.cos)
    res = simulate_path(StepperConfig("semi-implicit", 0.01, 0.3, paths=2), rhs, c0, keep_increments=True)
    for m in range(2):
        assert strong_residual(res.series(m), rhs, res.increments[m]) < 1e-13
    # the wrong path's increments leave a visible defect
    assert strong_residual(res.series(0), rhs, res.increments[1]) > 1e-3


def test_parabolicity_gate():
    g = TorusGrid(1, 16)
    with pytest.raises(ParabolicityError):
        build_equation("heat", grid=g, noise=NoiseModel("gradient", coeffs=np.array([[1.0, 1.0]])))
    rhs = build_equation("heat", grid=g, noise=NoiseModel("gradient", coeffs=np.array([[1.0, 1.0]])), check_parabolicity=False)
    assert rhs.margin == pytest.approx(0.0)


def test_blow_up_is_reported():
    g = TorusGrid(1, 16)
    rhs = build_equation("reaction-diffusion", {"m": 3, "coef": -1.0}, g)
    c0 = coeffs(g, lambda x: 5 + 0 * x)
    res = simulate_path(StepperConfig("semi-implicit", 1e-3, 1.0), rhs, c0)
    assert res.blowup_step[0] > 0 and np.isnan(res.final).all()
    # the ODE u' = u^3 from 5 blows up at t = 1/50
    assert abs(res.blowup_step[0] * 1e-3 - 0.02) < 0.01
    with pytest.raises(BlowUpError) as err:
        simulate_path(StepperConfig("semi-implicit", 1e-3, 1.0), rhs, c0, raise_on_blowup=True)
    assert err.value.step == res.blowup_step[0]


def test_paths_are_reproducible_and_offset():
    g = TorusGrid(1, 16)
    rhs = build_equation("heat", grid=g, noise=NoiseModel("colored", delta=1.0, sigma=0.3))
    c0 = coeffs(g, np.cos)
    cfg = StepperConfig("exponential", 0.01, 0.1, seed=5, paths=3)
    a = simulate_path(cfg, rhs, c0)
    b = simulate_path(cfg, rhs, c0)
    assert np.array_equal(a.states, b.states)
    one = simulate_path(StepperConfig("exponential", 0.01, 0.1, seed=5, paths=1), rhs, c0, path_offset=2)
    assert np.array_equal(one.states[:, 0], a.states[:, 2])
    # chunking does not change the path
    c = simulate_path(cfg, rhs, c0, chunk=3)
    assert np.array_equal(c.states, a.states)


def test_mean_functionals():
    g = TorusGrid(1, 32)
    c0 = coeffs(g, lambda x: 0.3 + 0.4 * np.sin(x) + 0.2 * np.cos(2 * x))
    const = TimeSeries(np.array([0.0, 1.0]), np.stack([c0, c0]), g)
    assert np.all(mean_functional(const) == np.real(c0[0]))
    crd = build_equation("conservative-rd", {"h": 2.0}, g)
    res = simulate_path(StepperConfig("semi-implicit", 1e-3, 1.0), crd, c0)
    assert np.max(np.abs(mean_functional(res.series(0)) - np.real(c0[0]))) <= 1e-10
    mcac = build_equation("mass-conservative-ac", grid=g)
    assert mcac.drift(c0)[0] == 0
    res = simulate_path(StepperConfig("semi-implicit", 1e-3, 0.5), mcac, c0)
    assert np.all(np.diff(mean_functional(res.series(0))) == 0)


def test_smr_constants():
    g = TorusGrid(1, 16)
    rhs = build_equation("heat", grid=g)
    tw = TimeWeightIndex(2, 0)
    assert estimate_smr_constants(rhs, tw, 0.0) == (0.0, 0.0)
    n = 200
    f1 = np.repeat(coeffs(g, np.cos)[None], n, axis=0)
    f2 = np.repeat(coeffs(g, lambda x: np.sin(4 * x))[None], n, axis=0)
    k1, _ = estimate_smr_constants(rhs, tw, 0.0, [f1], dt=5e-3, T=1.0)
    k12, _ = estimate_smr_constants(rhs, tw, 0.0, [f1, f2], dt=5e-3, T=1.0)
    assert 0 < k1 <= k12
    # refinement stability of the single-probe ratio
    fine = TorusGrid(1, 32)
    rhs_f = build_equation("heat", grid=fine)
    f1f = np.repeat(coeffs(fine, np.cos)[None], 2 * n, axis=0)
    kf, _ = estimate_smr_constants(rhs_f, tw, 0.0, [f1f], dt=2.5e-3, T=1.0)
    assert abs(kf / k1 - 1) < 0.1
    g_bank = coeffs(g, np.cos)[None]
    _, ks = estimate_smr_constants(rhs, tw, 0.0, sto_probes=[g_bank], dt=1e-2, T=1.0, paths=8)
    assert ks > 0


def test_short_time_ratio_vanishes():
    g = TorusGrid(1, 16)
    rhs = build_equation("heat", grid=g)
    f = coeffs(g, lambda x: 1 + np.cos(x))
    ratios = short_time_ratio(rhs, lambda t: f, [1.0, 0.1, 0.01, 0.001], TimeWeightIndex(2, 0), steps=100)
    assert np.all(np.diff(ratios) < 0) and ratios[-1] < 0.01


def test_instantaneous_regularization():
    sups = []
    for n in (64, 128, 256):
        g = TorusGrid(1, n)
        k = np.abs(g.int_modes).astype(float)
        c0 = np.where(k > 0, np.maximum(k, 1) ** (-0.4), 0.0).astype(complex)
        c0[n // 2] = 0.0
        rhs = build_equation("heat", grid=g)
        res = simulate_path(StepperConfig("exponential", 1e-3, 0.2), rhs, c0)
        late = res.mesh >= 0.05
        h1 = sobolev_norms(g, res.states[late, 0], 1.0, 2.0)
        assert np.all(np.isfinite(h1))
        sups.append(h1.max())
    assert max(sups) / min(sups) < 1.01


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), dt=st.sampled_from([1e-3, 1e-2]))
def test_semi_implicit_heat_is_contractive(seed, dt):
    g = TorusGrid(1, 16)
    rng = np.random.default_rng(seed)
    c0 = from_physical(g, rng.standard_normal(16))
    rhs = build_equation("heat", grid=g)
    res = simulate_path(StepperConfig("semi-implicit", dt, 20 * dt), rhs, c0)
    norms = sobolev_norms(g, res.states[:, 0], 0.0, 2.0)
    assert np.all(np.diff(norms) <= 1e-12)
    assert np.allclose(mean_functional(res.series(0)), np.real(c0[0]))
