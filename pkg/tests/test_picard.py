import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from critspde.criticality import BurgersWhite, ParamPoint, growth_terms
from critspde.field import TimeSeries, TorusGrid, from_physical, xfrak_norm
from critspde.noise import NoiseModel, WienerBank
from critspde.picard import (
    ConfigurationError,
    Cutoff,
    SplitRHS,
    TruncatedProblem,
    TruncationSpaces,
    contraction_factor,
    empirical_lipschitz,
    fixed_point_residual,
    linear_solve,
    phi_n_truncation,
    picard_iterate,
    psi_truncation,
    theta_truncation,
    truncated_rhs,
    xfrak_terms,
    xi_cutoff,
)
from critspde.simulate import build_equation
from critspde.space_index import DomainError, TimeWeightIndex

TW = TimeWeightIndex(4, 0)


def burgers_spaces():
    fam = BurgersWhite(3, Fraction(21, 20))
    pt = ParamPoint(1, 4, 3, 0, Fraction(3, 5))
    return TruncationSpaces(fam.pair(pt), TW, tuple(xfrak_terms(growth_terms(fam, pt)[:1], TW)))


def burgers_problem(n=32, dt=1e-3, steps=50, lam=0.5, amp=0.05, seed=0, path=0, sigma=0.1):
    grid = TorusGrid(1, n)
    full = build_equation("burgers", None, grid, NoiseModel("colored", delta=1.0, sigma=sigma))
    lin = build_equation("heat", None, grid)
    x = grid.points()[0]
    w0 = from_physical(grid, amp * (np.sin(x) + 0.5 * np.cos(2 * x)))
    dw = WienerBank(full.n_drivers, dt, seed).increments(0, steps, [path])[0]
    gdw = full.noise(np.zeros((steps,) + grid.shape, dtype=complex), dw)
    prob = TruncatedProblem(lin, SplitRHS(critical_drift=full.drift), burgers_spaces(), w0, dt, steps, lam, gdw=gdw)
    return prob, full, dw


def test_xi_examples():
    assert xi_cutoff(0.0, 0.3) == 1.0
    assert xi_cutoff(0.45, 0.3) == pytest.approx(0.5)
    assert xi_cutoff(10.0, 0.3) == 0.0
    with pytest.raises(DomainError):
        xi_cutoff(1.0, 0.0)
    with pytest.raises(DomainError):
        Cutoff(1.5)
    assert Cutoff(1.5, allow_large=True)(3.0) == 0.0


@given(a=st.floats(0, 10), b=st.floats(0, 10), lam=st.floats(0.01, 5))
def test_xi_is_lipschitz(a, b, lam):
    assert abs(xi_cutoff(a, lam) - xi_cutoff(b, lam)) <= abs(a - b) / lam + 1e-12
    assert 0.0 <= xi_cutoff(a, lam) <= 1.0


def test_xfrak_terms_skip_subcritical():
    terms = burgers_spaces().terms
    assert len(terms) == 1
    r, rr, beta, phi = terms[0]
    assert 1 / r + 1 / (rr) > 0 and beta == phi


def test_theta_constant_series_is_one():
    prob, _, _ = burgers_problem()
    grid = prob.rhs.grid
    mesh = prob.mesh
    # a tiny constant path equal to the reference point
    w0 = prob.w0 * 1e-3
    s = TimeSeries(mesh, np.broadcast_to(w0, (mesh.size,) + grid.shape).copy(), grid, TW)
    vals = theta_truncation(None, w0, s, 0.5, prob.spaces)
    assert np.all(vals == 1.0)
    assert theta_truncation(mesh[10], w0, s, 0.5, prob.spaces) == 1.0


def test_truncations_are_monotone_and_killed():
    prob, _, _ = burgers_problem()
    grid = prob.rhs.grid
    mesh = prob.mesh
    growth = np.exp(40 * mesh).reshape(-1, 1)
    s = TimeSeries(mesh, growth * prob.w0[None], grid, TW)
    for vals in (
        theta_truncation(None, prob.w0, s, 0.5, prob.spaces),
        psi_truncation(None, prob.w0, s, 0.5, prob.spaces),
        phi_n_truncation(None, s, 1, prob.spaces),
    ):
        assert np.all((vals >= 0) & (vals <= 1))
        assert np.all(np.diff(vals) <= 0)
    th = theta_truncation(None, prob.w0, s, 0.5, prob.spaces)
    assert th[0] == 1.0 and th[-1] == 0.0
    first = int(np.argmax(th == 0))
    assert np.all(th[first:] == 0)


def test_theta_matches_recomputation():
    prob, _, _ = burgers_problem()
    grid = prob.rhs.grid
    mesh = prob.mesh
    s = TimeSeries(mesh, np.exp(10 * mesh).reshape(-1, 1) * prob.w0[None], grid, TW)
    sp = prob.spaces
    tr = sp.trace_index()
    from critspde.field import sobolev_norms

    for j in (5, 20, 50):
        part = TimeSeries(mesh[: j + 1], s.states[: j + 1], grid, TW)
        xf = float(xfrak_norm(part, sp.terms, sp.pair, causal=True))
        dist = float(np.max(sobolev_norms(grid, part.states - prob.w0, float(tr.s), float(tr.q))))
        expected = xi_cutoff(xf + dist, 0.5)
        assert theta_truncation(mesh[j], prob.w0, s, 0.5, sp) == pytest.approx(expected, abs=1e-12)


def test_truncated_rhs_inside_region_reproduces_drift():
    prob, full, _ = burgers_problem(lam=1e6)
    grid = prob.rhs.grid
    v = np.broadcast_to(prob.w0, (prob.n_steps + 1,) + grid.shape).copy()
    v = v * (1 + prob.mesh).reshape(-1, 1)
    F, G, f, g = truncated_rhs(prob, v)
    assert np.allclose(F + f, full.drift(v[:-1]), atol=1e-15)
    assert np.all(G == 0) and np.array_equal(g, prob.gdw)


def test_truncated_rhs_killed_leaves_lipschitz_part():
    prob, _, _ = burgers_problem(lam=1e-8)
    grid = prob.rhs.grid
    v = np.broadcast_to(prob.w0, (prob.n_steps + 1,) + grid.shape).copy()
    F, _, f, _ = truncated_rhs(prob, v)
    # theta = 0 away from t = 0 and the Burgers drift vanishes at zero
    assert np.all(F[1:] == 0) and np.all(f == 0)
    prob.split = SplitRHS(critical_drift=prob.split.critical_drift, lipschitz_drift=lambda c: 0.5 * c)
    F, _, _, _ = truncated_rhs(prob, v)
    assert np.allclose(F[1:], 0.5 * v[1:-1])


def test_missing_split_is_a_configuration_error():
    prob, _, _ = burgers_problem()
    prob.split = None
    with pytest.raises(ConfigurationError):
        truncated_rhs(prob, np.zeros((prob.n_steps + 1,) + prob.rhs.grid.shape))


def test_lipschitz_constant_shrinks_with_lambda():
    consts = []
    rng = np.random.default_rng(0)
    prob, _, _ = burgers_problem(steps=30)
    grid = prob.rhs.grid
    pairs = []
    # probes of several sizes, so that the cutoffs bite for every lambda
    for scale in (1.0, 2.0, 5.0):
        base = np.broadcast_to(scale * prob.w0, (prob.n_steps + 1,) + grid.shape)
        for _ in range(3):
            pert = from_physical(grid, 0.01 * rng.standard_normal(grid.n))
            pairs.append((base + pert, base - pert))
    for lam in (0.4, 0.2, 0.1):
        prob.lam = lam
        consts.append(empirical_lipschitz(prob, pairs))
    assert consts[0] > consts[1] > consts[2]


def test_linear_solve_additivity_and_duhamel():
    grid = TorusGrid(1, 16)
    rhs = build_equation("heat", None, grid, NoiseModel("gradient", coeffs=np.array([[0.3]])))
    dt, n = 1e-2, 40
    x = grid.points()[0]
    rng = np.random.default_rng(1)
    w0 = from_physical(grid, np.cos(x))
    f = np.stack([from_physical(grid, rng.standard_normal(16)) for _ in range(n)])
    g = np.stack([from_physical(grid, 0.1 * rng.standard_normal(16)) for _ in range(n)])
    zero = np.zeros(grid.shape, dtype=complex)
    assert np.all(linear_solve(zero, None, None, rhs, dt, n_steps=n).states == 0)
    heat = build_equation("heat", None, grid)
    total = linear_solve(w0, f, g, heat, dt).states
    parts = linear_solve(w0, None, None, heat, dt, n_steps=n).states + linear_solve(zero, f, None, heat, dt).states + linear_solve(zero, None, g, heat, dt).states
    assert np.allclose(total, parts, atol=1e-14)
    # constant forcing cos x: u(t) = (1 - e^{-t}) cos x from zero data
    fc = np.repeat(w0[None], n, axis=0)
    u = linear_solve(zero, fc, None, heat, dt).states
    t = np.arange(n + 1) * dt
    assert np.allclose(u, (1 - np.exp(-t)).reshape(-1, 1) * w0[None], atol=1e-14)


def test_picard_linear_problem_converges_immediately():
    prob, _, _ = burgers_problem()
    prob.split = SplitRHS()
    res = picard_iterate(prob)
    assert res.converged and res.iterations == 1


def test_picard_small_burgers():
    prob, full, dw = burgers_problem(steps=50)
    res = picard_iterate(prob, max_iters=40, tol=1e-12)
    assert res.converged and res.contracting
    assert all(r < 1 for r in res.ratios)
    assert res.min_theta == 1.0
    res.residual = fixed_point_residual(res, full, dw)
    assert res.residual < 1e-6
    assert contraction_factor(res.ratios) < 1
    data = json.loads(res.to_json())
    assert data["iterations"] == res.iterations and data["residual"] == res.residual


def test_tiny_lambda_trivializes_iteration():
    prob, _, _ = burgers_problem(lam=1e-8)
    res = picard_iterate(prob)
    assert res.converged and res.iterations <= 2


def test_contraction_factor_needs_history():
    with pytest.raises(DomainError):
        contraction_factor([])
