import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from critspde.parabolicity import (
    CouplingError,
    DiffusionCoeff,
    NoiseCoeff,
    brute_force_margin,
    degenerate_check,
    ellipticity_margin,
    sigma_matrix,
)
from critspde.space_index import DomainError


def naive_sigma(b):
    """Triple-loop recomputation of the noise form."""
    d, N, n = b.shape
    out = np.zeros((d, d, N, N))
    for i in range(d):
        for j in range(d):
            for k in range(N):
                out[i, j, k, k] = 0.5 * sum(b[i, k, m] * b[j, k, m] for m in range(n))
    return out


def random_scalar_instance(rng, d):
    g = rng.standard_normal((d, d))
    a = g @ g.T + 0.5 * np.eye(d)
    b = rng.standard_normal((d, 3)) * 0.4
    return a, b


def test_sigma_examples():
    assert np.all(sigma_matrix(np.zeros((2, 3))) == 0)
    s = sigma_matrix(np.array([[1.0, 1.0, 0.0]]))
    assert s.shape == (1, 1, 1, 1) and s[0, 0, 0, 0] == 1.0


def test_sigma_matches_naive_loop():
    rng = np.random.default_rng(3)
    b = rng.standard_normal((3, 2, 5))
    assert np.allclose(sigma_matrix(b), naive_sigma(b), atol=1e-14)


def test_scalar_closed_form():
    assert ellipticity_margin(np.eye(2), np.zeros((2, 1))) == 1.0
    for c in [0.0, 1.0, 2.0, 2.5]:
        b = np.array([[np.sqrt(c / 2), np.sqrt(c / 2)]])
        assert ellipticity_margin(np.eye(1), b) == pytest.approx(1 - c / 2, abs=1e-15)
    assert ellipticity_margin(1.0, [[1.0]]) == 0.5


def test_degenerate_check():
    assert degenerate_check(np.eye(2), np.zeros((2, 1)), 1.0)
    b = np.array([[1.0]])  # c = 1, margin 1/2
    assert degenerate_check(np.eye(1), b, 0.5)
    assert not degenerate_check(np.eye(1), b, 0.51)
    with pytest.raises(DomainError):
        degenerate_check(np.eye(1), b, np.nan)


def test_coupling_and_shape_errors():
    b = np.zeros((1, 2, 2, 1))
    b[0, 0, 0, 0] = b[0, 1, 1, 0] = 1.0
    assert ellipticity_margin(np.eye(1)[:, :, None, None] * np.eye(2), b) == pytest.approx(0.5)
    b[0, 0, 1, 0] = 0.1
    with pytest.raises(CouplingError):
        sigma_matrix(b)
    with pytest.raises(DomainError):
        ellipticity_margin(np.eye(2), np.zeros((3, 1)))
    with pytest.raises(DomainError):
        ellipticity_margin(np.ones((2, 3)), np.zeros((2, 1)))


def test_coefficient_maps_and_bounds():
    a = DiffusionCoeff(lambda x: (1 + 0.5 * np.sin(x)) * np.eye(1), bound=2.0)
    b = NoiseCoeff(np.array([[0.5]]), bound=1.0)
    assert ellipticity_margin(a, b, point=0.0) == pytest.approx(1 - 0.125)
    assert ellipticity_margin(a, b, point=np.pi / 2) == pytest.approx(1.5 - 0.125)
    with pytest.raises(DomainError):
        DiffusionCoeff(3 * np.eye(1), bound=2.0).at()
    with pytest.raises(DomainError):
        NoiseCoeff(np.array([[np.inf]])).at()
    with pytest.raises(DomainError):
        NoiseCoeff(np.array([[2.0]]), bound=1.0).at()


def test_identity_brute_force():
    assert brute_force_margin(np.eye(3), np.zeros((3, 1)), n_samples=500) == pytest.approx(1.0, abs=1e-12)


def test_anisotropic_d2_matches_brute_force():
    a = np.array([[2.0, 0.3], [0.3, 0.7]])
    b = np.array([[0.4, 0.1], [-0.2, 0.5]])
    assert abs(ellipticity_margin(a, b) - brute_force_margin(a, b)) < 1e-9


def test_diagonal_system_matches_brute_force():
    rng = np.random.default_rng(11)
    d, N = 2, 2
    a = np.zeros((d, d, N, N))
    for k in range(N):
        g = rng.standard_normal((d, d))
        a[:, :, k, k] = g @ g.T + np.eye(d)
    b = 0.3 * rng.standard_normal((d, N, 2))
    m = ellipticity_margin(a, b)
    assert abs(m - brute_force_margin(a, b, n_samples=4000)) < 1e-8


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 3))
def test_margin_is_a_lower_bound_of_sampled_form(seed, d):
    rng = np.random.default_rng(seed)
    a, b = random_scalar_instance(rng, d)
    m = ellipticity_margin(a, b)
    xi = rng.standard_normal((50, d))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    form = a - 0.5 * b @ b.T
    vals = np.einsum("si,ij,sj->s", xi, form, xi)
    assert np.all(vals >= m - 1e-12)
    # scaling b up can only shrink the margin
    assert ellipticity_margin(a, 1.5 * b) <= m + 1e-12
