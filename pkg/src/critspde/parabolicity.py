"""Stochastic parabolicity: drift coefficients ``a`` against gradient-noise coefficients ``b``.

Shapes used throughout, at a single evaluation point:

* ``a`` has shape ``(d, d, N, N)``; the scalar case may be given as ``(d, d)``.
* ``b`` has shape ``(d, N, n_max)`` with entries ``b[j, k, n]`` acting as
  ``sum_j b[j,k,n] d_j u_k``; the scalar case may be given as ``(d, n_max)``.
  A coupled form ``(d, N, N, n_max)`` is accepted only when it is
  diagonal in the component indices.

Coefficients may also be callables of the evaluation point returning such
arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Union

import numpy as np
from scipy.optimize import minimize

from .space_index import DomainError

ArrayOrMap = Union[np.ndarray, Callable[[Any], np.ndarray]]


class CouplingError(DomainError):
    """Noise couples different components; the diagonal structure is required."""


@dataclass(frozen=True)
class DiffusionCoeff:
    """Drift coefficient map with a declared bound ``M``."""

    a: ArrayOrMap
    bound: float = np.inf

    def at(self, point: Any = None) -> np.ndarray:
        raw = self.a(point) if callable(self.a) else self.a
        arr = _as_blocks(raw)
        if not np.all(np.isfinite(arr)):
            raise DomainError("diffusion coefficients must be finite")
        if np.max(np.abs(arr), initial=0.0) > self.bound:
            raise DomainError("diffusion coefficients exceed the declared bound")
        return arr


@dataclass(frozen=True)
class NoiseCoeff:
    """Gradient-noise coefficient map with a declared l2 bound."""

    b: ArrayOrMap
    bound: float = np.inf

    def at(self, point: Any = None) -> np.ndarray:
        raw = self.b(point) if callable(self.b) else self.b
        arr = _as_noise(raw)
        if not np.all(np.isfinite(arr)):
            raise DomainError("noise coefficients must be finite")
        if arr.size and np.max(np.sqrt(np.sum(arr**2, axis=-1))) > self.bound:
            raise DomainError("noise coefficients exceed the declared l2 bound")
        return arr


def _as_blocks(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim == 2:
        if a.shape[0] != a.shape[1]:
            raise DomainError("scalar drift coefficient must be a square d x d array")
        return a[:, :, None, None]
    if a.ndim != 4 or a.shape[0] != a.shape[1] or a.shape[2] != a.shape[3]:
        raise DomainError("drift coefficient must have shape (d, d, N, N)")
    return a


def _as_noise(b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[None, :]
    if b.ndim == 2:
        return b[:, None, :]
    if b.ndim == 3:
        return b
    if b.ndim == 4:
        N = b.shape[1]
        if b.shape[2] != N:
            raise DomainError("coupled noise coefficient must have shape (d, N, N, n)")
        off = b.copy()
        idx = np.arange(N)
        off[:, idx, idx, :] = 0.0
        if np.any(off != 0):
            raise CouplingError(
                "noise couples distinct components; only component-diagonal gradient noise is supported"
            )
        return b[:, idx, idx, :]
    raise DomainError("noise coefficient must have shape (d, N, n) or (d, n)")


def _resolve(coeff, kind, point):
    if isinstance(coeff, (DiffusionCoeff, NoiseCoeff)):
        return coeff.at(point)
    if callable(coeff):
        coeff = coeff(point)
    arr = _as_blocks(coeff) if kind == "a" else _as_noise(coeff)
    if not np.all(np.isfinite(arr)):
        raise DomainError("coefficients must be finite")
    return arr


def sigma_matrix(b, point: Any = None) -> np.ndarray:
    """``Sigma[i, j, k, l] = delta_{kl} / 2 * sum_n b[i,k,n] b[j,k,n]``."""
    bb = _resolve(b, "b", point)
    d, N, _ = bb.shape
    diag = 0.5 * np.einsum("ikn,jkn->ijk", bb, bb)
    out = np.zeros((d, d, N, N))
    idx = np.arange(N)
    out[:, :, idx, idx] = diag
    return out


def _contracted(a, b, point, delta: float = 0.0) -> np.ndarray:
    aa = _resolve(a, "a", point)
    sig = sigma_matrix(b, point)
    if sig.shape[0] != aa.shape[0] or sig.shape[2] != aa.shape[2]:
        raise DomainError("drift and noise coefficients have mismatched dimension or system size")
    form = aa - sig - delta * aa
    d, _, N, _ = form.shape
    M = form.transpose(0, 2, 1, 3).reshape(d * N, d * N)
    return 0.5 * (M + M.T)


def ellipticity_margin(a, b, point: Any = None) -> float:
    """Smallest eigenvalue of the symmetrized contracted form of ``a - Sigma``.

    Exact for scalar equations and for component-diagonal drift; a lower bound
    of the rank-one minimum over ``xi (x) theta`` in general.
    """
    return float(np.linalg.eigvalsh(_contracted(a, b, point))[0])


def degenerate_check(a, b, delta: float, point: Any = None) -> bool:
    """``xi^T (a - Sigma) xi >= delta xi^T a xi`` with ``a`` itself elliptic."""
    if not np.isfinite(delta):
        raise DomainError("delta must be finite")
    lower = float(np.linalg.eigvalsh(_contracted(a, b, point, delta))[0])
    zero = np.zeros((_resolve(a, "a", point).shape[0], _resolve(a, "a", point).shape[2], 1))
    ell = float(np.linalg.eigvalsh(_contracted(a, zero, point))[0])
    return lower >= -1e-14 and ell > 0


def _sphere(dim: int, n: int) -> np.ndarray:
    """Quasi-uniform unit vectors in ``R^dim`` (half sphere suffices for quadratic forms)."""
    if dim == 1:
        return np.ones((1, 1))
    if dim == 2:
        ang = np.pi * (np.arange(n) + 0.5) / n
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if dim == 3:
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / (2 * n)  # upper hemisphere
        r = np.sqrt(1 - z * z)
        phi = np.pi * (1 + 5**0.5) * i
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    pts = np.random.default_rng(0).standard_normal((n, dim))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _angles_to_unit(theta: np.ndarray, dim: int) -> np.ndarray:
    if dim == 1:
        return np.ones(1)
    x = np.ones(dim)
    for i, t in enumerate(theta):
        x[i] *= np.cos(t)
        x[i + 1 :] *= np.sin(t)
    return x


def _unit_to_angles(x: np.ndarray) -> np.ndarray:
    dim = x.size
    out = np.zeros(max(dim - 1, 0))
    for i in range(dim - 1):
        out[i] = np.arctan2(np.linalg.norm(x[i + 1 :]), x[i])
    if dim >= 2 and x[-1] < 0:
        out[-1] = -out[-1]
    return out


def brute_force_margin(a, b, point: Any = None, n_samples: int = 10_000, refine: bool = True) -> float:
    """Minimum of the rank-one quadratic form over sampled directions ``xi`` (and ``theta``).

    Directions come from a quasi-uniform sphere set; with ``refine`` the best
    sample seeds a local minimization over spherical angles.
    """
    aa = _resolve(a, "a", point)
    form = aa - sigma_matrix(b, point)
    d, _, N, _ = form.shape

    def value(xi, th):
        return float(np.einsum("i,j,ijkl,k,l->", xi, xi, form, th, th))

    n_xi = n_samples if N == 1 else max(int(np.sqrt(n_samples)), 1)
    n_th = 1 if N == 1 else max(n_samples // n_xi, 1)
    xis = _sphere(d, n_xi)
    ths = _sphere(N, n_th)
    # Q[x, t] = xi_x^T (form contracted with theta_t) xi_x
    vals = np.einsum("xi,xj,ijkl,tk,tl->xt", xis, xis, form, ths, ths)
    ix, it = np.unravel_index(np.argmin(vals), vals.shape)
    best = float(vals[ix, it])
    if not refine or (d == 1 and N == 1):
        return best
    x0 = np.concatenate([_unit_to_angles(xis[ix]), _unit_to_angles(ths[it])])

    def obj(z):
        return value(_angles_to_unit(z[: d - 1], d), _angles_to_unit(z[d - 1 :], N))

    res = minimize(obj, x0, method="BFGS", options={"gtol": 1e-12})
    return min(best, float(res.fun))
