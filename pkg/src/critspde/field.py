"""Real fields on the torus in Fourier form, spatial Sobolev norms and weighted time norms.

Coefficients follow the convention ``u(x) = sum_k c_k exp(i k.x)`` so that
``c = fftn(u) / n**d``.  A field may carry several components (used for
l2-banks of noise coefficients); the spatial norm of a multi-component field
takes the pointwise Euclidean norm over components.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .space_index import (
    DomainError,
    SobolevIndex,
    SpacePair,
    TimeWeightIndex,
    interpolation_smoothness,
)

# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on the torus ``[0, length)^d`` with ``n`` points per axis."""

    d: int
    n: int
    length: float = 2 * np.pi

    def __post_init__(self) -> None:
        if self.d not in (1, 2):
            raise DomainError("only d = 1 or d = 2 grids are supported")
        if self.n < 8 or self.n & (self.n - 1):
            raise DomainError("modes per axis must be a power of two and at least 8")
        if not self.length > 0:
            raise DomainError("period must be positive")

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def int_modes(self) -> np.ndarray:
        """Integer wavenumbers along one axis in FFT order."""
        return np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)

    @property
    def k_axes(self) -> list:
        """Wavenumber arrays (``2 pi m / L``), one per axis, broadcastable to ``shape``."""
        k1 = 2 * np.pi / self.length * self.int_modes
        if self.d == 1:
            return [k1]
        return [k1[:, None], k1[None, :]]

    @property
    def ksq(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for k in self.k_axes:
            out = out + k**2
        return out

    def derivative_symbols(self) -> list:
        """``i k_j`` per axis with the Nyquist entry zeroed (keeps odd derivatives real)."""
        out = []
        nyq = np.abs(self.int_modes) == self.n // 2
        for j, k in enumerate(self.k_axes):
            kk = np.where(nyq if self.d == 1 else (nyq[:, None] if j == 0 else nyq[None, :]), 0.0, k)
            out.append(1j * np.broadcast_to(kk, self.shape))
        return out

    def dealias_mask(self) -> np.ndarray:
        """Boolean mask of the modes kept by the 2/3 rule."""
        keep = np.abs(self.int_modes) <= self.n // 3
        if self.d == 1:
            return keep
        return keep[:, None] & keep[None, :]

    def points(self) -> list:
        x = np.arange(self.n) * self.length / self.n
        if self.d == 1:
            return [x]
        return list(np.meshgrid(x, x, indexing="ij"))

    @property
    def volume(self) -> float:
        return self.length**self.d


# ---------------------------------------------------------------------------
# raw coefficient helpers (vectorized over leading axes)
# ---------------------------------------------------------------------------


def to_physical(grid: TorusGrid, coeffs: np.ndarray) -> np.ndarray:
    """Real physical values from coefficients with arbitrary leading axes."""
    axes = tuple(range(-grid.d, 0))
    return np.real(np.fft.ifftn(coeffs, axes=axes)) * grid.n**grid.d


def from_physical(grid: TorusGrid, values: np.ndarray) -> np.ndarray:
    axes = tuple(range(-grid.d, 0))
    return np.fft.fftn(values, axes=axes) / grid.n**grid.d


def _pad_axis(c: np.ndarray, axis: int, m: int) -> np.ndarray:
    n = c.shape[axis]
    c = np.moveaxis(c, axis, -1)
    out = np.zeros(c.shape[:-1] + (m,), dtype=complex)
    h = n // 2
    out[..., :h] = c[..., :h]
    out[..., m - h + 1 :] = c[..., h + 1 :]
    # split the Nyquist coefficient so that the padded field stays real
    out[..., h] = 0.5 * c[..., h]
    out[..., m - h] += 0.5 * c[..., h]
    return np.moveaxis(out, -1, axis)


def _truncate_axis(c: np.ndarray, axis: int, n: int) -> np.ndarray:
    m = c.shape[axis]
    c = np.moveaxis(c, axis, -1)
    out = np.zeros(c.shape[:-1] + (n,), dtype=complex)
    h = n // 2
    out[..., :h] = c[..., :h]
    out[..., h + 1 :] = c[..., m - h + 1 :]
    out[..., h] = c[..., h] + c[..., m - h]
    return np.moveaxis(out, -1, axis)


def pad_coeffs(grid: TorusGrid, coeffs: np.ndarray, m: int) -> np.ndarray:
    """Zero-pad coefficients to ``m`` modes per axis (same physical field)."""
    out = coeffs
    for ax in range(-grid.d, 0):
        out = _pad_axis(out, ax, m)
    return out


def truncate_coeffs(grid: TorusGrid, coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`pad_coeffs` on the retained band."""
    out = coeffs
    for ax in range(-grid.d, 0):
        out = _truncate_axis(out, ax, grid.n)
    return out


def nonlinear_apply(grid: TorusGrid, coeffs: np.ndarray, func, pad: float = 2.0) -> np.ndarray:
    """Coefficients of ``func(u)`` evaluated on a padded grid and cut back to the 2/3 band."""
    mask = grid.dealias_mask()
    m = int(round(pad * grid.n))
    up = pad_coeffs(grid, coeffs * mask, m)
    axes = tuple(range(-grid.d, 0))
    phys = np.real(np.fft.ifftn(up, axes=axes)) * m**grid.d
    back = np.fft.fftn(func(phys), axes=axes) / m**grid.d
    return truncate_coeffs(grid, back) * mask


def product_coeffs(grid: TorusGrid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dealiased product of two coefficient arrays (exact on the 2/3 band)."""
    mask = grid.dealias_mask()
    m = 3 * grid.n // 2
    axes = tuple(range(-grid.d, 0))
    pa = np.real(np.fft.ifftn(pad_coeffs(grid, a * mask, m), axes=axes)) * m**grid.d
    pb = np.real(np.fft.ifftn(pad_coeffs(grid, b * mask, m), axes=axes)) * m**grid.d
    back = np.fft.fftn(pa * pb, axes=axes) / m**grid.d
    return truncate_coeffs(grid, back) * mask


def bessel_symbol(grid: TorusGrid, s: float) -> np.ndarray:
    return (1.0 + grid.ksq) ** (s / 2.0)


def sobolev_norms(grid: TorusGrid, coeffs: np.ndarray, s: float, q: float, component_axis: Optional[int] = None) -> np.ndarray:
    """H^{s,q} norms of fields stored along the leading axes of ``coeffs``.

    If ``component_axis`` is given, that axis is treated as a vector index
    and the pointwise Euclidean norm over it is taken before integrating.
    """
    s, q = float(s), float(q)
    if q < 2:
        raise DomainError("spatial norms require q >= 2")
    c = coeffs * bessel_symbol(grid, s)
    axes = tuple(range(-grid.d, 0))
    if q == 2.0:
        energy = np.sum(np.abs(c) ** 2, axis=axes) * grid.volume
        if component_axis is not None:
            energy = np.sum(energy, axis=component_axis)
        return np.sqrt(energy)
    m = 4 * grid.n
    phys = np.real(np.fft.ifftn(pad_coeffs(grid, c, m), axes=axes)) * m**grid.d
    if component_axis is not None:
        ax = component_axis if component_axis >= 0 else component_axis - grid.d
        mag = np.sqrt(np.sum(phys**2, axis=ax))
    else:
        mag = np.abs(phys)
    cell = (grid.length / m) ** grid.d
    if q == 4.0:
        sq = mag * mag
        integral = np.sum(sq * sq, axis=axes) * cell
    else:
        integral = np.sum(mag**q, axis=axes) * cell
    return integral ** (1.0 / q)


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


class SpectralField:
    """Immutable real field on a torus stored through its Fourier coefficients."""

    __slots__ = ("grid", "_coeffs")

    def __init__(self, grid: TorusGrid, coeffs: np.ndarray, check: bool = True) -> None:
        c = np.array(coeffs, dtype=complex)
        if c.shape == grid.shape:
            c = c[None]
        if c.shape[1:] != grid.shape:
            raise DomainError(f"coefficient shape {c.shape} does not match grid {grid.shape}")
        c.setflags(write=False)
        self.grid = grid
        self._coeffs = c
        if check:
            res = self.hermitian_residual()
            scale = max(1.0, float(np.sqrt(np.sum(np.abs(c) ** 2))))
            if not np.isfinite(res) or res > 1e-10 * scale:
                raise DomainError(f"coefficients are not Hermitian symmetric (residual {res:.3g})")

    @classmethod
    def from_physical(cls, grid: TorusGrid, values: np.ndarray) -> "SpectralField":
        v = np.asarray(values, dtype=float)
        return cls(grid, from_physical(grid, v), check=False)

    @classmethod
    def from_function(cls, grid: TorusGrid, func) -> "SpectralField":
        return cls.from_physical(grid, func(*grid.points()))

    @classmethod
    def zeros(cls, grid: TorusGrid, components: int = 1) -> "SpectralField":
        return cls(grid, np.zeros((components,) + grid.shape, dtype=complex), check=False)

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def components(self) -> int:
        return self._coeffs.shape[0]

    def to_physical(self) -> np.ndarray:
        out = to_physical(self.grid, self._coeffs)
        return out[0] if self.components == 1 else out

    def hermitian_residual(self) -> float:
        """Max of ``|c(-k) - conj(c(k))|`` over all modes and components."""
        c = self._coeffs
        flipped = c
        for ax in range(1, c.ndim):
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        return float(np.max(np.abs(flipped - np.conj(c)))) if c.size else 0.0

    def energy(self) -> float:
        """``int |u|^2 dx`` computed from the coefficients (Plancherel)."""
        return float(np.sum(np.abs(self._coeffs) ** 2) * self.grid.volume)

    def mean(self) -> np.ndarray:
        idx = (slice(None),) + (0,) * self.grid.d
        return np.real(self._coeffs[idx])

    def _new(self, c: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, c, check=False)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return self._new(self._coeffs + other._coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return self._new(self._coeffs - other._coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return self._new(self._coeffs * scalar)

    __rmul__ = __mul__


def bessel_potential(f: SpectralField, s: float) -> SpectralField:
    """Apply the multiplier ``(1+|k|^2)^{s/2}``."""
    return SpectralField(f.grid, f.coeffs * bessel_symbol(f.grid, s), check=False)


def sobolev_norm(f: SpectralField, idx: SobolevIndex) -> float:
    """H^{s,q} norm: Plancherel for ``q = 2``, oversampled quadrature otherwise."""
    return float(sobolev_norms(f.grid, f.coeffs, float(idx.s), float(idx.q), component_axis=0))


def ell2_block_norm(bank: Sequence[SpectralField] | SpectralField, idx: SobolevIndex) -> float:
    """Norm in ``H^{s,q}(l^2)``: pointwise l2 over the bank, then the spatial norm."""
    if isinstance(bank, SpectralField):
        return sobolev_norm(bank, idx)
    fields = list(bank)
    if not fields:
        return 0.0
    grid = fields[0].grid
    stacked = np.concatenate([g.coeffs for g in fields], axis=0)
    return float(sobolev_norms(grid, stacked, float(idx.s), float(idx.q), component_axis=0))


def dealias_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Pointwise product with 2/3-rule truncation."""
    if f.grid != g.grid:
        raise DomainError("fields live on different grids")
    return SpectralField(f.grid, product_coeffs(f.grid, f.coeffs, g.coeffs), check=False)


# ---------------------------------------------------------------------------
# time series and weighted norms in time
# ---------------------------------------------------------------------------


def graded_mesh(T: float, m: int, kappa: float = 0.0) -> np.ndarray:
    """``t_i = T (i/m)^gamma`` with ``gamma = max(1, 2/(1+kappa))``."""
    if m < 1 or not T > 0:
        raise DomainError("need m >= 1 and T > 0")
    gamma = max(1.0, 2.0 / (1.0 + float(kappa)))
    return T * (np.arange(m + 1) / m) ** gamma


@dataclass(frozen=True)
class TimeSeries:
    """States of one scalar field at the mesh times, with the time weight attached.

    ``states`` has shape ``(len(mesh),) + grid.shape``.
    """

    mesh: np.ndarray
    states: np.ndarray
    grid: TorusGrid
    weight: TimeWeightIndex = TimeWeightIndex(2, 0)

    def __post_init__(self) -> None:
        mesh = np.asarray(self.mesh, dtype=float)
        states = np.asarray(self.states, dtype=complex)
        if mesh.ndim != 1 or mesh.size == 0:
            raise DomainError("time mesh must be a non-empty 1-d array")
        if mesh.size > 1 and np.any(np.diff(mesh) <= 0):
            raise DomainError("time mesh must be strictly increasing")
        if states.shape != (mesh.size,) + self.grid.shape:
            raise DomainError(f"states shape {states.shape} does not match mesh and grid")
        object.__setattr__(self, "mesh", mesh)
        object.__setattr__(self, "states", states)

    @property
    def T(self) -> float:
        return float(self.mesh[-1])

    def field(self, i: int) -> SpectralField:
        return SpectralField(self.grid, self.states[i], check=False)

    def norms(self, s: float, q: float) -> np.ndarray:
        return sobolev_norms(self.grid, self.states, float(s), float(q))

    def restrict(self, t_max: float) -> "TimeSeries":
        keep = self.mesh <= t_max + 1e-15 * max(1.0, abs(t_max))
        return TimeSeries(self.mesh[keep], self.states[keep], self.grid, self.weight)


_NODES = 8


@lru_cache(maxsize=64)
def _jacobi_rule(kappa: float) -> tuple:
    x, w = roots_jacobi(_NODES, 0.0, kappa)
    return x, w


@lru_cache(maxsize=1)
def _legendre_rule() -> tuple:
    return roots_legendre(_NODES)


def _interval_rule(a: float, b: float, kappa: float) -> tuple:
    """Nodes and weights for ``int_a^b f(t) |t|^kappa dt`` exact for smooth f."""
    h = b - a
    if kappa != 0 and a == 0.0:
        x, w = _jacobi_rule(kappa)  # weight (1+x)^kappa
        t = a + h * (1 + x) / 2
        return t, w * (h / 2) ** (kappa + 1)
    if kappa != 0 and b == 0.0:
        x, w = _jacobi_rule(kappa)  # mirrored: weight (1-x)^kappa after x -> -x
        t = b - h * (1 + x) / 2
        return t, w * (h / 2) ** (kappa + 1)
    x, w = _legendre_rule()
    t = a + h * (1 + x) / 2
    return t, w * (h / 2) * np.abs(t) ** kappa


def _lagrange_at(nodes: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Matrix ``L[j, m]`` of Lagrange basis ``m`` evaluated at ``t[j]``."""
    k = nodes.size
    out = np.ones((t.size, k))
    for m in range(k):
        for l in range(k):
            if l != m:
                out[:, m] *= (t - nodes[l]) / (nodes[m] - nodes[l])
    return out


def interval_weights(mesh: np.ndarray, kappa: float, causal: bool = False) -> tuple:
    """Per-interval product-integration weights against ``|t|^kappa``.

    Returns ``(stencils, weights)`` of shape ``(n-1, k)``: the integral of the
    local degree-``k-1`` interpolant of ``g`` over interval ``i`` equals
    ``sum_m weights[i, m] * g[stencils[i, m]]``.  Local cubics (``k = 4``) are
    used whenever the mesh has at least four points.  With ``causal`` the
    stencil of interval ``i`` never reaches past node ``i + 1``, so running
    integrals at ``t_j`` only read values at ``t_0, ..., t_j``.
    """
    mesh = np.asarray(mesh, dtype=float)
    n = mesh.size
    if n < 2:
        return np.zeros((0, 1), dtype=int), np.zeros((0, 1))
    k = min(4, n)
    stencils = np.empty((n - 1, k), dtype=int)
    weights = np.empty((n - 1, k))
    for i in range(n - 1):
        if causal:
            start = max(i + 2 - k, 0)
            kk = min(k, i + 2)
        else:
            start = min(max(i - 1, 0), n - k)
            kk = k
        idx = np.arange(start, start + kk)
        if kk < k:  # pad the short stencil with zero-weight copies of its first node
            idx = np.concatenate([np.full(k - kk, start), idx])
        a, b = mesh[i], mesh[i + 1]
        t, w = _interval_rule(a, b, float(kappa))
        c = 0.5 * (a + b)
        hscale = max(b - a, 1e-300)
        L = _lagrange_at((mesh[idx[k - kk :]] - c) / hscale, (t - c) / hscale)
        stencils[i] = idx
        weights[i] = 0.0
        weights[i, k - kk :] = w @ L
    return stencils, weights


def weighted_integral(mesh: np.ndarray, values: np.ndarray, kappa: float, cumulative: bool = False, causal: bool = False):
    """``int |t|^kappa g(t) dt`` over the mesh span, optionally as running integrals.

    ``values`` may carry trailing axes; integration runs over the first axis.
    """
    values = np.asarray(values, dtype=float)
    stencils, weights = interval_weights(mesh, kappa, causal)
    if stencils.shape[0] == 0:
        zero = np.zeros(values.shape[1:])
        return np.zeros(values.shape) if cumulative else zero
    gathered = values[stencils]  # (n-1, k, ...)
    pieces = np.einsum("ik,ik...->i...", weights, gathered)
    if cumulative:
        out = np.zeros(values.shape)
        out[1:] = np.cumsum(pieces, axis=0)
        return out
    return pieces.sum(axis=0)


def weighted_lp(mesh: np.ndarray, norms: np.ndarray, p: float, kappa: float, cumulative: bool = False, causal: bool = False):
    """``(int ||u(t)||^p |t|^kappa dt)^{1/p}``; ``p = inf`` gives the (running) supremum."""
    norms = np.asarray(norms, dtype=float)
    if norms.size == 0:
        raise DomainError("empty time mesh")
    if np.isinf(p):
        return np.maximum.accumulate(norms, axis=0) if cumulative else norms.max(axis=0)
    integral = weighted_integral(mesh, norms**p, kappa, cumulative, causal)
    return np.maximum(integral, 0.0) ** (1.0 / p)


def weighted_time_norm(series: TimeSeries, spatial: SobolevIndex, p: float | None = None, kappa: float | None = None) -> float:
    """``||u||_{L^p(0,T, w_kappa; H^{s,q})}`` by product integration on the mesh."""
    p = float(series.weight.p) if p is None else float(p)
    kappa = float(series.weight.kappa) if kappa is None else float(kappa)
    return float(weighted_lp(series.mesh, series.norms(float(spatial.s), float(spatial.q)), p, kappa))


def xfrak_norm(series: TimeSeries, terms: Sequence[tuple], pair: SpacePair, cumulative: bool = False, causal: bool = False):
    """Norm in the intersection space controlling the critical nonlinearities.

    ``terms`` holds tuples ``(r, rho_star * r_prime, beta, phi)``; each term
    contributes the weighted norm with exponent ``p*r`` in ``X_beta`` plus the
    one with exponent ``p*rho_star*r_prime`` in ``X_phi``.  Infinite exponents
    give suprema in time.
    """
    p = float(series.weight.p)
    kappa = float(series.weight.kappa)
    q = float(pair.q)
    total = np.zeros(series.mesh.size) if cumulative else 0.0
    for r, rr, beta, phi in terms:
        for expo, theta in ((r, beta), (rr, phi)):
            s = float(interpolation_smoothness(pair, theta))
            norms = series.norms(s, q)
            total = total + weighted_lp(series.mesh, norms, p * float(expo), kappa, cumulative, causal)
    return total


def mathfrak_x_norm(series: TimeSeries, terms: Sequence[tuple], pair: SpacePair) -> float:
    """Total (non-cumulative) value of :func:`xfrak_norm`."""
    return float(xfrak_norm(series, terms, pair, cumulative=False))


def gagliardo_time_seminorm(series: TimeSeries, theta: float, spatial: SobolevIndex, tw: TimeWeightIndex | None = None) -> float:
    """Diagnostic surrogate for the ``H^{theta,p}(w_kappa; X)`` norm.

    Double sum over mesh pairs of ``||u(t)-u(s)||^p / |t-s|^{1+theta p}``
    weighted by ``t^kappa`` and trapezoid cell sizes, plus the weighted
    ``L^p`` term.  Equivalence constants with the true norm are unknown.
    """
    tw = series.weight if tw is None else tw
    p, kappa = float(tw.p), float(tw.kappa)
    t = series.mesh
    n = t.size
    if n < 2:
        return float(weighted_lp(t, series.norms(float(spatial.s), float(spatial.q)), p, kappa)) if n else 0.0
    cell = np.empty(n)
    cell[0] = (t[1] - t[0]) / 2
    cell[-1] = (t[-1] - t[-2]) / 2
    cell[1:-1] = (t[2:] - t[:-2]) / 2
    diffs = series.states[:, None] - series.states[None, :]
    dn = sobolev_norms(series.grid, diffs.reshape((n * n,) + series.grid.shape), float(spatial.s), float(spatial.q)).reshape(n, n)
    gap = np.abs(t[:, None] - t[None, :])
    np.fill_diagonal(gap, 1.0)
    kern = dn**p / gap ** (1 + theta * p)
    np.fill_diagonal(kern, 0.0)
    semi = np.sum(kern * (np.abs(t)[:, None] ** kappa) * cell[:, None] * cell[None, :])
    lp = float(weighted_lp(t, series.norms(float(spatial.s), float(spatial.q)), p, kappa)) ** p
    return float((lp + semi) ** (1.0 / p))


def extend_reflect(series: TimeSeries, T: float | None = None) -> TimeSeries:
    """Reflection extension from ``[0, T]`` to ``[-T, 2T]``.

    On the unit interval the extension is ``E f(t) = f(-t)(1+t)`` for
    ``t in [-1, 0)`` and ``f(2-t)(2-t)`` for ``t in (1, 2]``; the interval
    ``[0, T]`` is handled by rescaling, ``E_T f(t) = E(f(T.))(t/T)``.  The
    restriction to the original mesh returns the input unchanged.
    """
    T = series.T if T is None else float(T)
    if abs(series.T - T) > 1e-12 * max(1.0, T) or series.mesh[0] != 0.0:
        raise DomainError("extension expects a series on the full interval [0, T]")
    t = series.mesh
    u = series.states
    shape = (-1,) + (1,) * series.grid.d
    left_t = -t[:0:-1]  # -t_n, ..., -t_1  (skip t_0 = 0)
    left_u = u[:0:-1] * (1 - t[:0:-1] / T).reshape(shape)
    right_t = 2 * T - t[-2::-1]  # 2T - t_{n-1}, ..., 2T - t_0
    right_u = u[-2::-1] * (t[-2::-1] / T).reshape(shape)
    mesh = np.concatenate([left_t, t, right_t])
    states = np.concatenate([left_u, u, right_u])
    return TimeSeries(mesh, states, series.grid, series.weight)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def field_to_csv(f: SpectralField) -> str:
    """Header ``d,n,length,components`` then one ``re,im`` row per coefficient (row-major)."""
    g = f.grid
    lines = ["d,n,length,components", f"{g.d},{g.n},{g.length!r},{f.components}", "re,im"]
    for c in f.coeffs.reshape(-1):
        lines.append(f"{c.real:.17g},{c.imag:.17g}")
    return "\n".join(lines) + "\n"


def field_from_csv(text: str) -> SpectralField:
    rows = text.strip().split("\n")
    d, n, length, comps = rows[1].split(",")
    grid = TorusGrid(int(d), int(n), float(length))
    vals = np.array([[float(x) for x in r.split(",")] for r in rows[3:]])
    coeffs = (vals[:, 0] + 1j * vals[:, 1]).reshape((int(comps),) + grid.shape)
    return SpectralField(grid, coeffs, check=False)
