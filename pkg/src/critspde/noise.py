"""Seeded Brownian drivers, Itô sums, driver rescaling and spatially colored noise.

Every Gaussian increment is a pure function of ``(seed, path, driver, step)``.
A Philox generator keyed by ``(seed, path)`` is positioned at a counter
determined by the step, so any block of steps can be regenerated without
replaying a shared stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .field import SpectralField, TorusGrid
from .space_index import DomainError


class AdaptednessError(RuntimeError):
    """An integrand asked for an increment that has not been revealed yet."""


def _philox_key(seed: int, path: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(path),))
    return ss.generate_state(2, dtype=np.uint64)


def _normals_from_raw(raw: np.ndarray) -> np.ndarray:
    """Box-Muller on pairs of 53-bit uniforms; output has the same length as ``raw``."""
    u = (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
    u1 = 1.0 - u[0::2]  # in (0, 1]
    u2 = u[1::2]
    rad = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * np.pi * u2
    out = np.empty(raw.shape, dtype=np.float64)
    out[0::2] = rad * np.cos(ang)
    out[1::2] = rad * np.sin(ang)
    return out


@dataclass(frozen=True)
class WienerBank:
    """``n_drivers`` independent Brownian motions sampled on a uniform step ``dt``.

    ``scale`` multiplies every increment.
    """

    n_drivers: int
    dt: float
    seed: int = 0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.n_drivers < 1:
            raise DomainError("a bank needs at least one driver")
        if not self.dt > 0:
            raise DomainError("time step must be positive")

    @property
    def _blocks_per_step(self) -> int:
        return -(-self.n_drivers // 4)

    def standard_normals(self, start: int, stop: int, path: int = 0) -> np.ndarray:
        """Standard normals of shape ``(stop - start, n_drivers)`` for one path."""
        if stop < start or start < 0:
            raise DomainError("invalid step range")
        nb = self._blocks_per_step
        bg = np.random.Philox(key=_philox_key(self.seed, path), counter=np.array([start * nb, 0, 0, 0], dtype=np.uint64))
        raw = bg.random_raw(4 * nb * (stop - start))
        z = _normals_from_raw(raw).reshape(stop - start, 4 * nb)
        return z[:, : self.n_drivers]

    def increments(self, start: int, stop: int, paths=1) -> np.ndarray:
        """Increments of shape ``(len(paths), stop - start, n_drivers)``.

        ``paths`` is either a count (paths ``0..paths-1``) or an iterable of path indices.
        """
        idx = range(paths) if isinstance(paths, (int, np.integer)) else paths
        sd = np.sqrt(self.dt) * self.scale
        return np.stack([self.standard_normals(start, stop, p) * sd for p in idx])

    def coarsen(self, factor: int) -> "CoarseBank":
        return CoarseBank(self, int(factor))


@dataclass(frozen=True)
class CoarseBank:
    """Increments of a bank summed over blocks of ``factor`` fine steps (same Brownian path)."""

    fine: WienerBank
    factor: int

    @property
    def n_drivers(self) -> int:
        return self.fine.n_drivers

    @property
    def dt(self) -> float:
        return self.fine.dt * self.factor

    def increments(self, start: int, stop: int, paths=1) -> np.ndarray:
        f = self.fine.increments(start * self.factor, stop * self.factor, paths)
        return f.reshape(f.shape[0], stop - start, self.factor, f.shape[-1]).sum(axis=2)


def sample_increments(bank, step_range: tuple, paths=1) -> np.ndarray:
    """Gaussian increments with variance ``bank.dt`` for the steps in ``step_range``."""
    start, stop = step_range
    return bank.increments(start, stop, paths)


def rescale_driver(bank: WienerBank, lam: float) -> WienerBank:
    """Bank of ``lam^{-1/2} w(lam t)`` on the step ``dt / lam``.

    Step ``i`` of the new bank covers ``[i dt/lam, (i+1) dt/lam]``, which the
    time change maps onto step ``i`` of the original bank; its increment is
    ``lam^{-1/2}`` times the original one and so has variance ``dt / lam``.
    The two banks share their standard normals.
    """
    if not lam > 0:
        raise DomainError("scaling factor must be positive")
    return WienerBank(bank.n_drivers, bank.dt / lam, bank.seed, bank.scale)


class _RevealedIncrements:
    """Read-only view of increments for steps strictly before the current one."""

    def __init__(self, incs: np.ndarray) -> None:
        self._incs = incs
        self.current = 0

    def __getitem__(self, i: int) -> np.ndarray:
        if i < 0 or i >= self.current:
            raise AdaptednessError(f"increment {i} requested while evaluating step {self.current}")
        return self._incs[i]


def ito_integral(integrand: Callable, bank, n_steps: int, path: int = 0) -> np.ndarray:
    """``sum_i sum_n G_n(t_i) dw^n_i`` with left-point (Itô) evaluation.

    ``integrand(i, past)`` returns an array whose leading axis indexes the
    drivers; ``past[j]`` gives the increments of step ``j`` only for ``j < i``.
    """
    incs = bank.increments(0, n_steps, [path])[0]
    past = _RevealedIncrements(incs)
    total = None
    for i in range(n_steps):
        past.current = i
        g = np.asarray(integrand(i, past), dtype=float)
        if g.shape[0] != bank.n_drivers:
            raise DomainError("integrand must provide one slice per driver")
        term = np.tensordot(incs[i], g, axes=(0, 0))
        total = term if total is None else total + term
    return np.zeros(()) if total is None else total


def ito_isometry(step_values: np.ndarray, dt: float) -> float:
    """Closed form ``sum_i sum_n |G_n(t_i)|^2 dt`` for deterministic integrands."""
    return float(np.sum(np.asarray(step_values, dtype=float) ** 2) * dt)


# ---------------------------------------------------------------------------
# colored spatial noise
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseModel:
    """Description of the noise term.

    ``kind`` is one of ``"gradient"`` (``coeffs`` has shape ``(d, n)``),
    ``"multiplicative"`` (``coeffs`` of length ``n`` multiplying ``g(u)``),
    ``"colored"`` (``delta >= 0``, amplitude ``sigma``, optional ``g``) or
    ``"white"`` (colored with ``delta = 0``, 1-d only).
    """

    kind: str
    coeffs: Optional[np.ndarray] = None
    delta: float = 0.0
    sigma: float = 1.0
    g: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self) -> None:
        if self.kind not in ("gradient", "multiplicative", "colored", "white", "none"):
            raise DomainError(f"unknown noise kind {self.kind!r}")
        if self.kind in ("colored", "white") and self.delta < 0:
            raise DomainError("noise color exponent must be nonnegative")
        if self.kind == "white" and self.delta != 0:
            raise DomainError("white noise has delta = 0")


def colored_drivers(grid: TorusGrid) -> int:
    """Number of real Gaussian drivers needed for one colored field sample."""
    return grid.n**grid.d


def _hermitian_from_normals(grid: TorusGrid, z: np.ndarray) -> np.ndarray:
    """Map ``n^d`` real normals (trailing axis) to Hermitian coefficients with unit ``E|c_k|^2``.

    The real FFT of a field of i.i.d. standard normals has, after scaling by
    ``n^{-d/2}``, exactly this law: unit-variance real entries at
    self-conjugate modes and standard complex Gaussians elsewhere.
    """
    shape = z.shape[:-1] + grid.shape
    phys = z.reshape(shape)
    axes = tuple(range(-grid.d, 0))
    return np.fft.fftn(phys, axes=axes) / grid.n ** (grid.d / 2)


def colored_spatial_field(model: NoiseModel, grid: TorusGrid, normals: np.ndarray, dt: float) -> np.ndarray:
    """Coefficients ``(1+|k|^2)^{-delta/2} xi_k sqrt(dt)`` from driver normals.

    ``normals`` has trailing length ``n^d`` (one entry per real driver);
    leading axes (paths) are kept.
    """
    if model.kind == "white" and grid.d != 1:
        raise DomainError("space-time white noise is only supported in one dimension")
    delta = 0.0 if model.kind == "white" else float(model.delta)
    xi = _hermitian_from_normals(grid, np.asarray(normals, dtype=float))
    return xi * (1.0 + grid.ksq) ** (-delta / 2.0) * np.sqrt(dt)


def colored_sample(model: NoiseModel, grid: TorusGrid, bank: WienerBank, step: int, path: int = 0) -> SpectralField:
    """One colored increment field for a given step and path."""
    if bank.n_drivers != colored_drivers(grid):
        raise DomainError("bank size must equal the number of grid points")
    z = bank.standard_normals(step, step + 1, path)[0] * bank.scale
    return SpectralField(grid, colored_spatial_field(model, grid, z, bank.dt), check=False)


def increments_to_csv(bank, step_range: tuple, path: int = 0) -> str:
    """Rows ``driver,step,value`` with 17 significant digits."""
    start, stop = step_range
    incs = bank.increments(start, stop, [path])[0]
    lines = ["driver,step,value"]
    for i in range(stop - start):
        for n in range(bank.n_drivers):
            lines.append(f"{n},{start + i},{incs[i, n]:.17g}")
    return "\n".join(lines) + "\n"
