"""Scaling exponents of the example equations and numerical rescaling checks.

Under ``u_lam(t, x) = lam^a u(lam t, lam^{1/order} x)`` the linear part of an
equation of the given order is invariant; ``a`` is fixed by the drift.  For
second-order equations the space exponent is ``1/2``, for the fourth-order
Cahn-Hilliard equation it is ``1/4``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .criticality import (
    AllenCahn,
    BurgersWhite,
    CahnHilliard,
    ConservativeRD,
    EquationFamily,
    GradientRD,
    ReactionDiffusion,
)
from .field import TimeSeries, TorusGrid, from_physical
from .simulate import StepperConfig, build_equation, simulate_path, strong_residual
from .space_index import DomainError, num

HALF = Fraction(1, 2)


class ScalingConfigError(DomainError):
    """The scaling factor is incompatible with the torus period."""


@dataclass(frozen=True)
class ScalingLaw:
    """``u_lam(t, x) = lam^a u(lam t, lam^{space} x)``."""

    amplitude: object
    space: object = HALF
    family: str = ""


def scaling_law(family: EquationFamily) -> ScalingLaw:
    """Amplitude power that makes the drift scale like the time derivative."""
    if isinstance(family, ReactionDiffusion):
        return ScalingLaw(1 / (family.m - 1), HALF, family.name)
    if isinstance(family, ConservativeRD):
        return ScalingLaw(1 / (2 * (family.h - 1)), HALF, family.name)
    if isinstance(family, GradientRD):
        m = family.m
        return ScalingLaw(-(m - 2) / (2 * (m - 1)), HALF, family.name)
    if isinstance(family, BurgersWhite):
        return ScalingLaw(1 / (2 * (family.h - 1)), HALF, family.name)
    if isinstance(family, AllenCahn):
        return ScalingLaw(HALF, HALF, family.name)
    if isinstance(family, CahnHilliard):
        return ScalingLaw(1 / (2 * (family.h - 1)), Fraction(1, 4), family.name)
    raise DomainError(f"no scaling law for {family.name}")


def drift_noise_power_match(family: EquationFamily) -> tuple:
    """Exact powers of ``lam`` picked up by the drift and the noise; ``match`` iff equal.

    The drift power is the amplitude exponent ``a``.  The noise power is the
    exponent with which the rescaled stochastic integral appears: for a
    zeroth-order noise of growth ``h`` it is ``a h - 1/2``; for the
    conservative and gradient families it coincides with ``a``.
    """
    law = scaling_law(family)
    a = law.amplitude
    if isinstance(family, ReactionDiffusion):
        noise = family.h * a - HALF
    elif isinstance(family, AllenCahn):
        noise = 2 * a - HALF  # linear-growth-plus-one multiplicative noise, h = 2
    elif isinstance(family, (ConservativeRD, CahnHilliard)):
        noise = family.h * a - HALF
    elif isinstance(family, GradientRD):
        noise = a  # gradient noise b.grad(u) dW is invariant for every amplitude
    else:
        raise DomainError(f"no drift/noise power comparison for {family.name}")
    return a, noise, a == noise


def besov_scaling_exponent(family: EquationFamily, q, p, d: int, s_c=None):
    """Net power of ``lam`` in ``||u_{0,lam}||`` of the homogeneous Besov space of smoothness ``s_c``.

    Equals ``a + space * (s_c - d/q)``; it vanishes exactly at the critical
    smoothness.  When ``s_c`` is omitted the family's closed form is used.
    """
    law = scaling_law(family)
    q = num(q)
    if s_c is None:
        s_c = critical_smoothness(family, q, d)
    return law.amplitude + law.space * (num(s_c) - num(d) / q)


def critical_smoothness(family: EquationFamily, q, d: int):
    """Root of :func:`besov_scaling_exponent`: ``d/q - a / space``."""
    law = scaling_law(family)
    return num(d) / num(q) - law.amplitude / law.space


# ---------------------------------------------------------------------------
# numerical rescaling
# ---------------------------------------------------------------------------


def _integer_root(lam: float, space) -> int:
    j = float(lam) ** float(space)
    ji = int(round(j))
    if ji < 1 or abs(j - ji) > 1e-12 * max(1.0, j):
        raise ScalingConfigError(f"lam^{space} = {j} must be an integer so the period maps onto itself")
    return ji


def rescale_solution(series: TimeSeries, lam: float, law: ScalingLaw, grid: Optional[TorusGrid] = None) -> TimeSeries:
    """``lam^a u(lam t, j x)`` with ``j = lam^{space}`` on a grid ``j`` times finer.

    Mode ``k`` of ``u`` becomes mode ``j k``; times are divided by ``lam``.
    """
    j = _integer_root(lam, law.space)
    g = series.grid
    fine = grid or TorusGrid(g.d, g.n * j, g.length)
    if fine.n < g.n * j or fine.d != g.d:
        raise ScalingConfigError("target grid must have at least j times as many modes")
    modes = g.int_modes
    target = (j * modes) % fine.n
    out = np.zeros((series.mesh.size,) + fine.shape, dtype=complex)
    amp = float(lam) ** float(law.amplitude)
    if g.d == 1:
        out[:, target] = series.states
    else:
        out[:, target[:, None], target[None, :]] = series.states
    # the Nyquist column of u would land on an aliased mode; keep it only if it vanishes
    return TimeSeries(series.mesh / float(lam), out * amp, fine, series.weight)


_SIM_FAMILIES = {"heat": None, "burgers": None, "allen-cahn": None, "reaction-diffusion": None, "conservative-rd": None}


def scaling_residual(
    family: str,
    u0: Callable,
    lam: float,
    law: ScalingLaw,
    n: int = 32,
    T: float = 0.1,
    dt: Optional[float] = None,
    params: Optional[dict] = None,
) -> float:
    """Strong-identity defect of the rescaled numerical solution.

    ``u`` is computed deterministically on ``[0, lam T]`` with ``n`` modes and
    step ``dt`` (default ``0.1 (2 pi / n)^2``, refining time with the square
    of the mesh width), then rescaled and checked against the same equation
    with trapezoidal quadrature on the rescaled mesh.
    """
    grid = TorusGrid(1, n)
    if dt is None:
        dt = 0.1 * (grid.length / n) ** 2
    steps = int(round(lam * T / dt))
    rhs = build_equation(family, params, grid)
    c0 = from_physical(grid, u0(grid.points()[0]))
    res = simulate_path(StepperConfig("semi-implicit", dt, steps * dt, paths=1), rhs, c0)
    series = res.series(0)
    scaled = rescale_solution(series, lam, law)
    rhs_fine = build_equation(family, params, scaled.grid)
    return strong_residual(scaled, rhs_fine, None, quadrature="trapezoid")


def refinement_slope(widths, residuals) -> float:
    """Least-squares slope of ``log residual`` against ``log width``."""
    return float(np.polyfit(np.log(widths), np.log(residuals), 1)[0])
