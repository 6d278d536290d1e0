"""Cutoff functions, the truncated fixed-point map and Picard iteration on Galerkin paths.

The iteration is pathwise: one noise realization is fixed and the map
``v -> R(w0, F_lambda(v) + f, G_lambda(v) + g)`` is iterated, where ``R``
solves the linear equation by exponential Euler and the nonlinearities are
multiplied by cutoffs of running norms of ``v``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .criticality import GrowthTerm, holder_exponents, rho_star
from .field import TimeSeries, sobolev_norms, weighted_lp, xfrak_norm
from .simulate import EquationRHS, linear_exponential_solve, strong_residual
from .space_index import DomainError, SobolevIndex, SpacePair, TimeWeightIndex


class ConfigurationError(DomainError):
    """The drift/noise split needed by the truncated map was not declared."""


def xi_cutoff(x, lam: float):
    """1 on ``[0, lam]``, ``(2 lam - x)/lam`` on ``(lam, 2 lam)``, 0 beyond."""
    if not lam > 0:
        raise DomainError("cutoff level must be positive")
    x = np.asarray(x, dtype=float)
    out = np.clip((2 * lam - x) / lam, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Cutoff:
    lam: float
    allow_large: bool = False

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise DomainError("cutoff level must be positive")
        if self.lam >= 1 and not self.allow_large:
            raise DomainError("cutoff level must lie in (0, 1) unless explicitly allowed")

    def __call__(self, x):
        return xi_cutoff(x, self.lam)


def xfrak_terms(terms: Sequence[GrowthTerm], tw: TimeWeightIndex) -> list:
    """Float tuples ``(r, rho_star * r_prime, beta, phi)`` for the critical terms.

    Terms with ``beta <= 1 - (1+kappa)/p`` are subcritical and are controlled
    by the maximal-regularity norm alone, so they are skipped.
    """
    L = (1 + tw.kappa) / tw.p
    out = []
    for t in terms:
        if t.beta <= 1 - L:
            continue
        hp = holder_exponents(t, tw)
        rs = rho_star(t, tw)
        r = float("inf") if hp.inv_r == 0 else float(1 / hp.inv_r)
        rr = float("inf") if hp.inv_r_prime == 0 else float(rs / hp.inv_r_prime)
        out.append((r, rr, float(t.beta), float(t.phi)))
    return out


@dataclass(frozen=True)
class TruncationSpaces:
    """Spaces entering the cutoff functionals and the fixed-point norm.

    ``trace`` is the Sobolev surrogate used for the trace-space norm and
    ``M`` the weight of the auxiliary ``L^p(X_0)`` term of the fixed-point norm.
    """

    pair: SpacePair
    tw: TimeWeightIndex
    terms: tuple = ()
    trace: Optional[SobolevIndex] = None
    M: float = 0.0

    def trace_index(self) -> SobolevIndex:
        if self.trace is not None:
            return self.trace
        L = (1 + self.tw.kappa) / self.tw.p
        return SobolevIndex(float(self.pair.x1.s) - self.pair.order * float(L), self.pair.q)

    def _series(self, mesh, states, grid) -> TimeSeries:
        return TimeSeries(mesh, states, grid, self.tw)

    def running(self, mesh, states, grid, x: np.ndarray) -> dict:
        """Causal running functionals at each mesh time."""
        s = self._series(mesh, states, grid)
        tr = self.trace_index()
        p, kappa = float(self.tw.p), float(self.tw.kappa)
        xf = xfrak_norm(s, self.terms, self.pair, cumulative=True, causal=True) if self.terms else np.zeros(mesh.size)
        dist = np.maximum.accumulate(sobolev_norms(grid, states - x, float(tr.s), float(tr.q)))
        size = np.maximum.accumulate(sobolev_norms(grid, states, float(tr.s), float(tr.q)))
        x1 = weighted_lp(mesh, s.norms(float(self.pair.x1.s), float(self.pair.q)), p, kappa, cumulative=True, causal=True)
        return {"xfrak": np.asarray(xf), "trace_dist": dist, "trace_size": size, "lp_x1": x1}

    def z_norm(self, mesh, states, grid) -> float:
        """``X(T)`` norm plus ``L^p(w;X_1)``, sup trace norm and ``M L^p(w;X_0)``."""
        s = self._series(mesh, states, grid)
        p, kappa = float(self.tw.p), float(self.tw.kappa)
        tr = self.trace_index()
        total = float(xfrak_norm(s, self.terms, self.pair)) if self.terms else 0.0
        total += float(weighted_lp(mesh, s.norms(float(self.pair.x1.s), float(self.pair.q)), p, kappa))
        total += float(np.max(sobolev_norms(grid, states, float(tr.s), float(tr.q))))
        if self.M:
            total += self.M * float(weighted_lp(mesh, s.norms(float(self.pair.x0.s), float(self.pair.q)), p, kappa))
        return total


def _at(t, mesh, values):
    if t is None:
        return values
    i = int(np.searchsorted(mesh, t, side="right")) - 1
    return float(values[max(i, 0)])


def theta_truncation(t, x, series: TimeSeries, lam: float, spaces: TruncationSpaces):
    """``xi_lam(||u||_{X(t)} + sup_{s<=t} ||u(s) - x||_Tr)``; ``t=None`` gives all mesh times."""
    r = spaces.running(series.mesh, series.states, series.grid, np.asarray(x))
    return _at(t, series.mesh, xi_cutoff(r["xfrak"] + r["trace_dist"], lam))


def psi_truncation(t, x, series: TimeSeries, lam: float, spaces: TruncationSpaces):
    """``xi_lam(sup_{s<=t} ||u(s) - x||_Tr + ||u||_{L^p(0,t,w;X_1)})``."""
    r = spaces.running(series.mesh, series.states, series.grid, np.asarray(x))
    return _at(t, series.mesh, xi_cutoff(r["trace_dist"] + r["lp_x1"], lam))


def phi_n_truncation(t, series: TimeSeries, n: int, spaces: TruncationSpaces):
    """``xi_n(||u||_{L^p(0,t,w;X_1)} + sup_{s<=t} ||u(s)||_Tr)``."""
    r = spaces.running(series.mesh, series.states, series.grid, np.zeros(series.grid.shape))
    return _at(t, series.mesh, xi_cutoff(r["lp_x1"] + r["trace_size"], float(n)))


@dataclass
class SplitRHS:
    """Decomposition of the nonlinearities required by the truncated map.

    ``critical_drift`` and ``critical_noise`` are cut off by the Theta
    functional after centering at zero; ``trace_drift`` (quasilinear and
    trace-dependent parts) by the Psi functional after centering at the
    reference point; ``lipschitz_drift`` passes through unchanged.
    Noise callables take ``(coeffs, dw)`` and return the step increment.
    """

    critical_drift: Optional[Callable] = None
    critical_noise: Optional[Callable] = None
    trace_drift: Optional[Callable] = None
    lipschitz_drift: Optional[Callable] = None


@dataclass
class TruncatedProblem:
    """Everything the pathwise fixed-point map needs for one path."""

    rhs: EquationRHS  # linear part: symbol and linear noise operator
    split: Optional[SplitRHS]
    spaces: TruncationSpaces
    w0: np.ndarray
    dt: float
    n_steps: int
    lam: float
    f: Optional[np.ndarray] = None
    gdw: Optional[np.ndarray] = None
    bdw: Optional[np.ndarray] = None

    @property
    def mesh(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


def truncated_rhs(problem: TruncatedProblem, states: np.ndarray) -> tuple:
    """Forcings of the truncated map for the candidate ``states``.

    Returns ``(F, G, f, g)`` as arrays over the steps: ``F`` and ``G`` are the
    truncated drift values and noise increments evaluated at ``states``;
    ``f`` and ``g`` collect the fixed forcings including the values of the
    nonlinearities at zero and at the reference point.
    """
    sp = problem.split
    if sp is None:
        raise ConfigurationError("declare the split of the nonlinearities before truncating")
    grid = problem.rhs.grid
    n = problem.n_steps
    left = states[:-1]
    x = np.asarray(problem.w0)
    r = problem.spaces.running(problem.mesh, states, grid, x)
    theta = xi_cutoff(r["xfrak"] + r["trace_dist"], problem.lam)[:-1]
    psi = xi_cutoff(r["trace_dist"] + r["lp_x1"], problem.lam)[:-1]
    shape = (-1,) + (1,) * grid.d
    zero = np.zeros((1,) + grid.shape, dtype=complex)
    F = np.zeros((n,) + grid.shape, dtype=complex)
    G = np.zeros((n,) + grid.shape, dtype=complex)
    f = np.zeros((n,) + grid.shape, dtype=complex) if problem.f is None else np.array(problem.f, dtype=complex)
    g = np.zeros((n,) + grid.shape, dtype=complex) if problem.gdw is None else np.array(problem.gdw, dtype=complex)
    if sp.critical_drift is not None:
        f0 = sp.critical_drift(zero)[0]
        F += theta.reshape(shape) * (sp.critical_drift(left) - f0)
        f = f + f0
    if sp.trace_drift is not None:
        fx = sp.trace_drift(x[None])[0]
        F += psi.reshape(shape) * (sp.trace_drift(left) - fx)
        f = f + fx
    if sp.lipschitz_drift is not None:
        F += sp.lipschitz_drift(left)
    if sp.critical_noise is not None:
        if problem.bdw is None:
            raise ConfigurationError("critical noise needs driver increments")
        dw = np.asarray(problem.bdw)
        g0 = sp.critical_noise(np.zeros((n,) + grid.shape, dtype=complex), dw)
        G += theta.reshape(shape) * (sp.critical_noise(left, dw) - g0)
        g = g + g0
    return F, G, f, g


def linear_solve(w0, f, g, rhs: EquationRHS, dt: float, bdw=None, n_steps: Optional[int] = None, tw: TimeWeightIndex = TimeWeightIndex(2, 0)) -> TimeSeries:
    """Exponential-Euler solution of the linear equation with forcings ``f`` and ``g``.

    ``g`` is the stochastic forcing already integrated over each step;
    ``bdw`` drives the linear noise operator of ``rhs``.
    """
    states = linear_exponential_solve(rhs, np.asarray(w0, dtype=complex), dt, f=f, gdw=g, bdw=bdw, n_steps=n_steps)
    mesh = np.arange(states.shape[0]) * dt
    return TimeSeries(mesh, states, rhs.grid, tw)


def picard_map(problem: TruncatedProblem, states: np.ndarray) -> np.ndarray:
    F, G, f, g = truncated_rhs(problem, states)
    return linear_exponential_solve(problem.rhs, np.asarray(problem.w0, dtype=complex), problem.dt, f=F + f, gdw=G + g, bdw=problem.bdw, n_steps=problem.n_steps)


@dataclass
class PicardResult:
    series: TimeSeries
    differences: list
    ratios: list
    converged: bool
    contracting: bool
    iterations: int
    min_theta: float
    residual: Optional[float] = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "iterations": self.iterations,
                "converged": self.converged,
                "contracting": self.contracting,
                "differences": [float(x) for x in self.differences],
                "ratios": [float(x) for x in self.ratios],
                "min_theta": self.min_theta,
                "residual": self.residual,
            },
            indent=2,
            sort_keys=True,
        )


def picard_iterate(problem: TruncatedProblem, max_iters: int = 50, tol: float = 1e-10, initial: Optional[np.ndarray] = None) -> PicardResult:
    """Iterate the truncated map from the constant path ``w0`` until the fixed-point norm of the update is below ``tol``.

    ``iterations`` in the result counts the map applications needed to reach
    the returned fixed point.  Three consecutive ratios above one stop the
    run and flag non-contraction.
    """
    grid = problem.rhs.grid
    mesh = problem.mesh
    v = np.broadcast_to(np.asarray(problem.w0, dtype=complex), (problem.n_steps + 1,) + grid.shape).copy() if initial is None else np.array(initial, dtype=complex)
    diffs, ratios = [], []
    converged = False
    contracting = True
    above = 0
    it = 0
    for it in range(1, max_iters + 1):
        new = picard_map(problem, v)
        diff = problem.spaces.z_norm(mesh, new - v, grid)
        diffs.append(diff)
        if len(diffs) >= 2 and diffs[-2] > 0:
            ratios.append(diff / diffs[-2])
            above = above + 1 if ratios[-1] > 1 else 0
        v = new
        if diff < tol:
            converged = True
            break
        if above >= 3:
            contracting = False
            break
    r = problem.spaces.running(mesh, v, grid, np.asarray(problem.w0))
    theta = xi_cutoff(r["xfrak"] + r["trace_dist"], problem.lam)
    # the update that falls below tol only confirms the previous iterate
    needed = it - 1 if converged else it
    return PicardResult(TimeSeries(mesh, v, grid, problem.spaces.tw), diffs, ratios, converged, contracting, needed, float(np.min(theta)))


def contraction_factor(ratios: Sequence[float]) -> float:
    """Largest ratio of consecutive update norms (the ratios start at iteration 2)."""
    if len(ratios) == 0:
        raise DomainError("contraction factor needs at least two iterations")
    return float(max(ratios))


def fixed_point_residual(result: PicardResult, original: EquationRHS, increments: Optional[np.ndarray]) -> float:
    """Discrete strong-identity defect of the fixed point for the untruncated equation."""
    return strong_residual(result.series, original, increments, scheme="exponential", quadrature="scheme")


def empirical_lipschitz(problem: TruncatedProblem, pairs: Sequence[tuple]) -> float:
    """``max ||F_lam(v) - F_lam(w)||_{L^p(w;X_0)} / ||v - w||_Z`` over probe pairs of paths."""
    grid = problem.rhs.grid
    mesh = problem.mesh
    sp = problem.spaces
    p, kappa = float(sp.tw.p), float(sp.tw.kappa)
    best = 0.0
    for v, w in pairs:
        Fv = truncated_rhs(problem, v)[0]
        Fw = truncated_rhs(problem, w)[0]
        dF = np.concatenate([Fv - Fw, (Fv - Fw)[-1:]])
        num = float(weighted_lp(mesh, sobolev_norms(grid, dF, float(sp.pair.x0.s), float(sp.pair.q)), p, kappa))
        den = sp.z_norm(mesh, v - w, grid)
        if den > 0:
            best = max(best, num / den)
    return best
