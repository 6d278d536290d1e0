"""Spectral Galerkin time stepping for the example equations on the torus.

States are coefficient arrays of shape ``(M,) + grid.shape`` holding ``M``
independent paths that are advanced together.  The stiff linear part is
treated implicitly (semi-implicit Euler) or exactly (exponential Euler);
nonlinear drift and noise are explicit, with Itô (left-point) evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .field import (
    TimeSeries,
    TorusGrid,
    gagliardo_time_seminorm,
    nonlinear_apply,
    product_coeffs,
    sobolev_norms,
    weighted_lp,
)
from .noise import NoiseModel, WienerBank, colored_drivers, colored_spatial_field
from .parabolicity import ellipticity_margin
from .space_index import DomainError, SobolevIndex, TimeWeightIndex

BLOWUP_NORM = 1e12
SCHEMES = ("semi-implicit", "exponential")


class ParabolicityError(DomainError):
    """The drift and gradient-noise coefficients violate stochastic parabolicity."""


class BlowUpError(RuntimeError):
    """A state became non-finite or exceeded the blow-up threshold."""

    def __init__(self, step: int, partial=None) -> None:
        super().__init__(f"blow-up detected at step {step}")
        self.step = step
        self.partial = partial


# ---------------------------------------------------------------------------
# equations
# ---------------------------------------------------------------------------


@dataclass
class EquationRHS:
    """Linear symbol, explicit drift and noise operator of one equation.

    ``drift(c)`` maps coefficient arrays to coefficient arrays; ``noise(c, dw)``
    maps coefficients and driver increments of shape ``(M, n_drivers)`` to the
    coefficient increment ``G(u) dW``.
    """

    grid: TorusGrid
    symbol: np.ndarray
    drift: Optional[Callable[[np.ndarray], np.ndarray]] = None
    noise: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    n_drivers: int = 1
    order: int = 2
    name: str = "custom"
    x0: SobolevIndex = field(default_factory=lambda: SobolevIndex(-1, 2))
    margin: Optional[float] = None

    def __post_init__(self) -> None:
        sym = np.asarray(self.symbol)
        if np.iscomplexobj(sym) and np.max(np.abs(sym.imag)) > 0:
            raise DomainError("linear symbol must be real")
        sym = np.real(sym).astype(float)
        if sym.shape != self.grid.shape or not np.all(np.isfinite(sym)):
            raise DomainError("linear symbol must be finite and match the grid")
        self.symbol = sym

    @property
    def is_linear(self) -> bool:
        return self.drift is None

    def drift_at(self, c: np.ndarray) -> np.ndarray:
        return np.zeros_like(c) if self.drift is None else self.drift(c)

    def noise_at(self, c: np.ndarray, dw: np.ndarray) -> np.ndarray:
        return np.zeros_like(c) if self.noise is None else self.noise(c, dw)


def _signed_power(h: float) -> Callable[[np.ndarray], np.ndarray]:
    if h == 2:
        return lambda u: np.abs(u) * u
    if h == 3:
        return lambda u: u * u * u
    return lambda u: np.abs(u) ** (h - 1) * u


def _noise_operator(grid: TorusGrid, model: Optional[NoiseModel]):
    """Returns ``(noise callable, n_drivers, gradient coefficients or None)``."""
    if model is None or model.kind == "none":
        return None, 1, None
    dsym = grid.derivative_symbols()
    if model.kind == "gradient":
        b = np.atleast_2d(np.asarray(model.coeffs, dtype=float))
        if b.shape[0] != grid.d:
            raise DomainError("gradient noise coefficients must have shape (d, n)")
        mult = sum(dsym[j][None] * b[j].reshape((-1,) + (1,) * grid.d) for j in range(grid.d))
        extra = model.g

        def noise(c, dw):
            out = c * np.tensordot(dw, mult, axes=(1, 0))
            if extra is not None:
                out = out + nonlinear_apply(grid, c, extra) * dw[:, :1].reshape((-1,) + (1,) * grid.d)
            return out

        return noise, b.shape[1], b
    if model.kind == "multiplicative":
        coeffs = np.atleast_1d(np.asarray(model.coeffs if model.coeffs is not None else [1.0], dtype=float))
        g = model.g if model.g is not None else (lambda u: u)

        def noise(c, dw):
            w = (dw @ coeffs).reshape((-1,) + (1,) * grid.d)
            return nonlinear_apply(grid, c, g) * w

        return noise, coeffs.size, None
    # colored or white
    sigma = float(model.sigma)
    g = model.g

    def noise(c, dw):
        xi = colored_spatial_field(model, grid, dw, 1.0) * sigma
        if g is None:
            return xi
        return product_coeffs(grid, nonlinear_apply(grid, c, g), xi)

    if model.kind == "white" and grid.d != 1:
        raise DomainError("space-time white noise is only supported in one dimension")
    return noise, colored_drivers(grid), None


FAMILY_NAMES = (
    "heat",
    "burgers",
    "allen-cahn",
    "mass-conservative-ac",
    "cahn-hilliard",
    "conservative-rd",
    "reaction-diffusion",
    "gradient-rd",
    "porous-media",
)


def build_equation(
    family: str,
    params: Optional[dict] = None,
    grid: Optional[TorusGrid] = None,
    noise: Optional[NoiseModel] = None,
    diffusion: Optional[np.ndarray] = None,
    check_parabolicity: bool = True,
) -> EquationRHS:
    """Assemble the right-hand side of one example equation.

    ``params`` holds family parameters: ``h`` and ``m`` growth exponents,
    ``coef`` drift coefficients, ``r`` and ``u_min`` for porous media.
    ``diffusion`` is the constant ``d x d`` matrix ``a`` (identity by default).
    """
    params = dict(params or {})
    grid = grid or TorusGrid(1, 64)
    d = grid.d
    a = np.eye(d) if diffusion is None else np.atleast_2d(np.asarray(diffusion, dtype=float))
    if a.shape != (d, d):
        raise DomainError("diffusion matrix must be d x d")
    k = grid.k_axes
    ksq_a = sum(a[i, j] * np.broadcast_to(k[i], grid.shape) * np.broadcast_to(k[j], grid.shape) for i in range(d) for j in range(d))
    symbol = -ksq_a
    dsym = grid.derivative_symbols()
    ksq = grid.ksq
    order = 2
    x0 = SobolevIndex(-1, 2)
    drift = None

    if family == "heat":
        pass
    elif family == "burgers":
        if d != 1:
            raise DomainError("Burgers equation is one-dimensional")
        coef = float(params.get("coef", 1.0))
        drift = lambda c: -coef * dsym[0] * product_coeffs(grid, c, c)
    elif family in ("allen-cahn", "mass-conservative-ac"):
        cubic = lambda u: u - u * u * u
        if family == "allen-cahn":
            drift = lambda c: nonlinear_apply(grid, c, cubic)
        else:
            def drift(c):
                v = nonlinear_apply(grid, c, cubic)
                v[(Ellipsis,) + (0,) * d] = 0.0
                return v
    elif family == "cahn-hilliard":
        order = 4
        symbol = -(ksq_a**2)
        x0 = SobolevIndex(-2, 2)
        phi = lambda u: u * u * u - u
        drift = lambda c: -ksq * nonlinear_apply(grid, c, phi)
    elif family == "conservative-rd":
        h = float(params.get("h", 2.0))
        coef = np.broadcast_to(np.asarray(params.get("coef", 1.0), dtype=float), (d,))
        powf = _signed_power(h)
        div = sum(coef[j] * dsym[j] for j in range(d))
        drift = lambda c: div * nonlinear_apply(grid, c, powf)
    elif family == "reaction-diffusion":
        m = float(params.get("m", 3.0))
        coef = float(params.get("coef", 1.0))
        powf = _signed_power(m)
        drift = lambda c: -coef * nonlinear_apply(grid, c, powf)
    elif family == "gradient-rd":
        m = float(params.get("m", 2.0))
        coef = float(params.get("coef", 1.0))

        def drift(c):
            mask = grid.dealias_mask()
            grads = np.stack([dsym[j] * c * mask for j in range(d)], axis=0)
            # |grad u|^m evaluated on a padded grid
            from .field import pad_coeffs, truncate_coeffs

            mm = 2 * grid.n
            axes = tuple(range(-d, 0))
            phys = np.real(np.fft.ifftn(pad_coeffs(grid, grads, mm), axes=axes)) * mm**d
            val = np.sqrt(np.sum(phys**2, axis=0)) ** m
            back = np.fft.fftn(val, axes=axes) / mm**d
            return coef * truncate_coeffs(grid, back) * mask

    elif family == "porous-media":
        r = float(params.get("r", 3.0))
        u_min = float(params.get("u_min", 0.0))
        if r < 3:
            raise DomainError("porous media exponent must satisfy r >= 3")
        if not u_min > 0:
            raise DomainError("porous media requires initial data bounded below by a positive constant")
        stab = r * u_min ** (r - 1)
        symbol = -stab * ksq_a
        powf = _signed_power(r)
        drift = lambda c: -ksq * nonlinear_apply(grid, c, powf) + stab * ksq * c
    else:
        raise DomainError(f"unknown equation family {family!r}")

    noise_fn, n_drivers, bcoef = _noise_operator(grid, noise)
    margin = None
    if bcoef is not None:
        margin = ellipticity_margin(a, bcoef)
        if check_parabolicity and not margin > 0:
            raise ParabolicityError(f"stochastic parabolicity fails: ellipticity margin {margin:.6g} <= 0")
    return EquationRHS(grid, symbol, drift, noise_fn, n_drivers, order, family, x0, margin)


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------


def _phi1(z: np.ndarray) -> np.ndarray:
    out = np.ones_like(z)
    nz = z != 0
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out


@dataclass(frozen=True)
class StepperConfig:
    scheme: str = "exponential"
    dt: float = 1e-3
    T: float = 1.0
    seed: int = 0
    paths: int = 1

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}")
        if not self.dt > 0 or not self.T > 0:
            raise DomainError("time step and horizon must be positive")
        if self.paths < 1:
            raise DomainError("need at least one path")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


class _Propagator:
    """Cached per-``dt`` multipliers of a scheme."""

    def __init__(self, rhs: EquationRHS, dt: float, scheme: str) -> None:
        self.rhs, self.dt, self.scheme = rhs, dt, scheme
        z = dt * rhs.symbol
        if scheme == "exponential":
            self.e = np.exp(z)
            self.p = _phi1(z) * dt
        else:
            self.inv = 1.0 / (1.0 - z)

    def __call__(self, c: np.ndarray, dw: np.ndarray) -> np.ndarray:
        rhs = self.rhs
        if self.scheme == "exponential":
            out = self.e * (c + rhs.noise_at(c, dw))
            if rhs.drift is not None:
                out = out + self.p * rhs.drift(c)
            return out
        num = c + rhs.noise_at(c, dw)
        if rhs.drift is not None:
            num = num + self.dt * rhs.drift(c)
        return num * self.inv


def _l2_norms(grid: TorusGrid, c: np.ndarray) -> np.ndarray:
    axes = tuple(range(-grid.d, 0))
    return np.sqrt(np.sum(np.abs(c) ** 2, axis=axes) * grid.volume)


def step(state: np.ndarray, rhs: EquationRHS, dw: np.ndarray, dt: float, scheme: str = "exponential") -> np.ndarray:
    """One time step for all paths; raises :class:`BlowUpError` (step 0) on blow-up."""
    c = np.asarray(state, dtype=complex)
    single = c.shape == rhs.grid.shape
    if single:
        c = c[None]
        dw = np.atleast_2d(dw)
    out = _Propagator(rhs, dt, scheme)(c, np.asarray(dw, dtype=float))
    bad = ~np.isfinite(out).all(axis=tuple(range(1, out.ndim))) | (_l2_norms(rhs.grid, out) > BLOWUP_NORM)
    if np.any(bad):
        raise BlowUpError(0)
    return out[0] if single else out


@dataclass(frozen=True)
class StopRule:
    """Stop a path at the first mesh point where the functional reaches ``threshold``.

    ``functional(t, coeffs)`` returns one value per path; the running maximum
    is used so the stopping functional is nondecreasing in time.
    """

    functional: Callable[[float, np.ndarray], np.ndarray]
    threshold: float

    @staticmethod
    def sup_norm(s: float, q: float, threshold: float, grid: TorusGrid) -> "StopRule":
        return StopRule(lambda t, c: sobolev_norms(grid, c, s, q), threshold)


@dataclass
class SimulationResult:
    """Recorded states of all paths, plus per-path stopping and blow-up indices.

    ``hit_index[m]`` is the mesh index at which path ``m`` stopped (``-1`` if
    never); ``blowup_step[m]`` is the step at which it blew up (``-1`` if never).
    After stopping or blow-up a path is frozen (stopped) or NaN (blown up).
    """

    mesh: np.ndarray
    states: np.ndarray  # (n_t, M, *shape)
    grid: TorusGrid
    hit_index: np.ndarray
    blowup_step: np.ndarray
    increments: Optional[np.ndarray] = None  # (M, steps, n_drivers) when kept
    weight: TimeWeightIndex = TimeWeightIndex(2, 0)

    def series(self, path: int = 0) -> TimeSeries:
        return TimeSeries(self.mesh, self.states[:, path], self.grid, self.weight)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def simulate_path(
    config: StepperConfig,
    rhs: EquationRHS,
    u0: np.ndarray,
    stop_rule: Optional[StopRule] = None,
    bank=None,
    record_every: int = 1,
    keep_increments: bool = False,
    path_offset: int = 0,
    chunk: int = 256,
    raise_on_blowup: bool = False,
) -> SimulationResult:
    """Advance ``config.paths`` paths from ``u0`` over ``[0, T]``.

    ``u0`` is a coefficient array of the grid shape (shared by all paths) or
    of shape ``(M,) + grid.shape``.
    """
    grid = rhs.grid
    M = config.paths
    n = config.n_steps
    dt = config.dt
    c = np.asarray(u0, dtype=complex)
    c = np.broadcast_to(c, (M,) + grid.shape).copy()
    if bank is None:
        bank = WienerBank(rhs.n_drivers, dt, config.seed)
    if bank.n_drivers != rhs.n_drivers:
        raise DomainError("noise bank size does not match the equation")
    if abs(bank.dt - dt) > 1e-12 * dt:
        raise DomainError("noise bank time step does not match the stepper")
    prop = _Propagator(rhs, dt, config.scheme)
    paths = range(path_offset, path_offset + M)

    mesh_rec = [0.0]
    rec = [c.copy()]
    hit = np.full(M, -1)
    blow = np.full(M, -1)
    active = np.ones(M, dtype=bool)
    running = np.full(M, -np.inf)
    if stop_rule is not None:
        running = np.maximum(running, stop_rule.functional(0.0, c))
        newly = running >= stop_rule.threshold
        hit[newly] = 0
        active &= ~newly
    kept = [] if keep_increments else None

    for s0 in range(0, n, chunk):
        s1 = min(n, s0 + chunk)
        needs_noise = rhs.noise is not None
        incs = bank.increments(s0, s1, paths) if needs_noise or keep_increments else None
        if kept is not None:
            kept.append(incs)
        for j in range(s1 - s0):
            i = s0 + j
            if not active.any():
                new = c
            else:
                dw = incs[:, j] if incs is not None else np.zeros((M, rhs.n_drivers))
                with np.errstate(all="ignore"):
                    new = prop(c, dw)
                bad = ~np.isfinite(new).all(axis=tuple(range(1, new.ndim)))
                bad |= ~(_l2_norms(grid, np.where(np.isfinite(new), new, 0)) <= BLOWUP_NORM)
                bad &= active
                if bad.any():
                    blow[bad] = i + 1
                    new[bad] = np.nan
                    active &= ~bad
                    if raise_on_blowup:
                        partial = SimulationResult(np.array(mesh_rec), np.stack(rec), grid, hit, blow)
                        raise BlowUpError(i + 1, partial)
                new = np.where(active.reshape((-1,) + (1,) * grid.d) | (blow >= 0).reshape((-1,) + (1,) * grid.d), new, c)
            c = new
            t = (i + 1) * dt
            if stop_rule is not None and active.any():
                running = np.maximum(running, stop_rule.functional(t, c))
                newly = active & (running >= stop_rule.threshold)
                hit[newly] = i + 1
                active &= ~newly
            if (i + 1) % record_every == 0 or i + 1 == n:
                mesh_rec.append(t)
                rec.append(c.copy())
    incs_all = np.concatenate(kept, axis=1) if kept else None
    return SimulationResult(np.array(mesh_rec), np.stack(rec), grid, hit, blow, incs_all)


# ---------------------------------------------------------------------------
# residuals, probes and functionals
# ---------------------------------------------------------------------------


def strong_residual(
    series: TimeSeries,
    rhs: EquationRHS,
    increments: Optional[np.ndarray] = None,
    scheme: str = "semi-implicit",
    quadrature: str = "scheme",
) -> float:
    """Max over mesh points of the ``X_0`` norm of the accumulated identity defect.

    ``quadrature="scheme"`` uses the stepper's own discrete identity (zero up
    to rounding for its exact output); ``"trapezoid"`` compares against the
    strong formulation with trapezoidal drift quadrature and Itô sums for the
    noise, which exposes the scheme's time-discretization error.
    ``increments`` has shape ``(steps, n_drivers)`` for the path.
    """
    t = series.mesh
    u = series.states
    n = t.size - 1
    if n == 0:
        return 0.0
    h = np.diff(t).reshape((-1,) + (1,) * rhs.grid.d)
    if increments is None:
        incs = np.zeros((n, rhs.n_drivers))
    else:
        incs = np.asarray(increments, dtype=float)
        if incs.shape[0] != n:
            raise DomainError("one increment row per mesh interval is required")
    left, right = u[:-1], u[1:]
    noise = rhs.noise_at(left, incs) if rhs.noise is not None else 0.0
    drift_l = rhs.drift_at(left)
    sym = rhs.symbol
    if quadrature == "trapezoid":
        drift_r = rhs.drift_at(right)
        defect = right - left - 0.5 * h * (sym * left + drift_l + sym * right + drift_r) - noise
    elif quadrature == "scheme" and scheme == "semi-implicit":
        defect = right - left - h * (sym * right + drift_l) - noise
    elif quadrature == "scheme" and scheme == "exponential":
        z = h * sym
        defect = right - np.exp(z) * (left + noise) - _phi1(z) * h * drift_l
    else:
        raise DomainError("unknown scheme or quadrature")
    acc = np.cumsum(defect, axis=0)
    norms = sobolev_norms(rhs.grid, acc, float(rhs.x0.s), float(rhs.x0.q))
    return float(np.max(norms))


def mean_functional(series: TimeSeries) -> np.ndarray:
    """Spatial mean (mode-0 coefficient) at each mesh time."""
    idx = (slice(None),) + (0,) * series.grid.d
    return np.real(series.states[idx])


def linear_exponential_solve(
    rhs: EquationRHS,
    w0: np.ndarray,
    dt: float,
    f: Optional[np.ndarray] = None,
    gdw: Optional[np.ndarray] = None,
    bdw: Optional[np.ndarray] = None,
    n_steps: Optional[int] = None,
) -> np.ndarray:
    """Exponential Euler for ``du = (L u + f) dt + (B u dW + g dW)``.

    ``f`` has shape ``(steps, ...)`` (left-point values), ``gdw`` holds the
    stochastic forcing already integrated over each step and ``bdw`` the
    driver increments used by the equation's own (linear) noise operator.
    Returns states of shape ``(steps + 1, ...)``.
    """
    sizes = [x.shape[0] for x in (f, gdw, bdw) if x is not None]
    n = n_steps if n_steps is not None else (sizes[0] if sizes else 0)
    if any(sz != n for sz in sizes):
        raise DomainError("forcing arrays disagree on the number of steps")
    z = dt * rhs.symbol
    e = np.exp(z)
    p = _phi1(z) * dt
    c = np.asarray(w0, dtype=complex)
    out = np.empty((n + 1,) + c.shape, dtype=complex)
    out[0] = c
    for i in range(n):
        inc = np.zeros_like(c)
        if bdw is not None and rhs.noise is not None:
            inc = rhs.noise(c[None] if c.ndim == rhs.grid.d else c, np.atleast_2d(bdw[i])).reshape(c.shape)
        if gdw is not None:
            inc = inc + gdw[i]
        c = e * (c + inc)
        if f is not None:
            c = c + p * f[i]
        out[i + 1] = c
    return out


def smr_norm(series: TimeSeries, x1: SobolevIndex, x_theta: SobolevIndex, theta: float) -> float:
    """Surrogate of ``||u||_{H^{theta,p}(w;X_{1-theta})} + ||u||_{L^p(w;X_1)}``."""
    p, kappa = float(series.weight.p), float(series.weight.kappa)
    lp1 = float(weighted_lp(series.mesh, series.norms(float(x1.s), float(x1.q)), p, kappa))
    if theta == 0:
        return 2 * lp1
    return gagliardo_time_seminorm(series, theta, x_theta) + lp1


def estimate_smr_constants(
    rhs: EquationRHS,
    tw: TimeWeightIndex,
    theta: float,
    det_probes: Sequence[np.ndarray] = (),
    sto_probes: Sequence[np.ndarray] = (),
    dt: float = 1e-3,
    T: float = 1.0,
    paths: int = 16,
    seed: int = 0,
) -> tuple:
    """Lower-bound estimates of the deterministic and stochastic regularity constants.

    Each deterministic probe is a forcing array ``(steps,) + grid.shape``;
    each stochastic probe a time-constant bank ``(n, ) + grid.shape`` of
    additive noise fields driven by ``n`` independent drivers.  The ratio of
    the solution's surrogate norm to the input norm is maximized over probes.
    Constants are comparative diagnostics because the fractional-in-time norm
    is only a surrogate.
    """
    grid = rhs.grid
    n = int(round(T / dt))
    mesh = np.arange(n + 1) * dt
    half = rhs.order // 2
    x0 = SobolevIndex(-half, 2)
    x1 = SobolevIndex(half, 2)
    xth = SobolevIndex(half - 2 * half * theta, 2)
    p, kappa = float(tw.p), float(tw.kappa)
    zero = np.zeros(grid.shape, dtype=complex)
    k_det = 0.0
    for f in det_probes:
        f = np.asarray(f, dtype=complex)
        u = linear_exponential_solve(rhs, zero, dt, f=f)
        s = TimeSeries(mesh, u, grid, tw)
        fin = np.concatenate([f, f[-1:]])
        denom = float(weighted_lp(mesh, sobolev_norms(grid, fin, float(x0.s), 2.0), p, kappa))
        if denom > 0:
            k_det = max(k_det, smr_norm(s, x1, xth, theta) / denom)
    k_sto = 0.0
    for g in sto_probes:
        g = np.asarray(g, dtype=complex)
        nd = g.shape[0]
        bank = WienerBank(nd, dt, seed)
        incs = bank.increments(0, n, paths)
        moments = []
        for m in range(paths):
            gdw = np.tensordot(incs[m], g, axes=(1, 0))
            u = linear_exponential_solve(rhs, zero, dt, gdw=gdw)
            moments.append(smr_norm(TimeSeries(mesh, u, grid, tw), x1, xth, theta) ** p)
        # midpoint space X_{1/2} of the pair (H^{-half}, H^{half}) has smoothness 0
        gnorm = float(sobolev_norms(grid, g, 0.0, 2.0, component_axis=0))
        denom = gnorm * ((T ** (kappa + 1)) / (kappa + 1)) ** (1 / p)
        if denom > 0:
            k_sto = max(k_sto, float(np.mean(moments)) ** (1 / p) / denom)
    return k_det, k_sto


def short_time_ratio(rhs: EquationRHS, forcing: Callable[[float], np.ndarray], horizons: Sequence[float], tw: TimeWeightIndex, steps: int = 200) -> np.ndarray:
    """``||u||_{L^p(0,s,w;X_0)} / ||f||_{L^p(0,s,w;X_0)}`` for the zero-data solution on ``[0, s]``."""
    out = []
    x0 = rhs.x0
    p, kappa = float(tw.p), float(tw.kappa)
    for s in horizons:
        dt = s / steps
        mesh = np.arange(steps + 1) * dt
        f = np.stack([forcing(t) for t in mesh])
        u = linear_exponential_solve(rhs, np.zeros(rhs.grid.shape, dtype=complex), dt, f=f[:-1])
        num = weighted_lp(mesh, sobolev_norms(rhs.grid, u, float(x0.s), float(x0.q)), p, kappa)
        den = weighted_lp(mesh, sobolev_norms(rhs.grid, f, float(x0.s), float(x0.q)), p, kappa)
        out.append(float(num / den))
    return np.array(out)
