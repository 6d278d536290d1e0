"""Growth conditions, critical weights and critical trace spaces.

The central object is the growth inequality for a single nonlinearity term

    rho * (phi - 1 + (1+kappa)/p) + beta <= 1,

evaluated either term by term (``subcritical_ok``) or, for the equation
families below, through their closed-form admissibility windows
(``critical_weight``).  ``region_scan`` re-derives every exponent from the
underlying Sobolev embedding relations and serves as an independent oracle
for ``critical_weight``.

Write ``L = (1+kappa)/p`` for the loss of the time weight.  For a family
whose terms all satisfy ``phi = beta`` the growth inequality is equivalent to
``L <= (rho+1)/rho * (1-beta)``; the critical weight is the kappa at which
the smallest of these right-hand sides is attained with equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .space_index import (
    BesovIndex,
    DomainError,
    Number,
    SpacePair,
    TimeWeightIndex,
    is_exact,
    num,
    trace_space,
    valid_time_weight,
)

HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# growth terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthTerm:
    """Growth exponent ``rho`` with interpolation exponents ``beta <= phi``."""

    rho: Number
    phi: Number
    beta: Number

    def __post_init__(self) -> None:
        for name in ("rho", "phi", "beta"):
            object.__setattr__(self, name, num(getattr(self, name)))
        if self.rho < 0:
            raise DomainError(f"rho must be nonnegative, got {self.rho}")
        if not (0 < self.beta <= self.phi < 1):
            raise DomainError(f"need 0 < beta <= phi < 1, got beta={self.beta}, phi={self.phi}")


@dataclass(frozen=True)
class GrowthSpec:
    """Drift terms, noise terms and the Lipschitz constants of the linear parts."""

    f_terms: tuple = ()
    g_terms: tuple = ()
    lipschitz_f: Number = Fraction(0)
    lipschitz_g: Number = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "f_terms", tuple(self.f_terms))
        object.__setattr__(self, "g_terms", tuple(self.g_terms))
        object.__setattr__(self, "lipschitz_f", num(self.lipschitz_f))
        object.__setattr__(self, "lipschitz_g", num(self.lipschitz_g))
        for t in self.f_terms + self.g_terms:
            if not isinstance(t, GrowthTerm):
                raise TypeError("growth terms must be GrowthTerm instances")
        for c in (self.lipschitz_f, self.lipschitz_g):
            if c < 0 or (isinstance(c, float) and c != c) or c == float("inf"):
                raise DomainError("Lipschitz constants must be finite and nonnegative")


def _loss(tw: TimeWeightIndex) -> Number:
    return tw.loss


def subcritical_ok(term: GrowthTerm, tw: TimeWeightIndex) -> bool:
    """Whether ``rho*(phi - 1 + (1+kappa)/p) + beta <= 1``.

    A term with positive growth must have ``phi > 1 - (1+kappa)/p``; otherwise
    it is not in the regime the inequality describes and a DomainError is
    raised.  Terms with ``rho = 0`` are always accepted.
    """
    L = _loss(tw)
    excess = term.phi - 1 + L
    if term.rho > 0 and excess <= 0:
        raise DomainError(
            f"phi={term.phi} must exceed 1-(1+kappa)/p={1 - L} for a term with positive growth"
        )
    return term.rho * excess + term.beta <= 1


def growth_defect(term: GrowthTerm, tw: TimeWeightIndex) -> Number:
    """The signed quantity ``rho*(phi-1+L) + beta - 1`` (nonpositive iff admissible)."""
    return term.rho * (term.phi - 1 + _loss(tw)) + term.beta - 1


def rho_star(term: GrowthTerm, tw: TimeWeightIndex) -> Number:
    """The growth exponent that turns the inequality into an equality."""
    denom = term.phi - 1 + _loss(tw)
    if denom <= 0:
        raise DomainError(f"phi - 1 + (1+kappa)/p = {denom} must be positive")
    if not term.beta < 1:
        raise DomainError("beta must be below 1")
    return (1 - term.beta) / denom


@dataclass(frozen=True)
class HolderPair:
    """Conjugate exponents stored through their reciprocals (which may vanish)."""

    inv_r: Number
    inv_r_prime: Number

    @property
    def r(self) -> float | Number:
        return float("inf") if self.inv_r == 0 else 1 / self.inv_r

    @property
    def r_prime(self) -> float | Number:
        return float("inf") if self.inv_r_prime == 0 else 1 / self.inv_r_prime

    @property
    def boundary(self) -> bool:
        """True when one of the exponents is infinite."""
        return self.inv_r == 0 or self.inv_r_prime == 0


def holder_exponents(term: GrowthTerm, tw: TimeWeightIndex) -> HolderPair:
    """Exponents ``r, r'`` used to split the critical product in time.

    ``1/r = (beta - 1 + L)/L`` and ``1/r' = rho_star*(phi - 1 + L)/L``
    with ``L = (1+kappa)/p``; they always satisfy ``1/r + 1/r' = 1``.
    """
    L = _loss(tw)
    inv_r = (term.beta - 1 + L) / L
    if inv_r < 0:
        raise DomainError(f"beta={term.beta} must be at least 1-(1+kappa)/p={1 - L}")
    inv_rp = rho_star(term, tw) * (term.phi - 1 + L) / L
    return HolderPair(inv_r, inv_rp)


def smallness_condition(spec: GrowthSpec, k_det: Number, k_sto: Number, c1: Number) -> bool:
    """Strict inequality ``c1*(L_F*K_det + L_G*K_sto) < 1``."""
    k_det, k_sto, c1 = num(k_det), num(k_sto), num(c1)
    return c1 * (spec.lipschitz_f * k_det + spec.lipschitz_g * k_sto) < 1


def weighted_domain_alpha_ok(p: Number, d: int, delta: Number, alpha: Number) -> bool:
    """Spatial weight window ``2p-1-p/(p(1-delta)+delta) < alpha < 2p-d-2`` with ``p > d+2``."""
    p, delta, alpha = num(p), num(delta), num(alpha)
    if not (0 < delta <= 1):
        raise DomainError("delta must lie in (0,1]")
    if not p > d + 2:
        return False
    lower = 2 * p - 1 - p / (p * (1 - delta) + delta)
    return lower < alpha < 2 * p - d - 2


# ---------------------------------------------------------------------------
# parameter points and families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParamPoint:
    """A point ``(d, p, q, kappa, s)``.

    ``kappa=None`` asks :func:`critical_weight` to evaluate the point at its
    critical weight.  The weight range is deliberately not enforced here: an
    out-of-range kappa is reported by ``critical_weight`` as the failing gate
    ``time weight`` so that grids can be scanned without exceptions.
    """

    d: int
    p: Number
    q: Number
    kappa: Optional[Number] = Fraction(0)
    s: Number = Fraction(0)

    def __post_init__(self) -> None:
        if not isinstance(self.d, int) or self.d < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "p", num(self.p))
        object.__setattr__(self, "q", num(self.q))
        object.__setattr__(self, "s", num(self.s))
        if self.kappa is not None:
            object.__setattr__(self, "kappa", num(self.kappa))
        if self.p < 2:
            raise DomainError("p must be at least 2")
        if self.q < 2:
            raise DomainError("q must be at least 2")
        if self.s < -1:
            raise DomainError("s must be at least -1")

    def with_kappa(self, kappa: Number) -> "ParamPoint":
        return ParamPoint(self.d, self.p, self.q, kappa, self.s)


Gate = tuple  # (name, zero-argument callable returning bool)


def _lt_upper(x: Number, numer: Number, denom: Number) -> bool:
    """``x < numer/denom`` with the convention ``numer/0 = +inf`` (numer > 0)."""
    if denom <= 0:
        return True
    return x < numer / denom


class EquationFamily:
    """Base class: subclasses supply gates, growth bounds and closed forms."""

    name = "family"
    order = 2
    scale_tag = "periodic"
    has_critical_weight = True

    def pair(self, pt: ParamPoint) -> SpacePair:
        return SpacePair.shifted(pt.s, pt.q, self.order, self.scale_tag)

    def structural_gates(self, pt: ParamPoint) -> list:
        raise NotImplementedError

    def growth_bounds(self, pt: ParamPoint) -> list:
        """List of ``(label, rhs, strict)``: admissible iff ``L <= rhs`` (``<`` if strict)."""
        raise NotImplementedError

    def critical_gates(self, pt: ParamPoint, kappa_crit: Number) -> list:
        raise NotImplementedError

    def trace_closed_form(self, pt: ParamPoint) -> Optional[Number]:
        return None

    def params(self) -> dict:
        return {}


def _hilbert_gate(pt: ParamPoint) -> Gate:
    return ("p = 2 requires q = 2", lambda: pt.p != 2 or pt.q == 2)


def _failed(gates) -> list:
    """Names of gates whose thunk is false; a vanishing denominator counts as failure."""
    out = []
    for name, thunk in gates:
        try:
            ok = bool(thunk())
        except ZeroDivisionError:
            ok = False
        if not ok:
            out.append(name)
    return out


@dataclass(frozen=True)
class ConservativeRD(EquationFamily):
    """Divergence-form reaction diffusion in the pair ``(H^{-1-s,q}, H^{1-s,q})``."""

    h: Number
    name = "conservative-rd"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", num(self.h))
        if not self.h > 1:
            raise DomainError("h must exceed 1")

    def params(self) -> dict:
        return {"h": self.h}

    def structural_gates(self, pt):
        h, d, q, s = self.h, pt.d, pt.q, pt.s
        return [
            ("d >= 2", lambda: d >= 2),
            ("0 <= s < 1", lambda: 0 <= s < 1),
            ("q > d(h-1)/(h-s(h-1))", lambda: q > d * (h - 1) / (h - s * (h - 1))),
            ("q < d(h-1)/s", lambda: _lt_upper(q, d * (h - 1), s)),
        ]

    def growth_bounds(self, pt):
        h, d, q, s = self.h, pt.d, pt.q, pt.s
        rhs = h / (2 * (h - 1)) - (Fraction(d) / q + s) / 2
        return [("drift growth", rhs, False), ("noise growth", rhs, False)]

    def critical_gates(self, pt, kc):
        h, d, q, s, p = self.h, pt.d, pt.q, pt.s, pt.p
        if p == 2:
            return [
                ("p = q = 2", lambda: q == 2),
                ("h = (2+d+2s)/(d+2s)", lambda: h == (2 + d + 2 * s) / (d + 2 * s)),
                ("d > 2s^2/(1-s)", lambda: d > 2 * s * s / (1 - s)),
            ]
        return [
            ("q > 2", lambda: q > 2),
            ("1/p + d/(2q) + s/2 <= h/(2(h-1))", lambda: 1 / p + Fraction(d) / (2 * q) + s / 2 <= h / (2 * (h - 1))),
            (
                "h >= (1+s)/s or q < d(h-1)/(1-s(h-1))",
                lambda: (s > 0 and h >= (1 + s) / s) or _lt_upper(q, d * (h - 1), 1 - s * (h - 1)),
            ),
        ]

    def trace_closed_form(self, pt):
        return Fraction(pt.d) / pt.q - 1 / (self.h - 1)


@dataclass(frozen=True)
class ReactionDiffusion(EquationFamily):
    """Reaction diffusion with drift growth ``m`` and noise growth ``h`` (weak setting)."""

    m: Number
    h: Number
    name = "reaction-diffusion"

    def __post_init__(self) -> None:
        object.__setattr__(self, "m", num(self.m))
        object.__setattr__(self, "h", num(self.h))
        if not (self.m > 1 and self.h > 1):
            raise DomainError("m and h must exceed 1")

    def params(self) -> dict:
        return {"m": self.m, "h": self.h}

    def pair(self, pt):
        return SpacePair.shifted(0, pt.q, 2, self.scale_tag)

    def structural_gates(self, pt):
        m, h, d, q = self.m, self.h, pt.d, pt.q
        return [
            ("d >= 2", lambda: d >= 2),
            ("m > 1 + 2/d", lambda: m > 1 + Fraction(2, d)),
            ("d = 2 requires q != 2", lambda: d != 2 or q != 2),
            ("q > d(m-1)/(m+1)", lambda: q > d * (m - 1) / (m + 1)),
            ("q < d(m-1)", lambda: q < d * (m - 1)),
            ("q > d(h-1)/h", lambda: q > d * (h - 1) / h),
        ]

    def growth_bounds(self, pt):
        m, h, d, q = self.m, self.h, pt.d, pt.q
        return [
            ("drift growth", m / (m - 1) - (Fraction(d) / q + 1) / 2, False),
            ("noise growth", h / (2 * (h - 1)) - Fraction(d) / (2 * q), False),
        ]

    def critical_gates(self, pt, kc):
        m, h, d, q, p = self.m, self.h, pt.d, pt.q, pt.p
        return [
            ("p > 2", lambda: p > 2),
            ("m > 1 + 4/d", lambda: m > 1 + Fraction(4, d)),
            ("h = (m+1)/2", lambda: h == (m + 1) / 2),
            ("q < d(m-1)/2", lambda: q < d * (m - 1) / 2),
            ("1/p + d/(2q) <= (m+1)/(2(m-1))", lambda: 1 / p + Fraction(d) / (2 * q) <= (m + 1) / (2 * (m - 1))),
        ]

    def trace_closed_form(self, pt):
        return Fraction(pt.d) / pt.q - 2 / (self.m - 1)


@dataclass(frozen=True)
class GradientRD(EquationFamily):
    """Reaction diffusion with gradient nonlinearity in the pair ``(L^q, W^{2,q})``."""

    m: Number
    eta: Number = HALF
    name = "gradient-rd"

    def __post_init__(self) -> None:
        object.__setattr__(self, "m", num(self.m))
        object.__setattr__(self, "eta", num(self.eta))
        if not self.m > 2:
            raise DomainError("m must exceed 2")
        if not (0 < self.eta < 1):
            raise DomainError("eta must lie in (0,1)")

    def params(self) -> dict:
        return {"m": self.m, "eta": self.eta}

    def pair(self, pt):
        return SpacePair.shifted(-1, pt.q, 2, self.scale_tag)

    def structural_gates(self, pt):
        m, d, q = self.m, pt.d, pt.q
        return [("q > d(m-1)/m", lambda: q > d * (m - 1) / m)]

    def growth_bounds(self, pt):
        m, d, q = self.m, pt.d, pt.q
        return [("drift growth", m / (2 * (m - 1)) - Fraction(d) / (2 * q), False)]

    def critical_gates(self, pt, kc):
        m, d, q, p = self.m, pt.d, pt.q, pt.p
        if p == 2:
            return [("d = 1, m = 3, p = q = 2", lambda: d == 1 and m == 3 and q == 2)]
        return [
            ("d >= 2 or (d = 1 and m > 3)", lambda: d >= 2 or m > 3),
            ("q < d(m-1)", lambda: q < d * (m - 1)),
            ("1/p + d/(2q) <= m/(2(m-1))", lambda: 1 / p + Fraction(d) / (2 * q) <= m / (2 * (m - 1))),
        ]

    def trace_closed_form(self, pt):
        return Fraction(pt.d) / pt.q + (self.m - 2) / (self.m - 1)


@dataclass(frozen=True)
class BurgersWhite(EquationFamily):
    """One-dimensional Burgers type drift with space-time white noise."""

    h: Number
    m: Number
    name = "burgers-white"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", num(self.h))
        object.__setattr__(self, "m", num(self.m))
        if not (self.h > 1 and self.m > 1):
            raise DomainError("h and m must exceed 1")

    def params(self) -> dict:
        return {"h": self.h, "m": self.m}

    def structural_gates(self, pt):
        h, q, s = self.h, pt.q, pt.s
        return [
            ("d = 1", lambda: pt.d == 1),
            ("1/2 < s < 1", lambda: HALF < s < 1),
            ("h > 1/(1-s)", lambda: s < 1 and h > 1 / (1 - s)),
            ("q > 1/(1-s)", lambda: s < 1 and q > 1 / (1 - s)),
            ("q < (h-1)/s", lambda: _lt_upper(q, h - 1, s)),
        ]

    def growth_bounds(self, pt):
        h, m, q, s = self.h, self.m, pt.q, pt.s
        return [
            ("drift growth", h / (2 * (h - 1)) - (1 / q + s) / 2, False),
            ("noise growth", m / (2 * (m - 1)) * (1 - s - 1 / q), True),
        ]

    def critical_gates(self, pt, kc):
        h, m, q, s, p = self.h, self.m, pt.q, pt.s, pt.p
        return [
            ("p > 2", lambda: p > 2),
            ("m < h + (1-h)(s+1/q)", lambda: m < h + (1 - h) * (s + 1 / q)),
            ("1/p + (1/q+s)/2 <= h/(2(h-1))", lambda: 1 / p + (1 / q + s) / 2 <= h / (2 * (h - 1))),
        ]

    def trace_closed_form(self, pt):
        return 1 / pt.q - 1 / (self.h - 1)


@dataclass(frozen=True)
class AllenCahn(EquationFamily):
    """Cubic Allen-Cahn drift with quadratic noise in ``(H^{-1-s,q}, H^{1-s,q})``."""

    name = "allen-cahn"
    scale_tag = "dirichlet"

    def structural_gates(self, pt):
        d, q, s = pt.d, pt.q, pt.s
        return [
            ("d >= 2", lambda: d >= 2),
            ("0 <= s < 1", lambda: 0 <= s < 1),
            ("q > d/(d-1-s)", lambda: d - 1 - s > 0 and q > d / (d - 1 - s)),
            ("q > d/(2-s)", lambda: q > d / (2 - s)),
            ("q < 2d/(1+s)", lambda: q < 2 * d / (1 + s)),
        ]

    def growth_bounds(self, pt):
        rhs = 1 - Fraction(pt.d) / (2 * pt.q) - pt.s / 2
        return [("drift growth", rhs, False), ("noise growth", rhs, False)]

    def critical_gates(self, pt, kc):
        d, q, s, p = pt.d, pt.q, pt.s, pt.p
        return [
            ("p > 2", lambda: p > 2),
            ("d > 2", lambda: d > 2),
            ("0 <= s <= 1/3", lambda: 0 <= s <= Fraction(1, 3)),
            ("q < d/(1-s)", lambda: q < d / (1 - s)),
            ("1/p + d/(2q) + s/2 <= 1", lambda: 1 / p + Fraction(d) / (2 * q) + s / 2 <= 1),
        ]

    def trace_closed_form(self, pt):
        return Fraction(pt.d) / pt.q - 1


@dataclass(frozen=True)
class CahnHilliard(EquationFamily):
    """Cahn-Hilliard with growth ``h`` in ``(H^{-2-s,q}, H^{2-s,q})``."""

    h: Number
    name = "cahn-hilliard"
    order = 4
    scale_tag = "bilaplacian-neumann"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", num(self.h))
        if not self.h > 1:
            raise DomainError("h must exceed 1")

    def params(self) -> dict:
        return {"h": self.h}

    def structural_gates(self, pt):
        h, d, q, s = self.h, pt.d, pt.q, pt.s
        return [
            ("d >= 2", lambda: d >= 2),
            ("0 <= s < 2", lambda: 0 <= s < 2),
            ("q > d(h-1)/(2h-s(h-1))", lambda: q > d * (h - 1) / (2 * h - s * (h - 1))),
            ("q > d/(d-s)", lambda: q > d / (d - s)),
            ("q < d(h-1)/s", lambda: _lt_upper(q, d * (h - 1), s)),
        ]

    def growth_bounds(self, pt):
        h = self.h
        rhs = h / (2 * (h - 1)) - (pt.s + Fraction(pt.d) / pt.q) / 4
        return [("drift growth", rhs, False), ("noise growth", rhs, False)]

    def critical_gates(self, pt, kc):
        h, d, q, s, p = self.h, pt.d, pt.q, pt.s, pt.p
        if p == 2:
            return [
                ("p = q = 2", lambda: q == 2),
                ("h = 1 + 4/(d+2s)", lambda: h == 1 + 4 / (d + 2 * s)),
                ("d > max(2s, 2s^2/(2-s))", lambda: d > 2 * s and d > 2 * s * s / (2 - s)),
            ]
        return [
            ("1/p <= h/(2(h-1)) - (s+d/q)/4", lambda: 1 / p <= h / (2 * (h - 1)) - (s + Fraction(d) / q) / 4),
            (
                "h >= (2+s)/s or q < d(h-1)/(2-s(h-1))",
                lambda: (s > 0 and h >= (2 + s) / s) or _lt_upper(q, d * (h - 1), 2 - s * (h - 1)),
            ),
        ]

    def trace_closed_form(self, pt):
        return Fraction(pt.d) / pt.q - 2 / (self.h - 1)


@dataclass(frozen=True)
class PorousMedia(EquationFamily):
    """Porous media type equation with exponent ``r`` and uniformly positive data."""

    r: Number
    m: Optional[Number] = None
    name = "porous-media"
    has_critical_weight = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", num(self.r))
        if not self.r >= 1:
            raise DomainError("r must be at least 1")

    def params(self) -> dict:
        return {"r": self.r}

    def pair(self, pt):
        return SpacePair.shifted(-1, pt.q, 2, self.scale_tag)

    def structural_gates(self, pt):
        return [
            ("r >= 3", lambda: self.r >= 3),
            ("p > 2", lambda: pt.p > 2),
            ("p > 2(1+kappa)+d", lambda: pt.p > 2 * (1 + (pt.kappa or 0)) + pt.d),
        ]

    def growth_bounds(self, pt):
        return []


@dataclass(frozen=True)
class WeightedDomainQND(EquationFamily):
    """Quasilinear problem on a domain with spatial power weight ``alpha``."""

    delta: Number
    alpha: Number
    name = "weighted-domain-qnd"
    scale_tag = "dirichlet"
    has_critical_weight = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", num(self.delta))
        object.__setattr__(self, "alpha", num(self.alpha))
        if not (0 < self.delta <= 1):
            raise DomainError("delta must lie in (0,1]")

    def params(self) -> dict:
        return {"delta": self.delta, "alpha": self.alpha}

    def pair(self, pt):
        return SpacePair.shifted(-1, pt.q, 2, self.scale_tag)

    def structural_gates(self, pt):
        return [
            ("kappa = 0", lambda: pt.kappa == 0),
            ("alpha window", lambda: weighted_domain_alpha_ok(pt.p, pt.d, self.delta, self.alpha)),
        ]

    def growth_bounds(self, pt):
        return []


def porous_media_ok(r: Number, pt: ParamPoint) -> bool:
    """``r >= 3`` and ``p > 2(1+kappa) + d`` (with a valid weight)."""
    kappa = Fraction(0) if pt.kappa is None else pt.kappa
    return (
        num(r) >= 3
        and pt.p > 2
        and valid_time_weight(pt.p, kappa)
        and pt.p > 2 * (1 + kappa) + pt.d
    )


FAMILIES = {
    "conservative-rd": ConservativeRD,
    "reaction-diffusion": ReactionDiffusion,
    "gradient-rd": GradientRD,
    "burgers-white": BurgersWhite,
    "allen-cahn": AllenCahn,
    "cahn-hilliard": CahnHilliard,
    "porous-media": PorousMedia,
    "weighted-domain-qnd": WeightedDomainQND,
}


def make_family(name: str, **params) -> EquationFamily:
    """Build a family from its name and parameters (used by the CLI)."""
    try:
        cls = FAMILIES[name]
    except KeyError:
        raise DomainError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    return cls(**params)


# ---------------------------------------------------------------------------
# critical weight
# ---------------------------------------------------------------------------


@dataclass
class CriticalReport:
    family: str
    point: ParamPoint
    admissible: bool
    failed_conditions: list
    kappa_crit: Optional[Number]
    critical_available: bool
    critical_failed: list
    is_critical: bool
    binding_term: Optional[int]
    trace_space: Optional[BesovIndex]
    trace_closed_form: Optional[Number]
    point_trace: Optional[BesovIndex] = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def enc(x):
            if is_exact(x):
                return str(x) if x.denominator != 1 else int(x.numerator)
            return x

        def besov(b):
            return None if b is None else {"s": enc(b.s), "q": enc(b.q), "p": enc(b.p)}

        pt = self.point
        return {
            "family": self.family,
            "point": {"d": pt.d, "p": enc(pt.p), "q": enc(pt.q), "kappa": enc(pt.kappa), "s": enc(pt.s)},
            "admissible": self.admissible,
            "failed_conditions": list(self.failed_conditions),
            "kappa_crit": enc(self.kappa_crit),
            "critical_available": self.critical_available,
            "critical_failed": list(self.critical_failed),
            "is_critical": self.is_critical,
            "binding_term": self.binding_term,
            "trace_space": besov(self.trace_space),
            "trace_closed_form": enc(self.trace_closed_form),
            "point_trace": besov(self.point_trace),
            "notes": list(self.notes),
        }


def _growth_failures(bounds: Sequence, L: Number) -> list:
    out = []
    for label, rhs, strict in bounds:
        ok = L < rhs if strict else L <= rhs
        if not ok:
            out.append(f"{label}: (1+kappa)/p {'<' if strict else '<='} {rhs}")
    return out


@lru_cache(maxsize=1 << 16)
def _static_eval(family: EquationFamily, d: int, p: Number, q: Number, s: Number):
    """Weight-independent part of :func:`critical_weight`, cached per point."""
    pt = ParamPoint(d, p, q, Fraction(0), s)
    failed = tuple(_failed([_hilbert_gate(pt)] + list(family.structural_gates(pt))))
    try:
        bounds = tuple(family.growth_bounds(pt)) if not failed else ()
    except ZeroDivisionError:
        bounds = ()
    kappa_crit = None
    binding = None
    critical_failed: tuple = ()
    trace = None
    closed = None
    if family.has_critical_weight and bounds:
        rhs_vals = [b[1] for b in bounds]
        binding = min(range(len(rhs_vals)), key=lambda j: rhs_vals[j])
        kc = p * rhs_vals[binding] - 1
        cf = list(failed) + _failed(family.critical_gates(pt, kc))
        if not valid_time_weight(p, kc):
            cf.append("kappa_crit in [0, p/2-1)")
        if any(b[2] for b in bounds) and kc + 1 >= p * min(b[1] for b in bounds if b[2]):
            cf.append("strict growth bound at kappa_crit")
        critical_failed = tuple(cf)
        if not critical_failed:
            kappa_crit = kc
            trace = trace_space(family.pair(pt), TimeWeightIndex(p, kc))
            closed = family.trace_closed_form(pt)
    return failed, bounds, binding, kappa_crit, critical_failed, trace, closed


def critical_weight(family: EquationFamily, pt: ParamPoint) -> CriticalReport:
    """Evaluate every admissibility gate of ``family`` at ``pt``.

    The critical weight is ``p*min_j rhs_j - 1`` where ``rhs_j`` are the
    closed-form right-hand sides of the growth bounds; it is reported when
    the family's critical gates hold and it lies in the weight range.  The
    trace space is evaluated at the critical weight when available and at
    the point's own weight otherwise.
    """
    if not family.has_critical_weight:
        # gates of these families depend on kappa, so there is nothing to cache
        failed = _failed([_hilbert_gate(pt)] + list(family.structural_gates(pt)))
        bounds, binding, kappa_crit, critical_failed, trace, closed = (), None, None, (), None, None
    else:
        failed, bounds, binding, kappa_crit, critical_failed, trace, closed = _static_eval(
            family, pt.d, pt.p, pt.q, pt.s
        )
        failed = list(failed)

    kappa = pt.kappa
    notes = []
    if kappa is None:
        if kappa_crit is None:
            failed.append("kappa unspecified and no critical weight available")
        else:
            kappa = kappa_crit
            notes.append("evaluated at kappa_crit")

    point_trace = None
    if kappa is not None:
        if not valid_time_weight(pt.p, kappa):
            failed.append("time weight")
        else:
            L = (1 + kappa) / pt.p
            failed += _growth_failures(bounds, L)
            pair = family.pair(pt)
            point_trace = BesovIndex(pair.x1.s - pair.order * L, pt.q, pt.p)

    if kappa_crit is not None and closed is not None:
        if isinstance(closed, float) or isinstance(trace.s, float):
            agrees = abs(closed - trace.s) <= 1e-12 * max(1.0, abs(closed))
        else:
            agrees = closed == trace.s
        if not agrees:
            notes.append(f"trace smoothness {trace.s} differs from closed form {closed}")
    if kappa_crit is None:
        trace = point_trace

    admissible = not failed
    is_critical = bool(admissible and kappa_crit is not None and kappa == kappa_crit)
    return CriticalReport(
        family=family.name,
        point=pt if pt.kappa is not None or kappa is None else pt.with_kappa(kappa),
        admissible=admissible,
        failed_conditions=failed,
        kappa_crit=kappa_crit,
        critical_available=kappa_crit is not None,
        critical_failed=list(critical_failed),
        is_critical=is_critical,
        binding_term=binding,
        trace_space=trace,
        trace_closed_form=closed,
        point_trace=point_trace,
        notes=notes,
    )


def formal_kappa_crit(family: EquationFamily, pt: ParamPoint) -> Number:
    """``p*min_j rhs_j - 1`` regardless of whether the critical gates hold."""
    bounds = family.growth_bounds(pt)
    if not bounds:
        raise DomainError(f"{family.name} has no growth bounds")
    return pt.p * min(b[1] for b in bounds) - 1


# ---------------------------------------------------------------------------
# independent oracle
# ---------------------------------------------------------------------------


def _raw_terms(family: EquationFamily, pt: ParamPoint):
    """Rebuild ``(ok, terms)`` from the embedding relations of each family.

    ``terms`` is a list of ``(rho, beta, strict)`` with ``phi = beta``.  The
    exponents are derived from the defining Sobolev relations rather than
    from the closed forms used by :func:`critical_weight`.
    """
    d, q, s = Fraction(pt.d), pt.q, pt.s
    x0 = family.pair(pt).x0.s
    order = family.order

    def beta_of(theta):  # interpolation parameter of H^{theta,q} in the pair
        return (theta - x0) / order

    if isinstance(family, ConservativeRD):
        if not (pt.d >= 2 and 0 <= s < 1):
            return False, []
        inv_r = (s + d / q) / d  # -1 - d/r = -1 - s - d/q
        theta = d / q - d * inv_r / family.h  # theta - d/q = -d/(h r)
        ok = 0 < inv_r < 1 and 0 < theta < 1 - s
        b = beta_of(theta)
        return ok, [(family.h - 1, b, False), (family.h - 1, b, False)]

    if isinstance(family, ReactionDiffusion):
        m, h = family.m, family.h
        if not (pt.d >= 2 and m > 1 + 2 / d):
            return False, []
        inv_t = (1 + d / q) / d  # d/t = 1 + d/q
        theta = d / q - d * inv_t / m  # theta - d/q = -d/(m t)
        phi = d / q - d / (h * q)  # phi - d/q = -d/(h q)
        ok = 0 < inv_t < 1 and 0 < theta < 1 and 0 < phi < 1
        return ok, [(m - 1, beta_of(theta), False), (h - 1, beta_of(phi), False)]

    if isinstance(family, GradientRD):
        m = family.m
        theta = 1 + d / q - d / (q * m)  # theta - d/q = 1 - d/(q m)
        ok = 0 < theta < 2
        return ok, [(m - 1, beta_of(theta), False)]

    if isinstance(family, BurgersWhite):
        h, m = family.h, family.m
        if not (pt.d == 1 and HALF < s < 1):
            return False, []
        inv_r = s + 1 / q  # -s - 1/q = -1/r
        theta = 1 / q - inv_r / h  # theta - 1/q = -1/(h r)
        ok = 0 < inv_r < 1 and 0 < theta < 1 - s and h > 1 / (1 - s)
        return ok, [(h - 1, beta_of(theta), False), (m - 1, beta_of(1 / q), True)]

    if isinstance(family, AllenCahn):
        if not (pt.d >= 2 and 0 <= s < 1):
            return False, []
        inv_m = (1 + s + d / q) / d  # -d/m = -1 - s - d/q
        phi = d / q - d * inv_m / 3  # phi - d/q = -d/(3m)
        inv_r = (s + d / q) / d  # -s - d/q = -d/r
        rho_e = d / q - d * inv_r / 2  # rho - d/q = -d/(2r)
        ok = 0 < inv_m < 1 and 0 < phi < 1 - s and 0 < inv_r < 1 and 0 < rho_e < 1 - s
        return ok, [(2, beta_of(phi), False), (1, beta_of(rho_e), False)]

    if isinstance(family, CahnHilliard):
        h = family.h
        if not (pt.d >= 2 and 0 <= s < 2):
            return False, []
        inv_r = (s + d / q) / d  # -s - d/q = -d/r
        theta = d / q - d * inv_r / h  # theta - d/q = -d/(h r)
        ok = 0 < inv_r < 1 and 0 < theta < 2 - s
        b = beta_of(theta)
        return ok, [(h - 1, b, False), (h - 1, b, False)]

    raise DomainError(f"no raw derivation for {family.name}")


@lru_cache(maxsize=1 << 16)
def _raw_terms_cached(family: EquationFamily, d: int, q: Number, s: Number):
    return _raw_terms(family, ParamPoint(d, 2, q, Fraction(0), s))


def raw_admissible(family: EquationFamily, pt: ParamPoint) -> bool:
    """Admissibility from the raw growth inequality of each rebuilt term."""
    kappa = pt.kappa
    if kappa is None:
        raise DomainError("raw admissibility needs an explicit kappa")
    if pt.p == 2 and pt.q != 2:
        return False
    if not valid_time_weight(pt.p, kappa):
        return False
    L = (1 + kappa) / pt.p
    if isinstance(family, PorousMedia):
        return family.r >= 3 and pt.p > 2 and pt.p - 2 * (1 + kappa) - pt.d > 0
    if isinstance(family, WeightedDomainQND):
        p, dl, a = pt.p, family.delta, family.alpha
        return kappa == 0 and p - pt.d - 2 > 0 and 2 * p - 1 - p / (p * (1 - dl) + dl) < a < 2 * p - pt.d - 2
    ok, terms = _raw_terms_cached(family, pt.d, pt.q, pt.s)
    if not ok:
        return False
    for rho, beta, strict in terms:
        val = rho * (beta - 1 + L) + beta
        if not (val < 1 if strict else val <= 1):
            return False
    return True


def param_grid(d: int, ps: Iterable, qs: Iterable, kappas: Iterable, ss: Iterable) -> list:
    """Cartesian grid of ParamPoints over ``(p, q, kappa, s)`` for fixed ``d``."""
    return [ParamPoint(d, p, q, k, s) for p in ps for q in qs for k in kappas for s in ss]


def region_scan(family: EquationFamily, points: Iterable[ParamPoint]) -> list:
    """The admissible subset of ``points`` according to the raw-inequality oracle."""
    return [pt for pt in points if raw_admissible(family, pt)]


def growth_terms(family: EquationFamily, pt: ParamPoint) -> list:
    """Growth terms ``(rho, phi = beta)`` of a family rebuilt from its embedding relations."""
    if isinstance(family, (PorousMedia, WeightedDomainQND)):
        raise DomainError(f"{family.name} has no power-type growth terms")
    ok, terms = _raw_terms(family, pt)
    if not ok:
        raise DomainError("the point lies outside the family's structural window")
    return [GrowthTerm(rho, beta, beta) for rho, beta, _ in terms]
