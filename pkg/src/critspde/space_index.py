"""Exact arithmetic over smoothness/integrability labels of function spaces.

Every routine accepts ``int``, ``fractions.Fraction`` or ``float`` inputs.
Integers are promoted to ``Fraction`` so that purely rational inputs yield
exact rational outputs; any float input makes the result a float.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Number = Union[int, Fraction, float]

SCALE_TAGS = ("periodic", "dirichlet", "neumann", "bilaplacian-neumann")


class DomainError(ValueError):
    """Raised when an index or parameter lies outside its admissible range."""


def num(x: Number) -> Number:
    """Promote ints (and bools) to ``Fraction``; keep other exact rationals and floats.

    Exact rational types other than ``Fraction`` (for instance ``gmpy2.mpq``)
    are passed through untouched, which lets large scans run on a faster
    rational type without changing any formula.
    """
    t = type(x)
    if t in _PASS_TYPES:
        return x
    if t is int or t is bool:
        return Fraction(x)
    if isinstance(x, Fraction) or isinstance(x, float):
        return x
    if isinstance(x, numbers.Integral):  # numpy integers
        return Fraction(int(x))
    if isinstance(x, numbers.Rational):
        _PASS_TYPES.add(t)
        return x
    if isinstance(x, numbers.Real):  # numpy floats
        return float(x)
    raise TypeError(f"unsupported numeric type {type(x)!r}")


_PASS_TYPES = {Fraction, float}


def is_exact(x: Number) -> bool:
    """True for exact rational values."""
    return isinstance(x, numbers.Rational)


@dataclass(frozen=True)
class SobolevIndex:
    """Label ``(s, q)`` of a Bessel potential space H^{s,q}."""

    s: Number
    q: Number

    def __post_init__(self) -> None:
        object.__setattr__(self, "s", num(self.s))
        object.__setattr__(self, "q", num(self.q))
        if not self.q > 1:
            raise DomainError(f"integrability q must exceed 1, got {self.q}")
        if isinstance(self.s, float) and not abs(self.s) < float("inf"):
            raise DomainError("smoothness must be finite")


@dataclass(frozen=True)
class BesovIndex:
    """Label ``(s, q, p)`` of a Besov space B^s_{q,p}."""

    s: Number
    q: Number
    p: Number

    def __post_init__(self) -> None:
        object.__setattr__(self, "s", num(self.s))
        object.__setattr__(self, "q", num(self.q))
        object.__setattr__(self, "p", num(self.p))
        if not (self.q > 1 and self.p > 1):
            raise DomainError(f"q and p must exceed 1, got q={self.q}, p={self.p}")


@dataclass(frozen=True)
class TimeWeightIndex:
    """Temporal integrability ``p`` and power weight ``t**kappa``.

    For ``p > 2`` the weight must satisfy ``0 <= kappa < p/2 - 1``; for
    ``p = 2`` only the unweighted case ``kappa = 0`` is allowed.
    """

    p: Number
    kappa: Number = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", num(self.p))
        object.__setattr__(self, "kappa", num(self.kappa))
        err = _weight_error(self.p, self.kappa)
        if err:
            raise DomainError(err)

    @property
    def loss(self) -> Number:
        """The ratio ``(1 + kappa) / p`` of smoothness lost at the initial time."""
        return (1 + self.kappa) / self.p


def _weight_error(p: Number, kappa: Number) -> str | None:
    if p < 2:
        return f"p must be at least 2, got {p}"
    if p == 2:
        return None if kappa == 0 else "p = 2 requires kappa = 0"
    if not (0 <= kappa < p / 2 - 1):
        return f"kappa must lie in [0, p/2-1) = [0, {p / 2 - 1}), got {kappa}"
    return None


def valid_time_weight(p: Number, kappa: Number) -> bool:
    """True iff ``(p, kappa)`` satisfies the TimeWeightIndex invariants."""
    return _weight_error(num(p), num(kappa)) is None


@dataclass(frozen=True)
class SpacePair:
    """A couple ``X1 -> X0`` of Bessel potential spaces separated by the operator order."""

    x0: SobolevIndex
    x1: SobolevIndex
    order: int = 2
    scale_tag: str = "periodic"

    def __post_init__(self) -> None:
        if self.order not in (2, 4):
            raise DomainError(f"operator order must be 2 or 4, got {self.order}")
        if self.x0.q != self.x1.q:
            raise DomainError("both spaces of a pair must share the integrability q")
        if self.x1.s - self.x0.s != self.order:
            raise DomainError(f"x1.s - x0.s must equal the operator order {self.order}")
        if self.scale_tag not in SCALE_TAGS:
            raise DomainError(f"unknown scale tag {self.scale_tag!r}")

    @property
    def q(self) -> Number:
        return self.x0.q

    @classmethod
    def shifted(cls, s: Number, q: Number, order: int = 2, scale_tag: str = "periodic") -> "SpacePair":
        """The pair ``(H^{-order/2 - s, q}, H^{order/2 - s, q})``."""
        s = num(s)
        half = Fraction(order, 2)
        return cls(SobolevIndex(-half - s, q), SobolevIndex(half - s, q), order, scale_tag)


def complex_interpolate(pair: SpacePair, theta: Number) -> SobolevIndex:
    """Smoothness label of the complex interpolation space ``[X0, X1]_theta``."""
    theta = num(theta)
    if not (0 < theta < 1):
        raise DomainError(f"theta must lie in (0,1), got {theta}")
    return SobolevIndex((1 - theta) * pair.x0.s + theta * pair.x1.s, pair.q)


def interpolation_smoothness(pair: SpacePair, theta: Number) -> Number:
    """Like :func:`complex_interpolate` but also accepting the endpoints 0 and 1."""
    theta = num(theta)
    if not (0 <= theta <= 1):
        raise DomainError(f"theta must lie in [0,1], got {theta}")
    return (1 - theta) * pair.x0.s + theta * pair.x1.s


def trace_space(pair: SpacePair, tw: TimeWeightIndex) -> BesovIndex:
    """Besov label of the real interpolation space ``(X0, X1)_{1-(1+kappa)/p, p}``."""
    s = pair.x1.s - pair.order * tw.loss
    return BesovIndex(s, pair.q, tw.p)


def sobolev_embeds(d: int, a: SobolevIndex, b: SobolevIndex) -> bool:
    """Whether H^{a} embeds into H^{b} on a d-dimensional domain."""
    if d < 1:
        raise DomainError("dimension must be at least 1")
    return a.q <= b.q and a.s - Fraction(d) / a.q >= b.s - Fraction(d) / b.q


def time_embeds(tw0: TimeWeightIndex, s0: Number, tw1: TimeWeightIndex, s1: Number) -> bool:
    """Whether H^{s0,p0}(w_{kappa0}) embeds into H^{s1,p1}(w_{kappa1}) in time."""
    s0, s1 = num(s0), num(s1)
    return (
        tw0.p <= tw1.p
        and tw1.kappa / tw1.p <= tw0.kappa / tw0.p
        and s0 - tw0.loss >= s1 - tw1.loss
    )


def mixed_derivative_index(
    p0: Number, k0: Number, s0: Number, p1: Number, k1: Number, s1: Number, theta: Number
) -> tuple[Number, Number, Number]:
    """Exponents ``(p, kappa, s)`` reached by the mixed-derivative interpolation."""
    p0, k0, s0, p1, k1, s1, theta = map(num, (p0, k0, s0, p1, k1, s1, theta))
    if not (0 <= theta <= 1):
        raise DomainError(f"theta must lie in [0,1], got {theta}")
    s = (1 - theta) * s0 + theta * s1
    p = 1 / ((1 - theta) / p0 + theta / p1)
    kappa = (1 - theta) * (p / p0) * k0 + theta * (p / p1) * k1
    return p, kappa, s


def trace_embedding_ok(theta: Number, tw: TimeWeightIndex) -> bool:
    """Whether H^{theta,p}(w_kappa) paths have a continuous trace: ``theta > (1+kappa)/p``."""
    return num(theta) > tw.loss


def trace_embedding_ok_unweighted(theta: Number, p: Number) -> bool:
    """Unweighted variant ``theta > 1/p``, valid away from the origin."""
    return num(theta) > 1 / num(p)


@dataclass(frozen=True)
class ScaleLabel:
    """Result of identifying a space in a boundary-condition scale."""

    tag: str
    s: Number
    q: Number
    kind: str
    description: str

    @property
    def identified(self) -> bool:
        return self.kind != "unidentified"


def identify_scale_space(tag: str, s: Number, q: Number) -> ScaleLabel:
    """Identify the smoothness-``s`` member of a boundary-condition scale.

    Dirichlet spaces carry a zero trace above ``1/q``; Neumann spaces carry a
    zero normal derivative above ``1 + 1/q``; the bi-Laplacian Neumann scale
    has both thresholds ``1 + 1/q`` and ``3 + 1/q``.  Negative smoothness is
    identified with the dual of the positive member for the conjugate
    exponent.  Thresholds themselves are reported as ``unidentified``.
    """
    s, q = num(s), num(q)
    if tag not in SCALE_TAGS:
        raise DomainError(f"unknown scale tag {tag!r}")
    if not q > 1:
        raise DomainError("q must exceed 1")

    if tag == "periodic":
        return ScaleLabel(tag, s, q, "plain", f"H^{{{s},{q}}}(T^d)")

    if s < 0:
        qc = q / (q - 1)
        inner = identify_scale_space(tag, -s, qc)
        if not inner.identified:
            return ScaleLabel(tag, s, q, "unidentified", f"dual of threshold case {inner.description}")
        return ScaleLabel(tag, s, q, "dual", f"dual of {inner.description}")

    if s == 0:
        return ScaleLabel(tag, s, q, "plain", f"L^{q}")

    if tag == "dirichlet":
        upper, thresholds, zero_kinds = 2, [1 / q], ["zero-trace"]
    elif tag == "neumann":
        upper, thresholds, zero_kinds = 2, [1 + 1 / q], ["zero-normal-derivative"]
    else:
        upper, thresholds, zero_kinds = 4, [1 + 1 / q, 3 + 1 / q], [
            "zero-normal-derivative",
            "zero-normal-derivative-and-normal-third-derivative",
        ]
    if not (0 < s < upper):
        raise DomainError(f"smoothness {s} outside the scale range (0,{upper})")
    if s in thresholds:
        return ScaleLabel(tag, s, q, "unidentified", f"threshold s={s} excluded")
    kind = "plain"
    for thr, k in zip(thresholds, zero_kinds):
        if s > thr:
            kind = k
    desc = f"H^{{{s},{q}}}" if kind == "plain" else f"{kind} subspace of H^{{{s},{q}}}"
    return ScaleLabel(tag, s, q, kind, desc)
