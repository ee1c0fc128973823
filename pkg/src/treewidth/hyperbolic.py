"""Closed-form geometry of a disc in the hyperbolic plane of curvature -K**2.

All functions are pure. Quantities that involve ``sinh(K*r)`` are evaluated
through logarithms once ``K*r`` exceeds ``LOG_SCALE_THRESHOLD`` so that large
curvatures do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleError
from .tree import edge_count

LOG_SCALE_THRESHOLD = 30.0


@dataclass(frozen=True)
class DiscSpec:
    """A closed disc of radius ``r`` with a collar of width ``collar``."""

    K: float
    r: float = 0.5
    collar: float = 0.25

    def __post_init__(self):
        if not self.K > 0:
            raise DomainError(f"curvature scale K must be positive, got {self.K}")
        if not 0 < self.collar < self.r:
            raise DomainError(f"need 0 < collar < r, got collar={self.collar}, r={self.r}")


def log_sinh(x: float) -> float:
    """``log(sinh(x))`` for ``x > 0`` without overflow."""
    if x <= 0:
        raise DomainError("log_sinh needs x > 0")
    if x < LOG_SCALE_THRESHOLD:
        return math.log(math.sinh(x))
    return x - math.log(2.0) + math.log1p(-math.exp(-2.0 * x))


def _half_area(K: float, rho: float) -> float:
    # 2*sinh(K*rho/2)**2 / K**2, i.e. (cosh(K*rho) - 1) / K**2
    if rho == 0:
        return 0.0
    half = 0.5 * K * rho
    if half < LOG_SCALE_THRESHOLD:
        return 2.0 * math.sinh(half) ** 2 / (K * K)
    return 2.0 * math.exp(2.0 * log_sinh(half)) / (K * K)


def disc_area(spec: DiscSpec, rho: float | None = None) -> float:
    """Area ``2*pi*(cosh(K*rho) - 1)/K**2`` of the concentric disc of radius ``rho``."""
    if rho is None:
        rho = spec.r
    if not 0 <= rho <= spec.r:
        raise DomainError(f"rho={rho} outside [0, {spec.r}]")
    return 2.0 * math.pi * _half_area(spec.K, rho)


def circumference(K: float, rho: float) -> float:
    """Length ``2*pi*sinh(K*rho)/K`` of the circle of radius ``rho``."""
    if rho == 0:
        return 0.0
    if K * rho < LOG_SCALE_THRESHOLD:
        return 2.0 * math.pi * math.sinh(K * rho) / K
    return 2.0 * math.pi * math.exp(log_sinh(K * rho)) / K


def distance(K: float, rho1: float, phi1: float, rho2: float, phi2: float) -> float:
    """Geodesic distance between two points given in geodesic polar coordinates.

    Uses ``cosh(Kd) - 1 = 2 sinh^2(K dr/2) + 2 sinh(K rho1) sinh(K rho2) sin^2(dphi/2)``,
    which stays accurate for nearby points.
    """
    s = math.sin(0.5 * (phi1 - phi2))
    a = math.sinh(0.5 * K * (rho1 - rho2)) ** 2
    if rho1 > 0 and rho2 > 0 and s != 0.0:
        if K * max(rho1, rho2) < LOG_SCALE_THRESHOLD:
            b = math.sinh(K * rho1) * math.sinh(K * rho2) * s * s
        else:
            b = math.exp(log_sinh(K * rho1) + log_sinh(K * rho2) + 2.0 * math.log(abs(s)))
    else:
        b = 0.0
    return 2.0 * math.asinh(math.sqrt(a + b)) / K


def triangle_area(K: float, a, b, c):
    """Area of the geodesic triangle with side lengths a, b, c (arrays allowed).

    Hyperbolic L'Huilier: ``tan(D/4)**2`` is the product of ``tanh`` of the
    half semiperimeter and of its three half excesses, with defect ``D``.
    """
    a, b, c = (np.asarray(x, dtype=float) * K for x in (a, b, c))
    s = 0.5 * (a + b + c)
    prod = np.tanh(s / 2) * np.tanh((s - a) / 2) * np.tanh((s - b) / 2) * np.tanh((s - c) / 2)
    return 4.0 * np.arctan(np.sqrt(np.maximum(prod, 0.0))) / (K * K)


def chord_and_arc(spec: DiscSpec, theta: float) -> tuple[float, float]:
    """Chord length and boundary arc length subtended by central angle ``theta``.

    The chord ``x`` solves ``cosh(Kx) = cosh^2(Kr) - sinh^2(Kr) cos(theta)``;
    the arc is ``theta * sinh(Kr) / K``.
    """
    if not 0 <= theta <= 2 * math.pi:
        raise DomainError(f"theta={theta} outside [0, 2*pi]")
    K, r = spec.K, spec.r
    if theta == 0:
        return 0.0, 0.0
    chord = distance(K, r, 0.0, r, theta)
    arc = theta * circumference(K, r) / (2.0 * math.pi)
    return chord, arc


def collar_mass_fraction(spec: DiscSpec) -> float:
    """Fraction of the disc area lying within ``collar`` of the boundary."""
    return 1.0 - inner_area_ratio(spec)


def inner_area_ratio(spec: DiscSpec) -> float:
    """``disc_area(r - collar) / disc_area(r)``, computed in log space."""
    K, r, c = spec.K, spec.r, spec.collar
    a, b = 0.5 * K * (r - c), 0.5 * K * r
    return math.exp(2.0 * (log_sinh(a) - log_sinh(b)))


def _condition_chord(K, N, E_min, r, collar):
    spec = DiscSpec(K, r, collar)
    chord, _ = chord_and_arc(spec, math.pi / N)
    return chord >= E_min


def _condition_mass(K, N, fraction, r, collar):
    return inner_area_ratio(DiscSpec(K, r, collar)) <= fraction


def _minimal_K(holds, rtol=1e-9):
    """Smallest K > 0 with ``holds(K)`` for a predicate monotone in K."""
    hi = 1.0
    while not holds(hi):
        hi *= 2.0
        if hi > 1e7:
            raise InfeasibleError("no curvature below 1e7 satisfies the condition")
    lo = hi / 2.0
    while holds(lo):
        lo /= 2.0
        if lo < 1e-12:
            return 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi


def select_curvature(
    h: int,
    E_min: float = 0.75,
    mass_fraction: float | None = None,
    r: float = 0.5,
    collar: float = 0.25,
) -> float:
    """Minimal K making the glued disc satisfy the interval and collar conditions.

    (a) the chord of one boundary interval (central angle ``2*pi/(2*N(h))``)
    is at least ``E_min``; (b) the area outside the collar is at most
    ``mass_fraction`` (default ``1/N(h)``) of the disc area.
    """
    if h < 1:
        raise DomainError("tree height must be >= 1")
    if E_min >= 2 * r:
        raise InfeasibleError(f"E_min={E_min} cannot be reached by a chord of a disc of diameter {2 * r}")
    N = edge_count(h)
    if mass_fraction is None:
        mass_fraction = 1.0 / N
    k_chord = _minimal_K(lambda K: _condition_chord(K, N, E_min, r, collar))
    k_mass = _minimal_K(lambda K: _condition_mass(K, N, mass_fraction, r, collar))
    return max(k_chord, k_mass)


def check_conditions(K: float, h: int, E_min: float = 0.75, r: float = 0.5, collar: float = 0.25):
    """Evaluate both conditions at ``K``; returns ``(chord, inner_ratio, 1/N(h))``."""
    N = edge_count(h)
    spec = DiscSpec(K, r, collar)
    chord, _ = chord_and_arc(spec, math.pi / N)
    return chord, inner_area_ratio(spec), 1.0 / N
