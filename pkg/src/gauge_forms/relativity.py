"""Velocity composition, Lorentz boosts along x, interval and proper time.

The composition law ``w = (u + v) / (1 + K u v)`` is parameterised by the
inverse-speed-squared constant ``K``.  ``K = 1/c**2`` is special relativity,
``K = 0`` is Galilean addition.  Events are four-vectors ``(ct, x, y, z)`` and
the squared interval uses the (+,-,-,-) reading.  :func:`to_metric_signature`
converts a quadratic form to the (-,+,+,+) convention used by
:mod:`gauge_forms.geometry` and :mod:`gauge_forms.exterior`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CompositionLaw",
    "FourVector",
    "Boost",
    "compose",
    "inverse_speed",
    "boost_apply",
    "boost_matrix",
    "interval2",
    "proper_time",
    "to_metric_signature",
    "INTERVAL_SIGNATURE",
    "METRIC_SIGNATURE",
    "transform_current",
    "RELATIVISTIC",
    "GALILEAN",
]

INTERVAL_SIGNATURE = (1.0, -1.0, -1.0, -1.0)
METRIC_SIGNATURE = (-1.0, 1.0, 1.0, 1.0)


@dataclass(frozen=True)
class CompositionLaw:
    """Velocity addition with ``w = (u + v) / (1 + K u v)``."""

    K: float = 1.0

    def __post_init__(self):
        if not (self.K >= 0 and math.isfinite(self.K)):
            raise ValueError(f"K must be finite and non-negative, got {self.K}")

    @property
    def limit_speed(self) -> float:
        """The invariant speed ``K**-0.5`` (infinite for Galilean addition)."""
        return math.inf if self.K == 0 else 1.0 / math.sqrt(self.K)

    @classmethod
    def for_light_speed(cls, c: float) -> "CompositionLaw":
        return cls(1.0 / c**2)


RELATIVISTIC = CompositionLaw(1.0)
GALILEAN = CompositionLaw(0.0)


def compose(u: float, v: float, law: CompositionLaw = RELATIVISTIC) -> float:
    """Compose two collinear speeds under ``law``."""
    den = 1.0 + law.K * u * v
    if den == 0.0:
        raise ZeroDivisionError(f"composition pole: 1 + K*u*v = 0 for u={u}, v={v}")
    return (u + v) / den


def inverse_speed(u: float, law: CompositionLaw = RELATIVISTIC) -> float:
    """Group inverse of ``u``; always ``-u``."""
    return -u


@dataclass(frozen=True)
class FourVector:
    """An event or four-vector with components ``(x0 = ct, x1, x2, x3)``."""

    components: tuple

    def __post_init__(self):
        arr = np.asarray(self.components, dtype=float)
        if arr.shape != (4,):
            raise ValueError("a four-vector needs exactly four components")
        if not np.all(np.isfinite(arr)):
            raise ValueError("four-vector components must be finite")
        object.__setattr__(self, "components", tuple(float(x) for x in arr))

    @classmethod
    def event(cls, t: float, x: float, y: float = 0.0, z: float = 0.0, c: float = 1.0) -> "FourVector":
        return cls((c * t, x, y, z))

    def array(self) -> np.ndarray:
        return np.array(self.components)

    def __sub__(self, other: "FourVector") -> "FourVector":
        return FourVector(tuple(self.array() - other.array()))


@dataclass(frozen=True)
class Boost:
    """A standard boost along x with relative speed ``v``.

    The primed frame moves with speed ``v`` relative to the unprimed one, and
    :func:`boost_apply` maps primed coordinates to unprimed ones:
    ``x = gamma (x' + beta ct')``, ``ct = gamma (ct' + beta x')``.
    """

    v: float
    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")
        if not abs(self.v) < self.c:
            raise ValueError(f"boost speed |v| = {abs(self.v)} must be below c = {self.c}")

    @property
    def beta(self) -> float:
        return self.v / self.c

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.beta**2)

    def matrix(self) -> np.ndarray:
        return boost_matrix(self)

    def inverse(self) -> "Boost":
        return Boost(-self.v, self.c)


def boost_matrix(b: Boost) -> np.ndarray:
    g, gb = b.gamma, b.gamma * b.beta
    L = np.eye(4)
    L[0, 0] = L[1, 1] = g
    L[0, 1] = L[1, 0] = gb
    return L


def boost_apply(b: Boost, e: FourVector) -> FourVector:
    """Map primed components of ``e`` to the unprimed frame."""
    ct, x, y, z = e.components
    g, gb = b.gamma, b.gamma * b.beta
    return FourVector((g * ct + gb * x, g * x + gb * ct, y, z))


def interval2(e1: FourVector, e2: FourVector) -> float:
    """Squared interval ``(dx0)^2 - (dx1)^2 - (dx2)^2 - (dx3)^2``."""
    dx = e2.array() - e1.array()
    return float(dx[0] ** 2 - dx[1] ** 2 - dx[2] ** 2 - dx[3] ** 2)


def proper_time(e1: FourVector, e2: FourVector, c: float = 1.0) -> float:
    """Proper time between timelike-separated events, ``s / c``."""
    s2 = interval2(e1, e2)
    if s2 < 0:
        raise ValueError("events are spacelike separated; proper time is undefined")
    return math.sqrt(s2) / c


def to_metric_signature(q):
    """Flip a quadratic quantity between (+,-,-,-) and (-,+,+,+).

    Works on scalars (an interval squared) and on 4x4 metric matrices alike,
    since both conventions differ by an overall sign.  The map is its own
    inverse.
    """
    return -np.asarray(q) if np.ndim(q) else -float(q)


def transform_current(rho: float, j: tuple, V: float, c: float = 1.0) -> tuple[float, tuple]:
    """Charge density and current seen from a frame moving with speed ``V`` along x.

    ``rho' = gamma (rho - V j_x / c**2)``, ``j_x' = gamma (j_x - V rho)``, and the
    transverse components are unchanged.  Here ``gamma = 1/sqrt(1 - beta**2)``.
    """
    b = Boost(V, c)
    g = b.gamma
    jx, jy, jz = (float(x) for x in j)
    return g * (rho - V * jx / c**2), (g * (jx - V * rho), jy, jz)
