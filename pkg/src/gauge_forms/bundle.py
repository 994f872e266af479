"""The U(1) bundle R^4 x U(1): connection form, horizontal split, covariant derivative.

A tangent vector at a bundle point is ``xdot^mu d/dx^mu + iK d/dtheta``.  The
connection form ``omega = -ie A_mu dx^mu + dtheta`` sends it to
``i (K - e A_mu xdot^mu)``, an element of the Lie algebra iR.  Vectors it
annihilates form the horizontal space, spanned by ``d/dx^mu + ie A_mu d/dtheta``.

hbar is 1 throughout this module, so the coupling in ``D_mu = d_mu + ie A_mu`` is
the bare charge ``e``.  Wave functions live on the base (the Minkowski chart);
the fiber angle never enters their domain.

Field components follow the index order ``F_{mu nu} = d_nu A_mu - d_mu A_nu``,
which is the coefficient of ``dx^nu ^ dx^mu`` in ``F = dA``.  With that reading
``[D_mu, D_nu] = -ie F_{mu nu}``; in the opposite index order the same identity
reads ``[D_mu, D_nu] = +ie (dA)_{mu nu}`` (see :func:`standard_component`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chartcalc import MINKOWSKI, NATURAL, ScalarField, UnitSystem, as_field
from .exterior import KForm, d
from .maxwell import FourPotential, default_lattice, field_tensor

__all__ = [
    "BundlePoint",
    "BundleTangent",
    "ConnectionForm",
    "TransitionReport",
    "connection_apply",
    "horizontal_basis",
    "horizontal_decompose",
    "split_matrix",
    "covariant_derivative_field",
    "covariant_derivative",
    "curvature_commutator",
    "commutator_value",
    "field_component",
    "standard_component",
    "curvature_form",
    "transition_check",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BundlePoint:
    """A point ``(x^mu, theta)`` with theta wrapped into ``[0, 2 pi)``."""

    base: tuple
    theta: float = 0.0

    def __post_init__(self):
        b = np.asarray(self.base, dtype=float)
        if b.shape != (4,) or not np.all(np.isfinite(b)):
            raise ValueError("the base point needs four finite coordinates")
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")
        t = math.fmod(float(self.theta), TWO_PI)
        if t < 0:
            t += TWO_PI
        if t >= TWO_PI:  # -tiny + 2 pi rounds up to 2 pi
            t = 0.0
        object.__setattr__(self, "base", tuple(float(v) for v in b))
        object.__setattr__(self, "theta", t)

    def array(self) -> np.ndarray:
        return np.array(self.base)


@dataclass(frozen=True)
class BundleTangent:
    """``xdot^mu d/dx^mu + iK d/dtheta``.

    Only the real number ``K`` is stored, so the fiber coefficient ``iK`` is
    purely imaginary by construction.
    """

    xdot: tuple
    K: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.xdot, dtype=float)
        if v.shape != (4,):
            raise ValueError("a bundle tangent has four base components")
        object.__setattr__(self, "xdot", tuple(float(c) for c in v))
        object.__setattr__(self, "K", float(self.K))

    @classmethod
    def vertical(cls, K: float) -> "BundleTangent":
        return cls((0.0, 0.0, 0.0, 0.0), K)

    @property
    def fiber(self) -> complex:
        return 1j * self.K

    def array(self) -> np.ndarray:
        """The real 5-vector ``(xdot^0, ..., xdot^3, K)``."""
        return np.array(self.xdot + (self.K,))

    def __add__(self, other: "BundleTangent") -> "BundleTangent":
        return BundleTangent(tuple(a + b for a, b in zip(self.xdot, other.xdot)), self.K + other.K)

    def __mul__(self, s: float) -> "BundleTangent":
        return BundleTangent(tuple(s * a for a in self.xdot), s * self.K)

    __rmul__ = __mul__


@dataclass(frozen=True)
class ConnectionForm:
    """``omega = -ie A_mu dx^mu + dtheta`` for a four-potential ``A``.

    ``e`` defaults to the charge of ``units``.  The unit system is carried so
    that cross-checks against the quantum module can convert the coupling to
    ``e / (hbar c)``; the bundle itself works with hbar = 1.
    """

    A: FourPotential
    e: float | None = None
    units: UnitSystem = field(default=NATURAL)

    def __post_init__(self):
        if self.e is None:
            object.__setattr__(self, "e", self.units.e)
        if not math.isfinite(self.e):
            raise ValueError("charge must be finite")

    def potential_at(self, p) -> np.ndarray:
        return np.array([self.A.component(mu)(p) for mu in range(4)])

    def base_part(self) -> KForm:
        """The base 1-form ``-ie A``; the dtheta part is handled separately."""
        return self.A.form * (-1j * self.e)


def _at(at) -> np.ndarray:
    return at.array() if isinstance(at, BundlePoint) else np.asarray(at, dtype=float)


def connection_apply(w: ConnectionForm, X: BundleTangent, at) -> complex:
    """``omega(X) = i (K - e A_mu xdot^mu)`` at the base point of ``at``."""
    A = w.potential_at(_at(at))
    return 1j * (X.K - w.e * float(np.dot(A, X.xdot)))


def horizontal_basis(w: ConnectionForm, at) -> list[BundleTangent]:
    """The four vectors ``d/dx^mu + ie A_mu d/dtheta``."""
    A = w.potential_at(_at(at))
    return [BundleTangent(tuple(np.eye(4)[mu]), w.e * A[mu]) for mu in range(4)]


def split_matrix(w: ConnectionForm, at) -> np.ndarray:
    """Rows: the horizontal basis followed by ``d/dtheta``, as real 5-vectors.

    Its determinant is 1 for every potential, which is the statement that the
    horizontal and vertical spaces together span the tangent space and meet
    only at zero.
    """
    rows = [h.array() for h in horizontal_basis(w, at)]
    rows.append(BundleTangent.vertical(1.0).array())
    return np.array(rows)


def horizontal_decompose(w: ConnectionForm, X: BundleTangent, at) -> tuple[BundleTangent, BundleTangent]:
    """Split ``X`` into (vertical, horizontal) parts.

    The horizontal part is ``xdot^mu (d/dx^mu + ie A_mu d/dtheta)``; the
    vertical part carries what is left of the fiber component, which is
    ``omega(X)`` itself.
    """
    A = w.potential_at(_at(at))
    k_h = w.e * float(np.dot(A, X.xdot))
    horizontal = BundleTangent(X.xdot, k_h)
    vertical = BundleTangent.vertical(X.K - k_h)
    return vertical, horizontal


def covariant_derivative_field(w: ConnectionForm, psi, mu: int) -> ScalarField:
    """The field ``D_mu psi = d_mu psi + ie A_mu psi``."""
    if mu not in range(4):
        raise ValueError(f"axis {mu} out of range")
    psi = as_field(psi, MINKOWSKI)
    return psi.partial(mu) + (1j * w.e) * w.A.component(mu) * psi


def covariant_derivative(w: ConnectionForm, psi, mu: int, p) -> complex:
    return complex(covariant_derivative_field(w, psi, mu)(p))


def commutator_value(w: ConnectionForm, psi, mu: int, nu: int, p) -> complex:
    """``D_mu D_nu psi - D_nu D_mu psi`` at ``p``."""
    psi = as_field(psi, MINKOWSKI)
    a = covariant_derivative_field(w, covariant_derivative_field(w, psi, nu), mu)
    b = covariant_derivative_field(w, covariant_derivative_field(w, psi, mu), nu)
    return complex(a(p) - b(p))


def field_component(F: KForm, mu: int, nu: int) -> ScalarField:
    """``F_{mu nu} = d_nu A_mu - d_mu A_nu`` read from the 2-form ``F = dA``."""
    return F.coefficient((nu, mu))


def standard_component(F: KForm, mu: int, nu: int) -> ScalarField:
    """The coefficient of ``dx^mu ^ dx^nu``, i.e. ``d_mu A_nu - d_nu A_mu``."""
    return F.coefficient((mu, nu))


def curvature_commutator(w: ConnectionForm, psi, mu: int, nu: int, p) -> complex:
    """Residual of ``[D_mu, D_nu] psi + ie F_{mu nu} psi`` with ``F = dA``."""
    psi = as_field(psi, MINKOWSKI)
    F = field_tensor(w.A)
    return commutator_value(w, psi, mu, nu, p) + 1j * w.e * complex(field_component(F, mu, nu)(p) * psi(p))


def curvature_form(w: ConnectionForm) -> KForm:
    """``d omega``; the ``dtheta`` part drops out because ``d dtheta = 0``."""
    return d(w.base_part())


@dataclass(frozen=True)
class TransitionReport:
    potential_residual: float
    curvature_residual: float
    tolerance: float

    @property
    def compatible(self) -> bool:
        return self.potential_residual <= self.tolerance and self.curvature_residual <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "potential_residual": self.potential_residual,
            "curvature_residual": self.curvature_residual,
            "tolerance": self.tolerance,
            "compatible": self.compatible,
        }


def transition_check(A: FourPotential, A2: FourPotential, phi, points=None, tol: float = 1e-10) -> TransitionReport:
    """Check that ``A = A2 + d(phi)`` and ``dA = dA2`` on ``points``.

    Both residuals are sup norms of form coefficients; ``points`` defaults to
    the 5^4 lattice around the origin.
    """
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    if points is None:
        points = default_lattice()
    dphi = d(KForm.scalar(as_field(phi, MINKOWSKI), MINKOWSKI))
    r1 = (A.form - A2.form - dphi).max_abs(points)
    r2 = (field_tensor(A) - field_tensor(A2)).max_abs(points)
    return TransitionReport(float(r1), float(r2), tol)
