"""Electromagnetism in form language on the Minkowski chart (axis 0 = t).

Conventions (c = 1 unless stated):

    F = E_i dx^i ^ dt + B_1 dy^dz + B_2 dz^dx + B_3 dx^dy
    *F = E_1 dy^dz + ... + B_i dt ^ dx^i
    *J = rho dx^dy^dz - J_1 dt^dy^dz - J_2 dt^dz^dx - J_3 dt^dx^dy

so that ``dF = 0`` carries Faraday's law and div B = 0, and
``d*F = 4 pi *J`` carries Gauss's law and the Ampere-Maxwell law.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .chartcalc import (
    EUCLIDEAN3,
    MINKOWSKI,
    NATURAL,
    ScalarField,
    UnitSystem,
    VectorField,
    as_field,
    divergence,
    jet,
)
from . import chartcalc as cc
from .exterior import KForm, d, interior, lattice, star4

SPACE = (1, 2, 3)
_PAIR = {1: (2, 3), 2: (3, 1), 3: (1, 2)}


def _fields(comps, chart=MINKOWSKI) -> tuple[ScalarField, ...]:
    return tuple(as_field(c, chart) for c in comps)


@dataclass
class EMField:
    """Electric and magnetic 3-vectors as fields over spacetime."""

    E: tuple
    B: tuple
    chart: object = MINKOWSKI

    def __post_init__(self):
        self.E = _fields(self.E, self.chart)
        self.B = _fields(self.B, self.chart)
        if len(self.E) != 3 or len(self.B) != 3:
            raise ValueError("E and B need three components each")

    def values(self, p) -> tuple[np.ndarray, np.ndarray]:
        return np.array([c(p) for c in self.E]), np.array([c(p) for c in self.B])


@dataclass
class FourPotential:
    """A = A_0 dt + A_1 dx + A_2 dy + A_3 dz with A_0 the electric potential."""

    form: KForm

    def __post_init__(self):
        if self.form.grade != 1:
            raise ValueError("a four-potential is a 1-form")
        if self.form.chart != MINKOWSKI:
            raise ValueError("a four-potential lives on the Minkowski chart")

    @classmethod
    def from_components(cls, comps: Sequence) -> "FourPotential":
        return cls(KForm(1, MINKOWSKI, {(i,): c for i, c in enumerate(comps)}))

    def component(self, mu: int) -> ScalarField:
        return self.form.coefficient((mu,))

    def gauge_shift(self, phi) -> "FourPotential":
        """A + d(phi)."""
        return FourPotential(self.form + d(KForm.scalar(as_field(phi, MINKOWSKI), MINKOWSKI)))


@dataclass
class SourceDensity:
    rho: ScalarField
    J: tuple

    def __post_init__(self):
        self.rho = as_field(self.rho, MINKOWSKI)
        self.J = _fields(self.J)

    @classmethod
    def vacuum(cls) -> "SourceDensity":
        return cls(0.0, (0.0, 0.0, 0.0))

    def current_form(self) -> KForm:
        """rho dt + J_i dx^i."""
        return KForm(1, MINKOWSKI, {(0,): self.rho, (1,): self.J[0], (2,): self.J[1], (3,): self.J[2]})


@dataclass
class PoyntingSpec:
    mu: float = 1.0
    epsilon: float = 1.0
    sigma: float = 0.0
    kappa: float = 1.0
    lo: tuple = (0.0, 0.0, 0.0)
    hi: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if min(self.mu, self.epsilon, self.kappa) <= 0 or self.sigma < 0:
            raise ValueError("medium constants must be positive")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValueError("degenerate region")


# --- field tensor ---------------------------------------------------------------


def field_tensor(A: FourPotential) -> KForm:
    """F = dA."""
    return d(A.form)


def electric_field(F: KForm) -> tuple[ScalarField, ...]:
    """E_i read off the dx^i ^ dt block: E_i = dA_0/dx^i - dA_i/dt for F = dA."""
    return tuple(F.coefficient((i, 0)) for i in SPACE)


def magnetic_field(F: KForm, c: float = 1.0) -> tuple[ScalarField, ...]:
    return tuple(F.coefficient(_PAIR[i]) * c for i in SPACE)


def assemble_F(em: EMField, units: UnitSystem = NATURAL) -> KForm:
    """F = eps ^ dt + beta / c from the 3-vector fields."""
    terms = {}
    for k, i in enumerate(SPACE):
        terms[(i, 0)] = em.E[k]
        terms[_PAIR[i]] = em.B[k] * (1.0 / units.c)
    return KForm(2, MINKOWSKI, terms)


def dual_F(F: KForm) -> KForm:
    return star4(F)


def homogeneous_residual(F: KForm, points) -> float:
    """sup over ``points`` of the coefficients of dF."""
    return d(F).max_abs(points)


def inhomogeneous_form(F: KForm, src: SourceDensity, gaussian: bool = True) -> KForm:
    """d*F - 4 pi *J (the 4 pi is dropped when ``gaussian`` is False)."""
    factor = 4 * math.pi if gaussian else 1.0
    return d(star4(F)) - star4(src.current_form()) * factor


def inhomogeneous_residual(F: KForm, src: SourceDensity, points, gaussian: bool = True) -> float:
    return inhomogeneous_form(F, src, gaussian).max_abs(points)


def default_lattice(extent: float = 1.0, per_axis: int = 5, center=(0.0, 0.0, 0.0, 0.0)) -> np.ndarray:
    c = np.asarray(center, dtype=float)
    return lattice(c - extent, c + extent, per_axis)


# --- forces -----------------------------------------------------------------------


def four_velocity(v: Sequence[float], c: float = 1.0) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    speed = np.linalg.norm(v)
    if speed >= c:
        raise ValueError(f"speed {speed} is not below c = {c}")
    gamma = 1.0 / math.sqrt(1.0 - (speed / c) ** 2)
    return gamma * np.concatenate([[1.0], v])


def lorentz_force(F: KForm, v: Sequence[float], q: float, c: float = 1.0) -> KForm:
    """f = -q i_u F with u = gamma (d/dt + v).

    Spatial components are gamma q (E + (v/c) x B); the dt component is
    -gamma q E.v, so that f(u) = 0.
    """
    return -q * interior(four_velocity(v, c), F)


def force_components(f: KForm, p) -> np.ndarray:
    return np.array([f.coefficient((mu,))(p) for mu in range(4)])


def plane_wave(E0: float, sign: int = 1, c: float = 1.0) -> EMField:
    """E = z E0 sin(y - sign c t), B = x sign E0 sin(y - sign c t)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")

    def phase(x):
        return cc.sin(x[2] - sign * c * x[0])

    return EMField(
        E=(0.0, 0.0, ScalarField(lambda x: E0 * phase(x), MINKOWSKI)),
        B=(ScalarField(lambda x: sign * E0 * phase(x), MINKOWSKI), 0.0, 0.0),
    )


def monopole_fixture() -> EMField:
    """Static radial B = (x, y, z); div B = 3, so dF != 0.  Fault injection only."""
    return EMField(
        E=(0.0, 0.0, 0.0),
        B=tuple(ScalarField(lambda x, i=i: x[i], MINKOWSKI) for i in SPACE),
    )


def invariant_density(em: EMField, p) -> float:
    """F^{mu nu} F_{mu nu} from the evaluation matrix of F, indices raised with (-+++)."""
    E, B = em.values(p)
    Fl = np.array(
        [
            [0.0, -E[0], -E[1], -E[2]],
            [E[0], 0.0, B[2], -B[1]],
            [E[1], -B[2], 0.0, B[0]],
            [E[2], B[1], -B[0], 0.0],
        ]
    )
    eta = np.diag(MINKOWSKI.signature).astype(float)
    Fu = eta @ Fl @ eta
    return float(np.sum(Fu * Fl))


def lorenz_gauge_residual(A: FourPotential, p) -> float:
    """div(A_spatial) + dA_0/dt at ``p``."""
    g = [jet(A.component(mu), p, 1).grad for mu in range(4)]
    return g[0][0] + g[1][1] + g[2][2] + g[3][3]


# --- Poynting budget ---------------------------------------------------------------


@dataclass
class PoyntingBudget:
    active_power: float
    dissipation: float
    field_energy_rate: float
    surface_flux: float
    residual: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _gauss_nodes(lo, hi, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def poynting_budget(
    em: EMField,
    src: SourceDensity,
    spec: PoyntingSpec,
    t: float,
    nodes: int = 12,
) -> PoyntingBudget:
    """Terms of  -int E.J_a - int sigma|E|^2 = d/dt int (mu|B|^2 + eps|E|^2)/2 + flux(E x B).

    Volume and surface integrals use tensor Gauss-Legendre quadrature; time
    derivatives come from first-order jets.
    """
    axes = [_gauss_nodes(spec.lo[i], spec.hi[i], nodes) for i in range(3)]
    active = diss = energy_rate = 0.0
    for xi, wi in zip(*axes[0]):
        for yj, wj in zip(*axes[1]):
            for zk, wk in zip(*axes[2]):
                w = wi * wj * wk
                p = (t, xi, yj, zk)
                Ej = [jet(c, p, 1) for c in em.E]
                Bj = [jet(c, p, 1) for c in em.B]
                E = np.array([j.value for j in Ej])
                J = np.array([c(p) for c in src.J])
                active -= w * spec.kappa * E @ J
                diss -= w * spec.sigma * E @ E
                energy_rate += w * (
                    spec.mu * sum(j.value * j.grad[0] for j in Bj)
                    + spec.epsilon * sum(j.value * j.grad[0] for j in Ej)
                )
    flux = 0.0
    for axis in range(3):
        others = [a for a in range(3) if a != axis]
        (ua, wa), (ub, wb) = axes[others[0]], axes[others[1]]
        for side, sgn in ((spec.hi[axis], 1.0), (spec.lo[axis], -1.0)):
            for u, w1 in zip(ua, wa):
                for v, w2 in zip(ub, wb):
                    x = [0.0, 0.0, 0.0]
                    x[axis], x[others[0]], x[others[1]] = side, u, v
                    E, B = em.values((t, *x))
                    flux += sgn * w1 * w2 * np.cross(E, B)[axis]
    residual = active + diss - energy_rate - flux
    return PoyntingBudget(float(active), float(diss), float(energy_rate), float(flux), float(residual))


# --- electrostatics ------------------------------------------------------------------


@dataclass
class RadialDivergenceReport:
    exponent: float
    k: float
    radii: list
    numeric: list
    closed_form: list
    max_abs_error: float
    max_rel_error: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def radial_field(p_exp: float, k: float = 1.0) -> VectorField:
    """k |r|^(-3-p) r; p = 0 is the exact inverse-square law."""
    singular = lambda x: float(np.dot(x, x)) == 0.0

    def comp(i):
        return lambda x: k * (x[0] ** 2 + x[1] ** 2 + x[2] ** 2) ** ((-3.0 - p_exp) / 2) * x[i]

    return VectorField.from_callables([comp(i) for i in range(3)], EUCLIDEAN3, singular)


def radial_divergence_test(p_exp: float, k: float = 1.0, radii=None, seed: int = 0) -> RadialDivergenceReport:
    """Divergence of the perturbed radial field against -p k |r|^(-3-p)."""
    if radii is None:
        radii = np.geomspace(0.25, 8.0, 20)
    rng = np.random.default_rng(seed)
    v = radial_field(p_exp, k)
    numeric, exact = [], []
    for r in radii:
        u = rng.normal(size=3)
        point = r * u / np.linalg.norm(u)
        numeric.append(float(divergence(v, point)))
        exact.append(float(-p_exp * k * r ** (-3.0 - p_exp)))
    numeric, exact = np.array(numeric), np.array(exact)
    err = np.abs(numeric - exact)
    rel = err / np.where(exact == 0, 1.0, np.abs(exact))
    return RadialDivergenceReport(
        p_exp, k, [float(r) for r in radii], numeric.tolist(), exact.tolist(),
        float(err.max()), float(rel.max()),
    )


class ConvergenceError(RuntimeError):
    pass


@dataclass
class LaplaceResult:
    phi: np.ndarray
    iterations: int
    residual: float
    fixed: np.ndarray
    h: float = 1.0
    checks: dict = field(default_factory=dict)


def _neighbour_mean(phi: np.ndarray) -> np.ndarray:
    nd = phi.ndim
    acc = np.zeros_like(phi)
    core = tuple(slice(1, -1) for _ in range(nd))
    for ax in range(nd):
        for off in (-1, 1):
            sl = list(core)
            sl[ax] = slice(1 + off, phi.shape[ax] - 1 + off)
            acc[core] += phi[tuple(sl)]
    return acc / (2 * nd)


def laplace_solve(
    values: np.ndarray,
    fixed: np.ndarray,
    omega: float = 1.8,
    tol: float = 1e-10,
    max_iter: int = 50_000,
    h: float = 1.0,
) -> LaplaceResult:
    """Red-black SOR for the 5-point (2D) or 7-point (3D) Laplace stencil.

    ``fixed`` marks Dirichlet cells (the outer boundary must be fixed, and
    conductors are fixed cells holding their potential); all other cells are
    relaxed until the largest stencil residual drops below ``tol``.
    """
    phi = np.array(values, dtype=float)
    fixed = np.asarray(fixed, dtype=bool)
    if phi.ndim not in (2, 3) or fixed.shape != phi.shape:
        raise ValueError("need matching 2D or 3D value and mask arrays")
    edge = np.ones_like(fixed)
    edge[tuple(slice(1, -1) for _ in range(phi.ndim))] = False
    if not np.all(fixed[edge]):
        raise ValueError("the outer boundary must be fully specified")
    free = ~fixed
    parity = np.indices(phi.shape).sum(axis=0) % 2
    colours = [free & (parity == 0), free & (parity == 1)]
    residual = np.inf
    for it in range(1, max_iter + 1):
        for mask in colours:
            avg = _neighbour_mean(phi)
            phi[mask] += omega * (avg[mask] - phi[mask])
        residual = float(np.abs(_neighbour_mean(phi)[free] - phi[free]).max(initial=0.0))
        if residual < tol:
            return LaplaceResult(phi, it, residual, fixed, h)
    raise ConvergenceError(f"SOR did not reach {tol} in {max_iter} sweeps (residual {residual:.3e})")


def field_magnitude(phi: np.ndarray, h: float = 1.0) -> np.ndarray:
    grads = np.gradient(phi, h)
    return np.sqrt(sum(g**2 for g in grads))


def laplace_checks(result: LaplaceResult, cavity: np.ndarray | None = None) -> dict:
    """Maximum principle, discrete mean value and cavity field magnitude."""
    phi, free = result.phi, ~result.fixed
    bmin, bmax = phi[result.fixed].min(), phi[result.fixed].max()
    checks = {
        "interior_min": float(phi[free].min(initial=bmin)),
        "interior_max": float(phi[free].max(initial=bmax)),
        "boundary_min": float(bmin),
        "boundary_max": float(bmax),
        "mean_value_residual": float(np.abs(_neighbour_mean(phi)[free] - phi[free]).max(initial=0.0)),
    }
    checks["max_principle"] = bool(
        checks["interior_max"] <= bmax + 1e-12 and checks["interior_min"] >= bmin - 1e-12
    )
    if cavity is not None:
        mag = field_magnitude(phi, result.h)
        checks["cavity_field_max"] = float(mag[cavity].max())
    result.checks = checks
    return checks


def shielded_cavity(n: int = 64, shell: tuple[int, int] = (20, 44), shell_value: float = 0.3, amplitude: float = 1.0):
    """Outer boundary with a varying potential around a square conducting shell.

    Returns ``(values, fixed, cavity)``; the cavity is the free region
    enclosed by the shell.
    """
    values = np.zeros((n, n))
    fixed = np.zeros((n, n), dtype=bool)
    s = np.linspace(0, 1, n)
    values[0, :] = amplitude * np.sin(np.pi * s)
    values[-1, :] = amplitude * np.sin(3 * np.pi * s) * 0.5
    values[:, 0] = amplitude * s * (1 - s) * 4
    values[:, -1] = -amplitude * np.sin(2 * np.pi * s)
    fixed[0, :] = fixed[-1, :] = fixed[:, 0] = fixed[:, -1] = True
    a, b = shell
    fixed[a:b, a] = fixed[a:b, b - 1] = fixed[a, a:b] = fixed[b - 1, a:b] = True
    for sl in ((slice(a, b), a), (slice(a, b), b - 1), (a, slice(a, b)), (b - 1, slice(a, b))):
        values[sl] = shell_value
    cavity = np.zeros_like(fixed)
    cavity[a + 1 : b - 1, a + 1 : b - 1] = True
    return values, fixed, cavity
