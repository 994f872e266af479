"""Actions, Euler-Lagrange residuals, Noether charges and charged-particle motion.

A Lagrangian is any callable ``L(q, qdot, t)`` built from the jet-aware
functions of :mod:`gauge_forms.chartcalc`.  Partial derivatives in ``q``,
``qdot`` and ``t`` come from forward-mode AD, so the equations of motion are
derived from ``L`` itself rather than typed in by hand.  Time derivatives
along a sampled path use five-point central stencils.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .chartcalc import Jet
from .maxwell import EMField

__all__ = [
    "LagrangianSpec",
    "Trajectory",
    "StepTooLargeError",
    "action",
    "lagrangian_derivatives",
    "el_residual",
    "max_el_residual",
    "noether_charge",
    "energy",
    "beltrami_quantity",
    "integrate_lagrangian",
    "select_step",
    "integrate_em_particle",
    "em_lagrangian",
    "uniform_magnetic_potential",
    "fit_circle",
    "kepler_lagrangian",
]


class StepTooLargeError(RuntimeError):
    """Raised when an integration step fails the energy drift guard."""


@dataclass(frozen=True)
class LagrangianSpec:
    """A Lagrangian ``evaluator(q, qdot, t)`` on ``dimension`` coordinates."""

    evaluator: Callable
    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")

    def __call__(self, q, qdot, t) -> float:
        return float(np.real(self.evaluator(np.asarray(q, float), np.asarray(qdot, float), float(t))))


@dataclass
class Trajectory:
    """Samples ``q(t)`` on a uniform time grid with optional stored velocities.

    When ``velocities`` is omitted they are read off a natural cubic spline
    through the samples.
    """

    times: np.ndarray
    states: np.ndarray
    velocities: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        self.states = states.reshape(len(self.times), -1)
        if len(self.times) < 2:
            raise ValueError("a trajectory needs at least two samples")
        dt = np.diff(self.times)
        if np.any(dt <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
            raise ValueError("times must be uniformly spaced")
        if self.velocities is None:
            spline = CubicSpline(self.times, self.states, bc_type="natural", axis=0)
            self.velocities = spline(self.times, 1)
            self.meta.setdefault("velocity_source", "spline")
        else:
            self.velocities = np.asarray(self.velocities, dtype=float).reshape(self.states.shape)
            self.meta.setdefault("velocity_source", "stored")

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def index_of(self, t: float) -> int:
        i = int(round((t - self.times[0]) / self.step))
        if not 0 <= i < len(self.times) or abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t = {t} is not a sample time of this trajectory")
        return i

    def to_csv(self, path) -> None:
        n = self.dimension
        header = ["t"] + [f"q{i}" for i in range(n)] + [f"qdot{i}" for i in range(n)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for t, q, v in zip(self.times, self.states, self.velocities):
                w.writerow([repr(float(t))] + [repr(float(x)) for x in q] + [repr(float(x)) for x in v])


def action(L: LagrangianSpec, path: Trajectory) -> float:
    """Composite Simpson integral of ``L`` along the sampled path."""
    vals = np.array([L(q, v, t) for t, q, v in zip(path.times, path.states, path.velocities)])
    return float(simpson(vals, x=path.times))


def lagrangian_derivatives(L: LagrangianSpec, q, qdot, t, order: int = 1) -> Jet:
    """Jet of ``L`` in the ``2n + 1`` variables ``(q, qdot, t)``."""
    n = L.dimension
    z = np.concatenate([np.asarray(q, float), np.asarray(qdot, float), [float(t)]])
    s = Jet.seed(z, order)
    out = L.evaluator(np.array(s[:n], dtype=object), np.array(s[n : 2 * n], dtype=object), s[2 * n])
    if not isinstance(out, Jet):
        out = Jet(out, np.zeros(2 * n + 1), np.zeros((2 * n + 1,) * 2) if order >= 2 else None)
    return out


def _momentum(L: LagrangianSpec, q, qdot, t) -> tuple[np.ndarray, np.ndarray]:
    j = lagrangian_derivatives(L, q, qdot, t, order=1)
    n = L.dimension
    g = np.real(j.grad)
    return g[:n], g[n : 2 * n]


_STENCIL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


def el_residual(L: LagrangianSpec, path: Trajectory, t: float) -> np.ndarray:
    """Euler-Lagrange left-hand side ``d/dt dL/dqdot - dL/dq`` at a sample time.

    ``t`` must be a sample time with two neighbours on each side.
    """
    i = path.index_of(t)
    if i < 2 or i > len(path.times) - 3:
        raise ValueError("el_residual needs two samples on each side of t")
    ps = []
    for k in range(i - 2, i + 3):
        _, p = _momentum(L, path.states[k], path.velocities[k], path.times[k])
        ps.append(p)
    dpdt = _STENCIL @ np.array(ps) / path.step
    dLdq, _ = _momentum(L, path.states[i], path.velocities[i], path.times[i])
    return dpdt - dLdq


def max_el_residual(L: LagrangianSpec, path: Trajectory, stride: int = 1) -> float:
    """Largest residual component over interior samples (endpoints excluded)."""
    worst = 0.0
    for i in range(2, len(path.times) - 2, stride):
        worst = max(worst, float(np.abs(el_residual(L, path, path.times[i])).max()))
    return worst


def energy(L: LagrangianSpec, q, qdot, t=0.0) -> float:
    """``H = sum p qdot - L``."""
    _, p = _momentum(L, q, qdot, t)
    return float(p @ np.asarray(qdot, float) - L(q, qdot, t))


def beltrami_quantity(L: LagrangianSpec, q, qdot, t=0.0) -> float:
    """``L - qdot dL/dqdot``, constant along solutions when ``L`` has no explicit t."""
    return -energy(L, q, qdot, t)


def noether_charge(L: LagrangianSpec, generator, path: Trajectory, t: float) -> float:
    """Conserved quantity ``(dL/dqdot) . q'`` for the symmetry direction ``q'(q)``.

    ``generator`` is either a callable returning the infinitesimal displacement
    at ``q`` or the string ``"time"``, which returns the energy ``H``.
    """
    i = path.index_of(t)
    q, v = path.states[i], path.velocities[i]
    if isinstance(generator, str):
        if generator != "time":
            raise ValueError(f"unknown generator {generator!r}")
        return energy(L, q, v, path.times[i])
    _, p = _momentum(L, q, v, path.times[i])
    return float(p @ np.asarray(generator(q), float))


def _el_acceleration(L: LagrangianSpec, q, qdot, t) -> np.ndarray:
    # solve  M qddot = dL/dq - (d2L/dqdot dq) qdot - d2L/dqdot dt
    n = L.dimension
    j = lagrangian_derivatives(L, q, qdot, t, order=2)
    g, H = np.real(j.grad), np.real(j.hess)
    M = H[n : 2 * n, n : 2 * n]
    rhs = g[:n] - H[n : 2 * n, :n] @ qdot - H[n : 2 * n, 2 * n]
    return np.linalg.solve(M, rhs)


def _rk4(deriv: Callable, y0: np.ndarray, t0: float, step: float, n_steps: int) -> tuple[np.ndarray, np.ndarray]:
    ys = np.empty((n_steps + 1, len(y0)))
    ys[0] = y0
    y, t = y0.copy(), t0
    for k in range(n_steps):
        k1 = deriv(t, y)
        k2 = deriv(t + step / 2, y + step / 2 * k1)
        k3 = deriv(t + step / 2, y + step / 2 * k2)
        k4 = deriv(t + step, y + step * k3)
        y = y + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (k + 1) * step
        ys[k + 1] = y
    return t0 + step * np.arange(n_steps + 1), ys


def _grid(tspan, step) -> tuple[float, int, float]:
    t0, t1 = map(float, tspan)
    if not (t1 > t0 and step > 0):
        raise ValueError("need t1 > t0 and a positive step")
    n = max(1, int(round((t1 - t0) / step)))
    return t0, n, (t1 - t0) / n


def integrate_lagrangian(
    L: LagrangianSpec,
    ics: tuple[Sequence[float], Sequence[float]],
    tspan: tuple[float, float],
    step: float | None = None,
    drift_tol: float | None = None,
) -> Trajectory:
    """RK4 integration of the Euler-Lagrange equations derived from ``L``.

    With ``step=None`` the step is picked by :func:`select_step`.  When
    ``drift_tol`` is given, the relative energy drift along the result must
    stay below it or :class:`StepTooLargeError` is raised.  Only meaningful
    for Lagrangians without explicit time dependence.
    """
    q0, v0 = (np.asarray(x, float) for x in ics)
    n = L.dimension
    if step is None:
        step = select_step(L, ics, tspan, tol=drift_tol or 1e-8)

    def deriv(t, y):
        return np.concatenate([y[n:], _el_acceleration(L, y[:n], y[n:], t)])

    t0, n_steps, h = _grid(tspan, step)
    ts, ys = _rk4(deriv, np.concatenate([q0, v0]), t0, h, n_steps)
    path = Trajectory(ts, ys[:, :n], ys[:, n:], meta={"step": h})
    if drift_tol is not None:
        drift = energy_drift(L, path)
        path.meta["energy_drift"] = drift
        if drift > drift_tol:
            raise StepTooLargeError(f"relative energy drift {drift:.3e} exceeds {drift_tol:.1e} at step {h}")
    return path


def energy_drift(L: LagrangianSpec, path: Trajectory) -> float:
    E = np.array([energy(L, q, v, t) for t, q, v in zip(path.times, path.states, path.velocities)])
    return float(np.abs(E - E[0]).max() / max(abs(E[0]), 1e-300))


def select_step(
    L: LagrangianSpec,
    ics,
    tspan,
    tol: float = 1e-8,
    initial: float | None = None,
    probe_fraction: float = 0.1,
    max_halvings: int = 12,
) -> float:
    """Halve a trial step until the energy drift on a probe interval is small.

    The probe covers ``probe_fraction`` of the span, and its drift must stay
    below ``tol * probe_fraction`` so that the drift extrapolated linearly to
    the full span stays under ``tol``.
    """
    t0, t1 = map(float, tspan)
    h = initial if initial is not None else (t1 - t0) / 64
    probe = (t0, t0 + probe_fraction * (t1 - t0))
    for _ in range(max_halvings):
        trial = integrate_lagrangian(L, ics, probe, step=h)
        if energy_drift(L, trial) < tol * probe_fraction:
            return h
        h /= 2
    raise StepTooLargeError(f"no step down to {h:.3e} meets the drift tolerance {tol}")


def kepler_lagrangian(m: float = 1.0, k: float = 1.0) -> LagrangianSpec:
    """Polar-coordinate Lagrangian ``m (rdot^2 + r^2 thetadot^2)/2 + k/r``."""

    def L(q, qd, t):
        r = q[0]
        return 0.5 * m * (qd[0] * qd[0] + r * r * qd[1] * qd[1]) + k / r

    return LagrangianSpec(L, 2)


def em_lagrangian(phi: Callable, A: Callable, q: float, m: float, c: float = 1.0) -> LagrangianSpec:
    """``m |v|^2 / 2 - q phi + (q/c) v . A`` for a charge in given potentials.

    ``phi(t, x)`` and ``A(t, x)`` follow the classical convention
    ``E = -grad phi - (1/c) dA/dt`` and ``B = curl A``; they must be built
    from jet-aware operations.
    """

    def L(x, v, t):
        a = A(t, x)
        return 0.5 * m * sum(vi * vi for vi in v) - q * phi(t, x) + (q / c) * sum(vi * ai for vi, ai in zip(v, a))

    return LagrangianSpec(L, 3)


def uniform_magnetic_potential(B0: float):
    """Symmetric-gauge potentials ``phi = 0``, ``A = B0 (-y, x, 0) / 2`` for ``B = B0 z``."""
    return (lambda t, x: 0.0), (lambda t, x: (-0.5 * B0 * x[1], 0.5 * B0 * x[0], 0.0))


def integrate_em_particle(
    em: EMField,
    q: float,
    m: float,
    ics: tuple[Sequence[float], Sequence[float]],
    tspan: tuple[float, float],
    step: float,
    c: float = 1.0,
    drift_tol: float = 1e-6,
    potential: tuple[Callable, Callable] | None = None,
) -> Trajectory:
    """RK4 for ``m dv/dt = q (E + v x B / c)`` with a work-energy drift guard.

    The accumulated work ``W = int q E . v dt`` rides along in the state; the
    kinetic energy minus ``W`` is then exactly conserved by the dynamics, and
    its drift relative to the energy scale bounds the step.  When
    ``potential = (phi, A)`` is supplied the Euler-Lagrange residual of
    :func:`em_lagrangian` along the result is stored in ``meta``.
    """
    x0, v0 = (np.asarray(x, float) for x in ics)
    if np.linalg.norm(v0) >= c:
        raise ValueError("initial speed must be below c")
    t0, n_steps, h = _grid(tspan, step)
    B_scale = max(np.abs(em.values((t0, *x0))[1]).max(), 1e-300)
    if abs(q) * B_scale / (m * c) * h > 0.5:
        raise StepTooLargeError(f"step {h} does not resolve the gyration period")

    def deriv(t, y):
        p = (t, y[0], y[1], y[2])
        E, B = em.values(p)
        v = y[3:6]
        a = q / m * (E + np.cross(v, B) / c)
        return np.concatenate([v, a, [q * (E @ v)]])

    ts, ys = _rk4(deriv, np.concatenate([x0, v0, [0.0]]), t0, h, n_steps)
    kin = 0.5 * m * np.einsum("ij,ij->i", ys[:, 3:6], ys[:, 3:6])
    budget = kin - ys[:, 6]
    scale = max(np.abs(kin).max(), np.abs(ys[:, 6]).max(), 1e-300)
    drift = float(np.abs(budget - budget[0]).max() / scale)
    if drift > drift_tol:
        raise StepTooLargeError(f"work-energy drift {drift:.3e} exceeds {drift_tol:.1e} at step {h}")
    path = Trajectory(ts, ys[:, :3], ys[:, 3:6], meta={"step": h, "energy_drift": drift})
    if potential is not None:
        L = em_lagrangian(*potential, q=q, m=m, c=c)
        path.meta["el_residual"] = max_el_residual(L, path, stride=max(1, n_steps // 200))
    return path


def fit_circle(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares circle through planar points; returns (center, radius)."""
    x, y = points[:, 0], points[:, 1]
    M = np.column_stack([x, y, np.ones_like(x)])
    sol, *_ = np.linalg.lstsq(M, x * x + y * y, rcond=None)
    cx, cy = sol[0] / 2, sol[1] / 2
    return np.array([cx, cy]), float(math.sqrt(sol[2] + cx * cx + cy * cy))
