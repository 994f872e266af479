"""Metric fields, Christoffel symbols, geodesics, transport and curvature.

Everything is expressed in a coordinate frame.  Metric derivatives come from
forward-mode AD, so a metric is just a callable returning an ``n x n`` table
built from jet-aware operations.  Curvature is available two ways: the
commutator of covariant derivatives, assembled through the
:class:`~gauge_forms.chartcalc.ScalarField` algebra, and the closed-form
Riemann tensor built from Christoffel symbols and their derivatives.

Sign conventions: ``R(X, Y) Z = [nabla_X, nabla_Y] Z - nabla_[X,Y] Z`` and the
sectional curvature of the plane spanned by ``u, v`` is
``<R(u, v) v, u> / (|u|^2 |v|^2 - <u, v>^2)``, positive on the round sphere.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .chartcalc import Chart, Jet, ScalarField, SingularPointError, VectorField, as_field, euclidean, lift
from . import chartcalc as cc

__all__ = [
    "MetricField",
    "GeodesicState",
    "TransportState",
    "PathHistory",
    "StepRejectedError",
    "metric_jet",
    "christoffel",
    "christoffel_jet",
    "riemann",
    "integrate_geodesic",
    "geodesic_speed",
    "parallel_transport",
    "Segment",
    "holonomy_angle",
    "holonomy",
    "HolonomyResult",
    "jacobi_deviation",
    "JacobiHistory",
    "covariant_derivative",
    "covariant_derivative_field",
    "lie_bracket",
    "curvature_commutator",
    "sectional_curvature",
    "gaussian_curvature",
    "weak_field_metric",
    "effective_light_speed",
    "euclidean_metric",
    "polar_metric",
    "sphere_metric",
    "great_circle",
    "rotation_taking",
    "sphere_chart_curve",
    "octant_loop",
    "coordinate_rectangle",
    "minimize_path_energy",
]

SPHERE_POLE_MARGIN = 1e-6


class StepRejectedError(RuntimeError):
    """Raised when the half-step rerun disagrees beyond tolerance."""


@dataclass(frozen=True)
class MetricField:
    """A symmetric bilinear form field ``g(x)`` on a chart.

    ``g`` maps a coordinate sequence (floats or jets) to an ``n x n`` table.
    ``signature`` is a label such as ``(1, 1)`` or ``(-1, 1, 1, 1)``;
    ``singular`` marks the excluded locus.
    """

    g: Callable
    dimension: int
    signature: tuple = ()
    singular: Callable | None = None
    name: str = "metric"

    def __post_init__(self):
        if not self.signature:
            object.__setattr__(self, "signature", (1,) * self.dimension)
        if len(self.signature) != self.dimension:
            raise ValueError("signature length must match the dimension")

    @property
    def chart(self) -> Chart:
        return euclidean(self.dimension)

    def check_point(self, p) -> None:
        if self.singular is not None and self.singular(np.asarray(p, float)):
            raise SingularPointError(f"metric {self.name} is singular at {list(p)}")

    def matrix(self, p) -> np.ndarray:
        return metric_jet(self, p, 0)[0]

    def inner(self, p, u, v) -> float:
        return float(np.asarray(u) @ self.matrix(p) @ np.asarray(v))

    def norm(self, p, u) -> float:
        return math.sqrt(abs(self.inner(p, u, u)))


def metric_jet(g: MetricField, p, order: int = 2) -> tuple[np.ndarray, ...]:
    """``(g, dg, d2g)`` at ``p`` with ``dg[a, b, k] = d_k g_ab``."""
    p = np.asarray(p, dtype=float)
    g.check_point(p)
    n = g.dimension
    if order == 0:
        table = g.g([float(x) for x in p])
        return (np.array([[cc.value_of(e) for e in row] for row in table], dtype=float),)
    table = g.g(Jet.seed(p, order))
    G = np.empty((n, n))
    dG = np.zeros((n, n, n))
    d2G = np.zeros((n, n, n, n)) if order >= 2 else None
    for a, row in enumerate(table):
        for b, e in enumerate(row):
            if isinstance(e, Jet):
                G[a, b] = np.real(e.value)
                dG[a, b] = np.real(e.grad)
                if d2G is not None and e.hess is not None:
                    d2G[a, b] = np.real(e.hess)
            else:
                G[a, b] = np.real(e)
    if np.abs(G - G.T).max() > 1e-12 * max(1.0, np.abs(G).max()):
        raise ValueError("metric table is not symmetric")
    return (G, dG) if d2G is None else (G, dG, d2G)


def _inverse(G: np.ndarray) -> np.ndarray:
    n = len(G)
    scale = np.abs(G).max()
    if n == 2:
        det = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
        if not abs(det) > 1e-14 * scale * scale:
            raise SingularPointError("metric is not invertible here")
        return np.array([[G[1, 1], -G[0, 1]], [-G[1, 0], G[0, 0]]]) / det
    det = np.linalg.det(G)
    if not abs(det) > 1e-14 * scale**n:
        raise SingularPointError("metric is not invertible here")
    return np.linalg.inv(G)


def christoffel_jet(g: MetricField, p, order: int = 1) -> tuple[np.ndarray, np.ndarray | None]:
    """Christoffel symbols ``Gamma[c, m, b]`` and, for ``order=1``, their derivatives.

    The derivative array is ``dGamma[c, m, b, l] = d_l Gamma^c_{mb}``.
    """
    G, dG, *rest = metric_jet(g, p, order + 1)
    ginv = _inverse(G)
    # first[a, m, b] = (d_b g_am + d_m g_ab - d_a g_mb) / 2
    first = 0.5 * (dG + np.transpose(dG, (0, 2, 1)) - np.transpose(dG, (2, 0, 1)))
    n = len(G)
    Gamma = (ginv @ first.reshape(n, n * n)).reshape(n, n, n)
    if order == 0:
        return Gamma, None
    d2G = rest[0]
    dfirst = 0.5 * (
        np.einsum("ambl->ambl", d2G) + np.einsum("abml->ambl", d2G) - np.einsum("mbal->ambl", d2G)
    )
    dginv = -np.einsum("cx,xyl,ya->cal", ginv, dG, ginv)
    dGamma = np.einsum("cal,amb->cmbl", dginv, first) + np.einsum("ca,ambl->cmbl", ginv, dfirst)
    return Gamma, dGamma


def christoffel(g: MetricField, p) -> np.ndarray:
    """``Gamma[c, m, b] = Gamma^c_{mb}`` at ``p``."""
    return christoffel_jet(g, p, 0)[0]


def riemann(g: MetricField, p) -> np.ndarray:
    """``R[r, s, m, n] = R^r_{smn}`` so that ``(R(d_m, d_n) v)^r = R^r_{smn} v^s``."""
    Gam, dGam = christoffel_jet(g, p, 1)
    return (
        np.einsum("rnsm->rsmn", dGam)
        - np.einsum("rmsn->rsmn", dGam)
        + np.einsum("rml,lns->rsmn", Gam, Gam)
        - np.einsum("rnl,lms->rsmn", Gam, Gam)
    )


# ---------------------------------------------------------------------------
# integration


@dataclass
class GeodesicState:
    """Position, velocity and arc parameter of a geodesic."""

    position: np.ndarray
    velocity: np.ndarray
    s: float = 0.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        if not np.all(np.isfinite(self.velocity)):
            raise ValueError("velocity must be finite")


@dataclass
class TransportState:
    """A vector carried along a curve, at parameter ``s``."""

    vector: np.ndarray
    position: np.ndarray
    s: float


@dataclass
class PathHistory:
    """Sampled parameter, positions and carried vectors (velocity or transported vector)."""

    s: np.ndarray
    positions: np.ndarray
    vectors: np.ndarray
    meta: dict = field(default_factory=dict)

    def final(self) -> TransportState:
        return TransportState(self.vectors[-1].copy(), self.positions[-1].copy(), float(self.s[-1]))

    def to_csv(self, path) -> None:
        n = self.positions.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s"] + [f"x{i}" for i in range(n)] + [f"v{i}" for i in range(n)])
            for s, x, v in zip(self.s, self.positions, self.vectors):
                w.writerow([repr(float(s))] + [repr(float(a)) for a in x] + [repr(float(a)) for a in v])


def _rk4_run(deriv, y0, s0, h, n_steps, record=True):
    ys = np.empty((n_steps + 1, len(y0))) if record else None
    y = np.array(y0, dtype=float)
    if record:
        ys[0] = y
    for k in range(n_steps):
        s = s0 + k * h
        k1 = deriv(s, y)
        k2 = deriv(s + h / 2, y + h / 2 * k1)
        k3 = deriv(s + h / 2, y + h / 2 * k2)
        k4 = deriv(s + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if record:
            ys[k + 1] = y
    return ys if record else y


def _steps(length: float, step: float | None) -> tuple[int, float]:
    if length <= 0:
        raise ValueError("integration length must be positive")
    if step is None:
        step = 1e-4 * length
    n = max(1, int(math.ceil(length / step - 1e-9)))
    return n, length / n


def _guarded(deriv, y0, s0, length, step, check: bool, tol: float):
    n, h = _steps(length, step)
    ys = _rk4_run(deriv, y0, s0, h, n)
    meta = {"step": h, "steps": n}
    if check:
        half = _rk4_run(deriv, y0, s0, h / 2, 2 * n, record=False)
        err = float(np.abs(half - ys[-1]).max()) * 16 / 15
        meta["error_estimate"] = err
        if err > tol * max(1.0, float(np.abs(ys[-1]).max())):
            raise StepRejectedError(f"half-step rerun differs by {err:.3e} (tolerance {tol:.1e}); reduce the step")
    return s0 + h * np.arange(n + 1), ys, meta


def integrate_geodesic(
    g: MetricField,
    ics: GeodesicState,
    s_end: float,
    step: float | None = None,
    check: bool = False,
    tol: float = 1e-8,
) -> PathHistory:
    """RK4 for ``dx/ds = X``, ``dX/ds = -Gamma(X, X)`` from ``ics.s`` to ``s_end``.

    ``check`` reruns at half step and raises :class:`StepRejectedError` when
    the Richardson error estimate exceeds ``tol``.
    """
    n = g.dimension

    def deriv(s, y):
        x, X = y[:n], y[n:]
        Gam = christoffel(g, x)
        return np.concatenate([X, -(Gam @ X) @ X])

    s, ys, meta = _guarded(deriv, np.concatenate([ics.position, ics.velocity]), ics.s, s_end - ics.s, step, check, tol)
    speeds = np.array([g.inner(x, v, v) for x, v in zip(ys[:, :n], ys[:, n:])])
    meta["speed2_drift"] = float(np.abs(speeds - speeds[0]).max())
    return PathHistory(s, ys[:, :n], ys[:, n:], meta)


def geodesic_speed(g: MetricField, history: PathHistory) -> np.ndarray:
    return np.array([g.norm(x, v) for x, v in zip(history.positions, history.vectors)])


def _curve_point_velocity(curve: Callable, s: float) -> tuple[np.ndarray, np.ndarray]:
    (js,) = Jet.seed([s], 1)
    pts = curve(js)
    x = np.array([np.real(cc.value_of(c)) for c in pts], dtype=float)
    v = np.array([float(np.real(c.grad[0])) if isinstance(c, Jet) else 0.0 for c in pts])
    return x, v


def parallel_transport(
    g: MetricField,
    v0: Sequence[float],
    curve: Callable,
    span: tuple[float, float],
    step: float | None = None,
    check: bool = False,
    tol: float = 1e-8,
) -> PathHistory:
    """RK4 for ``dX/ds + Gamma(xdot, X) = 0`` along ``curve(s)`` for ``s`` in ``span``.

    ``curve`` maps a parameter (float or jet) to chart coordinates; its
    velocity comes from AD.
    """
    s0, s1 = map(float, span)

    def deriv(s, X):
        x, xd = _curve_point_velocity(curve, s)
        return -(christoffel(g, x) @ X) @ xd

    s, Xs, meta = _guarded(deriv, np.asarray(v0, float), s0, s1 - s0, step, check, tol)
    pos = np.array([_curve_point_velocity(curve, si)[0] for si in s])
    norms = np.array([g.norm(x, X) for x, X in zip(pos, Xs)])
    meta["norm_drift"] = float(np.abs(norms - norms[0]).max())
    return PathHistory(s, pos, Xs, meta)


@dataclass(frozen=True)
class Segment:
    """One piece of a piecewise loop: ``curve(s)`` for ``s`` in ``[s0, s1]``."""

    curve: Callable
    s0: float
    s1: float


@dataclass
class HolonomyResult:
    """Rotation angle and the per-segment transport histories behind it."""

    angle: float
    segments: list

    def to_csv(self, path) -> None:
        """All segments in one table; ``s`` restarts on each segment."""
        n = self.segments[0].positions.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["segment", "s"] + [f"x{i}" for i in range(n)] + [f"v{i}" for i in range(n)])
            for k, h in enumerate(self.segments):
                for s, x, v in zip(h.s, h.positions, h.vectors):
                    w.writerow([k, repr(float(s))] + [repr(float(a)) for a in x] + [repr(float(a)) for a in v])


def holonomy(g: MetricField, loop: Sequence[Segment], step: float | None = None, v0=None) -> HolonomyResult:
    """Transport a vector once around a closed 2D loop and measure its rotation.

    The angle is signed, positive meaning counterclockwise with respect to the
    chart orientation.  ``v0`` defaults to the unit vector along the first
    coordinate axis.
    """
    if g.dimension != 2:
        raise ValueError("holonomy angles are defined here for 2-dimensional metrics")
    start, _ = _curve_point_velocity(loop[0].curve, loop[0].s0)
    end, _ = _curve_point_velocity(loop[-1].curve, loop[-1].s1)
    if np.abs(start - end).max() > 1e-9:
        raise ValueError("loop is not closed")
    G = g.matrix(start)
    if v0 is None:
        v0 = np.array([1.0, 0.0]) / math.sqrt(G[0, 0])
    v0 = np.asarray(v0, float)
    X, histories = v0, []
    for seg in loop:
        histories.append(parallel_transport(g, X, seg.curve, (seg.s0, seg.s1), step))
        X = histories[-1].vectors[-1]
    area = math.sqrt(np.linalg.det(G)) * (v0[0] * X[1] - v0[1] * X[0])
    return HolonomyResult(math.atan2(area, float(v0 @ G @ X)), histories)


def holonomy_angle(g: MetricField, loop: Sequence[Segment], step: float | None = None, v0=None) -> float:
    """Signed rotation angle from :func:`holonomy`."""
    return holonomy(g, loop, step, v0).angle


# ---------------------------------------------------------------------------
# covariant derivative and curvature through the field algebra


def _christoffel_fields(g: MetricField) -> list:
    n = g.dimension
    chart = g.chart

    @lru_cache(maxsize=64)
    def cached(key: bytes, order: int):
        p = np.frombuffer(key, dtype=float)
        return christoffel_jet(g, p, order)

    def component(c, m, b):
        def jet_fn(p, o):
            if o > 1:
                raise ValueError("Christoffel fields support derivative order at most 1")
            Gam, dGam = cached(np.asarray(p, float).tobytes(), o)
            return Jet(Gam[c, m, b]) if o == 0 else Jet(Gam[c, m, b], dGam[c, m, b].copy())

        return ScalarField(None, chart, g.singular, _jet=jet_fn)

    return [[[component(c, m, b) for b in range(n)] for m in range(n)] for c in range(n)]


def _as_vector_field(v, n: int) -> VectorField:
    chart = euclidean(n)
    if isinstance(v, VectorField):
        return v
    return VectorField([as_field(c, chart) for c in v], chart)


def covariant_derivative_field(g: MetricField, v, X) -> VectorField:
    """The vector field ``nabla_X v`` with ``X`` a vector field or constant components."""
    n = g.dimension
    Gam = _christoffel_fields(g)
    v = _as_vector_field(v, n)
    X = _as_vector_field(X, n)
    comps = []
    for i in range(n):
        total = None
        for j in range(n):
            inner = v[i].partial(j)
            for k in range(n):
                inner = inner + Gam[i][j][k] * v[k]
            term = X[j] * inner
            total = term if total is None else total + term
        comps.append(total)
    return VectorField(comps, euclidean(n))


def covariant_derivative(g: MetricField, v, X, p) -> np.ndarray:
    """``(nabla_X v)^i = X^j (d_j v^i + Gamma^i_{jk} v^k)`` at ``p``."""
    return np.real(covariant_derivative_field(g, v, X)(p))


def lie_bracket(X, Y, n: int) -> VectorField:
    X, Y = _as_vector_field(X, n), _as_vector_field(Y, n)
    comps = []
    for i in range(n):
        total = None
        for j in range(n):
            term = X[j] * Y[i].partial(j) - Y[j] * X[i].partial(j)
            total = term if total is None else total + term
        comps.append(total)
    return VectorField(comps, euclidean(n))


def curvature_commutator(g: MetricField, X, Y, v, p) -> np.ndarray:
    """``Omega(X, Y) v = nabla_X nabla_Y v - nabla_Y nabla_X v - nabla_[X,Y] v`` at ``p``.

    ``X``, ``Y`` and ``v`` may be vector fields or constant component lists
    (coordinate combinations, whose bracket vanishes).
    """
    n = g.dimension
    a = covariant_derivative_field(g, covariant_derivative_field(g, v, Y), X)
    b = covariant_derivative_field(g, covariant_derivative_field(g, v, X), Y)
    out = np.real(a(p)) - np.real(b(p))
    if isinstance(X, VectorField) or isinstance(Y, VectorField):
        out = out - covariant_derivative(g, v, lie_bracket(X, Y, n), p)
    return out


def sectional_curvature(g: MetricField, p, u, v, method: str = "commutator") -> float:
    """``<Omega(u, v) v, u> / (|u|^2 |v|^2 - <u, v>^2)`` with constant extensions of ``u, v``.

    ``method="riemann"`` uses the closed-form Riemann tensor instead of the
    commutator.
    """
    u, v = np.asarray(u, float), np.asarray(v, float)
    G = g.matrix(p)
    gram = (u @ G @ u) * (v @ G @ v) - (u @ G @ v) ** 2
    if abs(gram) < 1e-300:
        raise ValueError("u and v are linearly dependent")
    if method == "riemann":
        Rv = np.einsum("rsmn,s,m,n->r", riemann(g, p), v, u, v)
    elif method == "commutator":
        Rv = curvature_commutator(g, u, v, v, p)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(Rv @ G @ u / gram)


def gaussian_curvature(g: MetricField, p) -> float:
    """Gaussian curvature of a 2D metric from the closed-form Riemann tensor."""
    if g.dimension != 2:
        raise ValueError("gaussian_curvature needs a 2-dimensional metric")
    return sectional_curvature(g, p, [1.0, 0.0], [0.0, 1.0], method="riemann")


# ---------------------------------------------------------------------------
# Jacobi deviation


@dataclass
class JacobiHistory:
    s: np.ndarray
    y: np.ndarray
    ydot: np.ndarray
    K: np.ndarray
    positions: np.ndarray

    def recovered_curvature(self, skip: int = 2) -> np.ndarray:
        """``-y''/y`` from five-point second differences of the samples."""
        h = self.s[1] - self.s[0]
        y = self.y
        ypp = (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (12 * h * h)
        return -ypp / y[2:-2]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "y", "ydot", "K"])
            for row in zip(self.s, self.y, self.ydot, self.K):
                w.writerow([repr(float(x)) for x in row])


def jacobi_deviation(
    g: MetricField,
    geodesic: GeodesicState,
    J0: float,
    J0dot: float,
    s_end: float,
    step: float | None = None,
    curvature: Callable | None = None,
) -> JacobiHistory:
    """Integrate ``y'' + K(s) y = 0`` alongside the geodesic from ``geodesic``.

    The geodesic should be unit speed.  ``K`` defaults to
    :func:`gaussian_curvature` at the current geodesic point.
    """
    if g.dimension != 2:
        raise ValueError("scalar Jacobi deviation is defined for surfaces")
    K_of = curvature or (lambda x: gaussian_curvature(g, x))
    n = 2

    def deriv(s, y):
        x, X, J, Jd = y[:n], y[n : 2 * n], y[2 * n], y[2 * n + 1]
        Gam = christoffel(g, x)
        return np.concatenate([X, -(Gam @ X) @ X, [Jd, -K_of(x) * J]])

    y0 = np.concatenate([geodesic.position, geodesic.velocity, [J0, J0dot]])
    nsteps, h = _steps(s_end - geodesic.s, step)
    ys = _rk4_run(deriv, y0, geodesic.s, h, nsteps)
    s = geodesic.s + h * np.arange(nsteps + 1)
    K = np.array([K_of(x) for x in ys[:, :n]])
    return JacobiHistory(s, ys[:, 2 * n], ys[:, 2 * n + 1], K, ys[:, :n])


# ---------------------------------------------------------------------------
# standard metrics and curves


def euclidean_metric(n: int = 2) -> MetricField:
    eye = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    return MetricField(lambda x: eye, n, name="euclidean")


def polar_metric() -> MetricField:
    """Flat plane in coordinates ``(r, theta)``."""
    return MetricField(lambda x: [[1.0, 0.0], [0.0, x[0] * x[0]]], 2, singular=lambda p: p[0] <= 0, name="polar")


def sphere_metric(radius: float = 1.0) -> MetricField:
    """Round sphere in ``(phi, theta)``: polar angle first, azimuth second.

    The chart excludes a margin of ``1e-6`` around each pole.
    """
    r2 = radius * radius

    def g(x):
        s = cc.sin(x[0])
        return [[r2, 0.0], [0.0, r2 * s * s]]

    def singular(p):
        return not (SPHERE_POLE_MARGIN < p[0] < math.pi - SPHERE_POLE_MARGIN)

    return MetricField(g, 2, singular=singular, name="sphere")


def great_circle(a: Sequence[float], b: Sequence[float]) -> tuple[np.ndarray, np.ndarray, float]:
    """Unit vectors ``a, w`` and arc length so that ``a cos s + w sin s`` runs from a to b."""
    a = np.asarray(a, float) / np.linalg.norm(a)
    b = np.asarray(b, float) / np.linalg.norm(b)
    w = b - (a @ b) * a
    nw = np.linalg.norm(w)
    if nw < 1e-14:
        raise ValueError("endpoints are equal or antipodal")
    return a, w / nw, math.atan2(nw, a @ b)


def rotation_taking(src: Sequence[float], dst: Sequence[float]) -> np.ndarray:
    """Rotation matrix mapping the direction ``src`` to ``dst`` (Rodrigues formula)."""
    a = np.asarray(src, float) / np.linalg.norm(src)
    b = np.asarray(dst, float) / np.linalg.norm(dst)
    v = np.cross(a, b)
    c = float(a @ b)
    if np.linalg.norm(v) < 1e-15:
        if c > 0:
            return np.eye(3)
        axis = np.cross(a, [1.0, 0, 0] if abs(a[0]) < 0.9 else [0, 1.0, 0])
        axis /= np.linalg.norm(axis)
        return 2 * np.outer(axis, axis) - np.eye(3)
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + vx + vx @ vx / (1 + c)


def sphere_chart_curve(a: np.ndarray, w: np.ndarray) -> Callable:
    """Chart coordinates ``(phi, theta)`` of the great circle ``a cos s + w sin s``."""

    def curve(s):
        cs, sn = cc.cos(s), cc.sin(s)
        x, y, z = (a[i] * cs + w[i] * sn for i in range(3))
        return [cc.arccos(z), cc.atan2(y, x)]

    return curve


def octant_loop(rotation: np.ndarray | None = None) -> list[Segment]:
    """Geodesic triangle pole -> equator -> quarter turn -> pole on the unit sphere.

    The loop is rotated as a whole so that its centroid sits on the equator;
    this keeps it inside the chart and away from the azimuth branch cut.
    """
    verts = [np.array([0, 0, 1.0]), np.array([1.0, 0, 0]), np.array([0, 1.0, 0])]
    R = rotation if rotation is not None else rotation_taking([1, 1, 1], [1, 0, 0])
    segs = []
    for i in range(3):
        a, w, arc = great_circle(R @ verts[i], R @ verts[(i + 1) % 3])
        segs.append(Segment(sphere_chart_curve(a, w), 0.0, arc))
    return segs


def coordinate_rectangle(lo: Sequence[float], hi: Sequence[float]) -> list[Segment]:
    """Counterclockwise boundary of a coordinate rectangle in a 2D chart."""
    (x0, y0), (x1, y1) = lo, hi
    return [
        Segment(lambda s: [s, y0 + 0 * s], x0, x1),
        Segment(lambda s: [x1 + 0 * s, s], y0, y1),
        Segment(lambda s: [x1 + x0 - s, y1 + 0 * s], x0, x1),
        Segment(lambda s: [x0 + 0 * s, y1 + y0 - s], y0, y1),
    ]


def minimize_path_energy(g: MetricField, a, b, n_interior: int = 40, initial=None) -> np.ndarray:
    """Minimise the discrete energy ``sum |dx|_g^2 / ds`` over paths from a to b.

    Returns the optimised polyline including endpoints.  The metric is
    evaluated at segment midpoints.
    """
    a, b = np.asarray(a, float), np.asarray(b, float)
    n = g.dimension
    t = np.linspace(0, 1, n_interior + 2)
    path0 = initial if initial is not None else a + np.outer(t, b - a)
    ds = 1.0 / (n_interior + 1)

    def energy_and_grad(flat):
        pts = np.vstack([a, flat.reshape(n_interior, n), b])
        d = np.diff(pts, axis=0)
        mids = 0.5 * (pts[1:] + pts[:-1])
        total = 0.0
        grad = np.zeros_like(pts)
        for i, (di, m) in enumerate(zip(d, mids)):
            G, dG = metric_jet(g, m, 1)
            Gd = G @ di
            total += di @ Gd
            half = 0.5 * np.einsum("a,abk,b->k", di, dG, di)
            grad[i] += -2 * Gd + half
            grad[i + 1] += 2 * Gd + half
        return total / ds, grad[1:-1].ravel() / ds

    res = minimize(
        energy_and_grad,
        np.asarray(path0)[1:-1].ravel(),
        jac=True,
        method="BFGS",
        options={"gtol": 1e-12, "maxiter": 20000},
    )
    return np.vstack([a, res.x.reshape(n_interior, n), b])


# ---------------------------------------------------------------------------
# weak field


def weak_field_metric(phi) -> MetricField:
    """Spacetime metric ``diag(2 phi - 1, 1, 1, 1)`` for a potential ``phi(t, x, y, z)``."""
    from .chartcalc import MINKOWSKI

    f = as_field(phi, MINKOWSKI)
    if f.definition is None:
        raise ValueError("weak_field_metric needs a potential given by a definition callable")

    def g(x):
        val = f.definition(list(x))
        return [
            [2 * val - 1, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]

    return MetricField(g, 4, signature=(-1, 1, 1, 1), singular=f.singular, name="weak-field")


def effective_light_speed(g: MetricField, p) -> float:
    """``sqrt(-g_00)``: coordinate speed of light for a static diagonal metric."""
    g00 = g.matrix(p)[0, 0]
    if g00 >= 0:
        raise ValueError("g_00 must be negative for a timelike time axis")
    return math.sqrt(-g00)
