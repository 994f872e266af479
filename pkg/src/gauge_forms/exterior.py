"""Differential k-forms in coordinates.

A form is a sparse mapping from strictly increasing index tuples to scalar
fields.  Keys are canonical, so sign bookkeeping happens once, at
construction, by sorting with a swap count.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .chartcalc import (
    EUCLIDEAN3,
    MINKOWSKI,
    Chart,
    Jet,
    ScalarField,
    VectorField,
    as_field,
)


def sort_with_parity(indices: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Insertion sort; returns the sorted tuple and the permutation sign.

    The sign is 0 when an index repeats.
    """
    idx = list(indices)
    swaps = 0
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            swaps += 1
            j -= 1
    if any(idx[i] == idx[i + 1] for i in range(len(idx) - 1)):
        return tuple(idx), 0
    return tuple(idx), -1 if swaps % 2 else 1


@dataclass(frozen=True)
class PLP:
    """A k-parallelepiped: base point plus k edge vectors."""

    base: tuple[float, ...]
    edges: tuple[tuple[float, ...], ...]

    def __init__(self, base, edges):
        object.__setattr__(self, "base", tuple(float(b) for b in base))
        object.__setattr__(self, "edges", tuple(tuple(float(c) for c in e) for e in edges))


class KForm:
    def __init__(self, grade: int, chart: Chart, terms: Mapping | None = None):
        if grade < 0:
            raise ValueError("grade must be non-negative")
        self.grade = grade
        self.chart = chart
        self.terms: dict[tuple[int, ...], ScalarField] = {}
        for key, coeff in (terms or {}).items():
            self._accumulate(tuple(key), as_field(coeff, chart), 1)

    def _accumulate(self, key, coeff: ScalarField, sign: int):
        if len(key) != self.grade:
            raise ValueError(f"multi-index {key} does not match grade {self.grade}")
        if any(i < 0 or i >= self.chart.dimension for i in key):
            raise ValueError(f"multi-index {key} out of range")
        canon, parity = sort_with_parity(key)
        if parity == 0:
            return
        term = coeff if parity * sign == 1 else -coeff
        if canon in self.terms:
            self.terms[canon] = self.terms[canon] + term
        else:
            self.terms[canon] = term

    @classmethod
    def zero(cls, grade: int, chart: Chart) -> "KForm":
        return cls(grade, chart)

    @classmethod
    def basis(cls, indices: Sequence[int], chart: Chart, coeff=1.0) -> "KForm":
        return cls(len(indices), chart, {tuple(indices): coeff})

    @classmethod
    def scalar(cls, f, chart: Chart) -> "KForm":
        return cls(0, chart, {(): f})

    def coefficient(self, key: Sequence[int]) -> ScalarField:
        canon, parity = sort_with_parity(key)
        if parity == 0 or canon not in self.terms:
            return ScalarField.constant(0.0, self.chart)
        c = self.terms[canon]
        return c if parity == 1 else -c

    def coefficients(self, p) -> dict[tuple[int, ...], complex]:
        return {k: c(p) for k, c in self.terms.items()}

    def max_abs(self, points) -> float:
        """Sup norm of all coefficients over ``points``."""
        m = 0.0
        for p in points:
            for c in self.terms.values():
                m = max(m, abs(c(p)))
        return m

    def _check(self, other: "KForm"):
        if self.chart != other.chart:
            raise ValueError("forms live on different charts")

    def __add__(self, other: "KForm") -> "KForm":
        self._check(other)
        if other.grade != self.grade:
            raise ValueError("cannot add forms of different grade")
        out = KForm(self.grade, self.chart, self.terms)
        for k, c in other.terms.items():
            out._accumulate(k, c, 1)
        return out

    def __neg__(self) -> "KForm":
        return KForm(self.grade, self.chart, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "KForm") -> "KForm":
        return self + (-other)

    def __mul__(self, s) -> "KForm":
        if isinstance(s, KForm):
            return wedge(self, s)
        return KForm(self.grade, self.chart, {k: c * s for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __xor__(self, other: "KForm") -> "KForm":
        return wedge(self, other)

    def __repr__(self):
        names = self.chart.names
        parts = [" ^ ".join("d" + names[i] for i in k) or "1" for k in self.terms]
        return f"KForm(grade={self.grade}, terms=[{', '.join(parts)}])"


def differential(axis: int, chart: Chart) -> KForm:
    return KForm.basis((axis,), chart)


def one_form(components: Sequence, chart: Chart) -> KForm:
    """sum_i a_i dx^i from a sequence of coefficients (fields, callables or constants)."""
    return KForm(1, chart, {(i,): c for i, c in enumerate(components)})


def apply(w: KForm, plp: PLP) -> complex:
    """Evaluate ``w`` on a k-parallelepiped (coefficients at its base point)."""
    if len(plp.edges) != w.grade:
        raise ValueError(f"{w.grade}-form applied to {len(plp.edges)} edges")
    edges = np.array(plp.edges, dtype=float).reshape(w.grade, w.chart.dimension)
    total = 0.0
    for key, c in w.terms.items():
        if w.grade == 0:
            total += c(plp.base)
            continue
        # rows: dx^{i_r}; columns: edges
        m = edges[:, list(key)].T
        total += c(plp.base) * np.linalg.det(m)
    return total


def wedge(a: KForm, b: KForm) -> KForm:
    a._check(b)
    grade = a.grade + b.grade
    out = KForm(grade, a.chart)
    for (ka, ca), (kb, cb) in itertools.product(a.terms.items(), b.terms.items()):
        out._accumulate(ka + kb, ca * cb, 1)
    return out


def d(w: KForm) -> KForm:
    """Exterior derivative."""
    n = w.chart.dimension
    out = KForm(w.grade + 1, w.chart)
    for key, c in w.terms.items():
        for axis in range(n):
            if axis in key:
                continue
            out._accumulate((axis,) + key, c.partial(axis), 1)
    return out


def d_partial(w: KForm, axes: Sequence[int]) -> KForm:
    """Exterior derivative restricted to a subset of axes.

    With ``axes`` the spatial axes of a spacetime chart this is the spatial
    derivative; the full ``d`` is ``d_partial(w, space) + dt ^ dw/dt``.
    """
    out = KForm(w.grade + 1, w.chart)
    for key, c in w.terms.items():
        for axis in axes:
            if axis not in key:
                out._accumulate((axis,) + key, c.partial(axis), 1)
    return out


def coefficient_derivative(w: KForm, axis: int) -> KForm:
    """Form whose coefficients are the partials of ``w``'s along ``axis``."""
    return KForm(w.grade, w.chart, {k: c.partial(axis) for k, c in w.terms.items()})


def interior(v, w: KForm) -> KForm:
    """Contraction of the first slot of ``w`` with the vector ``v``.

    ``v`` is a constant component sequence or a :class:`VectorField`.
    """
    if isinstance(v, VectorField):
        if v.chart != w.chart:
            raise ValueError("vector and form live on different charts")
        comps = v.components
    else:
        vals = list(v)
        if len(vals) != w.chart.dimension:
            raise ValueError("vector has wrong number of components")
        comps = [ScalarField.constant(c, w.chart) for c in vals]
        nonzero = [abs(c) > 0 for c in vals]
    if w.grade == 0:
        return KForm(0, w.chart)
    out = KForm(w.grade - 1, w.chart)
    for key, c in w.terms.items():
        for r, i in enumerate(key):
            if not isinstance(v, VectorField) and not nonzero[i]:
                continue
            rest = key[:r] + key[r + 1 :]
            out._accumulate(rest, c * comps[i], -1 if r % 2 else 1)
    return out


# --- duality tables -----------------------------------------------------------

# 3D Euclidean: dx <-> dy^dz, dy <-> dz^dx, dz <-> dx^dy
_CYCLIC = {0: (1, 2), 1: (2, 0), 2: (0, 1)}


def star3(w: KForm) -> KForm:
    """Duality between 1-forms and 2-forms on a 3D Euclidean chart."""
    if w.chart.dimension != 3 or w.chart.is_lorentzian:
        raise ValueError("star3 needs a 3D Euclidean chart")
    if w.grade == 1:
        out = KForm(2, w.chart)
        for (i,), c in w.terms.items():
            out._accumulate(_CYCLIC[i], c, 1)
        return out
    if w.grade == 2:
        out = KForm(1, w.chart)
        for i, pair in _CYCLIC.items():
            if tuple(sorted(pair)) in w.terms:
                out._accumulate((i,), w.coefficient(pair), 1)
        return out
    raise ValueError(f"star3 undefined for grade {w.grade}")


# Minkowski chart axes: 0 = t, 1..3 = x, y, z.  Spatial cyclic pairs shifted by one.
_SPATIAL_PAIR = {1: (2, 3), 2: (3, 1), 3: (1, 2)}


def star4(w: KForm) -> KForm:
    """Spacetime duality for field-strength 2-forms and current 1/3-forms.

    On 2-forms: E_i dx^i^dt + B_i (cyclic dx^j^dx^k)  ->  E_i (cyclic dx^j^dx^k)
    - B_i dx^i^dt, i.e. the electric and magnetic blocks trade places.
    On 1-forms: rho dt + J_i dx^i -> rho dx^dy^dz - J_i dt^(cyclic dx^j^dx^k).
    3-forms map back with the inverse of the 1-form table.
    """
    if w.chart.dimension != 4 or w.chart.signature != MINKOWSKI.signature:
        raise ValueError("star4 needs the Minkowski chart")
    chart = w.chart
    if w.grade == 2:
        out = KForm(2, chart)
        for i, pair in _SPATIAL_PAIR.items():
            # coefficient of dx^i ^ dt is E_i; of the cyclic spatial pair is B_i
            e_i = w.coefficient((i, 0))
            b_i = w.coefficient(pair)
            out._accumulate(pair, e_i, 1)
            out._accumulate((i, 0), b_i, -1)
        return out
    if w.grade == 1:
        out = KForm(3, chart)
        out._accumulate((1, 2, 3), w.coefficient((0,)), 1)
        for i, pair in _SPATIAL_PAIR.items():
            out._accumulate((0,) + pair, w.coefficient((i,)), -1)
        return out
    if w.grade == 3:
        out = KForm(1, chart)
        out._accumulate((0,), w.coefficient((1, 2, 3)), 1)
        for i, pair in _SPATIAL_PAIR.items():
            out._accumulate((i,), w.coefficient((0,) + pair), -1)
        return out
    raise ValueError(f"star4 undefined for grade {w.grade}")


# --- integration ---------------------------------------------------------------


def simpson(values: np.ndarray, h: float) -> complex:
    """Composite Simpson rule on an odd number of equally spaced samples."""
    n = len(values) - 1
    if n < 2 or n % 2:
        raise ValueError("Simpson rule needs an even number of panels")
    return h / 3 * (values[0] + values[-1] + 4 * values[1:-1:2].sum() + 2 * values[2:-1:2].sum())


def _curve_jet(curve: Callable, t: float) -> tuple[np.ndarray, np.ndarray]:
    out = curve(Jet(t, np.ones(1)))
    pos = np.array([c.value if isinstance(c, Jet) else c for c in out], dtype=float)
    vel = np.array(
        [c.grad[0] if isinstance(c, Jet) and c.grad is not None else 0.0 for c in out],
        dtype=float,
    )
    return pos, vel


def integrate_line(w: KForm, curve: Callable, t0: float, t1: float, panels: int = 2**10) -> complex:
    """Integral of a 1-form along ``curve`` (pullback + composite Simpson).

    ``curve`` maps a parameter to chart coordinates and must be written with
    the jet-aware functions of :mod:`chartcalc` so its velocity is exact.
    """
    if w.grade != 1:
        raise ValueError("line integrals need a 1-form")
    ts = np.linspace(t0, t1, panels + 1)
    vals = []
    for t in ts:
        pos, vel = _curve_jet(curve, t)
        s = sum(c(pos) * vel[i] for (i,), c in w.terms.items())
        vals.append(s)
    vals = np.array(vals)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("non-finite integrand along curve")
    return simpson(vals, (t1 - t0) / panels)


def integrate_surface(
    w: KForm,
    patch: Callable,
    u_range: tuple[float, float],
    v_range: tuple[float, float],
    panels: int = 2**7,
) -> complex:
    """Integral of a 2-form over a rectangular parameter patch ``(u, v) -> point``."""
    if w.grade != 2:
        raise ValueError("surface integrals need a 2-form")
    us = np.linspace(*u_range, panels + 1)
    vs = np.linspace(*v_range, panels + 1)
    grid = []
    for u in us:
        for v in vs:
            out = patch([Jet(u, np.array([1.0, 0.0])), Jet(v, np.array([0.0, 1.0]))])
            pos = np.array([_value(c) for c in out])
            du = np.array([_grad(c)[0] for c in out])
            dv = np.array([_grad(c)[1] for c in out])
            grid.append(apply(w, PLP(pos, [du, dv])))
    grid = np.array(grid).reshape(panels + 1, panels + 1)
    hu = (u_range[1] - u_range[0]) / panels
    hv = (v_range[1] - v_range[0]) / panels
    inner = np.array([simpson(row, hv) for row in grid])
    return simpson(inner, hu)


def _value(c):
    return c.value if isinstance(c, Jet) else float(c)


def _grad(c):
    if isinstance(c, Jet) and c.grad is not None:
        return c.grad
    return np.zeros(2)


def lattice(lo: Sequence[float], hi: Sequence[float], per_axis: int = 5) -> np.ndarray:
    """Uniform sampling lattice, ``per_axis`` points along every axis."""
    axes = [np.linspace(a, b, per_axis) for a, b in zip(lo, hi)]
    return np.array(list(itertools.product(*axes)))


__all__ = [
    "PLP",
    "KForm",
    "apply",
    "wedge",
    "d",
    "d_partial",
    "interior",
    "star3",
    "star4",
    "integrate_line",
    "integrate_surface",
    "one_form",
    "differential",
    "sort_with_parity",
    "lattice",
    "simpson",
    "EUCLIDEAN3",
]
