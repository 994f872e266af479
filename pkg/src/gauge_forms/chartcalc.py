"""Fields on coordinate charts with second-order forward-mode derivatives.

A :class:`Jet` carries the value, gradient and Hessian of a quantity with
respect to the chart coordinates.  Feeding seeded jets through an ordinary
Python callable yields exact derivatives (to rounding) for any expression
built from arithmetic and the elementary functions defined here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

MAX_ORDER = 2


class SingularPointError(ValueError):
    """Raised when a field is evaluated on its declared singular locus."""


@dataclass(frozen=True)
class Chart:
    dimension: int
    names: tuple[str, ...] = ()
    signature: tuple[int, ...] = ()

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("chart dimension must be >= 1")
        if not self.names:
            object.__setattr__(
                self, "names", tuple(f"x{i}" for i in range(self.dimension))
            )
        if not self.signature:
            object.__setattr__(self, "signature", (1,) * self.dimension)
        if len(self.names) != self.dimension or len(self.signature) != self.dimension:
            raise ValueError("names and signature must have one entry per axis")
        if any(s not in (1, -1) for s in self.signature):
            raise ValueError("signature entries must be +1 or -1")

    @property
    def is_lorentzian(self) -> bool:
        return -1 in self.signature


def euclidean(n: int, names: Sequence[str] | None = None) -> Chart:
    return Chart(n, tuple(names or ()))


EUCLIDEAN2 = euclidean(2, ("x", "y"))
EUCLIDEAN3 = euclidean(3, ("x", "y", "z"))
# axis 0 is time, signature (-+++)
MINKOWSKI = Chart(4, ("t", "x", "y", "z"), (-1, 1, 1, 1))


@dataclass(frozen=True)
class UnitSystem:
    """Physical constants.  Natural mode pins hbar = c = 1."""

    hbar: float = 1.0
    c: float = 1.0
    e: float = 1.0
    mode: str = "natural"

    def __post_init__(self):
        if self.mode not in ("natural", "gaussian"):
            raise ValueError(f"unknown unit mode {self.mode!r}")
        if self.mode == "natural" and (self.hbar != 1.0 or self.c != 1.0):
            raise ValueError("natural units fix hbar = c = 1")
        if min(self.hbar, self.c, self.e) <= 0:
            raise ValueError("physical constants must be strictly positive")


NATURAL = UnitSystem()
# CGS-Gaussian values: erg s, cm/s, statC
GAUSSIAN_CGS = UnitSystem(
    hbar=1.054571817e-27, c=2.99792458e10, e=4.80320471e-10, mode="gaussian"
)


class Jet:
    """Truncated second-order Taylor expansion in ``n`` variables.

    ``hess`` is ``None`` for first-order jets; ``grad`` is ``None`` for
    plain values lifted into jet arithmetic at order 0.
    """

    __slots__ = ("value", "grad", "hess")
    __array_priority__ = 1000

    def __init__(self, value, grad=None, hess=None):
        self.value = value
        self.grad = grad
        self.hess = hess

    @property
    def order(self) -> int:
        if self.grad is None:
            return 0
        return 1 if self.hess is None else 2

    @staticmethod
    def seed(point: Sequence[float], order: int) -> list["Jet"]:
        n = len(point)
        eye = np.eye(n)
        zero = np.zeros((n, n)) if order >= 2 else None
        if order == 0:
            return [Jet(float(v)) for v in point]
        return [Jet(point[i], eye[i].copy(), zero) for i in range(n)]

    # chain rule for a scalar function with derivatives f0, f1, f2
    def _apply(self, f0, f1, f2) -> "Jet":
        if self.grad is None:
            return Jet(f0)
        g = f1 * self.grad
        h = None
        if self.hess is not None:
            h = f1 * self.hess + f2 * np.outer(self.grad, self.grad)
        return Jet(f0, g, h)

    def __neg__(self):
        return Jet(
            -self.value,
            None if self.grad is None else -self.grad,
            None if self.hess is None else -self.hess,
        )

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.value + other, self.grad, self.hess)
        return Jet(
            self.value + other.value,
            _add(self.grad, other.grad),
            _add(self.hess, other.hess),
        )

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(
                self.value * other,
                None if self.grad is None else self.grad * other,
                None if self.hess is None else self.hess * other,
            )
        a, b = self, other
        g = _add(_scale(b.grad, a.value), _scale(a.grad, b.value))
        h = _add(_scale(b.hess, a.value), _scale(a.hess, b.value))
        if a.grad is not None and b.grad is not None and (
            a.hess is not None or b.hess is not None
        ):
            cross = np.outer(a.grad, b.grad)
            h = _add(h, cross + cross.T)
        return Jet(a.value * b.value, g, h)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        v = self.value
        if v == 0:
            raise ZeroDivisionError("jet division by zero value")
        return self._apply(1 / v, -1 / v**2, 2 / v**3)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return exp(p * log(self))
        if isinstance(p, int) and p >= 0:
            if p == 0:
                return Jet(self.value**0 * 1.0, _scale(self.grad, 0.0), _scale(self.hess, 0.0))
            out = self
            for _ in range(p - 1):
                out = out * self
            return out
        v = self.value
        return self._apply(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def __rpow__(self, base):
        return exp(self * np.log(base))

    def __abs__(self):
        s = 1.0 if np.real(self.value) >= 0 else -1.0
        return self * s

    def conjugate(self) -> "Jet":
        return Jet(
            np.conj(self.value),
            None if self.grad is None else np.conj(self.grad),
            None if self.hess is None else np.conj(self.hess),
        )

    @property
    def real(self) -> "Jet":
        return Jet(
            np.real(self.value),
            None if self.grad is None else np.real(self.grad),
            None if self.hess is None else np.real(self.hess),
        )

    # comparisons act on the value so branches inside field definitions work
    def __lt__(self, other):
        return self.value < _val(other)

    def __le__(self, other):
        return self.value <= _val(other)

    def __gt__(self, other):
        return self.value > _val(other)

    def __ge__(self, other):
        return self.value >= _val(other)

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return f"Jet({self.value!r}, grad={self.grad!r}, hess={self.hess!r})"


def _val(x):
    return x.value if isinstance(x, Jet) else x


def _add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _scale(a, s):
    return None if a is None else a * s


def lift(x, n: int, order: int) -> Jet:
    """Promote a constant to a jet with zero derivatives."""
    if isinstance(x, Jet):
        if x.order >= order:
            return x
        if x.grad is None:
            x = Jet(x.value, np.zeros(n))
        if order >= 2 and x.hess is None:
            x = Jet(x.value, x.grad, np.zeros((n, n)))
        return x
    if order == 0:
        return Jet(x)
    return Jet(x, np.zeros(n), np.zeros((n, n)) if order >= 2 else None)


# elementary functions: accept jets or plain numbers


def sin(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.value), np.cos(x.value)
        return x._apply(s, c, -s)
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.value), np.cos(x.value)
        return x._apply(c, -s, -c)
    return np.cos(x)


def tan(x):
    if isinstance(x, Jet):
        t = np.tan(x.value)
        sec2 = 1 + t * t
        return x._apply(t, sec2, 2 * t * sec2)
    return np.tan(x)


def exp(x):
    if isinstance(x, Jet):
        e = np.exp(x.value)
        return x._apply(e, e, e)
    return np.exp(x)


def log(x):
    if isinstance(x, Jet):
        v = x.value
        return x._apply(np.log(v), 1 / v, -1 / v**2)
    return np.log(x)


def sqrt(x):
    if isinstance(x, Jet):
        r = np.sqrt(x.value)
        return x._apply(r, 0.5 / r, -0.25 / (r * x.value))
    return np.sqrt(x)


def arccos(x):
    if isinstance(x, Jet):
        v = x.value
        w = 1 - v * v
        return x._apply(np.arccos(v), -1 / np.sqrt(w), -v / w**1.5)
    return np.arccos(x)


def arctan(x):
    if isinstance(x, Jet):
        v = x.value
        w = 1 + v * v
        return x._apply(np.arctan(v), 1 / w, -2 * v / w**2)
    return np.arctan(x)


def atan2(y, x):
    """Two-argument arctangent; derivatives via ``d atan2 = (x dy - y dx)/r^2``."""
    if not isinstance(y, Jet) and not isinstance(x, Jet):
        return np.arctan2(y, x)
    ref = y if isinstance(y, Jet) else x
    if ref.grad is None:
        return Jet(np.arctan2(_val(y), _val(x)))
    n, order = len(ref.grad), max(_order(y), _order(x))
    y, x = lift(y, n, order), lift(x, n, order)
    r2 = x.value**2 + y.value**2
    num = x.value * y.grad - y.value * x.grad
    angle = np.arctan2(y.value, x.value)
    if order == 1:
        return Jet(angle, num / r2)
    dr2 = 2 * (x.value * x.grad + y.value * y.grad)
    dnum = (
        np.outer(y.grad, x.grad) - np.outer(x.grad, y.grad)
        + x.value * y.hess - y.value * x.hess
    )
    hess = dnum / r2 - np.outer(num, dr2) / r2**2
    return Jet(angle, num / r2, hess)


def _order(x):
    return x.order if isinstance(x, Jet) else 0


def sinh(x):
    return (exp(x) - exp(-x)) * 0.5


def cosh(x):
    return (exp(x) + exp(-x)) * 0.5


def conj(x):
    return x.conjugate() if isinstance(x, Jet) else np.conj(x)


def value_of(x):
    return _val(x)


class ScalarField:
    """A scalar (real or complex) field on a chart.

    ``definition`` maps a coordinate sequence to a value; it must be written
    with the arithmetic and elementary functions of this module so that jets
    propagate through it.  ``singular`` is an optional predicate marking the
    excluded locus.
    """

    def __init__(
        self,
        definition: Callable | None,
        chart: Chart,
        singular: Callable[[np.ndarray], bool] | None = None,
        *,
        _jet: Callable | None = None,
    ):
        self.chart = chart
        self.definition = definition
        self.singular = singular
        if _jet is not None:
            self._jet = _jet

    @classmethod
    def constant(cls, c, chart: Chart) -> "ScalarField":
        n = chart.dimension

        def jet_fn(p, order):
            return lift(c, n, order) if order else Jet(c)

        return cls(lambda x: c, chart, _jet=jet_fn)

    @classmethod
    def coordinate(cls, axis: int, chart: Chart) -> "ScalarField":
        return cls(lambda x: x[axis], chart)

    def _jet(self, p: np.ndarray, order: int) -> Jet:
        if order == 0:
            out = self.definition([float(v) for v in p] if p.dtype.kind != "c" else list(p))
        else:
            out = self.definition(Jet.seed(p, order))
        return lift(out, self.chart.dimension, order)

    def check_point(self, p: np.ndarray) -> None:
        if self.singular is not None and self.singular(p):
            raise SingularPointError(f"point {p.tolist()} lies on the singular locus")

    def jet(self, p, order: int = 2) -> Jet:
        if order not in (0, 1, 2):
            raise ValueError(f"derivative order {order} not supported (max {MAX_ORDER})")
        p = np.asarray(p, dtype=float)
        if p.shape != (self.chart.dimension,):
            raise ValueError(
                f"point has {p.size} coordinates, chart has {self.chart.dimension}"
            )
        self.check_point(p)
        return self._jet(p, order)

    def __call__(self, p):
        return self.jet(p, 0).value

    # field algebra; singular predicates are merged

    def _combine(self, other, op) -> "ScalarField":
        if not isinstance(other, ScalarField):
            other = ScalarField.constant(other, self.chart)
        if other.chart != self.chart:
            raise ValueError("fields live on different charts")
        a, b = self, other
        return ScalarField(
            None,
            self.chart,
            _merge_singular(a.singular, b.singular),
            _jet=lambda p, o: op(a._jet(p, o), b._jet(p, o)),
        )

    def __add__(self, other):
        return self._combine(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda x, y: x - y)

    def __rsub__(self, other):
        return self._combine(other, lambda x, y: y - x)

    def __mul__(self, other):
        return self._combine(other, lambda x, y: x * y)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, lambda x, y: x / y)

    def __neg__(self):
        a = self
        return ScalarField(None, self.chart, self.singular, _jet=lambda p, o: -a._jet(p, o))

    def map(self, fn: Callable) -> "ScalarField":
        """Compose with an elementary function such as :func:`exp`."""
        a = self
        return ScalarField(None, self.chart, self.singular, _jet=lambda p, o: fn(a._jet(p, o)))

    def partial(self, axis: int) -> "ScalarField":
        """The field of partial derivatives along ``axis``."""
        a = self
        n = self.chart.dimension

        def jet_fn(p, o):
            if o + 1 > MAX_ORDER:
                raise ValueError("derivative orders above 2 are not supported")
            j = lift(a._jet(p, o + 1), n, o + 1)
            if o == 0:
                return Jet(j.grad[axis])
            return Jet(j.grad[axis], j.hess[axis].copy())

        return ScalarField(None, self.chart, self.singular, _jet=jet_fn)


def _merge_singular(s1, s2):
    if s1 is None:
        return s2
    if s2 is None:
        return s1
    return lambda p: s1(p) or s2(p)


def as_field(f, chart: Chart) -> ScalarField:
    if isinstance(f, ScalarField):
        return f
    if callable(f):
        return ScalarField(f, chart)
    return ScalarField.constant(f, chart)


@dataclass
class VectorField:
    components: list[ScalarField]
    chart: Chart = field(default=None)

    def __post_init__(self):
        if self.chart is None:
            self.chart = self.components[0].chart
        self.components = [as_field(c, self.chart) for c in self.components]
        if len(self.components) != self.chart.dimension:
            raise ValueError("component count must equal chart dimension")

    @classmethod
    def from_callables(cls, fns: Sequence, chart: Chart, singular=None) -> "VectorField":
        comps = [
            ScalarField(f, chart, singular) if callable(f) else ScalarField.constant(f, chart)
            for f in fns
        ]
        return cls(comps, chart)

    def __call__(self, p) -> np.ndarray:
        return np.array([c(p) for c in self.components])

    def __getitem__(self, i) -> ScalarField:
        return self.components[i]


def jet(f: ScalarField, p, order: int = 2) -> Jet:
    """Value and derivatives of ``f`` at ``p`` up to ``order``."""
    j = f.jet(p, order)
    return lift(j, f.chart.dimension, order)


def gradient(f: ScalarField, p) -> np.ndarray:
    return jet(f, p, 1).grad


def gradient_field(f: ScalarField) -> VectorField:
    return VectorField([f.partial(i) for i in range(f.chart.dimension)], f.chart)


def divergence(v: VectorField, p) -> float:
    return sum(jet(c, p, 1).grad[i] for i, c in enumerate(v.components))


def curl(v: VectorField, p) -> np.ndarray:
    if v.chart.dimension != 3:
        raise ValueError("curl needs a 3-dimensional chart")
    g = [jet(c, p, 1).grad for c in v.components]
    return np.array(
        [g[2][1] - g[1][2], g[0][2] - g[2][0], g[1][0] - g[0][1]]
    )


def curl_field(v: VectorField) -> VectorField:
    if v.chart.dimension != 3:
        raise ValueError("curl needs a 3-dimensional chart")
    P, Q, R = v.components
    return VectorField(
        [R.partial(1) - Q.partial(2), P.partial(2) - R.partial(0), Q.partial(0) - P.partial(1)],
        v.chart,
    )


def laplacian(f: ScalarField, p) -> float:
    """Trace of the Hessian, weighted by the chart signature."""
    h = jet(f, p, 2).hess
    return sum(s * h[i, i] for i, s in enumerate(f.chart.signature))


def central_difference(fn: Callable, p, h: float = 1e-5) -> np.ndarray:
    """Plain central-difference gradient, used only to cross-check jets."""
    p = np.asarray(p, dtype=float)
    out = []
    for i in range(p.size):
        step = np.zeros_like(p)
        step[i] = h * max(1.0, abs(p[i]))
        out.append((fn(p + step) - fn(p - step)) / (2 * step[i]))
    return np.array(out)
