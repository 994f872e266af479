"""Gauged Schrödinger mechanics on a one-dimensional grid.

The Hamiltonian ``(P - (e/c) A)^2 / 2m + e phi + V`` is discretised with
link phases: the hop from ``x_{j+1}`` to ``x_j`` carries
``exp(-i (e / hbar c) int_{x_j}^{x_{j+1}} A dx)``.  At ``A = 0`` this is the
usual three-point Laplacian, and a gauge change ``A -> A + grad(Lambda)``
together with ``psi -> exp(i e Lambda / hbar c) psi`` maps the grid
Hamiltonian to a unitarily equivalent one exactly, not just to ``O(dx^2)``.

Inner products carry the grid weight ``dx``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.linalg import circulant, eigh, lu_factor, lu_solve

from .chartcalc import NATURAL, UnitSystem, as_field, euclidean, jet

__all__ = [
    "Grid1D",
    "WaveFunction",
    "GridOperator",
    "HamiltonianSpec",
    "GaugeReport",
    "position_operator",
    "momentum_operator",
    "commutator",
    "commutator_xp",
    "hamiltonian",
    "evolve_exact",
    "evolve_cn",
    "path_integral_step",
    "gauge_transform",
    "gauge_equivalence_check",
    "gauge_routes",
    "expectation",
    "variance",
    "uncertainty_product",
    "spectrum",
    "ab_phase",
    "ab_period",
    "ab_probability",
    "gaussian_packet",
    "spectrum_to_json",
    "DENSE_CAP",
    "FRESNEL_WIDTHS",
]

DENSE_CAP = 2048
FRESNEL_WIDTHS = 8.0
LINE = euclidean(1, ("x",))


@dataclass(frozen=True)
class Grid1D:
    """``N`` points ``x_j = x0 + j dx`` with periodic or box (Dirichlet) ends."""

    N: int
    dx: float
    x0: float = 0.0
    boundary: str = "periodic"

    def __post_init__(self):
        if self.N < 8:
            raise ValueError("a grid needs at least 8 points")
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        if self.boundary not in ("periodic", "box"):
            raise ValueError("boundary must be 'periodic' or 'box'")

    @classmethod
    def spanning(cls, lo: float, hi: float, N: int, boundary: str = "periodic") -> "Grid1D":
        """Grid on ``[lo, hi)`` (periodic) or with walls just outside ``lo`` and ``hi`` (box)."""
        if boundary == "periodic":
            return cls(N, (hi - lo) / N, lo, boundary)
        dx = (hi - lo) / (N + 1)
        return cls(N, dx, lo + dx, boundary)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.N)

    @property
    def extent(self) -> float:
        return self.N * self.dx if self.periodic else (self.N + 1) * self.dx

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.N, self.dx)


@dataclass
class WaveFunction:
    """Complex samples on a grid; ``norm() ** 2 = sum |psi|^2 dx``."""

    samples: np.ndarray
    grid: Grid1D

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.shape != (self.grid.N,):
            raise ValueError("sample count must equal the grid size")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("wavefunction samples must be finite")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.grid.dx))

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.samples / self.norm(), self.grid)

    def inner(self, other: "WaveFunction") -> complex:
        """``<self, other> = sum conj(self) other dx``."""
        return complex(np.vdot(self.samples, other.samples) * self.grid.dx)

    def density(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def distance(self, other: "WaveFunction") -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples - other.samples) ** 2) * self.grid.dx))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "re", "im", "density"])
            for x, z in zip(self.grid.x, self.samples):
                w.writerow([repr(float(x)), repr(float(z.real)), repr(float(z.imag)), repr(float(abs(z) ** 2))])


@dataclass
class GridOperator:
    """A dense ``N x N`` operator on a grid."""

    matrix: np.ndarray
    grid: Grid1D
    hbar: float = 1.0

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (self.grid.N, self.grid.N):
            raise ValueError("operator shape must be N x N")

    def __call__(self, psi: WaveFunction) -> WaveFunction:
        return WaveFunction(self.matrix @ psi.samples, self.grid)

    def __matmul__(self, other: "GridOperator") -> "GridOperator":
        return GridOperator(self.matrix @ other.matrix, self.grid, self.hbar)

    def __add__(self, other) -> "GridOperator":
        if isinstance(other, GridOperator):
            return GridOperator(self.matrix + other.matrix, self.grid, self.hbar)
        return GridOperator(self.matrix + other * np.eye(self.grid.N), self.grid, self.hbar)

    __radd__ = __add__

    def __sub__(self, other) -> "GridOperator":
        return self + (-1) * other

    def __mul__(self, c) -> "GridOperator":
        return GridOperator(c * self.matrix, self.grid, self.hbar)

    __rmul__ = __mul__

    def adjoint(self) -> "GridOperator":
        return GridOperator(self.matrix.conj().T, self.grid, self.hbar)

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())


def commutator(a: GridOperator, b: GridOperator) -> GridOperator:
    return a @ b - b @ a


def position_operator(grid: Grid1D, hbar: float = 1.0) -> GridOperator:
    return GridOperator(np.diag(grid.x).astype(complex), grid, hbar)


def _shift_matrix(grid: Grid1D, k: int) -> np.ndarray:
    """``(S psi)_j = psi_{j+k}`` with periodic wrap or zero outside a box."""
    N = grid.N
    if grid.periodic:
        return np.roll(np.eye(N), k, axis=1)
    return np.eye(N, k=k)


def momentum_operator(grid: Grid1D, hbar: float = 1.0, scheme: str = "central") -> GridOperator:
    """``P = -i hbar d/dx`` as a grid matrix.

    ``scheme="central"`` is the two-point central difference.  ``"spectral"``
    differentiates exactly on the discrete Fourier modes of a periodic grid
    (the Nyquist mode is mapped to zero to keep ``P`` self-adjoint).
    """
    if scheme == "central":
        D = (_shift_matrix(grid, 1) - _shift_matrix(grid, -1)) / (2 * grid.dx)
        return GridOperator(-1j * hbar * D, grid, hbar)
    if scheme == "spectral":
        if not grid.periodic:
            raise ValueError("the spectral momentum needs a periodic grid")
        if grid.N > DENSE_CAP:
            raise ValueError(f"dense spectral operator limited to N <= {DENSE_CAP}")
        k = grid.wavenumbers()
        if grid.N % 2 == 0:
            k[grid.N // 2] = 0.0
        F = np.fft.fft(np.eye(grid.N), axis=0)
        P = np.linalg.solve(F, (hbar * k)[:, None] * F)
        return GridOperator(0.5 * (P + P.conj().T), grid, hbar)
    raise ValueError(f"unknown scheme {scheme!r}")


def commutator_xp(grid: Grid1D, psi: WaveFunction, hbar: float = 1.0) -> np.ndarray:
    """``[X, P] psi`` with the central-difference ``P``.

    Away from a periodic seam this equals ``i hbar (psi_{j+1} + psi_{j-1}) / 2``.
    """
    X = position_operator(grid, hbar)
    P = momentum_operator(grid, hbar)
    return commutator(X, P).matrix @ psi.samples


@dataclass(frozen=True)
class HamiltonianSpec:
    """Mass, potentials and charge for ``(P - (e/c) A)^2 / 2m + e phi + V``.

    ``V``, ``A`` and ``phi`` are vectorised callables of ``x`` (or ``None``).
    """

    m: float = 1.0
    V: Callable | None = None
    A: Callable | None = None
    phi: Callable | None = None
    e: float = 1.0
    units: UnitSystem = NATURAL

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("mass must be positive")

    @property
    def coupling(self) -> float:
        """``e / (hbar c)``, the phase per unit of ``int A dx``."""
        return self.e / (self.units.hbar * self.units.c)

    def onsite(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x, dtype=float)
        if self.V is not None:
            out = out + np.broadcast_to(self.V(x), x.shape)
        if self.phi is not None:
            out = out + self.e * np.broadcast_to(self.phi(x), x.shape)
        return out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _link_integrals(A: Callable | None, grid: Grid1D) -> np.ndarray:
    """``int_{x_j}^{x_j + dx} A dx`` for each link, by 8-point Gauss-Legendre."""
    if A is None:
        return np.zeros(grid.N)
    left = grid.x
    nodes = left[:, None] + 0.5 * grid.dx * (1 + _GL_NODES[None, :])
    vals = np.broadcast_to(np.asarray(A(nodes.ravel()), dtype=float), (nodes.size,)).reshape(nodes.shape)
    return 0.5 * grid.dx * vals @ _GL_WEIGHTS


def hamiltonian(spec: HamiltonianSpec, grid: Grid1D) -> GridOperator:
    """Grid Hamiltonian with link phases for ``A`` and on-site ``e phi + V``."""
    hbar = spec.units.hbar
    N, dx = grid.N, grid.dx
    theta = spec.coupling * _link_integrals(spec.A, grid)
    t = hbar**2 / (2 * spec.m * dx**2)
    H = np.diag(2 * t + spec.onsite(grid.x)).astype(complex)
    hop = -t * np.exp(-1j * theta)
    links = range(N) if grid.periodic else range(N - 1)
    for j in links:
        k = (j + 1) % N
        H[j, k] += hop[j]
        H[k, j] += np.conj(hop[j])
    return GridOperator(H, grid, hbar)


def _circulant_symbol(H: GridOperator) -> np.ndarray | None:
    if not H.grid.periodic:
        return None
    col = H.matrix[:, 0]
    if np.abs(circulant(col) - H.matrix).max() > 1e-12 * max(1.0, np.abs(col).max()):
        return None
    return np.fft.fft(col)


def evolve_exact(H: GridOperator, psi0: WaveFunction, t: float, max_dense: int = DENSE_CAP) -> WaveFunction:
    """``exp(-i t H / hbar) psi0`` by FFT (circulant ``H``) or dense eigendecomposition."""
    if t == 0:
        return WaveFunction(psi0.samples.copy(), psi0.grid)
    symbol = _circulant_symbol(H)
    if symbol is not None:
        phase = np.exp(-1j * t * symbol / H.hbar)
        return WaveFunction(np.fft.ifft(phase * np.fft.fft(psi0.samples)), psi0.grid)
    if H.grid.N > max_dense:
        raise ValueError(f"dense propagator limited to N <= {max_dense}; use evolve_cn")
    if H.hermiticity_defect() > 1e-10 * max(1.0, np.abs(H.matrix).max()):
        raise ValueError("evolve_exact needs a self-adjoint Hamiltonian")
    lam, U = eigh(H.matrix)
    out = U @ (np.exp(-1j * t * lam / H.hbar) * (U.conj().T @ psi0.samples))
    return WaveFunction(out, psi0.grid)


def evolve_cn(H: GridOperator, psi0: WaveFunction, t: float, steps: int) -> WaveFunction:
    """Crank-Nicolson: ``(1 + i dt H / 2 hbar) psi_{n+1} = (1 - i dt H / 2 hbar) psi_n``."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    dt = t / steps
    eye = np.eye(H.grid.N)
    a = 0.5j * dt / H.hbar * H.matrix
    try:
        lu = lu_factor(eye + a, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise np.linalg.LinAlgError(f"Crank-Nicolson factorisation failed: {exc}") from exc
    B = eye - a
    psi = psi0.samples.copy()
    for _ in range(steps):
        psi = lu_solve(lu, B @ psi)
    return WaveFunction(psi, psi0.grid)


def _fresnel_window(r: np.ndarray, taper: float = 0.65) -> np.ndarray:
    """Flat top with a raised-cosine taper over the outer ``taper`` fraction."""
    u = np.clip((r - (1 - taper)) / taper, 0.0, 1.0)
    return 0.5 * (1 + np.cos(np.pi * u))


def path_integral_step(spec: HamiltonianSpec, psi: WaveFunction, eps: float) -> WaveFunction:
    """One time slice of the Feynman kernel.

    ``psi(x, t + eps) = exp(-i eps V(x) / hbar) (1/A) int exp(i m eta^2 / 2 hbar eps) psi(x + eta) d eta``
    with ``A = (2 pi i hbar eps / m) ** 0.5``.  The ``eta`` integral runs over
    the grid lattice out to eight Fresnel widths ``sqrt(hbar eps / m)`` with a
    smooth taper.  Because the full Fresnel integral equals ``A`` exactly, the
    lattice sum acts on ``psi(x + eta) - psi(x)`` and the constant part is
    added back analytically.  The on-site potential ``e phi + V`` enters
    through the phase factor; vector potentials are not supported here.
    """
    if spec.A is not None:
        raise ValueError("the path-integral slice handles scalar potentials only")
    grid = psi.grid
    hbar = spec.units.hbar
    if not eps > 0:
        raise ValueError("eps must be positive")
    width = math.sqrt(hbar * eps / spec.m)
    reach = FRESNEL_WIDTHS * width
    if reach > grid.extent / 2:
        raise ValueError(f"eps = {eps} too large: stationary-phase window {reach:.3g} exceeds half the grid")
    if FRESNEL_WIDTHS * grid.dx / width > math.pi:
        raise ValueError(f"eps = {eps} too small for dx = {grid.dx}: the kernel phase is undersampled")
    K = int(math.ceil(reach / grid.dx))
    eta = grid.dx * np.arange(-K, K + 1)
    A = np.sqrt(2j * np.pi * hbar * eps / spec.m)
    kernel = np.exp(1j * spec.m * eta**2 / (2 * hbar * eps)) * _fresnel_window(np.abs(eta) / reach) * grid.dx / A
    f = psi.samples
    out = f.copy()
    for k, w in zip(range(-K, K + 1), kernel):
        if k == 0:
            continue
        if grid.periodic:
            shifted = np.roll(f, -k)
        else:
            shifted = np.zeros_like(f)
            if k > 0:
                shifted[:-k] = f[k:]
            else:
                shifted[-k:] = f[:k]
        out += w * (shifted - f)
    V = spec.onsite(grid.x)
    return WaveFunction(np.exp(-1j * eps * V / hbar) * out, grid)


@dataclass
class GaugeReport:
    l2_gap: float
    density_gap: float
    norm_a: float
    norm_b: float

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}


def gauge_transform(spec: HamiltonianSpec, Lam) -> HamiltonianSpec:
    """Spec with ``A -> A + dLambda/dx`` (derivative from AD)."""
    f = as_field(Lam, LINE)
    A0 = spec.A

    def A(x):
        x = np.atleast_1d(x)
        d = np.array([np.real(jet(f, [xi], 1).grad[0]) for xi in x])
        return d if A0 is None else np.asarray(A0(x), float) + d

    return replace(spec, A=A)


def gauge_routes(
    spec: HamiltonianSpec,
    Lam,
    psi0: WaveFunction,
    t: float,
    dt: float | None = None,
) -> tuple[WaveFunction, WaveFunction]:
    """The two final states of the gauge theorem.

    Route a evolves ``psi0`` under ``H(A)`` and then multiplies by
    ``exp(i e Lambda / hbar c)``; route b multiplies first and evolves under
    ``H(A + grad Lambda)``.  With ``dt`` both routes use Crank-Nicolson steps,
    otherwise the exact propagator.
    """
    grid = psi0.grid
    f = as_field(Lam, LINE)
    lam_vals = np.array([np.real(f(np.array([x]))) for x in grid.x])
    phase = np.exp(1j * spec.coupling * lam_vals)
    H = hamiltonian(spec, grid)
    Hg = hamiltonian(gauge_transform(spec, f), grid)

    def evolve(h, psi):
        if dt is None:
            return evolve_exact(h, psi, t)
        return evolve_cn(h, psi, t, max(1, int(round(t / dt))))

    a = WaveFunction(phase * evolve(H, psi0).samples, grid)
    b = evolve(Hg, WaveFunction(phase * psi0.samples, grid))
    return a, b


def gauge_equivalence_check(
    spec: HamiltonianSpec,
    Lam,
    psi0: WaveFunction,
    t: float,
    dt: float | None = None,
) -> GaugeReport:
    """Compare the two routes of :func:`gauge_routes`."""
    a, b = gauge_routes(spec, Lam, psi0, t, dt)
    return GaugeReport(
        l2_gap=a.distance(b),
        density_gap=float(np.abs(a.density() - b.density()).max()),
        norm_a=a.norm(),
        norm_b=b.norm(),
    )


def expectation(op: GridOperator, psi: WaveFunction) -> complex:
    """``<psi, A psi> / <psi, psi>``."""
    num = np.vdot(psi.samples, op.matrix @ psi.samples)
    return complex(num / np.vdot(psi.samples, psi.samples))


def variance(op: GridOperator, psi: WaveFunction) -> float:
    """``E(A^2) - E(A)^2`` for a self-adjoint ``A``."""
    Apsi = op.matrix @ psi.samples
    n2 = np.vdot(psi.samples, psi.samples).real
    mean = np.vdot(psi.samples, Apsi).real / n2
    second = np.vdot(Apsi, Apsi).real / n2
    return float(second - mean**2)


def uncertainty_product(psi: WaveFunction, hbar: float = 1.0, scheme: str = "spectral") -> dict:
    """``V_X V_P`` with the exact Robertson bound ``|E([X, P])|^2 / 4`` for this grid."""
    X = position_operator(psi.grid, hbar)
    P = momentum_operator(psi.grid, hbar, scheme)
    vx, vp = variance(X, psi), variance(P, psi)
    bound = abs(expectation(commutator(X, P), psi)) ** 2 / 4
    return {"var_x": vx, "var_p": vp, "product": vx * vp, "robertson_bound": bound, "hbar2_over_4": hbar**2 / 4}


def spectrum(H: GridOperator, k: int | None = None) -> np.ndarray:
    """Lowest ``k`` eigenvalues of a self-adjoint ``H`` in ascending order."""
    lam = np.linalg.eigvalsh(H.matrix)
    return lam if k is None else lam[:k]


def ab_phase(flux: float, units: UnitSystem = NATURAL, e: float | None = None) -> float:
    """``(e / hbar c) Phi``."""
    charge = units.e if e is None else e
    return charge * flux / (units.hbar * units.c)


def ab_period(units: UnitSystem = NATURAL, e: float | None = None) -> float:
    """Flux period ``2 pi hbar c / e`` of the interference pattern."""
    charge = units.e if e is None else e
    return 2 * math.pi * units.hbar * units.c / charge


def ab_probability(a: float, b: float, flux: float, units: UnitSystem = NATURAL, e: float | None = None) -> float:
    """Two-branch detection probability ``a^2 + b^2 + 2 a b cos((e / hbar c) Phi)``."""
    if a < 0 or b < 0:
        raise ValueError("branch amplitudes must be non-negative")
    return a * a + b * b + 2 * a * b * math.cos(ab_phase(flux, units, e))


def gaussian_packet(grid: Grid1D, center: float, sigma: float, k0: float = 0.0) -> WaveFunction:
    """Normalised ``exp(-(x - c)^2 / 4 sigma^2 + i k0 x)``; ``sigma`` is the position spread."""
    x = grid.x
    psi = np.exp(-((x - center) ** 2) / (4 * sigma**2) + 1j * k0 * x)
    return WaveFunction(psi, grid).normalized()


def spectrum_to_json(values) -> str:
    return json.dumps([float(v) for v in values])

