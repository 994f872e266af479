import json
import math

import numpy as np
import pytest

from gauge_forms import chartcalc as cc
from gauge_forms.chartcalc import GAUSSIAN_CGS, NATURAL, UnitSystem
from gauge_forms.quantum import (
    DENSE_CAP,
    Grid1D,
    GridOperator,
    HamiltonianSpec,
    WaveFunction,
    ab_period,
    ab_probability,
    commutator,
    commutator_xp,
    evolve_cn,
    evolve_exact,
    expectation,
    gauge_equivalence_check,
    gaussian_packet,
    hamiltonian,
    momentum_operator,
    path_integral_step,
    position_operator,
    spectrum,
    spectrum_to_json,
    uncertainty_product,
    variance,
)


def random_state(rng, grid, smooth=True):
    if not smooth:
        return WaveFunction(rng.normal(size=grid.N) + 1j * rng.normal(size=grid.N), grid).normalized()
    x = grid.x
    lo, hi = x[0], x[-1]
    psi = np.zeros(grid.N, complex)
    for _ in range(3):
        c = rng.uniform(lo + 0.3 * (hi - lo), hi - 0.3 * (hi - lo))
        s = rng.uniform(0.3, 1.0)
        psi += rng.normal() * np.exp(-((x - c) ** 2) / (4 * s * s) + 1j * rng.uniform(-3, 3) * x)
    return WaveFunction(psi, grid).normalized()


def exact_free(psi, t, m=1.0, hbar=1.0):
    """Oracle: continuum free propagator applied spectrally on a periodic grid."""
    k = 2 * np.pi * np.fft.fftfreq(psi.grid.N, psi.grid.dx)
    return WaveFunction(np.fft.ifft(np.exp(-1j * hbar * t * k**2 / (2 * m)) * np.fft.fft(psi.samples)), psi.grid)


GRID = Grid1D.spanning(-10, 10, 256)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid1D(4, 0.1)
    with pytest.raises(ValueError):
        Grid1D(16, 0.0)
    with pytest.raises(ValueError):
        Grid1D(16, 0.1, boundary="open")
    with pytest.raises(ValueError):
        WaveFunction(np.zeros(3), GRID)


def test_momentum_plane_wave_symbol():
    for n in (1, 5, 20):
        k = 2 * np.pi * n / GRID.extent
        psi = WaveFunction(np.exp(1j * k * GRID.x), GRID)
        out = momentum_operator(GRID)(psi).samples
        np.testing.assert_allclose(out, math.sin(k * GRID.dx) / GRID.dx * psi.samples, atol=1e-12)
    psi = WaveFunction(np.ones(GRID.N), GRID)
    assert np.abs(momentum_operator(GRID)(psi).samples).max() == 0


def test_momentum_self_adjoint(rng):
    P = momentum_operator(GRID)
    for _ in range(10):
        a, b = random_state(rng, GRID, False), random_state(rng, GRID, False)
        assert abs(P(a).inner(b) - a.inner(P(b))) < 1e-12
    assert P.hermiticity_defect() == 0
    assert momentum_operator(GRID, scheme="spectral").hermiticity_defect() < 1e-12
    with pytest.raises(ValueError):
        momentum_operator(Grid1D(16, 0.1, boundary="box"), scheme="spectral")


def test_spectral_momentum_exact_on_modes():
    k = 2 * np.pi * 7 / GRID.extent
    psi = WaveFunction(np.exp(1j * k * GRID.x), GRID)
    out = momentum_operator(GRID, scheme="spectral")(psi).samples
    np.testing.assert_allclose(out, k * psi.samples, atol=1e-10)


def test_commutator_xp_stencil_and_order():
    errs = []
    for N in (128, 256, 512):
        g = Grid1D.spanning(-10, 10, N)
        psi = gaussian_packet(g, 0.0, 1.0)
        c = commutator_xp(g, psi)
        inner = slice(2, N - 2)
        s = psi.samples
        closed = 1j * (np.roll(s, -1) + np.roll(s, 1)) / 2
        np.testing.assert_allclose(c[inner], closed[inner], atol=1e-12)
        errs.append(np.abs(c - 1j * s).max())
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders.min() >= 1.9


def test_trivial_commutators():
    X, P = position_operator(GRID), momentum_operator(GRID)
    assert np.abs(commutator(X, X).matrix).max() == 0
    assert np.abs(commutator(P, P).matrix).max() == 0


def test_commutator_of_self_adjoint_is_anti_self_adjoint(rng):
    A = rng.normal(size=(GRID.N, GRID.N)) + 1j * rng.normal(size=(GRID.N, GRID.N))
    B = rng.normal(size=(GRID.N, GRID.N)) + 1j * rng.normal(size=(GRID.N, GRID.N))
    C = commutator(GridOperator(A + A.conj().T, GRID), GridOperator(B + B.conj().T, GRID)).matrix
    assert np.abs(C + C.conj().T).max() < 1e-12 * np.abs(C).max()


def test_free_hamiltonian_symbol():
    H = hamiltonian(HamiltonianSpec(m=0.7), GRID)
    k = GRID.wavenumbers()
    expected = np.sort(2 * (1 - np.cos(k * GRID.dx)) / (2 * 0.7 * GRID.dx**2))
    np.testing.assert_allclose(spectrum(H), expected, atol=1e-10)


def test_hamiltonian_hermitian_with_potentials():
    spec = HamiltonianSpec(V=lambda x: 0.1 * x**2, A=lambda x: np.sin(x), phi=lambda x: 0.2 * np.cos(x), e=0.8)
    H = hamiltonian(spec, GRID)
    assert H.hermiticity_defect() < 1e-12
    lam = np.linalg.eigvals(H.matrix)
    assert np.abs(lam.imag).max() < 1e-10


def test_constant_A_reduces_to_shifted_momentum():
    # (P - a)^2/2m on plane waves: stencil symbol with k shifted by the link phase
    a = 2 * np.pi * 3 / GRID.extent
    H = hamiltonian(HamiltonianSpec(A=lambda x: a + 0 * x), GRID)
    for n in (0, 4, 9):
        k = 2 * np.pi * n / GRID.extent
        psi = WaveFunction(np.exp(1j * k * GRID.x), GRID)
        sym = (1 - math.cos((k - a) * GRID.dx)) / GRID.dx**2
        np.testing.assert_allclose(H(psi).samples, sym * psi.samples, atol=1e-10)


def test_box_spectrum_gaps():
    g = Grid1D.spanning(0, 1, 512, boundary="box")
    lam = spectrum(hamiltonian(HamiltonianSpec(), g), 6)
    assert np.all(np.diff(lam) > 0)
    E1 = math.pi**2 / 2
    for n, m in [(2, 1), (3, 1), (5, 2), (6, 4)]:
        assert (lam[n - 1] - lam[m - 1]) / (E1 * (n * n - m * m)) == pytest.approx(1.0, rel=0.01)


def test_evolve_exact_examples():
    spec = HamiltonianSpec(V=lambda x: 0.05 * x**2)
    H = hamiltonian(spec, GRID)
    psi = gaussian_packet(GRID, 1.0, 0.8, 0.5)
    assert np.array_equal(evolve_exact(H, psi, 0.0).samples, psi.samples)
    lam, U = np.linalg.eigh(H.matrix)
    eig = WaveFunction(U[:, 3], GRID)
    np.testing.assert_allclose(evolve_exact(H, eig, 2.3).samples, np.exp(-2.3j * lam[3]) * eig.samples, atol=1e-10)
    shifted = evolve_exact(H + 5.0, psi, 1.7).samples
    np.testing.assert_allclose(shifted, np.exp(-1.7j * 5.0) * evolve_exact(H, psi, 1.7).samples, atol=1e-10)


def test_evolve_exact_fft_path_and_cap():
    g = Grid1D.spanning(-20, 20, 4096)
    psi = gaussian_packet(g, 0.0, 1.0, 2.0)
    H = hamiltonian(HamiltonianSpec(), g)
    out = evolve_exact(H, psi, 0.5)
    k = g.wavenumbers()
    symbol = (1 - np.cos(k * g.dx)) / g.dx**2
    np.testing.assert_allclose(out.samples, np.fft.ifft(np.exp(-0.5j * symbol) * np.fft.fft(psi.samples)), atol=1e-12)
    Hv = hamiltonian(HamiltonianSpec(V=lambda x: x**2), g)
    with pytest.raises(ValueError):
        evolve_exact(Hv, psi, 0.5)
    assert DENSE_CAP == 2048


def test_unitarity_of_both_propagators(rng):
    spec = HamiltonianSpec(V=lambda x: 0.05 * x**2, A=lambda x: 0.3 * np.cos(2 * np.pi * x / 20))
    H = hamiltonian(spec, GRID)
    a, b = random_state(rng, GRID), random_state(rng, GRID)
    for evolve in (lambda p: evolve_exact(H, p, 3.0), lambda p: evolve_cn(H, p, 3.0, 1000)):
        ea, eb = evolve(a), evolve(b)
        assert abs(ea.norm() - 1) < 1e-10
        assert abs(ea.inner(eb) - a.inner(b)) < 1e-9


def test_cn_agrees_with_exact():
    g = Grid1D.spanning(-8, 8, 128)
    H = hamiltonian(HamiltonianSpec(V=lambda x: 0.2 * x**2), g)
    psi = gaussian_packet(g, 0.5, 1.0, 1.0)
    t = 0.05
    assert evolve_cn(H, psi, t, int(round(t / 1e-4))).distance(evolve_exact(H, psi, t)) < 1e-6


def test_free_gaussian_spreading():
    g = Grid1D.spanning(-40, 40, 2048)
    sigma, t = 1.0, 4.0
    psi = gaussian_packet(g, 0.0, sigma)
    out = evolve_cn(hamiltonian(HamiltonianSpec(), g), psi, t, 400)
    width = math.sqrt(variance(position_operator(g), out))
    assert width == pytest.approx(sigma * math.sqrt(1 + (t / (2 * sigma**2)) ** 2), rel=1e-3)


def test_path_integral_first_order_decay():
    g = Grid1D.spanning(-3, 3, 1200)
    psi = gaussian_packet(g, 0.0, 0.25, 5.0)
    spec = HamiltonianSpec()
    errs = [path_integral_step(spec, psi, eps).distance(exact_free(psi, eps)) for eps in (1e-3, 5e-4, 2.5e-4)]
    assert errs[0] <= 1e-3
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 1) < 0.25)
    # the grid propagator is an equally good reference at this resolution
    H = hamiltonian(spec, g)
    assert path_integral_step(spec, psi, 1e-3).distance(evolve_exact(H, psi, 1e-3)) <= 1e-3


def test_path_integral_identity_limit():
    g = Grid1D.spanning(-2, 2, 16000)
    psi = gaussian_packet(g, 0.0, 0.25, 5.0)
    assert path_integral_step(HamiltonianSpec(), psi, 1e-6).distance(psi) < 1e-4


def test_path_integral_constant_potential_phase():
    g = Grid1D.spanning(-3, 3, 1200)
    psi = gaussian_packet(g, 0.0, 0.25, 5.0)
    eps, V0 = 1e-3, 3.7
    free = path_integral_step(HamiltonianSpec(), psi, eps).samples
    shifted = path_integral_step(HamiltonianSpec(V=lambda x: V0 + 0 * x), psi, eps).samples
    np.testing.assert_allclose(shifted, np.exp(-1j * eps * V0) * free, atol=1e-15)


def test_path_integral_errors():
    g = Grid1D.spanning(-3, 3, 1200)
    psi = gaussian_packet(g, 0.0, 0.25)
    with pytest.raises(ValueError):
        path_integral_step(HamiltonianSpec(), psi, 1.0)
    with pytest.raises(ValueError):
        path_integral_step(HamiltonianSpec(), psi, 1e-7)
    with pytest.raises(ValueError):
        path_integral_step(HamiltonianSpec(A=lambda x: x), psi, 1e-3)


def test_gauge_equivalence_routes():
    spec = HamiltonianSpec(V=lambda x: 0.05 * x**2)
    psi = gaussian_packet(GRID, -1.0, 0.8, 1.0)
    r = gauge_equivalence_check(spec, 2.5, psi, 1.0)
    assert r.density_gap < 1e-12
    alpha = 2 * np.pi * 3 / GRID.extent
    r = gauge_equivalence_check(spec, lambda x: alpha * x[0], psi, 1.0, dt=1e-3)
    assert r.density_gap < 1e-8 and r.l2_gap < 1e-8
    L = GRID.extent
    r = gauge_equivalence_check(spec, lambda x: 0.4 * cc.sin(2 * np.pi * x[0] / L) ** 2, psi, 1.0)
    assert r.density_gap < 1e-8


def test_local_phase_preserves_inner_products(rng):
    a, b = random_state(rng, GRID, False), random_state(rng, GRID, False)
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi, size=GRID.N))
    pa, pb = WaveFunction(phase * a.samples, GRID), WaveFunction(phase * b.samples, GRID)
    assert abs(pa.inner(pb) - a.inner(b)) < 1e-12


def test_expectation_and_variance():
    H = hamiltonian(HamiltonianSpec(V=lambda x: 0.1 * x**2), GRID)
    lam, U = np.linalg.eigh(H.matrix)
    eig = WaveFunction(U[:, 2], GRID)
    assert variance(H, eig) < 1e-10
    assert expectation(H, eig).real == pytest.approx(lam[2])
    ident = GridOperator(3.5 * np.eye(GRID.N), GRID)
    assert expectation(ident, gaussian_packet(GRID, 0, 1)) == pytest.approx(3.5)


def test_uncertainty_random_states(rng):
    g = Grid1D.spanning(-12, 12, 384)
    for _ in range(100):
        u = uncertainty_product(random_state(rng, g))
        assert u["product"] - u["hbar2_over_4"] > -1e-12
    for _ in range(20):
        u = uncertainty_product(random_state(rng, g, smooth=False), scheme="central")
        assert u["product"] - u["robertson_bound"] > -1e-12


def test_gaussian_saturates_uncertainty():
    g = Grid1D.spanning(-12, 12, 512)
    for sigma, k0 in ((0.7, 0.0), (1.3, 2.0)):
        u = uncertainty_product(gaussian_packet(g, 0.4, sigma, k0))
        assert u["product"] == pytest.approx(0.25, rel=1e-6)
        assert u["var_x"] == pytest.approx(sigma**2, rel=1e-9)


def test_probability_completeness(rng):
    H = hamiltonian(HamiltonianSpec(V=lambda x: 0.1 * x**2), GRID)
    _, U = np.linalg.eigh(H.matrix)
    basis = U / math.sqrt(GRID.dx)
    phi = random_state(rng, GRID, False)
    probs = np.abs(basis.conj().T @ phi.samples * GRID.dx) ** 2
    assert probs.sum() == pytest.approx(phi.norm() ** 2, abs=1e-8)


def test_spectrum_gap_invariance():
    H = hamiltonian(HamiltonianSpec(V=lambda x: 0.1 * x**2), GRID)
    a, b = spectrum(H, 10), spectrum(H + 5.0, 10)
    assert np.abs(np.diff(a) - np.diff(b)).max() < 1e-10
    assert json.loads(spectrum_to_json(a)) == [float(v) for v in a]


def test_aharonov_bohm_law():
    P = ab_period()
    assert P == pytest.approx(2 * math.pi, rel=1e-12)
    assert ab_probability(0.6, 0.9, 0.0) == pytest.approx(1.5**2)
    assert ab_probability(0.7, 0.7, P / 2) == pytest.approx(0.0, abs=1e-15)
    for flux in (0.3, 1.7, 4.0):
        assert ab_probability(0.5, 0.8, flux + P) == pytest.approx(ab_probability(0.5, 0.8, flux), abs=1e-12)
    assert ab_probability(1, 1, 0.9) == pytest.approx(2 + 2 * math.cos(0.9))
    with pytest.raises(ValueError):
        ab_probability(-1, 1, 0.0)


def test_aharonov_bohm_gaussian_units():
    P = ab_period(GAUSSIAN_CGS)
    assert P == pytest.approx(4.135e-7, rel=1e-3)
    units = UnitSystem(hbar=1.0545718e-27, c=2.99792458e10, e=4.8032047e-10, mode="gaussian")
    assert ab_period(units) == pytest.approx(P, rel=1e-6)


def test_wavefunction_csv(tmp_path):
    psi = gaussian_packet(GRID, 0, 1)
    psi.to_csv(tmp_path / "psi.csv")
    rows = open(tmp_path / "psi.csv").read().splitlines()
    assert rows[0] == "x,re,im,density" and len(rows) == GRID.N + 1
