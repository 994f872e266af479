import csv
import math

import numpy as np
import pytest

from gauge_forms import chartcalc as cc
from gauge_forms.chartcalc import SingularPointError, VectorField, euclidean
from gauge_forms.geometry import (
    GeodesicState,
    MetricField,
    Segment,
    StepRejectedError,
    christoffel,
    coordinate_rectangle,
    covariant_derivative,
    curvature_commutator,
    effective_light_speed,
    euclidean_metric,
    gaussian_curvature,
    great_circle,
    holonomy,
    holonomy_angle,
    integrate_geodesic,
    jacobi_deviation,
    lie_bracket,
    metric_jet,
    minimize_path_energy,
    octant_loop,
    parallel_transport,
    polar_metric,
    riemann,
    sectional_curvature,
    sphere_chart_curve,
    sphere_metric,
    weak_field_metric,
)

from conftest import random_polynomial

HALF_PI = math.pi / 2


def fd_christoffel(gfun, p, h=1e-5):
    """Oracle: the Christoffel formula applied to central-difference metric derivatives."""
    p = np.asarray(p, float)
    n = len(p)
    G = np.array(gfun(p), float)
    dG = np.zeros((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dG[:, :, k] = (np.array(gfun(p + e), float) - np.array(gfun(p - e), float)) / (2 * h)
    ginv = np.linalg.inv(G)
    out = np.zeros((n, n, n))
    for c in range(n):
        for m in range(n):
            for b in range(n):
                out[c, m, b] = 0.5 * sum(ginv[a, c] * (dG[a, m, b] + dG[b, a, m] - dG[m, b, a]) for a in range(n))
    return out


def random_metric(rng, n=2, scale=0.1):
    """Positive-definite polynomial metric I + scale * symmetric polynomial perturbation."""
    chart = euclidean(n)
    polys = {(i, j): random_polynomial(rng, chart, degree=3, n_terms=4) for i in range(n) for j in range(i, n)}

    def g(x):
        return [[(1.0 if i == j else 0.0) + scale * polys[min(i, j), max(i, j)].definition(x) for j in range(n)] for i in range(n)]

    return MetricField(g, n, name="random")


def test_euclidean_christoffel_zero():
    assert np.abs(christoffel(euclidean_metric(3), (0.3, 1.0, -2.0))).max() == 0


def test_sphere_christoffel_closed_form():
    phi = 0.7
    G = christoffel(sphere_metric(), (phi, 0.4))
    expected = np.zeros((2, 2, 2))
    expected[0, 1, 1] = -math.sin(phi) * math.cos(phi)
    expected[1, 0, 1] = expected[1, 1, 0] = 1 / math.tan(phi)
    np.testing.assert_allclose(G, expected, atol=1e-15)
    oracle = fd_christoffel(lambda x: [[1, 0], [0, math.sin(x[0]) ** 2]], (phi, 0.4))
    np.testing.assert_allclose(G, oracle, atol=1e-9)


def test_polar_christoffel():
    r = 1.7
    G = christoffel(polar_metric(), (r, 2.0))
    assert G[0, 1, 1] == pytest.approx(-r)
    assert G[1, 0, 1] == G[1, 1, 0] == pytest.approx(1 / r)
    with pytest.raises(SingularPointError):
        christoffel(polar_metric(), (0.0, 1.0))


def test_christoffel_random_metrics_against_oracle(rng):
    for n in (2, 3):
        g = random_metric(rng, n)
        for p in rng.uniform(-0.5, 0.5, size=(5, n)):
            G = christoffel(g, p)
            assert np.array_equal(G, np.swapaxes(G, 1, 2))
            oracle = fd_christoffel(lambda x: [[cc.value_of(e) for e in row] for row in g.g(list(x))], p)
            assert np.abs(G - oracle).max() < 1e-6 * max(1.0, np.abs(oracle).max())


def test_singular_metric_rejected():
    g = MetricField(lambda x: [[1.0, 1.0], [1.0, 1.0]], 2)
    with pytest.raises(SingularPointError):
        christoffel(g, (0, 0))
    with pytest.raises(SingularPointError):
        christoffel(sphere_metric(), (0.0, 1.0))


def test_geodesic_plane_is_straight():
    v = np.array([0.6, 0.8])
    h = integrate_geodesic(euclidean_metric(), GeodesicState([1.0, -2.0], v), 5.0, step=0.01)
    expected = np.array([1.0, -2.0]) + np.outer(h.s, v)
    assert np.abs(h.positions - expected).max() < 1e-10


def test_geodesic_polar_coordinates_is_straight():
    # start at (r, theta) = (1, 0) heading along +y: the line x = 1
    h = integrate_geodesic(polar_metric(), GeodesicState([1.0, 0.0], [0.0, 1.0]), 2.0, step=1e-3)
    r, th = h.positions.T
    assert np.abs(r * np.cos(th) - 1).max() < 1e-10
    assert np.abs(r * np.sin(th) - h.s).max() < 1e-10


def test_equator_geodesic():
    h = integrate_geodesic(sphere_metric(), GeodesicState([HALF_PI, 0.0], [0.0, 1.0]), 2 * math.pi, step=2e-3)
    assert np.abs(h.positions[:, 0] - HALF_PI).max() < 1e-8
    assert h.positions[-1, 1] == pytest.approx(2 * math.pi, abs=1e-10)


def test_geodesic_speed_conservation():
    v = np.array([0.3, 0.9 / math.sin(1.0)])
    v /= math.sqrt(v[0] ** 2 + math.sin(1.0) ** 2 * v[1] ** 2)
    h = integrate_geodesic(sphere_metric(), GeodesicState([1.0, 0.0], v), 2.5, step=2e-3, check=True)
    assert h.meta["speed2_drift"] < 1e-9
    assert h.meta["error_estimate"] < 1e-8


def test_geodesic_matches_great_circle():
    # oracle: the embedding image of a great circle through the same start and direction
    a, w, _ = great_circle([1.0, 0.0, 0.0], [0.0, 0.6, 0.8])
    curve = sphere_chart_curve(a, w)
    x0, = cc.Jet.seed([0.3], 1)
    start = curve(x0)
    p0 = np.array([c.value for c in start])
    v0 = np.array([c.grad[0] for c in start])
    h = integrate_geodesic(sphere_metric(), GeodesicState(p0, v0, 0.3), 1.5, step=1e-3)
    expected = np.array([[float(c) for c in curve(s)] for s in h.s])
    assert np.abs(h.positions - expected).max() < 1e-9


def test_step_guard_rejects_coarse_steps():
    with pytest.raises(StepRejectedError):
        integrate_geodesic(sphere_metric(), GeodesicState([1.0, 0.0], [0.5, 1.0]), 2.0, step=0.5, check=True)


def test_geodesic_agrees_with_energy_minimisation():
    g = sphere_metric()
    v = np.array([0.6, 0.8 / math.sin(1.2)])
    h = integrate_geodesic(g, GeodesicState([1.2, 0.1], v), 1.0, step=1e-3)
    n = 49
    path = minimize_path_energy(g, h.positions[0], h.positions[-1], n_interior=n)
    # the discrete minimiser is uniformly spaced in length, so vertex k sits at s = k / 50
    assert np.abs(path - h.positions[::20]).max() < 1e-4


def test_equator_transport_returns_initial_vector():
    loop = lambda s: [HALF_PI + 0 * s, s]
    X0 = np.array([0.3, 0.7])
    h = parallel_transport(sphere_metric(), X0, loop, (0, 2 * math.pi), step=5e-3)
    np.testing.assert_allclose(h.vectors[-1], X0, atol=1e-8)


def test_octant_transport_rotates_by_right_angle():
    g = sphere_metric()
    loop = octant_loop()
    start = np.array([float(c) for c in loop[0].curve(0.0)])
    x0, = cc.Jet.seed([0.0], 1)
    T0 = np.array([c.grad[0] for c in loop[0].curve(x0)])
    X = T0
    for seg in loop:
        h = parallel_transport(g, X, seg.curve, (seg.s0, seg.s1), step=2e-3)
        assert h.meta["norm_drift"] < 1e-9
        X = h.vectors[-1]
    # the carried vector ends at a right angle to the initial tangent
    assert abs(g.inner(start, X, T0)) < 1e-9
    assert g.norm(start, X) == pytest.approx(1.0, abs=1e-9)


def test_metric_compatibility_along_transport(rng):
    g = random_metric(rng)
    curve = lambda s: [0.3 * cc.cos(s), 0.2 * cc.sin(2 * s)]
    X0, Y0 = rng.normal(size=2), rng.normal(size=2)
    hx = parallel_transport(g, X0, curve, (0, 3), step=3e-3)
    hy = parallel_transport(g, Y0, curve, (0, 3), step=3e-3)
    ip = [g.inner(p, x, y) for p, x, y in zip(hx.positions, hx.vectors, hy.vectors)]
    assert np.ptp(ip) < 1e-9


def test_holonomy_octant_and_plane():
    assert holonomy_angle(sphere_metric(), octant_loop(), step=2e-3) == pytest.approx(HALF_PI, abs=1e-6)
    assert abs(holonomy_angle(euclidean_metric(), coordinate_rectangle((0, 0), (1, 2)), step=0.05)) < 1e-10
    assert abs(holonomy_angle(polar_metric(), coordinate_rectangle((1, 0), (2, 1)), step=5e-3)) < 1e-10


def test_holonomy_reversed_loop_changes_sign():
    loop = [Segment(lambda s, seg=seg: seg.curve(seg.s1 + seg.s0 - s), seg.s0, seg.s1) for seg in reversed(octant_loop())]
    assert holonomy_angle(sphere_metric(), loop, step=2e-3) == pytest.approx(-HALF_PI, abs=1e-6)


def test_holonomy_equals_curvature_integral_and_is_additive():
    g = sphere_metric()
    a, b = (1.0, 0.0), (1.6, 0.5)
    mid = 1.3
    whole = holonomy_angle(g, coordinate_rectangle(a, b), step=2e-3)
    lower = holonomy_angle(g, coordinate_rectangle(a, (mid, b[1])), step=2e-3)
    upper = holonomy_angle(g, coordinate_rectangle((mid, a[1]), b), step=2e-3)
    area = (b[1] - a[1]) * (math.cos(a[0]) - math.cos(b[0]))
    assert whole == pytest.approx(area, abs=1e-9)
    assert whole == pytest.approx(lower + upper, abs=1e-8)


def test_small_loop_ratio_richardson():
    g = sphere_metric()
    ratios = []
    eps_list = [0.2, 0.1, 0.05]
    for eps in eps_list:
        loop = coordinate_rectangle((HALF_PI - eps / 2, 0.0), (HALF_PI + eps / 2, eps))
        ratios.append(holonomy_angle(g, loop, step=eps / 40) / eps**2)
    errs = np.abs(np.array(ratios) - 1)
    slope = np.polyfit(np.log(eps_list), np.log(errs), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.05)
    rich = [(4 * ratios[i + 1] - ratios[i]) / 3 for i in range(2)]
    assert abs(rich[-1] - 1) < 1e-5


def test_jacobi_on_sphere_and_plane():
    g = sphere_metric()
    theta = 0.1
    J = jacobi_deviation(g, GeodesicState([HALF_PI, 0.0], [0.0, 1.0]), 0.0, theta, math.pi - 0.1, step=2e-3)
    assert np.abs(J.y - theta * np.sin(J.s)).max() < 1e-6
    K = J.recovered_curvature()
    assert np.abs(K[50:-50] - 1).max() < 1e-5
    P = jacobi_deviation(euclidean_metric(), GeodesicState([0, 0], [1, 0]), 0.5, 0.25, 2.0, step=0.01)
    np.testing.assert_allclose(P.y, 0.5 + 0.25 * P.s, atol=1e-13)


def test_jacobi_radius_two_sphere():
    g = sphere_metric(2.0)
    J = jacobi_deviation(g, GeodesicState([HALF_PI, 0.0], [0.0, 0.5]), 0.0, 0.2, 5.0, step=5e-3)
    assert np.abs(J.y - 0.2 * 2 * np.sin(J.s / 2)).max() < 1e-8
    assert J.K == pytest.approx(np.full_like(J.K, 0.25))


def test_curvature_flat_metrics_vanish(rng):
    const = MetricField(lambda x: [[2.0, 0.3], [0.3, 1.5]], 2)
    for g in (const, euclidean_metric(), polar_metric()):
        for _ in range(3):
            p = (rng.uniform(0.5, 2), rng.uniform(-1, 1))
            v = rng.normal(size=2)
            assert np.abs(curvature_commutator(g, [1, 0], [0, 1], v, p)).max() < 1e-10


def test_curvature_antisymmetry(rng):
    g = random_metric(rng)
    p = rng.uniform(-0.3, 0.3, size=2)
    X, Y, v = rng.normal(size=(3, 2))
    a = curvature_commutator(g, X, Y, v, p)
    b = curvature_commutator(g, Y, X, v, p)
    assert np.abs(a + b).max() < 1e-12


def test_sphere_sectional_curvature():
    g = sphere_metric()
    for p in [(0.4, 0.0), (1.0, 2.0), (2.5, -1.0)]:
        assert sectional_curvature(g, p, [1, 0], [0, 1]) == pytest.approx(1.0, abs=1e-6)
        assert sectional_curvature(g, p, [0.3, 0.7], [-1.0, 0.2]) == pytest.approx(1.0, abs=1e-6)
        assert gaussian_curvature(g, p) == pytest.approx(1.0, abs=1e-12)
    # the opposite slot ordering gives the opposite sign
    R = curvature_commutator(g, [1, 0], [0, 1], [1, 0], (1.0, 0.0))
    assert R @ g.matrix((1.0, 0.0)) @ [0, 1] / math.sin(1.0) ** 2 == pytest.approx(-1.0)


def test_commutator_matches_riemann_formula(rng):
    for n in (2, 3):
        g = random_metric(rng, n)
        p = rng.uniform(-0.3, 0.3, size=n)
        R = riemann(g, p)
        for _ in range(3):
            X, Y, v = rng.normal(size=(3, n))
            got = curvature_commutator(g, X, Y, v, p)
            np.testing.assert_allclose(got, np.einsum("rsmn,s,m,n->r", R, v, X, Y), atol=1e-10)


def test_commutator_with_noncommuting_fields(rng):
    g = random_metric(rng)
    p = rng.uniform(-0.3, 0.3, size=2)
    chart = euclidean(2)
    X = VectorField([random_polynomial(rng, chart, 2, 3) for _ in range(2)], chart)
    Y = VectorField([random_polynomial(rng, chart, 2, 3) for _ in range(2)], chart)
    v = rng.normal(size=2)
    got = curvature_commutator(g, X, Y, v, p)
    # tensoriality: only the values of X and Y at p matter
    np.testing.assert_allclose(got, np.einsum("rsmn,s,m,n->r", riemann(g, p), v, X(p), Y(p)), atol=1e-10)


def test_covariant_derivative_leibniz_and_torsion(rng):
    g = random_metric(rng)
    chart = euclidean(2)
    p = rng.uniform(-0.3, 0.3, size=2)
    f = random_polynomial(rng, chart)
    v = VectorField([random_polynomial(rng, chart) for _ in range(2)], chart)
    X = rng.normal(size=2)
    fv = VectorField([f * c for c in v.components], chart)
    lhs = covariant_derivative(g, fv, X, p)
    rhs = (cc.gradient(f, p) @ X) * v(p) + f(p) * covariant_derivative(g, v, X, p)
    assert np.abs(lhs - rhs).max() < 1e-10
    Xf = VectorField([random_polynomial(rng, chart) for _ in range(2)], chart)
    Yf = VectorField([random_polynomial(rng, chart) for _ in range(2)], chart)
    torsion = covariant_derivative(g, Yf, Xf, p) - covariant_derivative(g, Xf, Yf, p) - lie_bracket(Xf, Yf, 2)(p)
    assert np.abs(torsion).max() < 1e-10
    assert np.abs(covariant_derivative(euclidean_metric(), [1.0, 2.0], X, p)).max() == 0


def test_weak_field_metric_basics():
    g0 = weak_field_metric(0.0)
    np.testing.assert_array_equal(g0.matrix((0, 1, 2, 3)), np.diag([-1.0, 1, 1, 1]))
    g = weak_field_metric(lambda x: 0.01 + 0 * x[1])
    assert effective_light_speed(g, (0, 0, 0, 0)) == pytest.approx(0.98995, abs=1e-5)
    for phi in (1e-2, 1e-3):
        c = effective_light_speed(weak_field_metric(lambda x, phi=phi: phi + 0 * x[1]), (0, 0, 0, 0))
        assert (c - (1 - phi)) / phi**2 == pytest.approx(-0.5, abs=2 * phi)


def slow_particle_acceleration(g00_of_phi, grad=(1e-3, 0.0, 0.0)):
    a = np.asarray(grad)
    phi = lambda x: a[0] * x[1] + a[1] * x[2] + a[2] * x[3]
    g = MetricField(lambda x: [[g00_of_phi(phi(x)), 0, 0, 0], [0, 1.0, 0, 0], [0, 0, 1.0, 0], [0, 0, 0, 1.0]], 4, (-1, 1, 1, 1))
    u0 = 1 / math.sqrt(-g00_of_phi(0.0))
    h = integrate_geodesic(g, GeodesicState([0, 0, 0, 0], [u0, 0, 0, 0]), 1.0, step=1e-2)
    t, x = h.positions[:, 0], h.positions[:, 1:]
    coeff = np.polyfit(t, x, 2)
    return 2 * coeff[0], a


def test_weak_field_geodesic_follows_half_gradient_of_g00():
    # with g00 = 2 phi - 1 the geodesic acceleration is grad(g00)/2 = +grad(phi)
    acc, a = slow_particle_acceleration(lambda f: 2 * f - 1)
    np.testing.assert_allclose(acc, a, rtol=1e-2, atol=1e-9)
    # the Newtonian sign -grad(phi) corresponds to g00 = -(1 + 2 phi)
    acc, a = slow_particle_acceleration(lambda f: -1 - 2 * f)
    np.testing.assert_allclose(acc, -a, rtol=1e-2, atol=1e-9)


def test_history_csv(tmp_path):
    h = integrate_geodesic(euclidean_metric(), GeodesicState([0, 0], [1, 0]), 1.0, step=0.1)
    h.to_csv(tmp_path / "g.csv")
    rows = list(csv.reader(open(tmp_path / "g.csv")))
    assert rows[0] == ["s", "x0", "x1", "v0", "v1"] and len(rows) == 12


def test_metric_jet_symmetry_check():
    g = MetricField(lambda x: [[1.0, x[0]], [0.0, 1.0]], 2)
    with pytest.raises(ValueError):
        metric_jet(g, (1.0, 0.0), 1)


def test_holonomy_result_matches_angle_and_exports(tmp_path):
    res = holonomy(euclidean_metric(), coordinate_rectangle((0, 0), (1, 1)), step=0.1)
    assert len(res.segments) == 4 and abs(res.angle) < 1e-12
    assert res.angle == holonomy_angle(euclidean_metric(), coordinate_rectangle((0, 0), (1, 1)), step=0.1)
    res.to_csv(tmp_path / "t.csv")
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["segment", "s", "x0", "x1", "v0", "v1"] and len(rows) == 1 + 4 * 11
