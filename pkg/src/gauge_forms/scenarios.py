"""Named verification scenarios run by the command-line harness.

Each scenario takes its parameters, a seed and an output directory, writes
its CSV series there and returns a :class:`ScenarioResult`.  Parameters are
plain JSON scalars; the defaults below are what ``verify-all`` runs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import chartcalc as cc
from .chartcalc import GAUSSIAN_CGS, MINKOWSKI, NATURAL, ScalarField

__all__ = ["Check", "ScenarioResult", "Scenario", "SCENARIOS", "ConfigError", "parse_flux"]


class ConfigError(ValueError):
    """A scenario configuration that cannot be run."""


@dataclass
class Check:
    """One comparison.

    ``mode`` is ``"abs"`` (``|measured - expected| <= tolerance``), ``"rel"``
    (the same, scaled by ``|expected|``), ``"bound"`` (``measured <= tolerance``,
    with ``expected`` recorded as 0) or ``"flag"`` (a boolean that must be true).
    """

    name: str
    measured: float
    expected: float
    tolerance: float
    mode: str = "abs"

    def __post_init__(self):
        if self.mode not in ("abs", "rel", "bound", "flag"):
            raise ValueError(f"unknown check mode {self.mode!r}")
        cast = bool if self.mode == "flag" else float
        self.measured, self.expected = cast(self.measured), cast(self.expected)
        self.tolerance = float(self.tolerance)

    @property
    def passed(self) -> bool:
        m, e, tol = self.measured, self.expected, self.tolerance
        if self.mode == "flag":
            return bool(m)
        if not math.isfinite(m):
            return False
        if self.mode == "bound":
            return bool(m <= tol)
        if self.mode == "rel":
            return bool(abs(m - e) <= tol * abs(e))
        return bool(abs(m - e) <= tol)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "measured": self.measured,
            "expected": self.expected,
            "tolerance": self.tolerance,
            "mode": self.mode,
            "passed": self.passed,
        }


def bound(name: str, measured: float, tol: float) -> Check:
    return Check(name, float(measured), 0.0, tol, "bound")


def flag(name: str, value: bool) -> Check:
    return Check(name, bool(value), True, 0.0, "flag")


@dataclass
class ScenarioResult:
    checks: list[Check]
    observations: dict = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Scenario:
    name: str
    run: Callable
    defaults: dict
    summary: str


def _write_csv(out: Path, name: str, header: list[str], rows, artifacts: list[str]) -> None:
    with open(out / name, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if not isinstance(x, (str, int)) else x for x in row])
    artifacts.append(name)


# ---------------------------------------------------------------------------
# electromagnetism


def maxwell_vacuum(params, seed, out: Path) -> ScenarioResult:
    from .exterior import d
    from .maxwell import (
        SourceDensity,
        assemble_F,
        default_lattice,
        inhomogeneous_form,
        monopole_fixture,
        plane_wave,
    )

    kind = params["field"]
    if kind == "plane-wave":
        em = plane_wave(params["E0"], params["sign"])
    elif kind == "monopole":
        em = monopole_fixture()
    else:
        raise ConfigError(f"field must be 'plane-wave' or 'monopole', not {kind!r}")
    F = assemble_F(em)
    pts = default_lattice(params["extent"], params["per_axis"])
    dF, dstarF = d(F), inhomogeneous_form(F, SourceDensity.vacuum())
    # the purely spatial 3-form component carries the divergence law, the
    # components with a dt factor carry the evolution law
    laws = {
        "faraday": (dF, lambda k: 0 in k),
        "div_b": (dF, lambda k: 0 not in k),
        "gauss": (dstarF, lambda k: 0 not in k),
        "ampere_maxwell": (dstarF, lambda k: 0 in k),
    }
    rows, worst = [], dict.fromkeys(laws, 0.0)
    for p in pts:
        row = list(p)
        for law, (form, pick) in laws.items():
            r = max((abs(c(p)) for k, c in form.terms.items() if pick(k)), default=0.0)
            worst[law] = max(worst[law], r)
            row.append(r)
        rows.append(row)
    artifacts: list[str] = []
    _write_csv(out, "residuals.csv", ["t", "x", "y", "z", *laws], rows, artifacts)
    checks = [bound(f"{law}_residual", worst[law], params["tol"]) for law in laws]
    return ScenarioResult(checks, {"field": kind, "lattice_points": len(pts)}, artifacts)


def coulomb_divergence(params, seed, out: Path) -> ScenarioResult:
    from .maxwell import radial_divergence_test

    exact = radial_divergence_test(0.0, seed=seed)
    pert = radial_divergence_test(params["p"], seed=seed)
    artifacts: list[str] = []
    _write_csv(
        out,
        "divergence.csv",
        ["r", "div_inverse_square", "div_perturbed", "expected_perturbed"],
        zip(pert.radii, exact.numeric, pert.numeric, pert.closed_form),
        artifacts,
    )
    checks = [
        bound("inverse_square_divergence", exact.max_abs_error, params["tol_zero"]),
        bound("perturbed_relative_error", pert.max_rel_error, params["tol_rel"]),
        flag("perturbed_divergence_nonzero", min(abs(x) for x in pert.numeric) > 0),
    ]
    return ScenarioResult(checks, {"p": params["p"], "radii": len(pert.radii)}, artifacts)


def shielding(params, seed, out: Path) -> ScenarioResult:
    from .maxwell import laplace_checks, laplace_solve, shielded_cavity

    n = params["n"]
    if n < 16:
        raise ConfigError("shielding needs n >= 16")
    vals, fixed, cavity = shielded_cavity(n, shell=(n * 5 // 16, n * 11 // 16))
    res = laplace_solve(vals, fixed, omega=params["omega"], tol=params["tol_relax"])
    info = laplace_checks(res, cavity)
    scale = float(np.abs(vals[fixed]).max())
    artifacts: list[str] = []
    _write_csv(
        out,
        "potential.csv",
        ["i", "j", "phi", "fixed", "cavity"],
        ((i, j, res.phi[i, j], int(fixed[i, j]), int(cavity[i, j])) for i in range(n) for j in range(n)),
        artifacts,
    )
    checks = [
        bound("cavity_field_over_scale", info["cavity_field_max"] / scale, params["tol_field"]),
        flag("max_principle", info["max_principle"]),
        bound("mean_value_residual", info["mean_value_residual"], 10 * params["tol_relax"]),
    ]
    return ScenarioResult(checks, {"iterations": int(res.iterations), "boundary_scale": scale}, artifacts)


# ---------------------------------------------------------------------------
# relativity and mechanics


def relativity_group(params, seed, out: Path) -> ScenarioResult:
    from .relativity import Boost, FourVector, boost_apply, compose, interval2

    rng = np.random.default_rng(seed)
    light = max(abs(compose(1.0, v) - 1.0) for v in np.linspace(-0.99, 0.99, 199))
    triples = rng.uniform(-0.999, 0.999, size=(params["triples"], 3))
    assoc, rows = 0.0, []
    for k, (u, v, w) in enumerate(triples):
        left, right = compose(compose(u, v), w), compose(u, compose(v, w))
        assoc = max(assoc, abs(left - right))
        if k < 200:
            rows.append((u, v, w, left, right))
    worst = 0.0
    for _ in range(params["boosts"]):
        a, b = (FourVector(tuple(rng.normal(size=4))) for _ in range(2))
        B = Boost(rng.uniform(-0.99, 0.99))
        s0 = interval2(a, b)
        s1 = interval2(boost_apply(B, a), boost_apply(B, b))
        scale = float(np.sum((b.array() - a.array()) ** 2))
        worst = max(worst, abs(s1 - s0) / scale)
    artifacts: list[str] = []
    _write_csv(out, "associativity.csv", ["u", "v", "w", "uv_w", "u_vw"], rows, artifacts)
    checks = [
        bound("light_speed_invariance", light, params["tol_light"]),
        bound("associativity", assoc, params["tol_assoc"]),
        bound("interval_invariance_relative", worst, params["tol_interval"]),
    ]
    return ScenarioResult(checks, {"triples": params["triples"], "boosts": params["boosts"]}, artifacts)


def noether_orbit(params, seed, out: Path) -> ScenarioResult:
    from .mechanics import energy, integrate_lagrangian, kepler_lagrangian, noether_charge

    L = kepler_lagrangian(params["m"], params["k"])
    ics = ([params["r0"], 0.0], [params["rdot0"], params["thetadot0"]])
    E0 = energy(L, *ics)
    if E0 >= 0:
        raise ConfigError("initial conditions must give a bound orbit (negative energy)")
    a = -params["k"] / (2 * E0)
    T = 2 * math.pi * math.sqrt(params["m"] * a**3 / params["k"])
    path = integrate_lagrangian(L, ics, (0.0, params["periods"] * T), drift_tol=params["tol_energy"])
    stride = max(1, len(path.times) // 2000)
    Lz = np.array([noether_charge(L, lambda q: [0.0, 1.0], path, t) for t in path.times[::stride]])
    drift = float(np.abs(Lz - Lz[0]).max() / abs(Lz[0]))
    path.to_csv(out / "trajectory.csv")
    checks = [
        bound("angular_momentum_drift", drift, params["tol_momentum"]),
        bound("energy_drift", path.meta["energy_drift"], params["tol_energy"]),
    ]
    obs = {"period": T, "step": path.meta["step"], "angular_momentum": float(Lz[0])}
    return ScenarioResult(checks, obs, ["trajectory.csv"])


# ---------------------------------------------------------------------------
# geometry


def sphere_holonomy(params, seed, out: Path) -> ScenarioResult:
    from .geometry import coordinate_rectangle, euclidean_metric, holonomy, octant_loop, sphere_metric

    loop = params["loop"]
    if loop == "octant":
        g, segs, expected, tol = sphere_metric(), octant_loop(), math.pi / 2, params["tol"]
    elif loop == "plane":
        g, segs, expected, tol = euclidean_metric(), coordinate_rectangle((0.0, 0.0), (1.0, 2.0)), 0.0, params["tol_plane"]
    else:
        raise ConfigError(f"loop must be 'octant' or 'plane', not {loop!r}")
    res = holonomy(g, segs, step=params["step"])
    res.to_csv(out / "transport.csv")
    norm_drift = max(h.meta["norm_drift"] for h in res.segments)
    checks = [
        Check("holonomy_angle", res.angle, expected, tol, "abs"),
        bound("norm_drift", norm_drift, 1e-8),
    ]
    return ScenarioResult(checks, {"loop": loop}, ["transport.csv"])


def jacobi_sphere(params, seed, out: Path) -> ScenarioResult:
    from .geometry import GeodesicState, jacobi_deviation, sphere_metric

    theta, s_end = params["theta"], math.pi - params["end_margin"]
    J = jacobi_deviation(sphere_metric(), GeodesicState([math.pi / 2, 0.0], [0.0, 1.0]), 0.0, theta, s_end, step=params["step"])
    err = float(np.abs(J.y - theta * np.sin(J.s)).max())
    K = J.recovered_curvature()
    # the five-point quotient loses accuracy where y is small, so the ends are trimmed
    trim = max(2, len(K) // 30)
    kerr = float(np.abs(K[trim:-trim] - 1.0).max())
    J.to_csv(out / "jacobi.csv")
    checks = [
        bound("deviation_vs_theta_sin_s", err, params["tol"]),
        bound("recovered_curvature_error", kerr, params["tol_curvature"]),
    ]
    return ScenarioResult(checks, {"samples": len(J.s)}, ["jacobi.csv"])


def weak_field(params, seed, out: Path) -> ScenarioResult:
    from .geometry import GeodesicState, MetricField, effective_light_speed, integrate_geodesic, weak_field_metric

    rows, fit = [], []
    for phi in (1e-2, 1e-3):
        c = effective_light_speed(weak_field_metric(lambda x, phi=phi: phi + 0 * x[1]), (0, 0, 0, 0))
        coeff = (c - (1 - phi)) / phi**2
        rows.append((phi, c, 1 - phi, coeff))
        fit.append(abs(coeff + 0.5))
    artifacts: list[str] = []
    _write_csv(out, "light_speed.csv", ["phi", "c_eff", "one_minus_phi", "quadratic_coefficient"], rows, artifacts)

    # slow particle in phi = a x with the metric component g00 = 2 phi - 1
    a = params["gradient"]
    g = MetricField(
        lambda x: [[2 * a * x[1] - 1, 0, 0, 0], [0, 1.0, 0, 0], [0, 0, 1.0, 0], [0, 0, 0, 1.0]], 4, (-1, 1, 1, 1)
    )
    h = integrate_geodesic(g, GeodesicState([0, 0, 0, 0], [1.0, 0, 0, 0]), 1.0, step=1e-2)
    t, x = h.positions[:, 0], h.positions[:, 1]
    acc = 2 * np.polyfit(t, x, 2)[0]
    _write_csv(out, "slow_particle.csv", ["t", "x"], zip(t, x), artifacts)
    checks = [
        bound("light_speed_quadratic_fit", max(f / phi for f, phi in zip(fit, (1e-2, 1e-3))), 2.0),
        Check("geodesic_acceleration_half_grad_g00", acc, a, params["tol_rel"] * abs(a), "abs"),
    ]
    obs = {
        "g00": "2 phi - 1",
        "acceleration": float(acc),
        "newtonian_expectation": -a,
        "newtonian_sign_matches": bool(np.sign(acc) == -np.sign(a)),
    }
    return ScenarioResult(checks, obs, artifacts)


# ---------------------------------------------------------------------------
# quantum and bundle


def quantum_gauge(params, seed, out: Path) -> ScenarioResult:
    from .quantum import Grid1D, HamiltonianSpec, gauge_routes, gaussian_packet

    N, L = params["N"], params["length"]
    grid = Grid1D.spanning(-L / 2, L / 2, N)
    alpha = 2 * math.pi * params["winding"] / grid.extent
    spec = HamiltonianSpec(V=lambda x: params["omega2"] * np.asarray(x) ** 2 / 2)
    psi0 = gaussian_packet(grid, -1.0, 0.8, 1.0)
    lam = lambda x: alpha * x[0] + params["bump"] * cc.sin(2 * math.pi * x[0] / grid.extent) ** 2
    a, b = gauge_routes(spec, lam, psi0, params["t"], params["dt"])
    gap = float(np.abs(a.density() - b.density()).max())
    artifacts: list[str] = []
    _write_csv(out, "densities.csv", ["x", "density_route_a", "density_route_b"], zip(grid.x, a.density(), b.density()), artifacts)
    checks = [
        bound("density_gap", gap, params["tol"]),
        bound("norm_error", max(abs(a.norm() - 1), abs(b.norm() - 1)), 1e-10),
    ]
    return ScenarioResult(checks, {"l2_gap": a.distance(b)}, artifacts)


def parse_flux(text, period: float) -> float:
    """A flux given as a number or as ``<number>periods``."""
    s = str(text).strip()
    for suffix in ("periods", "period"):
        if s.endswith(suffix):
            num = s[: -len(suffix)].strip() or "1"
            try:
                return float(num) * period
            except ValueError:
                break
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"cannot read flux value {text!r}") from None


def ab_scan(params, seed, out: Path) -> ScenarioResult:
    from .quantum import ab_period, ab_probability

    units = {"natural": NATURAL, "gaussian": GAUSSIAN_CGS}.get(params["units"])
    if units is None:
        raise ConfigError("units must be 'natural' or 'gaussian'")
    amp_a, amp_b = params["a"], params["b"]
    if amp_a <= 0 or amp_b <= 0:
        raise ConfigError("both path amplitudes must be positive")
    expected = 2 * math.pi * units.hbar * units.c / units.e
    lo, hi = parse_flux(params["flux_min"], expected), parse_flux(params["flux_max"], expected)
    if not hi > lo or params["samples"] < 8:
        raise ConfigError("need flux_max > flux_min and at least 8 samples")
    flux = np.linspace(lo, hi, params["samples"])
    P = np.array([ab_probability(amp_a, amp_b, f, units) for f in flux])
    artifacts: list[str] = []
    _write_csv(out, "ab_scan.csv", ["flux", "probability"], zip(flux, P), artifacts)

    # period from the zero crossings of the interference term
    mean = amp_a**2 + amp_b**2
    term = lambda f: ab_probability(amp_a, amp_b, f, units) - mean
    vals = P - mean
    scale = max(abs(lo), abs(hi))
    crossings = [
        brentq(term, flux[i], flux[i + 1], xtol=1e-15 * scale, rtol=4 * np.finfo(float).eps)
        for i in range(len(flux) - 1)
        if vals[i] * vals[i + 1] < 0
    ]
    if len(crossings) < 3:
        raise ConfigError("scan range must cover at least one full period")
    k = np.arange(len(crossings))
    measured = 2 * np.polyfit(k, crossings, 1)[0]
    checks = [
        Check("flux_period", measured, ab_period(units), params["tol"], "rel"),
        Check("period_vs_2pi_hbar_c_over_e", ab_period(units), expected, params["tol"], "rel"),
        Check("minimum_probability", P.min(), (amp_a - amp_b) ** 2, 1e-3 * mean, "abs"),
    ]
    return ScenarioResult(checks, {"crossings": len(crossings), "units": params["units"]}, artifacts)


def bundle_commutator(params, seed, out: Path) -> ScenarioResult:
    from .bundle import ConnectionForm, connection_apply, curvature_commutator, horizontal_basis
    from .maxwell import FourPotential

    rng = np.random.default_rng(seed)

    def poly(complex_coeffs=False):
        exps = rng.integers(0, 3, size=(5, 4))
        coeffs = rng.normal(size=5) + (1j * rng.normal(size=5) if complex_coeffs else 0)

        def fn(x):
            total = 0.0
            for c, e in zip(coeffs, exps):
                term = c
                for i, k in enumerate(e):
                    if k:
                        term = term * x[i] ** int(k)
                total = total + term
            return total

        return ScalarField(fn, MINKOWSKI)

    w = ConnectionForm(FourPotential.from_components([poly() for _ in range(4)]), e=params["e"])
    psi = poly(complex_coeffs=True)
    rows, worst, horiz = [], 0.0, 0.0
    pairs = [(mu, nu) for mu in range(4) for nu in range(mu + 1, 4)]
    for p in rng.uniform(-1, 1, size=(params["points"], 4)):
        r = max(abs(curvature_commutator(w, psi, mu, nu, p)) for mu, nu in pairs)
        h = max(abs(connection_apply(w, hb, p)) for hb in horizontal_basis(w, p))
        worst, horiz = max(worst, r), max(horiz, h)
        rows.append((*p, r, h))
    artifacts: list[str] = []
    _write_csv(out, "residuals.csv", ["t", "x", "y", "z", "commutator_residual", "horizontal_omega"], rows, artifacts)
    checks = [
        bound("commutator_identity", worst, params["tol"]),
        bound("omega_on_horizontal_basis", horiz, params["tol_horizontal"]),
    ]
    return ScenarioResult(checks, {"points": params["points"]}, artifacts)


SCENARIOS: dict[str, Scenario] = {
    s.name: s
    for s in [
        Scenario("maxwell-vacuum", maxwell_vacuum,
                 {"field": "plane-wave", "E0": 0.7, "sign": 1, "extent": 1.0, "per_axis": 5, "tol": 1e-10},
                 "four vacuum-law residuals of a plane wave on a lattice"),
        Scenario("coulomb-divergence", coulomb_divergence,
                 {"p": 0.1, "tol_zero": 1e-12, "tol_rel": 1e-9},
                 "divergence of the inverse-square field and a perturbed power"),
        Scenario("shielding", shielding,
                 {"n": 64, "omega": 1.8, "tol_relax": 1e-10, "tol_field": 1e-6},
                 "Laplace relaxation around a conducting shell"),
        Scenario("relativity-group", relativity_group,
                 {"triples": 10_000, "boosts": 1000, "tol_light": 1e-15, "tol_assoc": 1e-13, "tol_interval": 1e-12},
                 "velocity composition group laws and interval invariance"),
        Scenario("noether-orbit", noether_orbit,
                 {"m": 1.0, "k": 1.0, "r0": 1.0, "rdot0": 0.1, "thetadot0": 1.1, "periods": 10.0,
                  "tol_momentum": 1e-6, "tol_energy": 1e-8},
                 "angular momentum and energy along a central-force orbit"),
        Scenario("sphere-holonomy", sphere_holonomy,
                 {"loop": "octant", "step": 2e-3, "tol": 1e-6, "tol_plane": 1e-10},
                 "parallel transport around a closed loop"),
        Scenario("jacobi-sphere", jacobi_sphere,
                 {"theta": 0.1, "end_margin": 0.1, "step": 2e-3, "tol": 1e-6, "tol_curvature": 1e-5},
                 "geodesic deviation on the unit sphere"),
        Scenario("weak-field", weak_field,
                 {"gradient": 1e-3, "tol_rel": 1e-2},
                 "light speed and slow-particle motion in a weak static field"),
        Scenario("quantum-gauge", quantum_gauge,
                 {"N": 256, "length": 20.0, "winding": 3, "bump": 0.4, "omega2": 0.1, "t": 1.0, "dt": 1e-3, "tol": 1e-8},
                 "the two routes of the gauge-equivalence theorem"),
        Scenario("ab-scan", ab_scan,
                 {"flux_min": "0", "flux_max": "3periods", "samples": 301, "a": 1.0, "b": 1.0,
                  "units": "natural", "tol": 1e-9},
                 "two-path interference probability against enclosed flux"),
        Scenario("bundle-commutator", bundle_commutator,
                 {"points": 100, "e": 1.0, "tol": 1e-10, "tol_horizontal": 1e-12},
                 "covariant-derivative commutator and horizontal space"),
    ]
}
