import numpy as np
import pytest

from gauge_forms.chartcalc import ScalarField


def random_polynomial(rng, chart, degree=3, n_terms=6, complex_coeffs=False):
    """Random polynomial field plus a plain-numpy evaluator for oracles."""
    n = chart.dimension
    exps = [rng.integers(0, degree + 1, size=n) for _ in range(n_terms)]
    exps = [e if e.sum() <= degree else (e * degree) // max(e.sum(), 1) for e in exps]
    coeffs = rng.normal(size=n_terms)
    if complex_coeffs:
        coeffs = coeffs + 1j * rng.normal(size=n_terms)

    def fn(x):
        total = 0.0
        for c, e in zip(coeffs, exps):
            term = c
            for i, k in enumerate(e):
                if k:
                    term = term * x[i] ** int(k)
            total = total + term
        return total

    return ScalarField(fn, chart)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)
