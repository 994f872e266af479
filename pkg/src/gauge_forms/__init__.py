"""Differential forms, gauge potentials and their physics, checked numerically.

Modules:

- :mod:`chartcalc`: charts, unit systems and scalar fields with forward-mode jets.
- :mod:`exterior`: k-forms, wedge, exterior derivative, Hodge stars, integration.
- :mod:`maxwell`: field tensor, Maxwell laws in form language, Lorentz force,
  Poynting balance, Laplace relaxation.
- :mod:`relativity`: velocity composition, boosts, intervals.
- :mod:`mechanics`: Lagrangians, Euler-Lagrange residuals, Noether charges,
  RK4 integration of particles in fields.
- :mod:`geometry`: metrics, Christoffel symbols, geodesics, parallel
  transport, holonomy, Jacobi fields, curvature.
- :mod:`quantum`: grid operators, gauge-covariant Hamiltonians, propagators,
  the path-integral slice, uncertainty and Aharonov-Bohm interference.
- :mod:`bundle`: the U(1) bundle, its connection form and covariant derivative.
- :mod:`cli`: the ``gauge-forms`` command.
"""

__version__ = "0.1.0"
