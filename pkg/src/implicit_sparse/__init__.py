"""Sparse linear regression via implicitly regularized gradient descent.

The central object of study is plain gradient descent on the
over-parametrized model w = u*u - v*v (coordinate-wise products), started
at u = v = alpha for a small alpha > 0. With a suitable step size and an
early stopping time, the trajectory itself performs sparse recovery; no
explicit penalty is involved. The package provides:

- the two descent schemes (constant and coordinate-wise doubling step
  sizes) plus a data-driven estimate of the largest signal magnitude,
- design-matrix / signal / noise generators with RIP certificates,
- executable oracles for the one-dimensional multiplicative-update
  dynamics that drive the theory,
- lasso and oracle least-squares baselines,
- a seeded experiment harness with CSV output and a CLI.
"""

__version__ = "0.1.0"
