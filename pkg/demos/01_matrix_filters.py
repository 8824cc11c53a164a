"""Matrix FIR filters: a tour of the arithmetic every other layer builds on.

Run with: python3 demos/01_matrix_filters.py
"""

import numpy as np

from lrdnet import PolynomialMatrix, selector_shift, truncated_inverse

# A scalar filter 1 - 0.5 z^-1 and its causal inverse: the geometric series.
a = PolynomialMatrix(np.array([[[1.0]], [[-0.5]]]))
inv = truncated_inverse(a, horizon=8, decay_tol=1.0)
print("inverse of (1 - 0.5 z^-1), first coefficients:")
print("  ", np.round(inv.coeffs[:6, 0, 0], 4))

# Multiplying back gives the identity through the horizon.
prod = a @ inv
print("filter times inverse, coefficients 0..5:")
print("  ", np.round(prod.coeffs[:6, 0, 0], 12))

# Matrix case: convolution follows the same rules.
rng = np.random.default_rng(0)
b = PolynomialMatrix(0.3 * rng.standard_normal((3, 2, 2)))
c = PolynomialMatrix(0.3 * rng.standard_normal((2, 2, 2)))
print("degrees add under composition:", b.degree, "+", c.degree, "=", (b @ c).degree)

# Frequency response at z = e^{i theta}; evaluation is a ring homomorphism.
theta = np.pi / 3
lhs = (b @ c).evaluate(theta)
rhs = b.evaluate(theta) @ c.evaluate(theta)
print("evaluation respects products:", np.allclose(lhs, rhs))

# The channel-delay filter: z^-1 on one diagonal slot, identity elsewhere.
# It is unitary on the unit circle, which is what makes the strict-past
# projection space of a single channel representable by a causal filter.
m2 = selector_shift(2, 3)
print("channel-delay filter, lag-0 and lag-1 diagonals:")
print("  ", np.diag(m2.coeff(0)), np.diag(m2.coeff(1)))
v = m2.evaluate(0.7)
print("unitary at theta=0.7:", np.allclose(v @ v.conj().T, np.eye(3)))

# Supports read off which entries are active anywhere in the lag range.
sparse = PolynomialMatrix(np.array([[[0.0, 0.4], [0.0, 0.0]], [[0.0, 0.0], [0.9, 0.0]]]))
print("support pattern:")
print(sparse.support().astype(int))
