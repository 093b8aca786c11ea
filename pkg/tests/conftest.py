"""Shared fixtures: the worked 4x3x3 rank-4 example and its derived data."""

import numpy as np
import pytest

from cpdhnf import BilinearSystem, DenseTensor

# mode-1 flattening of the worked 4x3x3 example; column (k, l) row-major
GOLDEN_FLATTENING = np.array([
    [1, 0, 0, 0, 0, 0, 2, 0, 0],
    [1, 1, 0, 0, 0, 0, 2, 1, 0],
    [1, 1, 1, 0, 0, 1, 2, 1, 2],
    [1, 1, 1, 1, 1, 2, 2, 1, 2],
], dtype=float)

# hand-computed kernel basis of the flattening: f_j coefficients on x_k y_l
GOLDEN_KERNEL = np.array([
    [0, 0, 0, -1, 1, 0, 0, 0, 0],
    [0, 0, -1, -1, 0, 1, 0, 0, 0],
    [-2, 0, 0, 0, 0, 0, 1, 0, 0],
    [0, -1, 0, 0, 0, 0, 0, 1, 0],
    [0, 0, -2, 0, 0, 0, 0, 0, 1],
], dtype=float)

# solution points (beta_i, gamma_i) and first-mode factors of the example
GOLDEN_BETAS = np.array([
    [1, 1, 1, 0],
    [0, 0, 1, 1],
    [2, 1, 2, 0],
], dtype=float)
GOLDEN_GAMMAS = np.array([
    [1, 0, 0, 1],
    [0, 1, 0, 1],
    [0, 0, 1, 1],
], dtype=float)
GOLDEN_ALPHAS = np.array([
    [1, 0, 0, 0],
    [1, 1, 0, 0],
    [1, 1, 1, 0],
    [1, 1, 1, 1],
], dtype=float)

# 18x15 shift matrix at degree (2, 1): (row, column, value) triples under the
# monomial order x0^2y0, x0^2y1, ..., x2^2y2 and columns x0 f1, x1 f1, x2 f1,
# x0 f2, ...
GOLDEN_RESULTANT_21 = [
    (3, 0, -1), (4, 0, 1),
    (9, 1, -1), (10, 1, 1),
    (12, 2, -1), (13, 2, 1),
    (2, 3, -1), (3, 3, -1), (5, 3, 1),
    (5, 4, -1), (9, 4, -1), (11, 4, 1),
    (8, 5, -1), (12, 5, -1), (14, 5, 1),
    (0, 6, -2), (6, 6, 1),
    (3, 7, -2), (12, 7, 1),
    (6, 8, -2), (15, 8, 1),
    (1, 9, -1), (7, 9, 1),
    (4, 10, -1), (13, 10, 1),
    (7, 11, -1), (16, 11, 1),
    (2, 12, -2), (8, 12, 1),
    (5, 13, -2), (14, 13, 1),
    (8, 14, -2), (17, 14, 1),
]

# eigenvalues of the multiplication matrices for h0 = x0 + x1 + x2, one row
# per coordinate, one column per solution point (fixture column order)
GOLDEN_EIG_ROWS = np.array([
    [0.0, 0.25, 1.0 / 3.0, 0.5],
    [1.0, 0.25, 0.0, 0.0],
    [0.0, 0.5, 2.0 / 3.0, 0.5],
])


@pytest.fixture
def golden_tensor():
    return DenseTensor(GOLDEN_FLATTENING.reshape(4, 3, 3))


@pytest.fixture
def golden_system():
    """The hand-computed kernel basis as a bilinear system (not orthonormal)."""
    return BilinearSystem(GOLDEN_KERNEL.reshape(5, 3, 3))


def golden_resultant_dense():
    R = np.zeros((18, 15))
    for i, j, v in GOLDEN_RESULTANT_21:
        R[i, j] = v
    return R
