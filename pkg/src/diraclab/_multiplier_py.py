"""Pure-NumPy kernels for the pointwise matrix multipliers.

Same contracts as the compiled versions in ``_multiplier_cy``: inputs are a
(4, 4, 4) stack of the four anticommuting matrices (mass matrix last), an
(N, 3) float64 frequency array, and an (N, 4) complex128 coefficient array.
"""

import numpy as np


def symbol_apply(mats, xi, shift, f):
    """(L(xi) + shift I) f  per row, L(xi) = xi.alpha + beta."""
    out = f @ mats[3].T
    for j in range(3):
        out += xi[:, j : j + 1] * (f @ mats[j].T)
    if shift != 0:
        out += shift * f
    return out


def resolvent_apply(mats, xi, z, f):
    """(L(xi) + z I) f / (1 + |xi|^2 - z^2)  per row."""
    num = symbol_apply(mats, xi, z, f)
    den = 1.0 + np.sum(xi * xi, axis=1) - z * z
    num /= den[:, None]
    return num
