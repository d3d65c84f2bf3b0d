"""Exact linear-algebraic layer: the 4x4 anticommuting matrices, the free
first-order symbol, its rank-two eigenprojections, and the pointwise
resolvent matrix.

Everything here is plain 4x4 complex arithmetic; no grids are involved.
Matrix magnitudes use the Frobenius norm throughout.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OnSpectrum

__all__ = [
    "DiracMatrixSet",
    "standard_representation",
    "anticommutation_deviation",
    "free_symbol",
    "eigenprojections",
    "resolvent_symbol",
    "symbol_lipschitz_deviation",
    "bracket",
]

# Pauli blocks used by the standard representation.
_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

_I4 = np.eye(4, dtype=complex)

# Relative closeness of z^2 to <xi>^2 that triggers OnSpectrum.
ON_SPECTRUM_RTOL = 1e-10


@dataclass(frozen=True)
class DiracMatrixSet:
    """Three off-diagonal-block matrices plus the diagonal mass matrix.

    ``alpha`` is a (3, 4, 4) complex array, ``beta`` a (4, 4) complex array.
    All four are Hermitian and pairwise anticommute, each squaring to the
    identity.
    """

    alpha: np.ndarray
    beta: np.ndarray

    def stacked(self):
        """All four matrices as a (4, 4, 4) array, mass matrix last."""
        return np.concatenate([self.alpha, self.beta[None]], axis=0)


def standard_representation():
    """Return the conventional representation built from 2x2 Pauli blocks.

    The mass matrix is diag(1, 1, -1, -1) and

        alpha_j = [[0, sigma_j], [sigma_j, 0]]    (j = 1, 2, 3).

    This choice is fixed so results are reproducible; any unitary conjugate
    satisfies the same anticommutation relations.
    """
    z2 = np.zeros((2, 2), dtype=complex)
    alpha = np.stack([np.block([[z2, s], [s, z2]]) for s in _SIGMA])
    beta = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
    alpha.setflags(write=False)
    beta.setflags(write=False)
    return DiracMatrixSet(alpha=alpha, beta=beta)


def anticommutation_deviation(mset):
    """Max entrywise deviation of a_j a_k + a_k a_j from 2 delta_jk I.

    The mass matrix participates as the fourth member. Returns 0 (up to
    roundoff) for a valid representation; order-one values flag a broken set.
    """
    mats = mset.stacked()
    dev = 0.0
    for j in range(4):
        for k in range(4):
            target = 2.0 * _I4 if j == k else 0.0
            gap = mats[j] @ mats[k] + mats[k] @ mats[j] - target
            dev = max(dev, float(np.max(np.abs(gap))))
    return dev


def bracket(xi):
    """sqrt(1 + |xi|^2) for a 3-vector or an (..., 3) array of 3-vectors."""
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(1.0 + np.sum(xi * xi, axis=-1))


def free_symbol(xi, mset=None):
    """The 4x4 Hermitian matrix xi_1 a_1 + xi_2 a_2 + xi_3 a_3 + beta.

    Its square is (1 + |xi|^2) I and its eigenvalues are +-sqrt(1 + |xi|^2),
    each twice.
    """
    mset = mset or standard_representation()
    xi = np.asarray(xi, dtype=float)
    return (
        xi[0] * mset.alpha[0]
        + xi[1] * mset.alpha[1]
        + xi[2] * mset.alpha[2]
        + mset.beta
    )


def eigenprojections(xi, mset=None):
    """Rank-two spectral projections of the free symbol.

    Returns (P_plus, P_minus) with

        P_pm = (I +- L(xi) / sqrt(1 + |xi|^2)) / 2.

    Both are Hermitian idempotents, mutually annihilating, summing to the
    identity, with trace 2 each.
    """
    sym = free_symbol(xi, mset)
    b = bracket(xi)
    p_plus = 0.5 * (_I4 + sym / b)
    p_minus = 0.5 * (_I4 - sym / b)
    return p_plus, p_minus


def resolvent_symbol(xi, z, mset=None, rtol=ON_SPECTRUM_RTOL):
    """Pointwise resolvent matrix (L(xi) + z I) / (<xi>^2 - z^2).

    Algebraically this inverts L(xi) - z I whenever z^2 != <xi>^2.

    Raises
    ------
    OnSpectrum
        when |<xi>^2 - z^2| < rtol * max(1, |z|^2); such points need the
        boundary-value machinery rather than a direct evaluation.
    """
    z = complex(z)
    b2 = 1.0 + float(np.dot(xi, xi))
    den = b2 - z * z
    if abs(den) < rtol * max(1.0, abs(z) ** 2):
        raise OnSpectrum(f"z={z} within tolerance of <xi>^2={b2}")
    return (free_symbol(xi, mset) + z * _I4) / den


def symbol_lipschitz_deviation(xi, z1, z2, K, mset=None):
    """Frobenius difference quotient |R(xi;z1) - R(xi;z2)| / |z1 - z2|.

    Sampled over the regime <xi> <= K, |z1|, |z2| >= 2K (K > 1) this stays
    below a finite constant; the identity

        R(xi;z1) - R(xi;z2) = (z1 - z2) R(xi;z1) R(xi;z2)

    is the mechanism. For z1 == z2 the limiting slope |dR/dz| is estimated
    by a symmetric difference instead of the (undefined) quotient.
    """
    z1, z2 = complex(z1), complex(z2)
    if K <= 1:
        raise DomainError("K must exceed 1")
    if bracket(xi) > K:
        raise DomainError("<xi> exceeds the band bound K")
    if abs(z1) < 2 * K or abs(z2) < 2 * K:
        raise DomainError("|z| must be at least 2K")
    if z1 == z2:
        step = 1e-6 * max(1.0, abs(z1))
        gap = resolvent_symbol(xi, z1 + step, mset) - resolvent_symbol(
            xi, z1 - step, mset
        )
        return float(np.linalg.norm(gap)) / (2 * step)
    gap = resolvent_symbol(xi, z1, mset) - resolvent_symbol(xi, z2, mset)
    return float(np.linalg.norm(gap)) / abs(z1 - z2)
