"""Small-coupling perturbation machinery: decaying Hermitian matrix
potentials, the empirical coupling bound, the geometric-series inversion of
I + t Q R0(z), and the perturbed boundary-value sweeps.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import grid as _grid
from . import resolvent as _res
from .errors import DomainError, InvariantViolated, SeriesDiverging

__all__ = [
    "PotentialField",
    "CouplingBound",
    "preset_potential",
    "validate_potential",
    "potential_on_grid",
    "apply_potential_values",
    "estimate_c_star",
    "choose_t0",
    "neumann_apply",
    "perturbed_boundary_sweep",
    "PerturbedSweepResult",
]

_PRESET_MATRICES = {
    "scalar": np.eye(4, dtype=complex),
    "beta": np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex),
    "offdiag": np.array(
        [
            [0, 0, 0, 1],
            [0, 0, 1, 0],
            [0, 1, 0, 0],
            [1, 0, 0, 0],
        ],
        dtype=complex,
    ),
}


@dataclass(frozen=True)
class PotentialField:
    """Hermitian 4x4 matrix potential with power-law decay.

    ``q`` maps an (..., 3) position array to (..., 4, 4) Hermitian values;
    ``epsilon`` is the decay exponent (entries fall like <x>^{-1-epsilon})
    and ``k_bound`` dominates both the weighted entry magnitudes and the
    first derivatives on sampled lattices.
    """

    q: callable
    epsilon: float
    k_bound: float


@dataclass(frozen=True)
class CouplingBound:
    """Empirical series bound: coupling magnitudes up to t0 keep the
    geometric ratio theta = t0 * c_star below one."""

    c_star: float
    t0: float
    theta: float


def preset_potential(kind, epsilon, amplitude):
    """A documented decaying family: amplitude * M * <x>^{-1-epsilon}.

    ``kind`` picks the constant Hermitian direction M: "scalar" (identity),
    "beta" (the mass matrix) or "offdiag" (a symmetric permutation).
    """
    if epsilon <= 0:
        raise DomainError("decay exponent must be positive")
    if kind not in _PRESET_MATRICES:
        raise DomainError(
            f"unknown preset {kind!r}; choose from {sorted(_PRESET_MATRICES)}"
        )
    direction = _PRESET_MATRICES[kind]

    def q(x):
        x = np.asarray(x, dtype=float)
        w = (1.0 + np.sum(x * x, axis=-1)) ** (-0.5 * (1.0 + epsilon))
        return amplitude * w[..., None, None] * direction

    k_bound = abs(amplitude) * float(np.max(np.abs(direction))) * max(
        1.0, 3.0 * (1.0 + epsilon)
    )
    return PotentialField(q=q, epsilon=float(epsilon), k_bound=float(k_bound))


def potential_on_grid(potential, grid):
    """Sample the potential on the spatial lattice: (n, n, n, 4, 4)."""
    axes = np.meshgrid(*([grid.x_axis] * 3), indexing="ij")
    x = np.stack(axes, axis=-1)
    return potential.q(x)


def apply_potential_values(q_grid, values):
    """Pointwise matrix action of a sampled potential on (n, n, n, 4)."""
    return np.einsum("...ij,...j->...i", q_grid, values)


def validate_potential(potential, grid, slack=1e-12):
    """Check Hermiticity, the weighted entry bound, and the sampled
    derivative bound; raises InvariantViolated on failure."""
    q_grid = potential_on_grid(potential, grid)
    herm = np.max(np.abs(q_grid - np.conj(np.swapaxes(q_grid, -1, -2))))
    if herm > 1e-13:
        raise InvariantViolated(f"Hermiticity residual {herm:.3e}")
    w = grid.x_weight(1.0 + potential.epsilon)
    weighted = np.max(w[..., None, None] * np.abs(q_grid))
    if weighted > potential.k_bound * (1.0 + 1e-9) + slack:
        raise InvariantViolated(
            f"weighted magnitude {weighted:.6f} exceeds {potential.k_bound}"
        )
    deriv_sum = np.zeros_like(w)
    flat = q_grid.reshape(grid.n, grid.n, grid.n, 16)
    hat = _grid.transform_forward_values(flat, grid)
    for axis in range(3):
        shape = [1, 1, 1, 1]
        shape[axis] = grid.n
        d_hat = hat * (1j * grid.xi_axis.reshape(shape))
        d_vals = _grid.transform_inverse_values(d_hat, grid)
        deriv_sum = deriv_sum + np.max(np.abs(d_vals), axis=-1)
    worst = float(np.max(deriv_sum))
    if worst > potential.k_bound * (1.0 + 1e-6) + slack:
        raise InvariantViolated(
            f"sampled derivative sum {worst:.6f} exceeds {potential.k_bound}"
        )
    return True


DEFAULT_C_STAR_SAMPLES = tuple(
    complex(sgn * lam, 0.5) for lam in (4.0, 8.0, 16.0, 32.0) for sgn in (1, -1)
)


def estimate_c_star(
    potential,
    s,
    grid,
    z_samples=DEFAULT_C_STAR_SAMPLES,
    iterations=200,
    seed=0,
):
    """Empirical bound on || Q R0(z) || as a map of the s-weighted space.

    The admissible weight window is 1/2 < s < (1 + epsilon)/2; the returned
    value is the max over the sampled parameters of the power-iteration
    operator-norm estimate of f -> Q R0(z) f.
    """
    if not 0.5 < s < (1.0 + potential.epsilon) / 2.0:
        raise DomainError(
            "weight exponent must satisfy 1/2 < s < (1 + epsilon)/2"
        )
    q_grid = potential_on_grid(potential, grid)
    w_plus = grid.x_weight(float(s))
    w_minus = grid.x_weight(-float(s))
    best = 0.0
    for z in z_samples:
        z = complex(z)

        def op(v, _z=z):
            # W_s Q R0(z) W_{-s}: the L2 realization of the s->s map
            u = _res.apply_free_dirac_values(w_minus[..., None] * v, grid, _z)
            return w_plus[..., None] * apply_potential_values(q_grid, u)

        def op_adj(v, _z=z):
            u = apply_potential_values(q_grid, w_plus[..., None] * v)
            u = _res.apply_free_dirac_values(u, grid, np.conj(_z))
            return w_minus[..., None] * u

        val = _res.operator_norm_proxy(
            op, op_adj, grid, 0.0, components=4,
            iterations=iterations, seed=seed,
        )
        best = max(best, val)
    return best


def choose_t0(c_star, theta=0.5):
    """Coupling threshold t0 = theta / c_star for a safety factor in (0, 1).

    A vanishing bound (the zero potential) makes every coupling admissible;
    the returned threshold is then the infinite sentinel.
    """
    if not 0.0 < theta < 1.0:
        raise DomainError("safety factor must lie in (0, 1)")
    if c_star < 0:
        raise DomainError("coupling bound must be nonnegative")
    if c_star == 0.0:
        return CouplingBound(c_star=0.0, t0=math.inf, theta=theta)
    return CouplingBound(c_star=float(c_star), t0=theta / c_star, theta=theta)


def neumann_apply(f, potential, t, z, tol=1e-8, s=0.0, max_terms=200):
    """Perturbed resolvent via the geometric series.

    Computes  R0(z) * sum_l (-t Q R0(z))^l f,  truncating when the next
    term's s-weighted norm falls below tol times that of f.  Returns the
    image and the number of terms summed (the coupling-free call sums one).

    Raises SeriesDiverging when term norms grow three times in a row, the
    empirical signature of |t| ||Q R0(z)|| >= 1.
    """
    z = complex(z)
    grid = f.grid
    ref = _grid.weighted_norm(f, s)
    if ref == 0.0:
        return _grid.GridFunction4.zeros(grid), 1
    q_grid = potential_on_grid(potential, grid)
    acc = f.values.copy()
    term = f.values
    terms_used = 1
    prev_norm = ref
    growth_streak = 0
    for _ in range(max_terms):
        image = _res.apply_free_dirac_values(term, grid, z)
        term = -t * apply_potential_values(q_grid, image)
        norm = _grid.weighted_norm_values(term, grid, s)
        if norm < tol * ref:
            break
        if norm > prev_norm:
            growth_streak += 1
            if growth_streak >= 3:
                raise SeriesDiverging(
                    f"term norms grew three consecutive times at |t|={abs(t)}"
                )
        else:
            growth_streak = 0
        acc += term
        terms_used += 1
        prev_norm = norm
    result = _res.apply_free_dirac_values(acc, grid, z)
    return _grid.GridFunction4(grid, result), terms_used


@dataclass
class PerturbedSweepResult:
    """Rows of a perturbed boundary sweep plus CSV serialization."""

    rows: list

    HEADER = ["lambda", "mu", "t", "s", "terms_used", "norm_minus_s", "proxy"]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.HEADER)
            for row in self.rows:
                writer.writerow(
                    [
                        _res._fmt(row["lambda"]),
                        _res._fmt(row["mu"]),
                        _res._fmt(row["t"]),
                        _res._fmt(row["s"]),
                        str(row["terms_used"]),
                        _res._fmt(row["norm_minus_s"]),
                        _res._fmt(row["proxy"]),
                    ]
                )

    def extrapolated(self):
        """(lambda, extrapolated norm) pairs, sweep order."""
        return [
            (row["lambda"], row["norm_minus_s"])
            for row in self.rows
            if row["mu"] == 0.0
        ]


def perturbed_boundary_sweep(
    f,
    potential,
    t,
    lambda_list,
    mu_list,
    s,
    sign=+1,
    tol=1e-8,
    compute_proxy=False,
    proxy_iterations=60,
    seed=0,
):
    """Boundary-value sweep for the perturbed resolvent.

    For each lambda the image norm ||R_t(lambda + sign*i*mu) f||_{-s} is
    recorded at every mu (descending, geometric) and then Richardson
    extrapolated into a mu = 0 row.  At t = 0 the rows reproduce the free
    path exactly.  The proxy column (optional: one power iteration per
    lambda at the largest mu) tracks the weighted operator norm.
    """
    sgn = 1.0 if sign > 0 else -1.0
    mu_list = sorted(mu_list, reverse=True)
    grid = f.grid
    rows = []
    for lam in lambda_list:
        if abs(lam) < 2.0:
            raise DomainError("sweep points need |lambda| >= 2")
        proxy_val = None
        if compute_proxy:
            z0 = complex(lam, sgn * mu_list[0])

            def op(v, _z=z0):
                g = _grid.GridFunction4(grid, v)
                out, _ = neumann_apply(g, potential, t, _z, tol=tol, s=s)
                return out.values

            def op_adj(v, _z=z0):
                g = _grid.GridFunction4(grid, v)
                out, _ = neumann_apply(
                    g, potential, t, np.conj(_z), tol=tol, s=s
                )
                return out.values

            proxy_val = _res.operator_norm_proxy(
                op, op_adj, grid, s, components=4,
                iterations=proxy_iterations, seed=seed, check_linearity=False,
            )
        norms = []
        terms_last = 1
        for mu in mu_list:
            z = complex(lam, sgn * mu)
            image, terms_last = neumann_apply(f, potential, t, z, tol=tol, s=s)
            norm = _grid.weighted_norm(image, -s)
            norms.append(norm)
            rows.append(
                {
                    "lambda": float(lam),
                    "mu": float(mu),
                    "t": float(t),
                    "s": float(s),
                    "terms_used": terms_last,
                    "norm_minus_s": norm,
                    "proxy": proxy_val,
                }
            )
        rows.append(
            {
                "lambda": float(lam),
                "mu": 0.0,
                "t": float(t),
                "s": float(s),
                "terms_used": terms_last,
                "norm_minus_s": _res.richardson(norms),
                "proxy": proxy_val,
            }
        )
    return PerturbedSweepResult(rows=rows)
