"""Potentials, the coupling bound, the geometric-series resolvent, and the
perturbed sweeps; the dense solve on a tiny grid is the independent oracle."""

import math

import numpy as np
import pytest

from diraclab import perturbed as pert
from diraclab import resolvent as res
from diraclab.errors import DomainError, InvariantViolated, SeriesDiverging
from diraclab.grid import (
    Grid3,
    GridFunction4,
    inner_product,
    weighted_norm,
    weighted_norm_values,
)

GRID = Grid3(32, 10.0)


def band_field(seed=0, K=2.0, grid=GRID):
    return res.band_limited_family(grid, K, 1, seed=seed)[0][1]


# --- presets -----------------------------------------------------------------


def test_scalar_preset_values():
    q = pert.preset_potential("scalar", 1.0, 1.0)
    at_zero = q.q(np.zeros(3))
    assert np.allclose(at_zero, np.eye(4))
    x = np.array([1.0, 2.0, 2.0])  # <x>^2 = 10
    assert np.allclose(q.q(x), np.eye(4) / 10.0)


def test_preset_hermitian_at_random_points():
    rng = np.random.default_rng(0)
    for kind in ("scalar", "beta", "offdiag"):
        q = pert.preset_potential(kind, 0.7, 1.3)
        pts = rng.uniform(-8, 8, size=(100, 3))
        vals = q.q(pts)
        gap = np.max(np.abs(vals - np.conj(np.swapaxes(vals, -1, -2))))
        assert gap <= 1e-15


def test_preset_decay_exact():
    q = pert.preset_potential("scalar", 1.0, 2.0)
    rng = np.random.default_rng(1)
    pts = rng.uniform(-8, 8, size=(50, 3))
    w = (1.0 + np.sum(pts**2, axis=1)) ** 1.0
    vals = np.abs(q.q(pts)[:, 0, 0]) * w
    assert np.max(np.abs(vals - 2.0)) <= 1e-12


def test_preset_validation_on_grid():
    for kind in ("scalar", "beta", "offdiag"):
        q = pert.preset_potential(kind, 1.0, 1.0)
        assert pert.validate_potential(q, GRID)


def test_validation_rejects_non_hermitian():
    base = pert.preset_potential("scalar", 1.0, 1.0)

    def skew(x):
        vals = base.q(x)
        out = np.array(np.broadcast_to(vals, vals.shape))
        out[..., 0, 1] += 1j * 0.01
        return out

    broken = pert.PotentialField(q=skew, epsilon=1.0, k_bound=base.k_bound)
    with pytest.raises(InvariantViolated):
        pert.validate_potential(broken, GRID)


def test_validation_rejects_undersized_bound():
    base = pert.preset_potential("scalar", 1.0, 1.0)
    lying = pert.PotentialField(q=base.q, epsilon=1.0, k_bound=0.1)
    with pytest.raises(InvariantViolated):
        pert.validate_potential(lying, GRID)


def test_preset_rejects_bad_args():
    with pytest.raises(DomainError):
        pert.preset_potential("scalar", -1.0, 1.0)
    with pytest.raises(DomainError):
        pert.preset_potential("nope", 1.0, 1.0)


# --- coupling bound ----------------------------------------------------------


def test_estimate_requires_admissible_weight():
    q = pert.preset_potential("scalar", 1.0, 1.0)
    with pytest.raises(DomainError):
        pert.estimate_c_star(q, 0.4, GRID)
    with pytest.raises(DomainError):
        pert.estimate_c_star(q, 1.0, GRID)  # (1+eps)/2 = 1 excluded


def test_estimate_zero_potential():
    q = pert.preset_potential("scalar", 1.0, 0.0)
    val = pert.estimate_c_star(q, 0.9, GRID, z_samples=(4 + 0.5j,))
    assert val == 0.0


def test_estimate_scales_exactly_with_amplitude():
    q1 = pert.preset_potential("scalar", 1.0, 1.0)
    q2 = pert.preset_potential("scalar", 1.0, 2.0)
    kw = dict(z_samples=(4 + 0.5j,), iterations=150, seed=2)
    a = pert.estimate_c_star(q1, 0.9, GRID, **kw)
    b = pert.estimate_c_star(q2, 0.9, GRID, **kw)
    assert b == pytest.approx(2.0 * a, rel=1e-13)


@pytest.mark.slow
def test_estimate_stable_under_grid_refinement():
    q = pert.preset_potential("scalar", 1.0, 1.0)
    vals = []
    for n in (48, 64):
        g = Grid3(n, 12.0)
        vals.append(
            pert.estimate_c_star(q, 0.9, g, z_samples=(4 + 0.5j, -4 + 0.5j))
        )
    assert abs(vals[1] - vals[0]) <= 0.2 * vals[1]


def test_choose_t0():
    cb = pert.choose_t0(2.0, 0.5)
    assert cb.t0 == 0.25 and cb.theta == 0.5
    assert pert.choose_t0(2.0, 0.999).t0 == pytest.approx(0.4995)
    assert pert.choose_t0(0.0).t0 == math.inf
    with pytest.raises(DomainError):
        pert.choose_t0(1.0, 1.5)
    with pytest.raises(DomainError):
        pert.choose_t0(-1.0, 0.5)


# --- the series --------------------------------------------------------------


def test_neumann_zero_coupling_reduces_to_free():
    q = pert.preset_potential("scalar", 1.0, 1.0)
    f = band_field(seed=3)
    z = 8 + 0.5j
    out, terms = pert.neumann_apply(f, q, 0.0, z, s=0.9)
    free = res.apply_free_dirac(f, z)
    assert terms == 1
    assert np.array_equal(out.values, free.values)


def test_neumann_residual_bound():
    q = pert.preset_potential("scalar", 1.0, 1.0)
    f = band_field(seed=4)
    z = 8 + 0.5j
    t, tol = 0.2, 1e-8
    out, terms = pert.neumann_apply(f, q, t, z, tol=tol, s=0.9)
    q_grid = pert.potential_on_grid(q, GRID)
    applied = (
        res.apply_dirac_operator(out, shift=z).values
        + t * pert.apply_potential_values(q_grid, out.values)
    )
    resid = weighted_norm_values(applied - f.values, GRID, 0.0)
    assert resid <= 10.0 * tol * weighted_norm(f, 0.0)
    assert terms > 1


def test_neumann_term_norms_respect_geometric_tail():
    # sum of dropped terms bounded by theta^{N+1}/(1-theta) times ||f||_s
    q = pert.preset_potential("scalar", 1.0, 1.0)
    s = 0.9
    c_star = pert.estimate_c_star(q, s, GRID, z_samples=(8 + 0.5j,))
    cb = pert.choose_t0(c_star, 0.5)
    f = band_field(seed=5)
    z = 8 + 0.5j
    t = cb.t0
    # measure the actual term norms
    q_grid = pert.potential_on_grid(q, GRID)
    term = f.values
    norms = []
    for _ in range(12):
        term = -t * pert.apply_potential_values(
            q_grid, res.apply_free_dirac_values(term, GRID, z)
        )
        norms.append(weighted_norm_values(term, GRID, s))
    ref = weighted_norm(f, s)
    theta = abs(t) * c_star
    for ell, norm in enumerate(norms, start=1):
        assert norm <= theta**ell * ref * (1.0 + 1e-9)


def test_neumann_series_inversion_consistency():
    # applying I + t Q R0(z) to the truncated series sum recovers f
    q = pert.preset_potential("scalar", 1.0, 1.0)
    f = band_field(seed=6)
    z = 8 + 0.5j
    t, tol, s = 0.2, 1e-9, 0.9
    q_grid = pert.potential_on_grid(q, GRID)
    acc = f.values.copy()
    term = f.values
    for _ in range(200):
        term = -t * pert.apply_potential_values(
            q_grid, res.apply_free_dirac_values(term, GRID, z)
        )
        if weighted_norm_values(term, GRID, s) < tol * weighted_norm(f, s):
            break
        acc += term
    back = acc + t * pert.apply_potential_values(
        q_grid, res.apply_free_dirac_values(acc, GRID, z)
    )
    gap = weighted_norm_values(back - f.values, GRID, s)
    assert gap <= 10 * tol * weighted_norm(f, s)


def test_neumann_diverges_for_large_coupling():
    q = pert.preset_potential("scalar", 1.0, 1.0)
    f = band_field(seed=7)
    with pytest.raises(SeriesDiverging):
        pert.neumann_apply(f, q, 40.0, 4 + 0.5j, s=0.9)


def test_neumann_agrees_with_dense_solve():
    # independent oracle: materialize the discrete operator on an 8^3 grid
    # and solve the linear system directly
    g = Grid3(8, 12.0)
    q = pert.preset_potential("scalar", 1.0, 1.0)
    z = 8 + 0.5j
    t = 0.1
    rng = np.random.default_rng(8)
    f = GridFunction4(
        g, rng.standard_normal((8, 8, 8, 4)) + 1j * rng.standard_normal((8, 8, 8, 4))
    )

    n_dof = 8**3 * 4
    q_grid = pert.potential_on_grid(q, g)
    columns = []
    for m in range(n_dof):
        basis = np.zeros(n_dof, dtype=complex)
        basis[m] = 1.0
        vals = basis.reshape(8, 8, 8, 4)
        col = (
            res.apply_dirac_operator(GridFunction4(g, vals), shift=z).values
            + t * pert.apply_potential_values(q_grid, vals)
        )
        columns.append(col.reshape(-1))
    matrix = np.column_stack(columns)
    direct = np.linalg.solve(matrix, f.values.reshape(-1)).reshape(8, 8, 8, 4)

    series, _ = pert.neumann_apply(f, q, t, z, tol=1e-11, s=0.9)
    rel = np.linalg.norm((series.values - direct).ravel()) / np.linalg.norm(
        direct.ravel()
    )
    assert rel <= 1e-6


def test_perturbed_hermitian_symmetry():
    q = pert.preset_potential("scalar", 1.0, 1.0)
    f, h = band_field(seed=9), band_field(seed=10)
    z = 8 + 0.5j
    t = 0.15
    left, _ = pert.neumann_apply(f, q, t, z, tol=1e-10, s=0.9)
    right, _ = pert.neumann_apply(h, q, t, np.conj(z), tol=1e-10, s=0.9)
    a = inner_product(left, h)
    b = inner_product(f, right)
    assert abs(a - b) <= 1e-8 * abs(a)


def test_image_norm_monotone_in_weight():
    # ||g||_{-s'} <= ||g||_{-s} for s < s'
    q = pert.preset_potential("scalar", 1.0, 1.0)
    f = band_field(seed=11)
    out, _ = pert.neumann_apply(f, q, 0.1, 8 + 0.5j, s=0.9)
    assert weighted_norm(out, -1.2) <= weighted_norm(out, -0.9)


# --- sweeps ------------------------------------------------------------------


def test_perturbed_sweep_zero_coupling_matches_free():
    q = pert.preset_potential("scalar", 1.0, 1.0)
    f = band_field(seed=12)
    result = pert.perturbed_boundary_sweep(
        f, q, 0.0, [4.0, 8.0], [0.4, 0.2], 1.0
    )
    for row in result.rows:
        if row["mu"] == 0.0:
            continue
        free = res.apply_free_dirac(f, complex(row["lambda"], row["mu"]))
        assert row["norm_minus_s"] == weighted_norm(free, -1.0)
        assert row["terms_used"] == 1


def test_perturbed_sweep_decay_and_rows(tmp_path):
    q = pert.preset_potential("scalar", 1.0, 1.0)
    c_star = pert.estimate_c_star(q, 0.9, GRID, z_samples=(8 + 0.5j,))
    cb = pert.choose_t0(c_star, 0.5)
    f = band_field(seed=13)
    result = pert.perturbed_boundary_sweep(
        f, q, cb.t0 / 2, [8.0, 64.0], [0.8, 0.4, 0.2], 0.9
    )
    ext = dict(result.extrapolated())
    assert ext[64.0] <= 0.5 * ext[8.0]
    path = tmp_path / "perturbed.csv"
    result.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "lambda,mu,t,s,terms_used,norm_minus_s,proxy"
    assert len(lines) == 1 + 2 * 4  # (3 mu rows + 1 extrapolated) per lambda
