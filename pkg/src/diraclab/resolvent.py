"""Grid-level resolvent machinery.

Applies the free 4-component resolvent and the scalar second-order
comparison resolvent as frequency-side multipliers, evaluates boundary
values directly for band-limited data, realizes the three-part cutoff
decomposition, measures empirical symbol seminorms, and estimates weighted
operator norms by power iteration for the spectral-parameter sweeps.
"""

import csv
from dataclasses import dataclass

import numpy as np

from . import _multiplier as _kern
from . import grid as _grid
from .dirac import standard_representation
from .errors import (
    BandLimitViolated,
    DomainError,
    NotConverged,
    OnSpectrum,
    SpectralOverlap,
)

__all__ = [
    "in_J",
    "cutoff_rho",
    "cutoff_gamma",
    "apply_free_dirac",
    "apply_free_dirac_values",
    "apply_dirac_operator",
    "apply_boundary_dirac",
    "band_mass_fraction",
    "apply_free_schrodinger",
    "apply_schrodinger_operator",
    "decomposition_parts",
    "SymbolSeminorm",
    "symbol_seminorm",
    "default_symbol_samples",
    "operator_norm_proxy",
    "lambda_sweep",
    "SweepResult",
    "band_limited_family",
    "richardson",
    "boundary_value_extrapolated",
]

ON_SPECTRUM_RTOL = 1e-10

_MATS = standard_representation().stacked()


def in_J(z):
    """Membership in the reference parameter strip: 2 <= |Re z| and
    0 < |Im z| < 1."""
    z = complex(z)
    return abs(z.real) >= 2.0 and 0.0 < abs(z.imag) < 1.0


# --- smooth cutoffs ---------------------------------------------------------


def _transition(u):
    """C-infinity step: exactly 0 for u <= 0, exactly 1 for u >= 1."""
    u = np.asarray(u, dtype=float)
    lo = np.exp(-1.0 / np.maximum(u, 1e-300)) * (u > 0)
    hi = np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)) * (u < 1)
    return lo / (lo + hi)


def cutoff_rho(t):
    """Smooth plateau function: 1 on |t| < 1/2, 0 on |t| > 1."""
    return _transition(2.0 * (1.0 - np.abs(np.asarray(t, dtype=float))))


def cutoff_gamma(xi_bracket, z):
    """Per-parameter cutoff centered on the resonant shell <xi> ~ |Re z|."""
    z = complex(z)
    if z.real >= 2.0:
        return cutoff_rho(xi_bracket - z.real)
    if z.real <= -2.0:
        return cutoff_rho(xi_bracket + z.real)
    raise DomainError("cutoff defined for |Re z| >= 2 only")


# --- multiplier application -------------------------------------------------


def _check_off_spectrum(grid, z, rtol=ON_SPECTRUM_RTOL):
    z = complex(z)
    den_min = np.min(np.abs(1.0 + grid.xi_norm_sq - z * z))
    if den_min < rtol * max(1.0, abs(z) ** 2):
        raise OnSpectrum(
            f"z={z} within tolerance of the grid's spectral shell"
        )


def apply_free_dirac_values(values, grid, z, mset=None):
    """Resolvent multiplier on raw (n, n, n, 4) spatial samples."""
    z = complex(z)
    if z.imag == 0.0:
        _check_off_spectrum(grid, z)
    mats = mset.stacked() if mset is not None else _MATS
    hat = _grid.transform_forward_values(values, grid)
    flat = np.ascontiguousarray(hat.reshape(-1, 4))
    out = _kern.resolvent_apply(mats, grid.xi_vectors, z, flat)
    return _grid.transform_inverse_values(out.reshape(hat.shape), grid)


def apply_free_dirac(f, z, mset=None):
    """Free resolvent at an off-axis point z: inverse transform of
    R(xi; z) fhat(xi).  The residual of (H0 - z) applied to the result is
    at roundoff level."""
    z = complex(z)
    if z.imag == 0.0:
        raise OnSpectrum(
            "interior evaluation needs Im z != 0; use apply_boundary_dirac "
            "for band-limited boundary values"
        )
    return _grid.GridFunction4(
        f.grid, apply_free_dirac_values(f.values, f.grid, z, mset)
    )


def apply_dirac_operator(f, shift=0.0, mset=None):
    """(H0 - shift) f evaluated spectrally; the residual oracle's half."""
    mats = mset.stacked() if mset is not None else _MATS
    flat = np.ascontiguousarray(f.hat.reshape(-1, 4))
    out = _kern.symbol_apply(mats, f.grid.xi_vectors, -complex(shift), flat)
    return _grid.GridFunction4(
        f.grid,
        _grid.transform_inverse_values(out.reshape(f.hat.shape), f.grid),
    )


def band_mass_fraction(f, K):
    """Fraction of squared frequency mass outside the band <xi> <= K."""
    hat_sq = np.sum(np.abs(f.hat) ** 2, axis=-1)
    total = float(np.sum(hat_sq))
    if total == 0.0:
        return 0.0
    outside = float(np.sum(hat_sq[f.grid.xi_bracket > K]))
    return outside / total


def apply_boundary_dirac(f, lam, sign, K, mass_tol=1e-12, mset=None):
    """Boundary value of the resolvent at a real point, band-limited data.

    With frequency support inside <xi> <= K and |lam| >= 2K the multiplier
    is regular on the band, so the boundary value is a direct evaluation at
    z = lam; the two approach signs coincide.  Frequency content outside
    the declared band (at most ``mass_tol`` of the total squared mass) is
    discarded.
    """
    lam = float(lam)
    if int(np.sign(sign)) == 0:
        raise DomainError("sign must be +1 or -1")
    if K <= 0 or K > abs(lam) / 2.0:
        raise SpectralOverlap(
            f"band bound K={K} overlaps the shell of lam={lam}; need "
            f"K <= |lam|/2"
        )
    frac = band_mass_fraction(f, K)
    if frac > mass_tol:
        raise BandLimitViolated(
            f"{frac:.3e} of the frequency mass lies outside <xi> <= {K}"
        )
    grid = f.grid
    mats = mset.stacked() if mset is not None else _MATS
    mask = (grid.xi_bracket <= K).ravel()
    flat = np.ascontiguousarray(f.hat.reshape(-1, 4))
    out = np.zeros_like(flat)
    out[mask] = _kern.resolvent_apply(
        mats, np.ascontiguousarray(grid.xi_vectors[mask]), complex(lam),
        np.ascontiguousarray(flat[mask]),
    )
    return _grid.GridFunction4(
        grid,
        _grid.transform_inverse_values(
            out.reshape(f.hat.shape), grid
        ),
    )


def apply_free_schrodinger(values, grid, z):
    """Scalar comparison resolvent: multiplier 1/(|xi|^2 - z) on (n, n, n)
    samples."""
    z = complex(z)
    den = grid.xi_norm_sq - z
    if np.min(np.abs(den)) < ON_SPECTRUM_RTOL * max(1.0, abs(z)):
        raise OnSpectrum(f"z={z} too close to the grid Laplacian spectrum")
    hat = _grid.transform_forward_values(values, grid)
    return _grid.transform_inverse_values(hat / den, grid)


def apply_schrodinger_operator(values, grid, z=0.0):
    """(-Laplacian - z) applied spectrally to scalar samples."""
    hat = _grid.transform_forward_values(values, grid)
    return _grid.transform_inverse_values(
        (grid.xi_norm_sq - complex(z)) * hat, grid
    )


# --- three-part decomposition ----------------------------------------------


def decomposition_parts(f, z, mset=None):
    """Split the resolvent application into shell, off-shell and scalar
    parts.

    Returns (part_a, part_b, part_c) with

        part_a = multiplier  gamma_z L(xi) / (<xi>^2 - z^2)
        part_b = multiplier  (1 - gamma_z) L(xi) / (<xi>^2 - z^2)
        part_c = multiplier  z / (<xi>^2 - z^2)

    applied to f; their sum equals the full resolvent application exactly
    (the cutoff telescopes in frequency space).
    """
    z = complex(z)
    if not in_J(z):
        raise DomainError("decomposition defined on the reference strip J")
    grid = f.grid
    mats = mset.stacked() if mset is not None else _MATS
    den = (1.0 + grid.xi_norm_sq - z * z).ravel()
    if np.min(np.abs(den)) < ON_SPECTRUM_RTOL * max(1.0, abs(z) ** 2):
        raise OnSpectrum(f"z={z} too close to the grid's spectral shell")
    gam = cutoff_gamma(grid.xi_bracket, z).ravel()
    flat = np.ascontiguousarray(f.hat.reshape(-1, 4))
    sym = _kern.symbol_apply(mats, grid.xi_vectors, 0.0, flat)

    part_a_hat = (gam / den)[:, None] * sym
    part_b_hat = ((1.0 - gam) / den)[:, None] * sym
    part_c_hat = (z / den)[:, None] * flat

    def back(hat_flat):
        return _grid.GridFunction4(
            grid,
            _grid.transform_inverse_values(
                hat_flat.reshape(f.hat.shape), grid
            ),
        )

    return back(part_a_hat), back(part_b_hat), back(part_c_hat)


# --- symbol seminorms -------------------------------------------------------


@dataclass(frozen=True)
class SymbolSeminorm:
    """Empirical seminorm of a frequency-side symbol over a sample set."""

    ell: int
    m: float
    value: float


def default_symbol_samples(r_max, spacing=0.1):
    """Radial-ray sample set: 26 lattice directions times a radius sweep.

    The radial spacing is fixed (default 0.1) so order-one transition
    layers stay resolved however large the box is.
    """
    dirs = []
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                if (dx, dy, dz) != (0, 0, 0):
                    v = np.array([dx, dy, dz], dtype=float)
                    dirs.append(v / np.linalg.norm(v))
    dirs = np.array(dirs)
    radii = np.arange(spacing, r_max + 0.5 * spacing, spacing)
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    return np.vstack([np.zeros((1, 3)), pts])


def symbol_seminorm(symbol, ell, m, points=None, r_max=20.0, step=1e-2):
    """Empirical frequency-side seminorm of order ell and class exponent m.

    ``symbol`` must accept an (M, 3) array and return (M,) scalars or
    (M, 4, 4) matrices.  Derivatives up to order ``ell`` (at most 3) are
    nested central differences with spacing ``step``; the supremum of
    <xi>^{-m} |derivative| runs over the sample points.  Matrix symbols
    aggregate per-entry seminorms in the root-sum-square sense.
    """
    if ell < 0 or ell > 3:
        raise DomainError("seminorm order must be between 0 and 3")
    if points is None:
        points = default_symbol_samples(r_max)
    points = np.asarray(points, dtype=float)
    weight = (1.0 + np.sum(points**2, axis=1)) ** (-0.5 * m)

    def derivative(pts, alpha):
        total = sum(alpha)
        if total == 0:
            return np.asarray(symbol(pts))
        j = next(i for i, a in enumerate(alpha) if a)
        lower = list(alpha)
        lower[j] -= 1
        shift = np.zeros(3)
        shift[j] = step
        return (derivative(pts + shift, lower) - derivative(pts - shift, lower)) / (
            2.0 * step
        )

    probe = np.asarray(symbol(points[:1]))
    matrix_valued = probe.ndim == 3

    # per-entry running maxima of the weighted derivative magnitudes
    if matrix_valued:
        best = np.zeros((4, 4))
    else:
        best = 0.0
    for alpha in _alpha_indices(ell):
        vals = np.abs(derivative(points, alpha))
        if matrix_valued:
            w = weight[:, None, None]
            best = np.maximum(best, np.max(w * vals, axis=0))
        else:
            best = max(best, float(np.max(weight * vals)))
    value = float(np.sqrt(np.sum(best**2))) if matrix_valued else float(best)
    return SymbolSeminorm(ell=ell, m=float(m), value=value)


def _alpha_indices(ell):
    out = []
    for a1 in range(ell + 1):
        for a2 in range(ell + 1 - a1):
            for a3 in range(ell + 1 - a1 - a2):
                out.append((a1, a2, a3))
    return out


# --- operator norm proxy ----------------------------------------------------


def operator_norm_proxy(
    op,
    op_adjoint,
    grid,
    s,
    components=4,
    iterations=200,
    seed=0,
    stagnation=1e-6,
    check_linearity=True,
):
    """Largest singular value of the weighted sandwich of a linear map.

    Estimates  || <x>^{-s} op <x>^{-s} ||  on the discrete plain-L2 space by
    power iteration on the normal map, with a deterministic start vector.
    ``op`` and ``op_adjoint`` act on (n, n, n[, components]) complex arrays
    and must be mutually adjoint in the discrete inner product.

    Exits when the singular-value estimate stagnates to relative
    ``stagnation``; raises NotConverged when the cap is hit first.  The
    returned value is a lower bound of the continuum operator norm, so
    sweeps built on it report trends rather than sharp constants.
    """
    shape = (grid.n,) * 3 + ((components,) if components else ())
    w = grid.x_weight(-float(s))
    wb = w[..., None] if components else w

    def sandwich(vec):
        return wb * op(wb * vec)

    def sandwich_adj(vec):
        return wb * op_adjoint(wb * vec)

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    v /= np.linalg.norm(v.ravel())

    if check_linearity:
        a, b = 0.7 - 0.3j, -1.1 + 0.2j
        g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        lhs = op(a * v + b * g)
        rhs = a * op(v) + b * op(g)
        scale = np.linalg.norm(rhs.ravel()) + 1e-300
        if np.linalg.norm((lhs - rhs).ravel()) > 1e-10 * scale:
            raise DomainError("supplied map failed the linearity check")

    est = 0.0
    for k in range(iterations):
        tv = sandwich(v)
        new_est = float(np.linalg.norm(tv.ravel()))
        u = sandwich_adj(tv)
        nu = float(np.linalg.norm(u.ravel()))
        if k > 2 and abs(new_est - est) <= stagnation * max(est, 1e-300):
            return new_est
        est = new_est
        if nu == 0.0:
            return 0.0
        v = u / nu
    raise NotConverged(
        f"power iteration hit the {iterations}-iteration cap before "
        f"stagnating to {stagnation}"
    )


# --- sweeps ------------------------------------------------------------------


def band_limited_family(grid, K, count, seed=0, components=4):
    """Deterministic band-limited test fields: a smooth radial envelope
    vanishing beyond <xi> = K times seeded random coefficients.

    K must exceed 1 (the frequency weight never drops below 1) and the band
    must contain at least one lattice node.
    """
    if K <= 1.0:
        raise DomainError("band bound must exceed 1")
    rng = np.random.default_rng(seed)
    # plateau out to the middle of [1, K], zero beyond <xi> = K
    env = cutoff_rho((grid.xi_bracket - 1.0) / (K - 1.0))
    out = []
    for k in range(count):
        shape = (grid.n,) * 3 + ((components,) if components else ())
        coef = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        hat = coef * (env[..., None] if components else env)
        if components:
            f = _grid.GridFunction4.from_hat(grid, hat)
            norm = _grid.weighted_norm(f, 0.0)
            f = _grid.GridFunction4(grid, f.values / norm)
        else:
            vals = _grid.transform_inverse_values(hat, grid)
            norm = _grid.weighted_norm_values(vals, grid, 0.0)
            f = vals / norm
        out.append((f"f{k:02d}", f))
    return out


@dataclass
class SweepResult:
    """Rows of a spectral-parameter sweep plus CSV serialization."""

    kind: str
    rows: list

    HEADER = ["kind", "lambda", "mu", "s", "norm_proxy", "f_id",
              "f_norm_minus_s"]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.HEADER)
            for row in self.rows:
                writer.writerow(
                    [
                        row["kind"],
                        _fmt(row["lambda"]),
                        _fmt(row["mu"]),
                        _fmt(row["s"]),
                        _fmt(row["norm_proxy"]),
                        row["f_id"],
                        _fmt(row["f_norm_minus_s"]),
                    ]
                )

    def proxies(self):
        """Distinct (lambda, proxy) pairs in sweep order."""
        seen = {}
        for row in self.rows:
            seen.setdefault(row["lambda"], row["norm_proxy"])
        return list(seen.items())


def _fmt(x):
    return "" if x is None else f"{x:.17e}"


def lambda_sweep(
    kind,
    s,
    lambda_list,
    mu,
    f_family,
    grid,
    iterations=200,
    seed=0,
    proxy=True,
):
    """Sweep the spectral parameter and record norm proxies and per-field
    image norms at z = lambda + i mu.

    ``kind`` selects the 4-component first-order resolvent ("dirac") or the
    scalar second-order one ("schrodinger").  For each lambda the proxy
    column estimates the weighted operator norm; the per-field column is
    the weighted image norm of each supplied field.
    """
    if kind not in ("dirac", "schrodinger"):
        raise DomainError(f"unknown sweep kind {kind!r}")
    if not 0.0 < mu < 1.0:
        raise DomainError("mu must lie in (0, 1)")
    rows = []
    components = 4 if kind == "dirac" else 0
    for lam in lambda_list:
        if abs(lam) < 2.0:
            raise DomainError("sweep points need |lambda| >= 2")
        z = complex(lam, mu)
        if kind == "dirac":
            def op(v, _z=z):
                return apply_free_dirac_values(v, grid, _z)

            def op_adj(v, _z=z):
                return apply_free_dirac_values(v, grid, np.conj(_z))
        else:
            def op(v, _z=z):
                return apply_free_schrodinger(v, grid, _z)

            def op_adj(v, _z=z):
                return apply_free_schrodinger(v, grid, np.conj(_z))

        proxy_val = (
            operator_norm_proxy(
                op, op_adj, grid, s, components=components,
                iterations=iterations, seed=seed,
            )
            if proxy
            else None
        )
        if f_family:
            for f_id, f in f_family:
                if kind == "dirac":
                    image = apply_free_dirac(f, z)
                    norm = _grid.weighted_norm(image, -s)
                else:
                    image = apply_free_schrodinger(f, grid, z)
                    norm = _grid.weighted_norm_values(image, grid, -s)
                rows.append(
                    {
                        "kind": kind,
                        "lambda": float(lam),
                        "mu": float(mu),
                        "s": float(s),
                        "norm_proxy": proxy_val,
                        "f_id": f_id,
                        "f_norm_minus_s": norm,
                    }
                )
        else:
            rows.append(
                {
                    "kind": kind,
                    "lambda": float(lam),
                    "mu": float(mu),
                    "s": float(s),
                    "norm_proxy": proxy_val,
                    "f_id": "",
                    "f_norm_minus_s": None,
                }
            )
    return SweepResult(kind=kind, rows=rows)


def richardson(values):
    """Extrapolate a sequence taken at a geometric parameter (ratio 2,
    largest first) under a first-order error model."""
    vals = list(values)
    if not vals:
        raise DomainError("nothing to extrapolate")
    while len(vals) > 1:
        vals = [2.0 * vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
    return vals[0]


def boundary_value_extrapolated(f, lam, sign, mu_list=(4e-2, 2e-2, 1e-2)):
    """Approximate boundary value for general (non-band-limited) data.

    Richardson extrapolation of the interior applications over the given
    descending mu values is approximate by nature; exact boundary values
    exist only on the band-limited path (:func:`apply_boundary_dirac`).
    """
    sgn = 1.0 if sign > 0 else -1.0
    fields = [
        apply_free_dirac(f, complex(lam, sgn * mu)).values for mu in mu_list
    ]
    while len(fields) > 1:
        fields = [
            2.0 * fields[i + 1] - fields[i] for i in range(len(fields) - 1)
        ]
    return _grid.GridFunction4(f.grid, fields[0])
