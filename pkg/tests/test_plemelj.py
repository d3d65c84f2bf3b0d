"""Boundary limits of the 1D singular integral against closed forms and the
independent small-mu quadrature oracle."""

import numpy as np
import pytest

from diraclab.counterexample import default_bump
from diraclab.errors import QuadratureNotConverged
from diraclab.plemelj import (
    C1Profile,
    boundary_limit,
    even_profile_residual,
    gauss_legendre,
    small_mu_oracle,
)

ONE = C1Profile(lambda s: 1.0, lambda s: 0.0)
LINEAR = C1Profile(lambda s: s, lambda s: 1.0)


def bump_profile():
    b = default_bump()
    return C1Profile(b, b.derivative)


def closed_form_small_mu(mu):
    # int 1/(s - i mu) ds over [-1, 1]
    return 1j * np.pi - 2j * np.arctan(mu)


def test_profile_consistency_check():
    assert bump_profile().consistency_residual() <= 1e-6
    bad = C1Profile(lambda s: s * s, lambda s: 0.0)
    assert bad.consistency_residual() > 0.1


def test_profile_numeric_derivative_fallback():
    prof = C1Profile(lambda s: np.sin(s))
    assert prof.consistency_residual() <= 1e-6


def test_constant_profile_limit():
    # derivative term vanishes: the limit is exactly +- i pi
    for sign in (+1, -1):
        val = boundary_limit(ONE, sign)
        assert val == pytest.approx(sign * 1j * np.pi, abs=1e-13)


def test_linear_profile_limit():
    # f(0) = 0 and the regular integral is 2 for either sign
    for sign in (+1, -1):
        assert boundary_limit(LINEAR, sign) == pytest.approx(2.0, abs=1e-12)


def test_even_bump_limit_purely_imaginary():
    prof = bump_profile()
    val = boundary_limit(prof, +1)
    assert abs(val.real) <= 1e-10
    assert val.imag == pytest.approx(np.pi, abs=1e-10)


def test_jump_relation():
    for prof, f0 in ((ONE, 1.0), (LINEAR, 0.0), (bump_profile(), 1.0)):
        jump = boundary_limit(prof, +1) - boundary_limit(prof, -1)
        assert jump == pytest.approx(2j * np.pi * f0, abs=1e-10)


def test_linearity_in_the_profile():
    b = default_bump()
    combo = C1Profile(
        lambda s: 2.0 * b(s) + 0.5 * s,
        lambda s: 2.0 * b.derivative(s) + 0.5,
    )
    lhs = boundary_limit(combo, +1)
    rhs = 2.0 * boundary_limit(bump_profile(), +1) + 0.5 * boundary_limit(
        LINEAR, +1
    )
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_small_mu_against_closed_form_constant():
    for mu in (1e-2, 1e-3, 1e-4):
        val = small_mu_oracle(ONE, +1, mu)
        assert val == pytest.approx(closed_form_small_mu(mu), abs=1e-12)
    # headline numbers: i pi within 1e-3 at mu = 1e-4
    assert abs(small_mu_oracle(ONE, +1, 1e-4) - 1j * np.pi) <= 1e-3


def test_small_mu_against_closed_form_linear():
    for mu in (1e-2, 1e-3, 1e-4):
        val = small_mu_oracle(LINEAR, +1, mu)
        exact = 2.0 + 1j * mu * closed_form_small_mu(mu)
        assert val == pytest.approx(exact, abs=1e-12)
    assert abs(small_mu_oracle(LINEAR, +1, 1e-4) - 2.0) <= 1e-3


def test_small_mu_converges_to_boundary_limit():
    prof = bump_profile()
    target = boundary_limit(prof, +1)
    errs = [
        abs(small_mu_oracle(prof, +1, mu) - target)
        for mu in (1e-2, 1e-3, 1e-4)
    ]
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] <= 5e-3


def test_small_mu_rejects_nonpositive_mu():
    with pytest.raises(ValueError):
        small_mu_oracle(ONE, +1, 0.0)


def test_even_residuals():
    poly = C1Profile(lambda s: (1 - s * s) ** 2,
                     lambda s: -4 * s * (1 - s * s))
    assert abs(even_profile_residual(poly)) <= 1e-12
    b = default_bump()
    sq = C1Profile(lambda s: b(s) ** 2, lambda s: 2 * b(s) * b.derivative(s))
    assert abs(even_profile_residual(sq)) <= 1e-12
    # non-even control
    assert even_profile_residual(LINEAR) == pytest.approx(2.0, abs=1e-12)


def test_gauss_legendre_polynomial_exactness():
    # order-n rule integrates degree 2n-1 exactly
    val = gauss_legendre(lambda s: s**6, 8)
    assert val == pytest.approx(2.0 / 7.0, rel=1e-14)


def test_quadrature_not_converged_on_rough_profile():
    rng = np.random.default_rng(0)
    noise = rng.standard_normal(4001)

    def rough(s):
        # white-noise lookup: no quadrature order can settle
        return noise[int((s + 1) * 2000)]

    with pytest.raises(QuadratureNotConverged):
        boundary_limit(C1Profile(rough, lambda s: 0.0), +1)
