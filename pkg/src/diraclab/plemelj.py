"""Boundary values of the singular integral  lim  int f(s)/(s -+ i mu) ds.

For a C^1 profile on [-1, 1] the limit splits into +- i pi f(0) plus the
regular double integral of the rescaled derivative, which equals
int (f(s) - f(0))/s ds with the removable singularity filled by f'(0).
The regular part is evaluated by Gauss-Legendre quadrature with order
doubling; the small-mu regularized integral is kept as an independent
adaptive-quadrature oracle.
"""

import numpy as np
from scipy.integrate import quad

from .errors import QuadratureNotConverged

__all__ = [
    "C1Profile",
    "boundary_limit",
    "small_mu_oracle",
    "even_profile_residual",
    "gauss_legendre",
]

_FD_STEP = 1e-6
_SERIES_CUT = 1e-6


class C1Profile:
    """A function on [-1, 1] together with its first derivative.

    ``value`` is a scalar callable; ``derivative`` may be omitted, in which
    case symmetric differences with step 1e-6 stand in.  Quadrature accuracy
    statements assume smoother-than-C^1 profiles; for merely-C^1 inputs pass
    a larger ``tol`` to the evaluators.
    """

    def __init__(self, value, derivative=None):
        self.value = value
        if derivative is None:
            h = _FD_STEP

            def derivative(s, _v=value, _h=h):
                return (_v(min(s + _h, 1.0)) - _v(max(s - _h, -1.0))) / (
                    min(s + _h, 1.0) - max(s - _h, -1.0)
                )

        self.derivative = derivative

    def consistency_residual(self, points=17):
        """Max gap between the supplied derivative and a symmetric
        difference at interior checkpoints."""
        xs = np.linspace(-0.9, 0.9, points)
        h = _FD_STEP
        worst = 0.0
        for s in xs:
            fd = (self.value(s + h) - self.value(s - h)) / (2 * h)
            worst = max(worst, abs(self.derivative(s) - fd))
        return worst


def gauss_legendre(func, order, lo=-1.0, hi=1.0):
    """Gauss-Legendre quadrature of a (possibly complex) scalar callable."""
    x, w = np.polynomial.legendre.leggauss(order)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return half * sum(wi * func(mid + half * xi) for xi, wi in zip(x, w))


def _gl_doubling(func, tol, start=32, cap=512):
    """Order-doubling Gauss-Legendre with a disagreement check."""
    prev = gauss_legendre(func, start)
    order = start
    while order < cap:
        order *= 2
        cur = gauss_legendre(func, order)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise QuadratureNotConverged(
        f"Gauss-Legendre orders up to {cap} disagree beyond {tol}"
    )


def _regular_part(phi, tol):
    """int_{-1}^{1} (f(s) - f(0))/s ds, the desingularized double integral."""
    f0 = phi.value(0.0)

    def integrand(s):
        if abs(s) < _SERIES_CUT:
            return phi.derivative(0.0)
        return (phi.value(s) - f0) / s

    return _gl_doubling(integrand, tol)


def boundary_limit(phi, sign, tol=1e-10):
    """Boundary value of the singular integral from the chosen half plane.

    Returns  sign * i pi f(0)  plus the regular part.  ``sign`` is +1 for
    the limit of 1/(s - i mu) (upper approach) and -1 for 1/(s + i mu).
    """
    sign = int(np.sign(sign))
    if sign == 0:
        raise ValueError("sign must be +1 or -1")
    return sign * 1j * np.pi * phi.value(0.0) + _regular_part(phi, tol)


def small_mu_oracle(phi, sign, mu, tol=1e-7):
    """Direct adaptive quadrature of  int f(s)/(s - sign*i*mu) ds,  mu > 0.

    Independent of :func:`boundary_limit`; converges to it at rate
    O(mu log(1/mu)) for C^1 profiles.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    sign = int(np.sign(sign))

    def part(selector):
        def integrand(s):
            return selector(phi.value(s) / (s - sign * 1j * mu))

        val, err = quad(integrand, -1.0, 1.0, points=[0.0], limit=400)
        if err > tol:
            raise QuadratureNotConverged(
                f"adaptive quadrature error estimate {err} exceeds {tol}"
            )
        return val

    return complex(part(np.real), part(np.imag))


def even_profile_residual(phi, tol=1e-10):
    """The regular double integral alone; vanishes for even profiles.

    The integrand (f(s) - f(0))/s is odd when f is even, so symmetric
    Gauss-Legendre nodes cancel it to roundoff.  Non-even profiles give an
    order-one control value (e.g. the identity profile gives 2).
    """
    return float(np.real(_regular_part(phi, tol)))
