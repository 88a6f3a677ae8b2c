"""Independent closed-form oracles, derived symbolically with sympy.

Integrals of sech powers over the real line are reduced with the exact
substitution t = tanh(x), dt = sech(x)^2 dx, to polynomial integrals on [-1, 1].
The substitution identities themselves are checked symbolically.
"""

from functools import lru_cache

import sympy as sp

x, t = sp.symbols("x t", real=True)
w, r = sp.symbols("omega rho", positive=True)


def _check_identity(expr):
    assert sp.simplify(expr.rewrite(sp.exp)) == 0


@lru_cache(maxsize=None)
def sech_integrals():
    """(int sech^2, int (sech')^2, int sech^4) over the real line."""
    s = 1 / sp.cosh(x)
    _check_identity(sp.diff(sp.tanh(x), x) - s**2)
    # (sech')^2 = sech^2 tanh^2 and sech^4 = sech^2 (1 - tanh^2)
    _check_identity(sp.diff(s, x) ** 2 - s**2 * sp.tanh(x) ** 2)
    _check_identity(s**4 - s**2 * (1 - sp.tanh(x) ** 2))
    one = sp.integrate(sp.Integer(1), (t, -1, 1))
    d2 = sp.integrate(t**2, (t, -1, 1))
    q4 = sp.integrate(1 - t**2, (t, -1, 1))
    return one, d2, q4


@lru_cache(maxsize=None)
def cubic_soliton():
    """``(omega(rho), E(rho))`` for ``1/2 int |u'|^2 - 1/4 int |u|^4`` at mass rho^2.

    The profile ``u = sqrt(2 omega) sech(sqrt(omega) x)`` solves
    ``u'' + u^3 = omega u``; with y = sqrt(omega) x its integrals are
    multiples of the sech integrals above.
    """
    u = sp.sqrt(2 * w) / sp.cosh(sp.sqrt(w) * x)
    _check_identity(sp.diff(u, x, 2) + u**3 - w * u)
    one, d2, q4 = sech_integrals()
    jac = 1 / sp.sqrt(w)  # dx = dy / sqrt(omega)
    m = 2 * w * one * jac
    kin = 2 * w * w * d2 * jac
    quart = 4 * w**2 * q4 * jac
    e = kin / 2 - quart / 4
    omega_of_rho = sp.solve(sp.Eq(m, r**2), w)[0]
    return sp.simplify(omega_of_rho), sp.simplify(e.subs(w, omega_of_rho))


def cubic_energy(rho: float) -> float:
    return float(cubic_soliton()[1].subs(r, rho))


def cubic_omega(rho: float) -> float:
    return float(cubic_soliton()[0].subs(r, rho))


def sech_window_mass(half: float) -> float:
    """``int_{-half}^{half} sech^2 = tanh(half) - tanh(-half)``."""
    return float(sp.tanh(sp.Float(half)) - sp.tanh(-sp.Float(half)))
