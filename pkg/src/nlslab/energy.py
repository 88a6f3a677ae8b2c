"""Constrained energy functionals, first variations and coercivity bounds.

Two functionals are supported on the periodic grid::

    second order:  E(u) = 1/2 int |grad u|^2 + 1/2 int V |u|^2 - 1/p int Q |u|^p
    fourth order:  E(u) = 1/2 int |Lap u|^2  + 1/2 int V |u|^2 - 1/p int Q |u|^p

minimized over ``int |u|^2 = rho^2``. The inner product is
``<a, b> = int conj(a) b dx`` and ``gradient`` is normalized so that
``d/de E(u + e h) = Re <gradient(u), h>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .grid import Grid, check_finite, integrate
from .potentials import clip_min, shift_nonneg

ORDERS = ("second", "fourth")


def critical_exponent(order: str, n: int):
    """Upper end of the subcritical range, ``2 + 4/n`` or ``2 + 8/n``."""
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}, got {order!r}")
    return 2 + Fraction(4 if order == "second" else 8, n)


def is_subcritical(order: str, n: int, p) -> bool:
    return 2 < p < critical_exponent(order, n)


@dataclass(frozen=True, eq=False)
class EnergyModel:
    """Which functional is in force: order, exponent, coefficients on one grid.

    ``lambda0`` is the level used for the ``S``/``T`` splitting of the
    potential and nonlinear terms. Exponents outside the subcritical range need
    ``allow_supercritical=True`` (used for negative controls).
    """

    grid: Grid
    order: str
    p: float
    V: np.ndarray
    Q: np.ndarray
    lambda0: float = 1.0
    allow_supercritical: bool = False
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}, got {self.order!r}")
        if not self.p >= 2:
            raise ValueError(f"exponent p must be >= 2, got {self.p}")
        if not self.allow_supercritical and not is_subcritical(self.order, self.n, self.p):
            crit = critical_exponent(self.order, self.n)
            raise ValueError(
                f"p={self.p} is outside the subcritical range (2, {float(crit):g}) for "
                f"order={self.order}, n={self.n}; pass allow_supercritical=True to override"
            )
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")
        V = np.broadcast_to(np.asarray(self.V, dtype=float), self.grid.shape).copy()
        Q = np.broadcast_to(np.asarray(self.Q, dtype=float), self.grid.shape).copy()
        check_finite(V, "V")
        check_finite(Q, "Q")
        V.setflags(write=False)
        Q.setflags(write=False)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "p", float(self.p))

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def subcritical(self) -> bool:
        return is_subcritical(self.order, self.n, self.p)

    @property
    def autonomous(self) -> bool:
        """True when V and Q are both constant (translation-invariant problem)."""
        return bool(np.ptp(self.V) == 0 and np.ptp(self.Q) == 0)

    @property
    def linear_symbol(self) -> np.ndarray:
        """Fourier symbol of the principal part: ``|k|^2`` or ``|k|^4``."""
        if "symbol" not in self._cache:
            k2 = self.grid.k2
            self._cache["symbol"] = k2 if self.order == "second" else k2**2
        return self._cache["symbol"]

    @property
    def shifted(self) -> tuple[np.ndarray, float]:
        if "shifted" not in self._cache:
            self._cache["shifted"] = shift_nonneg(self.V)
        return self._cache["shifted"]

    def replace(self, **changes) -> "EnergyModel":
        kw = dict(grid=self.grid, order=self.order, p=self.p, V=self.V, Q=self.Q,
                  lambda0=self.lambda0, allow_supercritical=self.allow_supercritical)
        kw.update(changes)
        return EnergyModel(**kw)


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    potential: float
    nonlinear: float
    total: float
    s_part: float
    t_part: float
    shift: float
    mass: float

    @property
    def shifted_potential(self) -> float:
        """``1/2 int V~ |u|^2`` with ``V~ = V - min V``."""
        return self.potential - 0.5 * self.shift * self.mass

    @property
    def shifted_total(self) -> float:
        return self.kinetic + self.s_part + self.t_part

    def as_row(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in
                ("kinetic", "potential", "nonlinear", "total", "s_part", "t_part", "shift", "mass")}


def mass(g: Grid, u: np.ndarray) -> float:
    return integrate(g, np.abs(u) ** 2)


def abs_pow(u: np.ndarray, q: float) -> np.ndarray:
    """``|u|^q`` via ``(|u|^2)^(q/2)``; ``0^q = 0`` for ``q > 0``."""
    return (u.real**2 + u.imag**2) ** (0.5 * q)


def kinetic(model: EnergyModel, u: np.ndarray) -> float:
    g = model.grid
    u_hat = np.fft.fftn(g.check(u)) / g.size
    return 0.5 * g.volume * float(np.sum(model.linear_symbol * np.abs(u_hat) ** 2))


def energy(model: EnergyModel, u: np.ndarray) -> EnergyBreakdown:
    g = model.grid
    u = g.check(u)
    dens = np.abs(u) ** 2
    up = abs_pow(u, model.p)
    kin = kinetic(model, u)
    pot = 0.5 * integrate(g, model.V * dens)
    nl = -integrate(g, model.Q * up) / model.p
    Vt, shift = model.shifted
    lam = model.lambda0
    s_part = integrate(g, 0.5 * dens * Vt - up * clip_min(model.Q, lam) / model.p)
    t_part = -integrate(g, np.where(model.Q >= lam, up * (model.Q - lam), 0.0)) / model.p
    m = integrate(g, dens)
    out = EnergyBreakdown(kin, pot, nl, kin + pot + nl, s_part, t_part, shift, m)
    if not np.isfinite(out.total):
        raise FloatingPointError("non-finite energy (blow-up upstream)")
    return out


def total_energy(model: EnergyModel, u: np.ndarray) -> float:
    g = model.grid
    kin = kinetic(model, u)
    rest = integrate(g, 0.5 * model.V * np.abs(u) ** 2 - model.Q * abs_pow(u, model.p) / model.p)
    return kin + rest


def linear_part(model: EnergyModel, u: np.ndarray) -> np.ndarray:
    """``-Lap u`` or ``Lap^2 u`` computed spectrally."""
    return np.fft.ifftn(np.fft.fftn(u) * model.linear_symbol)


def nonlinear_part(model: EnergyModel, u: np.ndarray) -> np.ndarray:
    return model.Q * abs_pow(u, model.p - 2) * u


def gradient(model: EnergyModel, u: np.ndarray) -> np.ndarray:
    """First variation ``dE/d(conj u)``.

    ``-Lap u + V u - Q |u|^(p-2) u`` (second order) or
    ``Lap^2 u + V u - Q |u|^(p-2) u`` (fourth order).
    """
    u = model.grid.check(u)
    return linear_part(model, u) + model.V * u - nonlinear_part(model, u)


def inner(g: Grid, a: np.ndarray, b: np.ndarray) -> complex:
    return complex(g.cell_volume * np.vdot(a, b))


def sobolev_seminorm(model: EnergyModel, u: np.ndarray) -> float:
    """``||grad u||_2`` (second order) or ``||Lap u||_2`` (fourth order)."""
    return float(np.sqrt(2.0 * kinetic(model, u)))


def gn_exponents(order: str, n: int, p) -> tuple[Fraction, Fraction]:
    """Exponents ``(a, b)`` in ``||u||_p <= C ||u||_2^a ||D u||_2^b``.

    ``D`` is the gradient (second order) or the Laplacian (fourth order).
    """
    p = Fraction(p)
    if order == "second":
        b = Fraction(n) * (p - 2) / (2 * p)
        a = 1 - Fraction(n, 2) + Fraction(n) / p
    elif order == "fourth":
        b = Fraction(n) * (p - 2) / (4 * p)
        a = (2 * n - n * p + 4 * p) / (4 * p)
    else:
        raise ValueError(f"order must be one of {ORDERS}")
    return a, b


def coercivity_exponent(order: str, n: int, p) -> Fraction:
    """Power of the seminorm in the nonlinear lower bound: ``n(p-2)/2`` or ``n(p-2)/4``."""
    a, b = gn_exponents(order, n, p)
    return Fraction(p) * b


def lp_bound(model: EnergyModel, t: float, rho: float) -> float:
    """Certified bound on ``int |u|^p`` for ``||u||_2 = rho`` on the periodic box.

    ``t`` is ``||grad u||`` (second order) or ``||Lap u||`` (fourth order); in
    the latter case ``||grad u||^2 <= rho * t`` is used first. Constants:

    - n = 1: ``||u||_inf^2 <= rho^2 / |box| + rho ||u'||`` (fundamental theorem
      of calculus from a point where ``|u|^2`` is at most its mean), hence
      ``int |u|^p <= rho^2 (rho^2/|box| + rho s)^((p-2)/2)``.
    - n = 2, p <= 4: ``||u||_4^4 <= (rho^2/(2L) + rho s / sqrt 2)^2`` (line-wise
      version of the above, Ladyzhenskaya style), then Hoelder between L^2 and
      L^4 gives ``int |u|^p <= rho^(4-p) ||u||_4^(2(p-2))``.

    Both reduce to the whole-space Gagliardo-Nirenberg form as ``L -> inf``.
    """
    g = model.grid
    p = model.p
    s = t if model.order == "second" else np.sqrt(rho * t)
    if g.n == 1:
        return rho**2 * (rho**2 / g.volume + rho * s) ** ((p - 2) / 2)
    if p > 4:
        raise ValueError("no documented Gagliardo-Nirenberg constant for n=2, p>4")
    l4 = (rho**2 / (2 * g.L) + rho * s / np.sqrt(2.0)) ** 2
    return rho ** (4 - p) * l4 ** ((p - 2) / 2)


def gn_bound(model: EnergyModel, grad_norm: float, rho: float) -> float:
    """Lower bound for the shifted energy at seminorm ``grad_norm`` and mass ``rho^2``.

    ``1/2 t^2 - ||Q||_inf / p * lp_bound(t)``; only valid for subcritical models.
    """
    if not model.subcritical:
        raise ValueError("gn_bound requires a subcritical model")
    qmax = float(np.max(np.abs(model.Q)))
    return 0.5 * grad_norm**2 - qmax / model.p * lp_bound(model, grad_norm, rho)
