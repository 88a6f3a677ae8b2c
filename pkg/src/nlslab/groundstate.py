"""Ground states: normalized gradient flow on the L^2 sphere.

The iteration is

    u <- Pi_rho(u - tau * d),    d = P (g - mu u),   mu = <P g, u> / <P u, u>

with ``g = gradient(u)``, ``P = (1 + tau |k|^2)^-1`` or ``(1 + tau |k|^4)^-1``
(or the identity) and ``Pi_rho(v) = rho v / ||v||``. Subtracting ``mu u`` makes
the search direction L^2-orthogonal to ``u``, so fixed points satisfy the
Euler-Lagrange equation exactly. ``tau`` is halved whenever the energy would
increase.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyModel, gradient, inner, mass, total_energy
from .grid import Grid

log = logging.getLogger(__name__)

SEED_PROFILES = ("gaussian", "sech", "random")
PRECONDITIONERS = ("none", "inverse-linear")


@dataclass(frozen=True)
class SolverOptions:
    step: float = 1.0
    max_iters: int = 20000
    grad_tol: float = 1e-8
    seed_profile: str = "gaussian"
    seed: int = 0
    preconditioner: str = "inverse-linear"
    seed_width: float = 1.0
    seed_center: tuple[float, ...] | None = None
    # factor by which a halved step recovers after each accepted step
    step_growth: float = 1.0
    # minimal pseudo-time step before the flow is declared stalled
    min_step: float = 1e-12

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.seed_profile not in SEED_PROFILES:
            raise ValueError(f"seed_profile must be one of {SEED_PROFILES}")
        if self.preconditioner not in PRECONDITIONERS:
            raise ValueError(f"preconditioner must be one of {PRECONDITIONERS}")
        if not self.step_growth >= 1:
            raise ValueError("step_growth must be >= 1")
        if not self.seed_width > 0:
            raise ValueError("seed_width must be positive")


@dataclass
class GroundState:
    u0: np.ndarray
    omega: float
    energy_value: float
    residual: float
    iterations: int
    converged: bool
    rho: float
    history: list[float] = field(default_factory=list, repr=False)
    flags: tuple[str, ...] = ()

    def summary(self) -> dict:
        return {
            "rho": self.rho,
            "omega": self.omega,
            "energy": self.energy_value,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "flags": list(self.flags),
        }


def project(g: Grid, v: np.ndarray, rho: float) -> np.ndarray:
    m = mass(g, v)
    if not m > 0:
        raise ValueError("cannot project the zero field onto the mass sphere")
    return v * (rho / np.sqrt(m))


def estimate_omega(model: EnergyModel, u: np.ndarray) -> float:
    """Lagrange multiplier ``omega = -Re <gradient(u), u> / mass(u)``."""
    g = model.grid
    m = mass(g, u)
    if not m > 0:
        raise ValueError("omega is undefined for the zero field")
    return -inner(g, gradient(model, u), u).real / m


def el_residual(model: EnergyModel, u: np.ndarray, omega: float) -> float:
    """``||gradient(u) + omega u||_2 / rho``; zero exactly at a standing wave."""
    g = model.grid
    m = mass(g, u)
    r = gradient(model, u) + omega * u
    norm = np.sqrt(mass(g, r))
    return float(norm / np.sqrt(m)) if m > 0 else float(norm)


def q_peak(g: Grid, Q: np.ndarray) -> tuple[float, ...]:
    """Maximizer of Q closest to the centroid of the whole maximizer set."""
    top = Q >= Q.max()
    pts = np.stack([c[top] for c in g.coords], axis=-1)
    centroid = pts.mean(axis=0)
    best = pts[np.argmin(np.sum((pts - centroid) ** 2, axis=-1))]
    return tuple(float(v) for v in best)


def seed_field(model: EnergyModel, rho: float, opts: SolverOptions) -> np.ndarray:
    """Initial guess of mass ``rho^2``.

    Bumps are centered at the maximizer of Q unless ``opts.seed_center`` is set.
    """
    g = model.grid
    if opts.seed_center is not None:
        center = opts.seed_center
    elif np.ptp(model.Q) > 0:
        center = q_peak(g, model.Q)
    else:
        center = (0.0,) * g.n
    w = opts.seed_width
    if opts.seed_profile == "gaussian":
        u = np.exp(-g.radius2(center) / (2 * w**2)).astype(complex)
    elif opts.seed_profile == "sech":
        u = (1.0 / np.cosh(np.sqrt(g.radius2(center)) / w)).astype(complex)
    else:
        rng = np.random.default_rng(opts.seed)
        noise = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
        # smooth the noise so the seed has finite kinetic energy
        u = np.fft.ifftn(np.fft.fftn(noise) * np.exp(-0.5 * (w**2) * g.k2))
    return project(g, u, rho)


def _preconditioner(model: EnergyModel, opts: SolverOptions, tau: float):
    if opts.preconditioner == "none":
        return None
    return 1.0 / (1.0 + tau * model.linear_symbol)


def _apply(P, v):
    if P is None:
        return v
    return np.fft.ifftn(np.fft.fftn(v) * P)


def minimize(model: EnergyModel, rho: float, opts: SolverOptions | None = None,
             u_init: np.ndarray | None = None) -> GroundState:
    """Approximate a minimizer of the energy on ``{int |u|^2 = rho^2}``.

    Stops when the Euler-Lagrange residual drops below ``opts.grad_tol``.
    Non-convergence is reported through ``converged=False``; a non-finite energy
    raises ``FloatingPointError``.
    """
    opts = opts or SolverOptions()
    if not rho > 0:
        raise ValueError("rho must be positive")
    g = model.grid
    flags = []
    if not model.subcritical:
        flags.append("supercritical")
    if rho < 1e-6:
        flags.append("tiny-rho")

    u = project(g, u_init, rho) if u_init is not None else seed_field(model, rho, opts)
    E = total_energy(model, u)
    history = [E]
    tau = opts.step
    P = _preconditioner(model, opts, tau)
    res = np.inf
    omega = np.nan
    it = 0
    while True:
        grad = gradient(model, u)
        m = mass(g, u)
        omega = -inner(g, grad, u).real / m
        res = float(np.sqrt(mass(g, grad + omega * u) / m))
        if res <= opts.grad_tol or it >= opts.max_iters:
            break
        Pg = _apply(P, grad)
        Pu = _apply(P, u)
        mu = inner(g, Pg, u).real / inner(g, Pu, u).real
        d = Pg - mu * Pu
        while True:
            trial = project(g, u - tau * d, rho)
            E_new = total_energy(model, trial)
            if not np.isfinite(E_new):
                raise FloatingPointError(
                    f"non-finite energy at iteration {it} (step too large or collapse)")
            # energies closer than round-off count as non-increasing
            if E_new <= E + 1e-14 * max(1.0, abs(E)):
                break
            tau *= 0.5
            P = _preconditioner(model, opts, tau)
            Pg = _apply(P, grad)
            Pu = _apply(P, u)
            mu = inner(g, Pg, u).real / inner(g, Pu, u).real
            d = Pg - mu * Pu
            if tau < opts.min_step:
                break
        if tau < opts.min_step:
            flags.append("stalled")
            break
        u, E = trial, E_new
        history.append(E)
        it += 1
        if tau < opts.step:
            tau = min(opts.step, tau * opts.step_growth)
            P = _preconditioner(model, opts, tau)
    converged = res <= opts.grad_tol
    log.debug("minimize: %d iterations, residual %.3e, energy %.12g", it, res, E)
    return GroundState(u, float(omega), float(E), res, it, converged, float(rho),
                       history, tuple(flags))


def from_profile(model: EnergyModel, u: np.ndarray, tol: float = 1e-8) -> GroundState:
    """Wrap a known standing-wave profile (e.g. an exact soliton) as a GroundState."""
    g = model.grid
    u = np.asarray(g.check(u), dtype=complex)
    omega = estimate_omega(model, u)
    res = el_residual(model, u, omega)
    return GroundState(u, omega, total_energy(model, u), res, 0, res <= tol,
                       float(np.sqrt(mass(g, u))), [], ("profile",))


def power_soliton(g: Grid, p: float, omega: float, Q: float = 1.0, center=0.0) -> np.ndarray:
    """Exact solitary wave of ``u'' + Q |u|^(p-2) u = omega u`` on the line.

    ``u(x) = (p omega / (2 Q) sech^2((p-2) sqrt(omega) x / 2))^(1/(p-2))``,
    evaluated along the first axis (n = 1 only).
    """
    if g.n != 1:
        raise ValueError("power_soliton is one-dimensional")
    x = g.x - center
    s = 1.0 / np.cosh(0.5 * (p - 2) * np.sqrt(omega) * x)
    return ((0.5 * p * omega / Q) * s**2) ** (1.0 / (p - 2)) + 0j


def scaling_exponents(n: int, p):
    """``(alpha, beta)`` with ``alpha = 2(p-2)/((p-2)n-4)``, ``beta = 4/((p-2)n-4)``.

    Exact ``Fraction`` results for rational input.
    """
    from fractions import Fraction

    if isinstance(p, float):
        denom = (p - 2) * n - 4
        if denom == 0:
            raise ValueError("critical exponent (p-2)n = 4 has no rescaling law")
        return 2 * (p - 2) / denom, 4 / denom
    p = Fraction(p)
    denom = (p - 2) * n - 4
    if denom == 0:
        raise ValueError("critical exponent (p-2)n = 4 has no rescaling law")
    return 2 * (p - 2) / denom, Fraction(4) / denom


def spectral_eval_1d(g: Grid, values: np.ndarray, points: np.ndarray, axis: int = 0) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``values`` at ``points`` along ``axis``.

    The Nyquist coefficient is split evenly between ``+-N/2`` so the interpolant
    of real data stays real.
    """
    N = g.N
    c = np.fft.fft(values, axis=axis) / N
    k = g.k.copy()
    c = np.moveaxis(c, axis, 0)
    ny = N // 2
    c_ny = c[ny].copy()
    k_full = np.concatenate([k, [np.pi / g.L * ny]])
    c_full = np.concatenate([c, c_ny[None] * 0.5], axis=0)
    c_full[ny] = 0.5 * c_ny
    E = np.exp(1j * np.outer(points + g.L, k_full))
    out = np.tensordot(E, c_full, axes=(1, 0))
    return np.moveaxis(out, 0, axis)


def resample(g: Grid, u: np.ndarray, s: float) -> np.ndarray:
    """``u(x / s)`` by trigonometric interpolation.

    ``u`` stands for a function on R^n, so it is taken as zero outside the box
    rather than continued periodically.
    """
    out = np.asarray(g.check(u), dtype=complex)
    pts = g.x / s
    outside = (pts < -g.L) | (pts >= g.L)
    for axis in range(g.n):
        out = spectral_eval_1d(g, out, pts, axis=axis)
        idx = [slice(None)] * g.n
        idx[axis] = outside
        out[tuple(idx)] = 0.0
    return out


def rescaled_minimizer(g: Grid, u0: np.ndarray, rho: float, p: float,
                       tail_tol: float = 1e-8) -> np.ndarray:
    """``u0(x / rho^alpha) * rho^(-beta)`` resampled by spectral interpolation.

    Maps a minimizer at mass 1 with constant coefficients to one at mass
    ``rho^2``. ``u0`` is taken to vanish outside the box. Raises if the result
    is under-resolved (more than ``tail_tol`` of its mass in the outer third of
    the spectrum).
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    alpha, beta = scaling_exponents(g.n, float(p))
    u0 = g.check(u0)
    if rho == 1.0:
        return u0.copy()
    out = resample(g, u0, rho**alpha) * rho ** (-beta)
    u_hat = np.fft.fftn(out)
    kmax = np.pi * g.N / (2 * g.L)
    outer = np.sqrt(g.k2) > (2.0 / 3.0) * kmax
    total = np.sum(np.abs(u_hat) ** 2)
    if total > 0 and np.sum(np.abs(u_hat[outer]) ** 2) / total > tail_tol:
        raise ValueError("rescaled profile is under-resolved on this grid (spectral tail too large)")
    return out
