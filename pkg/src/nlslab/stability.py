"""Orbital stability as a numerical experiment.

The distance to the set of minimizers is replaced by the distance to the
symmetry orbit of one computed minimizer: gauge phases always, and cyclic grid
translations when the coefficients are constant. The result is therefore an
upper bound for the true orbit distance, and a "stable" verdict only covers the
sampled perturbation, tolerance and horizon.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .dynamics import BlowUpError, evolve
from .energy import EnergyModel
from .grid import Grid
from .groundstate import GroundState, project

SOBOLEV_ORDERS = {"H1": 1, "H2": 2}


def _sobolev_weight(g: Grid, order: str) -> np.ndarray:
    try:
        s = SOBOLEV_ORDERS[order]
    except KeyError:
        raise ValueError(f"order must be one of {sorted(SOBOLEV_ORDERS)}") from None
    return (1.0 + g.k2) ** s


def norm_order(model: EnergyModel) -> str:
    return "H1" if model.order == "second" else "H2"


def sobolev_norm(g: Grid, u: np.ndarray, order: str) -> float:
    u_hat = np.fft.fftn(g.check(u)) / g.size
    return float(np.sqrt(g.volume * np.sum(_sobolev_weight(g, order) * np.abs(u_hat) ** 2)))


def sobolev_distance(g: Grid, u: np.ndarray, v: np.ndarray, order: str = "H1") -> float:
    """``sqrt(volume * sum (1 + |k|^2)^s |u_hat - v_hat|^2)`` with s = 1 or 2."""
    g.check(u)
    g.check(v)
    return sobolev_norm(g, np.asarray(u) - np.asarray(v), order)


def orbit_distance(g: Grid, v: np.ndarray, u0: np.ndarray, order: str = "H1",
                   translations: bool = False, n_theta: int = 64) -> float:
    """Distance from ``v`` to ``{exp(i theta) u0(. - a)}``.

    theta is scanned on ``n_theta`` points and refined by golden-section search
    around the best sample; ``a`` ranges over all cyclic grid shifts when
    ``translations`` is set (otherwise only ``a = 0``).
    """
    w = _sobolev_weight(g, order)
    v_hat = np.fft.fftn(g.check(v)) / g.size
    u_hat = np.fft.fftn(g.check(u0)) / g.size
    base = g.volume * float(np.sum(w * (np.abs(v_hat) ** 2 + np.abs(u_hat) ** 2)))
    # overlap with u0 translated by every grid shift: vol * sum w conj(v) u e^{-ika}
    c = w * np.conj(v_hat) * u_hat
    if translations:
        overlap = g.volume * np.fft.fftn(c).ravel()
    else:
        overlap = np.array([g.volume * c.sum()])

    def d2(theta):
        return base - 2.0 * np.max((np.exp(1j * theta) * overlap).real)

    thetas = 2 * np.pi * np.arange(n_theta) / n_theta
    vals = np.array([d2(t) for t in thetas])
    j = int(np.argmin(vals))
    h = 2 * np.pi / n_theta
    res = minimize_scalar(d2, bracket=(thetas[j] - h, thetas[j], thetas[j] + h),
                          method="golden", tol=1e-10)
    theta = float(res.x) if res.fun <= vals[j] else float(thetas[j])
    shift = int(np.argmax((np.exp(1j * theta) * overlap).real))
    # for a fixed shift the phase optimum is exact: theta = -arg(overlap)
    if overlap[shift] != 0:
        theta = -float(np.angle(overlap[shift]))
    # evaluate the winner directly; base - 2|overlap| cancels catastrophically near 0
    idx = np.unravel_index(shift, g.shape) if translations else (0,) * g.n
    phase = sum(kk * (i * g.dx) for kk, i in zip(g.wavevectors, idx))
    diff = v_hat - np.exp(1j * theta) * u_hat * np.exp(-1j * phase)
    return float(np.sqrt(g.volume * np.sum(w * np.abs(diff) ** 2)))


@dataclass
class StabilityReport:
    delta: float
    epsilon: float
    horizon: float
    times: np.ndarray
    distance_series: np.ndarray
    max_distance: float
    stable: bool
    exceeded_at: float | None = None
    aborted: bool = False
    message: str = ""
    notes: tuple[str, ...] = field(default=(
        "orbit = symmetry orbit of one computed minimizer (upper-bound surrogate)",
        "finitely many perturbations sampled",
    ))

    @property
    def verdict(self) -> str:
        if self.stable:
            return f"stable-at-(delta={self.delta:g}, epsilon={self.epsilon:g}, T={self.horizon:g})"
        return f"exceeded-at-time-{self.exceeded_at:g}"

    def summary(self) -> dict:
        return {
            "delta": self.delta,
            "epsilon": self.epsilon,
            "horizon": self.horizon,
            "max_distance": self.max_distance,
            "verdict": self.verdict,
            "stable": self.stable,
            "exceeded_at": self.exceeded_at,
            "aborted": self.aborted,
            "message": self.message,
            "notes": list(self.notes),
        }

    def rows(self):
        for t, d in zip(self.times, self.distance_series):
            yield {"time": float(t), "orbit_distance": float(d)}


def make_perturbation(g: Grid, kind: str, order: str, seed: int = 0, mode=1,
                      smoothing: float = 1.0) -> np.ndarray:
    """Unit-norm perturbation direction in the chosen Sobolev norm.

    ``kind`` is ``random`` (smoothed complex noise), ``mode`` (plane wave with
    integer mode number ``mode`` along each axis, scalar or tuple) or
    ``mass-preserving-random`` (same noise as ``random``; mass is restored by
    :func:`perturb`).
    """
    if kind in ("random", "mass-preserving-random"):
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
        h = np.fft.ifftn(np.fft.fftn(noise) * np.exp(-0.5 * smoothing**2 * g.k2))
    elif kind == "mode":
        m = np.broadcast_to(np.asarray(mode, dtype=float), (g.n,))
        phase = sum(mi * (np.pi / g.L) * xi for mi, xi in zip(m, g.coords))
        h = np.exp(1j * phase)
    else:
        raise ValueError(f"unknown perturbation kind {kind!r}")
    return h / sobolev_norm(g, h, order)


def perturb(g: Grid, u0: np.ndarray, h: np.ndarray, delta: float, order: str,
            mass_preserving: bool = False) -> np.ndarray:
    """``u0 + delta h``; with ``mass_preserving`` the sum is projected back to the
    mass sphere of ``u0`` and the amplitude is re-solved so the offset is ``delta``."""
    if delta == 0:
        return np.array(u0, dtype=complex)
    if not mass_preserving:
        return u0 + delta * h
    rho = np.sqrt(np.sum(np.abs(u0) ** 2) * g.cell_volume)

    def offset(c):
        return sobolev_distance(g, project(g, u0 + c * h, rho), u0, order) - delta

    hi = delta
    while offset(hi) < 0:
        hi *= 2
        if hi > 1e6 * max(delta, 1.0):
            raise ValueError("cannot reach the requested perturbation size on the mass sphere")
    c = brentq(offset, 0.0, hi, xtol=1e-15, rtol=1e-12)
    return project(g, u0 + c * h, rho)


def stability_experiment(model: EnergyModel, gs: GroundState, delta: float, epsilon: float,
                         T: float, dt: float, perturbation: str = "random", seed: int = 0,
                         mode=1, record_every: int = 10, max_tail: float | None = 1e-2,
                         require_converged: bool = True) -> StabilityReport:
    """Perturb a ground state by ``delta``, evolve to ``T``, track the orbit distance.

    The verdict is "stable" when the distance stays below ``epsilon`` at every
    recorded time. A detected blow-up (see :func:`nlslab.dynamics.evolve`) gives
    an "exceeded" verdict at the abort time.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if require_converged and not gs.converged:
        raise ValueError("ground state is not converged")
    g = model.grid
    order = norm_order(model)
    translations = model.autonomous
    kind = perturbation
    h = make_perturbation(g, kind, order, seed=seed, mode=mode)
    v0 = perturb(g, gs.u0, h, delta, order, mass_preserving=(kind == "mass-preserving-random"))

    times, dists = [], []

    def monitor(t, u):
        times.append(t)
        dists.append(orbit_distance(g, u, gs.u0, order, translations=translations))

    aborted, message = False, ""
    try:
        evolve(model, v0, dt, T, snapshot_every=record_every, callback=monitor, max_tail=max_tail)
    except BlowUpError as exc:
        aborted, message = True, str(exc)
        abort_time = exc.time
    times_a = np.array(times)
    dists_a = np.array(dists)
    max_d = float(dists_a.max()) if dists_a.size else 0.0
    over = np.nonzero(dists_a >= epsilon)[0]
    if over.size:
        stable, exceeded_at = False, float(times_a[over[0]])
    elif aborted:
        stable, exceeded_at = False, float(abort_time)
    else:
        stable, exceeded_at = True, None
    return StabilityReport(float(delta), float(epsilon), float(T), times_a, dists_a, max_d,
                           stable, exceeded_at, aborted, message)
