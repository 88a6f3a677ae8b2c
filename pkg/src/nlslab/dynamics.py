"""Strang split-step Fourier integrator for the two evolution equations.

Both equations are written as ``i u_t = L u + V u - Q |u|^(p-2) u`` with
``L = -Lap`` (second order) or ``L = Lap^2`` (fourth order). A standing wave
``u0 exp(i omega t)`` of this flow satisfies ``gradient(u0) = -omega u0``, which
is exactly the multiplier returned by ``estimate_omega``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyModel, abs_pow, mass, total_energy


class BlowUpError(FloatingPointError):
    """Raised when the solution stops being finite."""

    def __init__(self, message: str, time: float, trace: "EvolutionTrace | None" = None):
        super().__init__(message)
        self.time = time
        # records up to the abort, so callers can still write partial output
        self.trace = trace


@dataclass
class EvolutionTrace:
    times: np.ndarray
    mass_series: np.ndarray
    energy_series: np.ndarray
    snapshots: list[np.ndarray] = field(default_factory=list, repr=False)
    final: np.ndarray | None = field(default=None, repr=False)
    aborted_at: float | None = None

    def rows(self):
        for t, m, e in zip(self.times, self.mass_series, self.energy_series):
            yield {"time": float(t), "mass": float(m), "energy": float(e)}


def _nonlinear_phase(model: EnergyModel, u: np.ndarray, h: float) -> np.ndarray:
    # |u| is invariant under this sub-flow, so the rotation is exact
    return u * np.exp(-1j * h * (model.V - model.Q * abs_pow(u, model.p - 2)))


def step(model: EnergyModel, u: np.ndarray, dt: float) -> np.ndarray:
    """One Strang step: half nonlinear, full linear, half nonlinear.

    Negative ``dt`` runs the scheme backwards (the splitting is symmetric).
    """
    u = model.grid.check(u)
    u = _nonlinear_phase(model, u, 0.5 * dt)
    u = np.fft.ifftn(np.fft.fftn(u) * np.exp(-1j * dt * model.linear_symbol))
    return _nonlinear_phase(model, u, 0.5 * dt)


def spectral_tail(model: EnergyModel, u: np.ndarray) -> float:
    """Fraction of the mass carried by modes beyond two thirds of the Nyquist wavenumber."""
    g = model.grid
    w = np.abs(np.fft.fftn(u)) ** 2
    total = w.sum()
    if total == 0:
        return 0.0
    kmax = np.pi * g.N / (2 * g.L)
    return float(w[g.k2 > (2.0 * kmax / 3.0) ** 2].sum() / total)


def energy_scale(model: EnergyModel, u: np.ndarray) -> float:
    """``|kinetic| + |potential| + |nonlinear|``, the yardstick for energy drift."""
    from .energy import energy

    e = energy(model, u)
    return abs(e.kinetic) + abs(e.potential) + abs(e.nonlinear)


def evolve(model: EnergyModel, u0: np.ndarray, dt: float, T: float,
           snapshot_every: int = 1, keep_snapshots: bool = False,
           callback=None, max_energy_drift: float | None = None,
           max_tail: float | None = None) -> EvolutionTrace:
    """Integrate up to ``T`` with fixed ``dt`` (the last step is shortened to land on T).

    Mass and energy are recorded at ``t = 0`` and every ``snapshot_every`` steps
    plus the final time. ``callback(t, u)`` is invoked at the same instants.

    The splitting is unitary, so a collapsing or under-resolved run does not
    produce NaNs by itself. Two optional monitors, checked at every record,
    turn it into an abort: ``max_energy_drift`` bounds ``|E(t) - E(0)|``
    relative to :func:`energy_scale` at t=0, and ``max_tail`` bounds
    :func:`spectral_tail`. Any abort raises :class:`BlowUpError` carrying the
    time and the partial trace.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not T >= dt:
        raise ValueError("T must be at least dt")
    if snapshot_every < 1:
        raise ValueError("snapshot_every must be >= 1")
    g = model.grid
    u = np.asarray(g.check(u0), dtype=complex)
    nsteps = int(np.ceil(T / dt - 1e-9))
    times, masses, energies, snaps = [], [], [], []

    def record(t, u):
        times.append(t)
        masses.append(mass(g, u))
        energies.append(total_energy(model, u))
        if keep_snapshots:
            snaps.append(u.copy())
        if callback is not None:
            callback(t, u)

    def abort(msg, t):
        trace = EvolutionTrace(np.array(times), np.array(masses), np.array(energies), snaps, u, t)
        return BlowUpError(msg, t, trace)

    record(0.0, u)
    scale = energy_scale(model, u) if max_energy_drift is not None else 0.0
    t = 0.0
    for j in range(1, nsteps + 1):
        h = dt if j < nsteps else T - (nsteps - 1) * dt
        u = step(model, u, h)
        t = (j - 1) * dt + h
        if not np.all(np.isfinite(u)):
            raise abort(f"non-finite solution at t={t:.6g}", t)
        if j % snapshot_every == 0 or j == nsteps:
            record(t, u)
            if not np.isfinite(energies[-1]):
                raise abort(f"non-finite energy at t={t:.6g}", t)
            if max_energy_drift is not None:
                drift = abs(energies[-1] - energies[0])
                if drift > max_energy_drift * max(scale, np.finfo(float).tiny):
                    raise abort(
                        f"relative energy drift {drift / scale:.3g} exceeds "
                        f"{max_energy_drift:g} at t={t:.6g}", t)
            if max_tail is not None:
                tail = spectral_tail(model, u)
                if tail > max_tail:
                    raise abort(
                        f"spectral tail {tail:.3g} exceeds {max_tail:g} at t={t:.6g} "
                        "(under-resolved or collapsing)", t)
    return EvolutionTrace(np.array(times), np.array(masses), np.array(energies), snaps, u)
