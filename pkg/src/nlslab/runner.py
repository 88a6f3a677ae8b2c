"""Execute a :class:`RunConfig`: dispatch the experiment, write files, build the manifest."""

from __future__ import annotations

import dataclasses
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import io
from .config import RunConfig, config_to_dict
from .dynamics import BlowUpError, evolve
from .energy import EnergyModel, energy
from .grid import Grid, local_mass_sup, make_grid
from .groundstate import GroundState, from_profile, minimize, power_soliton, project
from .potentials import clip_min, eval_potential
from .stability import stability_experiment
from .theory import (
    SweepResult,
    check_negative_infimum,
    check_strict_inequality,
    check_subadditivity,
    gaussian_profile,
    spreading_family,
    translating_bump_gaps,
    vanishing_diagnostics,
)

OUT_ENV = "NLSLAB_OUT"
DEFAULT_OUT = "nlslab-out"

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_ABORT = 3
EXIT_VERDICT = 4


@dataclass
class JobStatus:
    name: str
    status: str  # ok | aborted | invalid
    verdict_ok: bool = True
    message: str = ""
    abort_time: float | None = None


@dataclass
class RunManifest:
    config: dict
    version: str
    wall_time: float
    jobs: list[JobStatus]
    files: list[dict] = field(default_factory=list)
    output_dir: str = ""

    @property
    def aborted(self) -> bool:
        return any(j.status == "aborted" for j in self.jobs)

    @property
    def invalid(self) -> bool:
        return any(j.status == "invalid" for j in self.jobs)

    @property
    def verdict_ok(self) -> bool:
        return all(j.verdict_ok for j in self.jobs)

    def exit_code(self, check: bool = False) -> int:
        if self.invalid:
            return EXIT_PARSE
        if self.aborted:
            return EXIT_ABORT
        if check and not self.verdict_ok:
            return EXIT_VERDICT
        return EXIT_OK

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "version": self.version,
            "wall_time": self.wall_time,
            "jobs": [dataclasses.asdict(j) for j in self.jobs],
            "files": self.files,
            "output_dir": self.output_dir,
        }

    def verify(self) -> bool:
        """True when every listed file exists and its hash matches."""
        base = Path(self.output_dir)
        for f in self.files:
            path = base / f["path"]
            if not path.is_file() or io.sha256_file(path) != f["sha256"]:
                return False
        return True


def resolve_output_dir(cfg: RunConfig, out: str | os.PathLike | None = None) -> Path:
    """``out`` argument, then the config, then ``$NLSLAB_OUT``, then ``./nlslab-out``."""
    for cand in (out, cfg.output.directory, os.environ.get(OUT_ENV)):
        if cand:
            return Path(cand)
    return Path(DEFAULT_OUT)


class _Writer:
    """Serializes file emission and remembers what was written."""

    def __init__(self, root: Path, formats):
        self.root = root
        self.formats = set(formats)
        self.files: list[dict] = []

    def _register(self, path: Path, partial: bool):
        self.files.append({
            "path": path.name,
            "sha256": io.sha256_file(path),
            "bytes": path.stat().st_size,
            "partial": partial,
        })

    def csv(self, name, rows, columns=None, partial=False):
        if "csv" in self.formats:
            self._register(io.write_csv(self.root / name, rows, columns), partial)

    def json(self, name, record, partial=False):
        if "json" in self.formats:
            self._register(io.write_json(self.root / name, record), partial)

    def field(self, name, g: Grid, u, partial=False):
        if "binary-fields" in self.formats:
            self._register(io.write_field(self.root / name, g, u), partial)


def build_model(cfg: RunConfig) -> EnergyModel:
    m, num = cfg.model, cfg.numerics
    g = make_grid(m.n, num.L, num.N)
    return EnergyModel(g, m.order, m.p, eval_potential(m.V, g), eval_potential(m.Q, g),
                       lambda0=m.lambda0, allow_supercritical=m.allow_supercritical)


def _solver_opts(cfg: RunConfig):
    return dataclasses.replace(cfg.numerics.solver, seed=cfg.seed)


def _constant_q(model: EnergyModel) -> float:
    if np.ptp(model.Q) != 0:
        raise ValueError("power-soliton initial data needs a constant Q")
    return float(model.Q.flat[0])


def _gs_record(model: EnergyModel, gs: GroundState) -> dict:
    return {**gs.summary(), "breakdown": energy(model, gs.u0).as_row()}


def _sweep_record(res: SweepResult) -> dict:
    return {
        "parameter": res.parameter_name,
        "rows": list(res.rows()),
        "empirical_threshold": res.empirical_threshold,
        "threshold_uncertainty": res.threshold_uncertainty,
        "untested": None if res.untested is None else res.untested.tolist(),
        "notes": res.notes,
    }


SWEEP_COLUMNS = ["param", "lhs", "rhs", "strict", "margin"]


# -- experiments ----------------------------------------------------------------

def _groundstate(cfg, model, w, pool_map):
    gs = minimize(model, cfg.model.rho, _solver_opts(cfg))
    w.json("groundstate.json", _gs_record(model, gs))
    w.csv("energy.csv", [energy(model, gs.u0).as_row()])
    w.csv("history.csv", ({"iteration": i, "energy": e} for i, e in enumerate(gs.history)),
          ["iteration", "energy"])
    w.field("groundstate.nlsf", model.grid, gs.u0)
    return gs.converged, "" if gs.converged else f"not converged (residual {gs.residual:.3g})"


def _rho_sweep(cfg, model, w, pool_map):
    opts = _solver_opts(cfg)
    rhos = cfg.model.rho_grid
    states = list(pool_map(lambda r: minimize(model, r, opts), rhos))
    rows = []
    for i, gs in enumerate(states):
        rows.append({**gs.summary(), **energy(model, gs.u0).as_row()})
        w.field(f"groundstate_{i:03d}.nlsf", model.grid, gs.u0)
    cols = ["rho", "energy", "omega", "residual", "iterations", "converged",
            "kinetic", "potential", "nonlinear", "s_part", "t_part"]
    w.csv("rho_sweep.csv", rows, cols)
    w.json("rho_sweep.json", {"rows": [{c: r[c] for c in cols} for r in rows]})
    ok = all(gs.converged for gs in states)
    return ok, "" if ok else "some ground states did not converge"


def _initial_state(cfg, model, initial, omega):
    g = model.grid
    if initial == "minimizer":
        gs = minimize(model, cfg.model.rho, _solver_opts(cfg))
        if not gs.converged:
            raise ValueError(f"ground state did not converge (residual {gs.residual:.3g})")
        return gs
    if initial == "power-soliton":
        u = power_soliton(g, model.p, omega, Q=_constant_q(model))
        return from_profile(model, u, tol=1e-6)
    rng = np.random.default_rng(cfg.seed)
    u = project(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape), cfg.model.rho)
    return from_profile(model, u)


def _evolve(cfg, model, w, pool_map):
    p = cfg.params
    num = cfg.numerics
    gs = _initial_state(cfg, model, p.initial, p.omega)
    u0 = p.amplitude * gs.u0
    w.field("initial.nlsf", model.grid, u0)
    cols = ["time", "mass", "energy"]
    try:
        tr = evolve(model, u0, num.dt, num.T, snapshot_every=p.snapshot_every,
                    max_energy_drift=p.max_energy_drift, max_tail=p.max_tail)
    except BlowUpError as exc:
        if exc.trace is not None:
            w.csv("trace.csv", exc.trace.rows(), cols, partial=True)
            w.field("final.nlsf", model.grid, exc.trace.final, partial=True)
        w.json("evolve.json", {"aborted": True, "abort_time": exc.time, "message": str(exc)},
               partial=True)
        raise
    w.csv("trace.csv", tr.rows(), cols)
    w.field("final.nlsf", model.grid, tr.final)
    m0 = tr.mass_series[0]
    w.json("evolve.json", {
        "aborted": False,
        "max_relative_mass_drift": float(np.max(np.abs(tr.mass_series - m0)) / m0),
        "max_energy_drift": float(np.max(np.abs(tr.energy_series - tr.energy_series[0]))),
        "final_time": float(tr.times[-1]),
    })
    return True, ""


def _stability(cfg, model, w, pool_map):
    p = cfg.params
    num = cfg.numerics
    gs = _initial_state(cfg, model, p.initial, p.omega)
    rep = stability_experiment(model, gs, p.delta, p.epsilon, num.T, num.dt,
                               perturbation=p.perturbation, seed=cfg.seed, mode=p.mode,
                               record_every=p.record_every, max_tail=p.max_tail,
                               require_converged=(p.initial == "minimizer"))
    w.csv("stability.csv", rep.rows(), ["time", "orbit_distance"])
    w.json("stability.json", {**rep.summary(), "groundstate": gs.summary()})
    return rep.stable, rep.verdict


def _subadditivity(cfg, model, w, pool_map):
    p = cfg.params
    res = check_subadditivity(model, cfg.model.rho, p.thetas, _solver_opts(cfg),
                              mus=p.mus or None, map_fn=pool_map)
    w.csv("subadditivity.csv", res.rows(), SWEEP_COLUMNS)
    record = {**_sweep_record(res), "ratio": (res.lhs / res.rhs).tolist()}
    if res.binary is not None:
        w.csv("binary_splitting.csv", res.binary.rows(), SWEEP_COLUMNS)
        record["binary"] = _sweep_record(res.binary)
    w.json("subadditivity.json", record)
    ok = bool(res.strict_holds.all()) and (res.binary is None or bool(res.binary.strict_holds.all()))
    return ok, "" if ok else "strict subadditivity not established at every point"


def _strict_inequality(cfg, model, w, pool_map):
    m = cfg.model
    res = check_strict_inequality(model.grid, model.V, model.Q, m.lambda0, m.p, m.rho_grid,
                                  m.order, _solver_opts(cfg),
                                  require_hypothesis=cfg.params.require_hypothesis,
                                  map_fn=pool_map)
    w.csv("strict_inequality.csv", res.rows(), SWEEP_COLUMNS)
    w.json("strict_inequality.json", _sweep_record(res))
    ok = res.empirical_threshold is not None
    return ok, "" if ok else "no empirical threshold on this grid"


def _negative_infimum(cfg, model, w, pool_map):
    p = cfg.params
    v = gaussian_profile(model.grid, cfg.model.rho, width=p.width)
    res = check_negative_infimum(model, cfg.model.rho, p.lambdas, profile=v)
    w.csv("negative_infimum.csv", res.rows(), SWEEP_COLUMNS)
    w.json("negative_infimum.json", _sweep_record(res))
    ok = bool(res.strict_holds.any())
    return ok, "" if ok else "no negative energy found on the scan"


def _vanishing(cfg, model, w, pool_map):
    p = cfg.params
    g = model.grid
    rho = cfg.model.rho
    spread = vanishing_diagnostics(g, spreading_family(g, p.ks, rho), p.window, p.q)
    w.csv("spreading.csv",
          ({"k": k, "sup": s, "lq": l, "h2": h}
           for k, s, l, h in zip(p.ks, spread.sup, spread.lq_norm, spread.h2_norm)),
          ["k", "sup", "lq", "h2"])
    gs = minimize(model, rho, _solver_opts(cfg))
    sups = []
    for a in p.shifts:
        cells = int(round(a / g.dx))
        sups.append(local_mass_sup(g, np.roll(gs.u0, cells, axis=0), p.window))
    w.csv("translates.csv", ({"shift": a, "sup": s} for a, s in zip(p.shifts, sups)),
          ["shift", "sup"])
    qclip = clip_min(model.Q, cfg.model.lambda0)
    gaps = translating_bump_gaps(g, p.separations, model.p, qclip, width=p.bump_width)
    w.csv("brezis_lieb.csv", ({"separation": s, "gap": v} for s, v in zip(p.separations, gaps)),
          ["separation", "gap"])
    decreasing = bool(np.all(np.diff(spread.sup) < 0) and np.all(np.diff(spread.lq_norm) < 0))
    mu = 0.5 * sups[0] if sups else 0.0
    kept = bool(min(sups, default=0.0) > mu > 0)
    gaps_down = bool(np.all(np.diff(gaps) <= 0))
    w.json("vanishing.json", {
        "spreading_decreasing": decreasing,
        "translates_min_sup": min(sups, default=None),
        "translates_mu": mu,
        "gaps_decreasing": gaps_down,
        "groundstate": gs.summary(),
    })
    ok = decreasing and kept and gaps_down
    return ok, "" if ok else "vanishing diagnostics not as expected"


EXPERIMENTS = {
    "groundstate": _groundstate,
    "rho-sweep": _rho_sweep,
    "evolve": _evolve,
    "stability": _stability,
    "subadditivity": _subadditivity,
    "strict-inequality": _strict_inequality,
    "negative-infimum": _negative_infimum,
    "vanishing": _vanishing,
}


def run(cfg: RunConfig, out: str | os.PathLike | None = None, threads: int = 1) -> RunManifest:
    """Run one experiment and write ``manifest.json`` next to its outputs.

    Numerical aborts and invalid setups are recorded in the manifest rather
    than raised; :meth:`RunManifest.exit_code` maps them to process exit codes.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    root = resolve_output_dir(cfg, out)
    root.mkdir(parents=True, exist_ok=True)
    w = _Writer(root, cfg.output.formats)
    t0 = time.perf_counter()
    job = JobStatus(cfg.experiment, "ok")
    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    pool_map = executor.map if executor is not None else map
    try:
        model = build_model(cfg)
        ok, message = EXPERIMENTS[cfg.experiment](cfg, model, w, pool_map)
        job.verdict_ok, job.message = bool(ok), message
    except BlowUpError as exc:
        job.status, job.verdict_ok, job.message, job.abort_time = "aborted", False, str(exc), exc.time
    except FloatingPointError as exc:
        job.status, job.verdict_ok, job.message = "aborted", False, str(exc)
    except ValueError as exc:
        job.status, job.verdict_ok, job.message = "invalid", False, str(exc)
    finally:
        if executor is not None:
            executor.shutdown()
    manifest = RunManifest(config_to_dict(cfg), __version__, time.perf_counter() - t0, [job],
                           w.files, str(root))
    io.write_json(root / "manifest.json", manifest.to_dict())
    return manifest


def load_manifest(path) -> RunManifest:
    d = io.read_json(path)
    jobs = [JobStatus(**j) for j in d["jobs"]]
    return RunManifest(d["config"], d["version"], d["wall_time"], jobs, d["files"], d["output_dir"])


__all__ = ["RunManifest", "JobStatus", "run", "build_model", "resolve_output_dir",
           "load_manifest"]
