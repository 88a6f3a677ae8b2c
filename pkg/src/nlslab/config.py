"""Run configurations in TOML.

Parsing is strict: unknown keys, missing required keys and type mismatches
are errors that name the offending field (and its line when it can be found).
Every default is materialized, so ``render(parse(text))`` is a complete echo
of what ran. A minimal document::

    experiment = "groundstate"

    [model]
    order = "second"
    n = 1
    p = 4
    rho = 1.0
    V = { kind = "zero" }
    Q = { kind = "constant", value = 1.0 }
"""

from __future__ import annotations

import dataclasses
import re
import types
import typing
from dataclasses import dataclass, field
from typing import Any

import tomli_w

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .energy import critical_exponent, is_subcritical
from .groundstate import SolverOptions
from .potentials import PotentialSpec

EXPERIMENTS = ("groundstate", "evolve", "stability", "subadditivity", "strict-inequality",
               "negative-infimum", "vanishing", "rho-sweep")
FORMATS = ("csv", "json", "binary-fields")


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` and ``line`` locate the problem when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if field:
            where.append(f"field '{field}'")
        if line:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.field = field
        self.line = line


@dataclass(frozen=True)
class ModelConfig:
    order: str
    n: int
    p: float
    V: PotentialSpec
    Q: PotentialSpec
    rho: float = 1.0
    rho_grid: tuple[float, ...] = ()
    lambda0: float = 1.0
    allow_supercritical: bool = False


@dataclass(frozen=True)
class NumericsConfig:
    L: float = 20.0
    N: int = 512
    dt: float = 1e-3
    T: float = 1.0
    solver: SolverOptions = field(default_factory=SolverOptions)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = ""
    formats: tuple[str, ...] = ("csv", "json")


@dataclass(frozen=True)
class GroundstateParams:
    pass


@dataclass(frozen=True)
class EvolveParams:
    # minimizer | power-soliton | rough
    initial: str = "minimizer"
    amplitude: float = 1.0
    omega: float = 1.0
    snapshot_every: int = 100
    max_energy_drift: float = 0.5
    max_tail: float = 1e-2


@dataclass(frozen=True)
class StabilityParams:
    delta: float = 1e-2
    epsilon: float = 1e-1
    perturbation: str = "random"
    mode: int = 1
    record_every: int = 10
    max_tail: float = 1e-2
    # minimizer | power-soliton
    initial: str = "minimizer"
    omega: float = 1.0


@dataclass(frozen=True)
class SubadditivityParams:
    thetas: tuple[float, ...] = (1.2, 1.5, 2.0)
    mus: tuple[float, ...] = ()


@dataclass(frozen=True)
class StrictInequalityParams:
    require_hypothesis: bool = True


@dataclass(frozen=True)
class NegativeInfimumParams:
    lambdas: tuple[float, ...] = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0)
    width: float = 1.0


@dataclass(frozen=True)
class VanishingParams:
    ks: tuple[float, ...] = tuple(10.0**j for j in range(9))
    window: float = 1.0
    q: float = 4.0
    shifts: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0)
    separations: tuple[float, ...] = (2.0, 4.0, 6.0, 8.0, 10.0, 12.0)
    bump_width: float = 1.0


@dataclass(frozen=True)
class RhoSweepParams:
    pass


PARAMS = {
    "groundstate": GroundstateParams,
    "evolve": EvolveParams,
    "stability": StabilityParams,
    "subadditivity": SubadditivityParams,
    "strict-inequality": StrictInequalityParams,
    "negative-infimum": NegativeInfimumParams,
    "vanishing": VanishingParams,
    "rho-sweep": RhoSweepParams,
}


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    model: ModelConfig
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    params: Any = None
    seed: int = 0

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


# -- generic dataclass <-> table conversion -------------------------------------

def _type_name(tp) -> str:
    return getattr(tp, "__name__", str(tp))


def _coerce(value, tp, path: str, locate):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin in (typing.Union, types.UnionType):
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _coerce(value, inner[0], path, locate)
    if tp is PotentialSpec:
        try:
            return PotentialSpec.from_dict(value)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc).strip('"'), path, locate(path)) from None
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, path, locate)
    if origin is tuple:
        if not isinstance(value, list):
            raise ConfigError(f"expected an array, got {type(value).__name__}", path, locate(path))
        return tuple(_coerce(v, args[0], f"{path}[{i}]", locate) for i, v in enumerate(value))
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected a boolean, got {value!r}", path, locate(path))
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", path, locate(path))
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", path, locate(path))
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", path, locate(path))
        return value
    raise ConfigError(f"unsupported field type {_type_name(tp)}", path)


def _build(cls, table, path: str, locate):
    if not isinstance(table, dict):
        raise ConfigError(f"expected a table, got {type(table).__name__}", path or None,
                          locate(path))
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in table:
        if key not in names:
            full = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown key (allowed: {', '.join(sorted(names)) or 'none'})",
                              full, locate(full))
    kw = {}
    for f in dataclasses.fields(cls):
        full = f"{path}.{f.name}" if path else f.name
        if f.name in table:
            kw[f.name] = _coerce(table[f.name], hints[f.name], full, locate)
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise ConfigError("missing required key", full, locate(path) if path else None)
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path or None, locate(path)) from None


def _to_table(obj) -> dict:
    out = {}
    for f in dataclasses.fields(obj):
        v = getattr(obj, f.name)
        if v is None:
            continue  # TOML has no null; absent means default
        out[f.name] = _to_value(v)
    return out


def _to_value(v):
    if isinstance(v, PotentialSpec):
        return v.to_dict()
    if dataclasses.is_dataclass(v):
        return _to_table(v)
    if isinstance(v, tuple):
        return [_to_value(x) for x in v]
    return v


def locator(text: str):
    """Map a dotted field path to the first line that assigns its last key."""
    lines = text.splitlines()

    def locate(path: str | None) -> int | None:
        if not path:
            return None
        key = re.sub(r"\[\d+\]$", "", path).split(".")[-1]
        pat = re.compile(rf"^\s*(\[+\s*)?[\w.\-\"]*\b{re.escape(key)}\b\s*(=|\])")
        for i, line in enumerate(lines, 1):
            if pat.search(line):
                return i
        return None

    return locate


# -- public API -----------------------------------------------------------------

def parse_config(text: str, override_supercritical: bool = False) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"malformed document: {exc}", line=int(m.group(1)) if m else None) from None
    return config_from_dict(doc, locator(text), override_supercritical)


def config_from_dict(doc: dict, locate=None, override_supercritical: bool = False) -> RunConfig:
    locate = locate or (lambda path: None)
    doc = dict(doc)
    exp = doc.get("experiment")
    if exp is None:
        raise ConfigError("missing required key", "experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}; expected one of {EXPERIMENTS}",
                          "experiment", locate("experiment"))
    params_table = doc.pop("params", {})
    cfg = _build(RunConfig, {k: v for k, v in doc.items()}, "", locate)
    params = _build(PARAMS[exp], params_table, "params", locate)
    cfg = cfg.replace(params=params)
    if override_supercritical and not cfg.model.allow_supercritical:
        cfg = cfg.replace(model=dataclasses.replace(cfg.model, allow_supercritical=True))
    validate(cfg, locate)
    return cfg


def validate(cfg: RunConfig, locate=None) -> None:
    locate = locate or (lambda path: None)
    m, num = cfg.model, cfg.numerics

    def fail(msg, path):
        raise ConfigError(msg, path, locate(path))

    if m.order not in ("second", "fourth"):
        fail("order must be 'second' or 'fourth'", "model.order")
    if m.n not in (1, 2):
        fail("n must be 1 or 2", "model.n")
    if not m.p >= 2:
        fail("p must be >= 2", "model.p")
    if not m.allow_supercritical and not is_subcritical(m.order, m.n, m.p):
        crit = float(critical_exponent(m.order, m.n))
        fail(f"p={m.p:g} is not subcritical (2 < p < {crit:g} for order={m.order}, n={m.n}); "
             "set allow_supercritical or pass --override-supercritical", "model.p")
    if not m.rho > 0:
        fail("rho must be positive", "model.rho")
    if any(not r > 0 for r in m.rho_grid):
        fail("rho_grid entries must be positive", "model.rho_grid")
    if cfg.experiment in ("strict-inequality", "rho-sweep") and not m.rho_grid:
        fail(f"experiment {cfg.experiment!r} needs a non-empty rho_grid", "model.rho_grid")
    if not m.lambda0 > 0:
        fail("lambda0 must be positive", "model.lambda0")
    for name, spec in (("V", m.V), ("Q", m.Q)):
        for c in _centers(spec):
            if len(c) != m.n:
                fail(f"center {c} does not match dimension n={m.n}", f"model.{name}")
    if not num.L > 0:
        fail("L must be positive", "numerics.L")
    if num.N < 8 or num.N % 2:
        fail("N must be even and >= 8", "numerics.N")
    if not num.dt > 0:
        fail("dt must be positive", "numerics.dt")
    if not num.T >= num.dt:
        fail("T must be at least dt", "numerics.T")
    for f in cfg.output.formats:
        if f not in FORMATS:
            fail(f"unknown format {f!r}; expected a subset of {FORMATS}", "output.formats")
    p = cfg.params
    if isinstance(p, EvolveParams):
        if p.initial not in ("minimizer", "power-soliton", "rough"):
            fail("initial must be minimizer, power-soliton or rough", "params.initial")
        if p.snapshot_every < 1:
            fail("snapshot_every must be >= 1", "params.snapshot_every")
    if isinstance(p, StabilityParams):
        if p.initial not in ("minimizer", "power-soliton"):
            fail("initial must be minimizer or power-soliton", "params.initial")
        if p.perturbation not in ("random", "mode", "mass-preserving-random"):
            fail("perturbation must be random, mode or mass-preserving-random", "params.perturbation")
        if p.delta < 0 or not p.epsilon > 0:
            fail("need delta >= 0 and epsilon > 0", "params.delta")
        if p.record_every < 1:
            fail("record_every must be >= 1", "params.record_every")
    if isinstance(p, (EvolveParams, StabilityParams)) and p.initial == "power-soliton" and m.n != 1:
        fail("power-soliton initial data is one-dimensional", "params.initial")
    if isinstance(p, SubadditivityParams):
        if not p.thetas or any(t <= 1 for t in p.thetas):
            fail("thetas must be non-empty and > 1", "params.thetas")
        if any(not 0 < mu < m.rho for mu in p.mus):
            fail("mus must lie in (0, rho)", "params.mus")
    if isinstance(p, NegativeInfimumParams) and (not p.lambdas or any(x <= 0 for x in p.lambdas)):
        fail("lambdas must be non-empty and positive", "params.lambdas")
    if isinstance(p, VanishingParams):
        if not p.ks or any(k <= 0 for k in p.ks):
            fail("ks must be non-empty and positive", "params.ks")
        if not 0 < p.window <= 2 * num.L:
            fail("window must lie in (0, 2L]", "params.window")


def _centers(spec: PotentialSpec):
    if spec.kind == "sum":
        for t in spec.terms:
            yield from _centers(t)
    elif spec.kind in ("gaussian-well", "plateau"):
        yield spec.center


def config_to_dict(cfg: RunConfig) -> dict:
    d = _to_table(cfg)
    d["params"] = _to_table(cfg.params) if cfg.params is not None else {}
    return d


def render_config(cfg: RunConfig) -> str:
    """TOML echo with every default materialized."""
    return tomli_w.dumps(config_to_dict(cfg))
