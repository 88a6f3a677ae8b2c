"""Bounded coefficient functions V(x), Q(x) and the superlevel-set hypothesis."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .grid import Grid

KINDS = ("zero", "constant", "gaussian-well", "plateau", "sum")


@dataclass(frozen=True)
class PotentialSpec:
    """A bounded potential profile.

    ``kind`` selects the shape:

    - ``zero``
    - ``constant``: ``value``
    - ``gaussian-well``: ``depth * exp(-|x - center|^2 / (2 width^2))``
      (``depth < 0`` gives a well with minimum ``depth`` at ``center``)
    - ``plateau``: ``height * 1{|x - center| <= radius}``, genuinely discontinuous
    - ``sum``: pointwise sum of ``terms``
    """

    kind: str = "zero"
    value: float = 0.0
    depth: float = 0.0
    width: float = 1.0
    height: float = 0.0
    radius: float = 1.0
    center: tuple[float, ...] = (0.0,)
    terms: tuple["PotentialSpec", ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "gaussian-well" and not self.width > 0:
            raise ValueError(f"gaussian-well width must be positive, got {self.width}")
        if self.kind == "plateau" and not self.radius >= 0:
            raise ValueError(f"plateau radius must be nonnegative, got {self.radius}")
        if self.kind == "sum" and not self.terms:
            raise ValueError("sum potential needs at least one term")
        c = self.center
        c = (float(c),) if np.isscalar(c) else tuple(float(v) for v in c)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "terms", tuple(self.terms))
        for name in ("value", "depth", "width", "height", "radius"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def zero(cls) -> "PotentialSpec":
        return cls("zero")

    @classmethod
    def constant(cls, value: float) -> "PotentialSpec":
        return cls("constant", value=value)

    @classmethod
    def gaussian_well(cls, depth: float, width: float, center=0.0) -> "PotentialSpec":
        return cls("gaussian-well", depth=depth, width=width, center=center)

    @classmethod
    def plateau(cls, height: float, radius: float, center=0.0) -> "PotentialSpec":
        return cls("plateau", height=height, radius=radius, center=center)

    @classmethod
    def sum_of(cls, *terms: "PotentialSpec") -> "PotentialSpec":
        return cls("sum", terms=terms)

    def to_dict(self) -> dict[str, Any]:
        """Minimal dictionary for the run-config format."""
        if self.kind == "zero":
            return {"kind": "zero"}
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "gaussian-well":
            return {"kind": "gaussian-well", "depth": self.depth, "width": self.width,
                    "center": list(self.center)}
        if self.kind == "plateau":
            return {"kind": "plateau", "height": self.height, "radius": self.radius,
                    "center": list(self.center)}
        return {"kind": "sum", "terms": [t.to_dict() for t in self.terms]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PotentialSpec":
        allowed = {
            "zero": {"kind"},
            "constant": {"kind", "value"},
            "gaussian-well": {"kind", "depth", "width", "center"},
            "plateau": {"kind", "height", "radius", "center"},
            "sum": {"kind", "terms"},
        }
        if not isinstance(d, dict):
            raise TypeError(f"potential spec must be a table, got {type(d).__name__}")
        kind = d.get("kind")
        if kind not in allowed:
            raise ValueError(f"unknown potential kind {kind!r}; expected one of {KINDS}")
        extra = set(d) - allowed[kind]
        if extra:
            raise KeyError(f"unknown key(s) {sorted(extra)} for potential kind {kind!r}")
        kw = {k: v for k, v in d.items() if k != "kind"}
        for key in ("value", "depth", "width", "height", "radius"):
            if key in kw:
                if isinstance(kw[key], bool) or not isinstance(kw[key], (int, float)):
                    raise TypeError(f"potential {key} must be a number")
                kw[key] = float(kw[key])
        if "center" in kw:
            c = kw["center"]
            kw["center"] = tuple(float(x) for x in c) if isinstance(c, (list, tuple)) else (float(c),)
        if kind == "sum":
            kw["terms"] = tuple(cls.from_dict(t) for t in kw.get("terms", ()))
        return cls(kind, **kw)


def _center(spec: PotentialSpec, g: Grid):
    c = spec.center
    if len(c) == 1:
        return c * g.n
    if len(c) != g.n:
        raise ValueError(f"center {c} does not match dimension {g.n}")
    return c


def eval_potential(spec: PotentialSpec, g: Grid) -> np.ndarray:
    if spec.kind == "zero":
        return np.zeros(g.shape)
    if spec.kind == "constant":
        return np.full(g.shape, spec.value)
    if spec.kind == "gaussian-well":
        r2 = g.radius2(_center(spec, g))
        return spec.depth * np.exp(-r2 / (2.0 * spec.width**2))
    if spec.kind == "plateau":
        r2 = g.radius2(_center(spec, g))
        return np.where(r2 <= spec.radius**2, spec.height, 0.0)
    return sum(eval_potential(t, g) for t in spec.terms)


def shift_nonneg(V: np.ndarray) -> tuple[np.ndarray, float]:
    """Subtract the (sampled) essential infimum; returns ``(V - shift, shift)``."""
    shift = float(np.min(V))
    return V - shift, shift


@dataclass(frozen=True)
class HypothesisReport:
    lambda0: float
    superlevel_measure: float
    measure_uncertainty: float
    q_nonneg: bool
    satisfied: bool


def check_hypothesis(g: Grid, Q: np.ndarray, lambda0: float) -> HypothesisReport:
    """Check ``Q >= 0`` and ``0 < meas{Q > lambda0} < inf`` by cell counting.

    On a bounded box every measure is finite; the upper bound is only violated
    when the superlevel set fills the whole box, which is treated as infinite.
    """
    if not lambda0 > 0:
        raise ValueError("lambda0 must be positive")
    Q = g.check(Q)
    count = int(np.count_nonzero(Q > lambda0))
    measure = g.cell_volume * count
    q_nonneg = bool(np.all(Q >= 0))
    satisfied = q_nonneg and 0 < count < g.size
    return HypothesisReport(float(lambda0), measure, g.cell_volume, q_nonneg, satisfied)


def clip_min(Q: np.ndarray, lambda0: float) -> np.ndarray:
    return np.minimum(Q, lambda0)
