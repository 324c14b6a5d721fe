"""Radius rules for Local LMO, stepsize rules for PGD / Frank-Wolfe, gradient mapping."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Any, ClassVar, Mapping

import numpy as np
from numpy.typing import ArrayLike

from .geometry import ConstraintSet, Vector, as_vector
from .objectives import Objective


class RuleError(ValueError):
    pass


class MissingConstant(RuleError):
    pass


class ZeroDenominator(RuleError):
    pass


def strong_convexity_theta(mu: float, L: float) -> float:
    """theta = 2 sqrt(mu L) / (L + mu)."""
    return 2.0 * math.sqrt(mu * L) / (L + mu)


def contraction_factor(mu: float, L: float) -> float:
    """(L - mu) / (L + mu), the per-step distance contraction."""
    return (L - mu) / (L + mu)


def _need(obj: Objective, *names: str) -> tuple[float, ...]:
    out = []
    for name in names:
        if name in ("x_star", "f_star", "grad_star"):
            if obj.optimum is None:
                raise MissingConstant(f"{obj.variant} has no optimum metadata ({name} required)")
            out.append(getattr(obj.optimum, name))
        else:
            v = getattr(obj.constants, name)
            if v is None:
                raise MissingConstant(f"{obj.variant} does not declare {name}")
            out.append(v)
    return tuple(out)


def gradient_mapping(s: ConstraintSet, obj: Objective, x: ArrayLike, gamma: float) -> Vector:
    """G_gamma(x) = (x - P(x - gamma grad f(x))) / gamma."""
    if not gamma > 0:
        raise RuleError("gamma > 0 violated")
    x = as_vector(x)
    return (x - s.project(x - gamma * obj.gradient(x))) / gamma


@dataclass(frozen=True)
class RadiusRule:
    name: ClassVar[str] = ""

    def radius(self, obj: Objective, s: ConstraintSet, x: Vector, k: int,
               g: Vector | None = None) -> float:
        raise NotImplementedError

    def requirements(self) -> tuple[str, ...]:
        return ()

    def to_dict(self) -> dict[str, Any]:
        return {"rule": self.name, **asdict(self)}


@dataclass(frozen=True)
class SmoothGradDiff(RadiusRule):
    """t = ||grad f(x) - grad f(x*)|| / L."""

    name: ClassVar[str] = "SmoothGradDiff"

    def requirements(self):
        return ("L", "grad_star")

    def radius(self, obj, s, x, k, g=None):
        L, gs = _need(obj, "L", "grad_star")
        g = obj.gradient(x) if g is None else g
        return float(np.linalg.norm(g - gs)) / L


@dataclass(frozen=True)
class StronglyConvexTheta(RadiusRule):
    """t = theta ||x - x*||."""

    name: ClassVar[str] = "StronglyConvexTheta"

    def requirements(self):
        return ("mu", "L", "x_star")

    def radius(self, obj, s, x, k, g=None):
        mu, L, xs = _need(obj, "mu", "L", "x_star")
        return strong_convexity_theta(mu, L) * float(np.linalg.norm(x - xs))


@dataclass(frozen=True)
class Polyak(RadiusRule):
    """t = (f(x) - f*) / ||g|| with g the (sub)gradient in use; 0 at optimal x."""

    name: ClassVar[str] = "Polyak"

    def requirements(self):
        return ("f_star",)

    def radius(self, obj, s, x, k, g=None):
        _need(obj, "f_star")
        gap = obj.gap(x)
        if gap <= 0:
            return 0.0
        g = obj.gradient(x) if g is None else g
        gn = float(np.linalg.norm(g))
        if gn == 0:
            raise ZeroDenominator(f"zero gradient at non-optimal x (f - f* = {gap})")
        return gap / gn


@dataclass(frozen=True)
class AsymL0L1(RadiusRule):
    """t = (||D|| / (L0 + L1 ||grad f(x)||) + ||D|| / (L0 + L1 ||grad f(x*)||)) / 2."""

    name: ClassVar[str] = "AsymL0L1"

    def requirements(self):
        return ("L0", "L1", "grad_star")

    def radius(self, obj, s, x, k, g=None):
        L0, L1, gs = _need(obj, "L0", "L1", "grad_star")
        g = obj.gradient(x) if g is None else g
        dn = float(np.linalg.norm(g - gs))
        if dn == 0:
            return 0.0
        return 0.5 * (dn / (L0 + L1 * np.linalg.norm(g)) + dn / (L0 + L1 * np.linalg.norm(gs)))


@dataclass(frozen=True)
class GradientMapping(RadiusRule):
    """t = gamma ||G_gamma(x)||."""

    gamma: float
    name: ClassVar[str] = "GradientMapping"

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise RuleError("gamma must be positive and finite")

    def radius(self, obj, s, x, k, g=None):
        return self.gamma * float(np.linalg.norm(gradient_mapping(s, obj, x, self.gamma)))


@dataclass(frozen=True)
class GeometricSchedule(RadiusRule):
    """t_k = c q^k."""

    c: float
    q: float
    name: ClassVar[str] = "GeometricSchedule"

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise RuleError("c must be positive and finite")
        if not 0 < self.q < 1:
            raise RuleError("q must lie in (0, 1)")

    @classmethod
    def optimum_aware(cls, obj: Objective, x0: ArrayLike, q: float) -> "GeometricSchedule":
        """Schedule with c = theta ||x0 - x*||."""
        mu, L, xs = _need(obj, "mu", "L", "x_star")
        return cls(strong_convexity_theta(mu, L) * float(np.linalg.norm(as_vector(x0) - xs)), q)

    def radius(self, obj, s, x, k, g=None):
        return self.c * self.q ** k


@dataclass(frozen=True)
class Constant(RadiusRule):
    t: float
    name: ClassVar[str] = "Constant"

    def __post_init__(self):
        if not (self.t > 0 and math.isfinite(self.t)):
            raise RuleError("t must be positive and finite")

    def radius(self, obj, s, x, k, g=None):
        return self.t


@dataclass(frozen=True)
class StepsizeRule:
    name: ClassVar[str] = ""

    def stepsize(self, obj: Objective, x: Vector, k: int) -> float:
        raise NotImplementedError

    def requirements(self) -> tuple[str, ...]:
        return ()

    def to_dict(self) -> dict[str, Any]:
        return {"rule": self.name, **asdict(self)}


@dataclass(frozen=True)
class ConstantGamma(StepsizeRule):
    gamma: float
    name: ClassVar[str] = "ConstantGamma"

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise RuleError("gamma must be positive and finite")

    def stepsize(self, obj, x, k):
        return self.gamma


@dataclass(frozen=True)
class InverseL(StepsizeRule):
    name: ClassVar[str] = "InverseL"

    def requirements(self):
        return ("L",)

    def stepsize(self, obj, x, k):
        (L,) = _need(obj, "L")
        return 1.0 / L


@dataclass(frozen=True)
class TwoOverLplusMu(StepsizeRule):
    name: ClassVar[str] = "TwoOverLplusMu"

    def requirements(self):
        return ("L", "mu")

    def stepsize(self, obj, x, k):
        L, mu = _need(obj, "L", "mu")
        return 2.0 / (L + mu)


@dataclass(frozen=True)
class FWClassic(StepsizeRule):
    name: ClassVar[str] = "FWClassic"

    def stepsize(self, obj, x, k):
        return 2.0 / (k + 2.0)


@dataclass(frozen=True)
class PGDAsymL0L1(StepsizeRule):
    name: ClassVar[str] = "PGDAsymL0L1"

    def requirements(self):
        return ("L0", "L1", "grad_star")

    def stepsize(self, obj, x, k):
        L0, L1, gs = _need(obj, "L0", "L1", "grad_star")
        g = obj.gradient(x)
        return 0.5 * (1.0 / (L0 + L1 * np.linalg.norm(g)) + 1.0 / (L0 + L1 * np.linalg.norm(gs)))


RADIUS_RULES = {c.name: c for c in (SmoothGradDiff, StronglyConvexTheta, Polyak, AsymL0L1,
                                    GradientMapping, GeometricSchedule, Constant)}
STEPSIZE_RULES = {c.name: c for c in (ConstantGamma, InverseL, TwoOverLplusMu, FWClassic, PGDAsymL0L1)}


def rule_from_dict(data: Mapping[str, Any]) -> RadiusRule | StepsizeRule:
    name = data.get("rule")
    cls = RADIUS_RULES.get(name) or STEPSIZE_RULES.get(name)
    if cls is None:
        raise RuleError(f"unknown rule {name!r}")
    params = {f.name: float(data[f.name]) for f in fields(cls) if f.name in data}
    missing = [f.name for f in fields(cls) if f.name not in params]
    if missing:
        raise RuleError(f"rule {name} missing parameters {missing}")
    return cls(**params)


def check_requirements(rule: RadiusRule | StepsizeRule, obj: Objective) -> None:
    """Raise MissingConstant unless ``obj`` declares everything ``rule`` reads."""
    _need(obj, *rule.requirements())


def radius(rule: RadiusRule, obj: Objective, s: ConstraintSet, x: ArrayLike, k: int) -> float:
    return rule.radius(obj, s, as_vector(x), k)


def stepsize(rule: StepsizeRule, obj: Objective, x: ArrayLike, k: int) -> float:
    return rule.stepsize(obj, as_vector(x), k)
