"""Objective functions with declared constants and known-optimum metadata."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .geometry import Box, ConstraintSet, Vector, as_vector


class ObjectiveError(ValueError):
    pass


class DomainError(ObjectiveError):
    """Point outside the analytic domain of the objective."""


CONSTANT_NAMES = ("L", "mu", "L0", "L1", "G")


@dataclass(frozen=True)
class Constants:
    L: float | None = None
    mu: float | None = None
    L0: float | None = None
    L1: float | None = None
    G: float | None = None

    def to_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in CONSTANT_NAMES if getattr(self, k) is not None}


@dataclass(frozen=True, eq=False)
class Optimum:
    x_star: Vector
    f_star: float
    grad_star: Vector

    def to_dict(self) -> dict[str, Any]:
        return {"x_star": self.x_star.tolist(), "f_star": self.f_star, "grad_star": self.grad_star.tolist()}


class Objective:
    """Base class. Subclasses implement ``_value`` and ``_gradient``."""

    variant = ""

    def __init__(self, constants: Constants | None = None, optimum: Optimum | None = None,
                 strictly_convex: bool = False):
        self.constants = constants or Constants()
        self.optimum = optimum
        self.strictly_convex = strictly_convex

    dim: int = 0
    convex = True

    def _domain(self, x: ArrayLike) -> Vector:
        v = as_vector(x)
        if v.size != self.dim:
            raise DomainError(f"expected dimension {self.dim}, got {v.size}")
        return v

    def value(self, x: ArrayLike) -> float:
        return float(self._value(self._domain(x)))

    def gradient(self, x: ArrayLike) -> Vector:
        return np.asarray(self._gradient(self._domain(x)), dtype=np.float64)

    def subgradient(self, x: ArrayLike) -> Vector:
        if not self.convex:
            raise ObjectiveError(f"{self.variant} is not convex; no subdifferential")
        return self.gradient(x)

    def gap(self, x: ArrayLike) -> float:
        """f(x) - f_star; needs optimum metadata."""
        if self.optimum is None:
            raise ObjectiveError(f"{self.variant} has no optimum metadata")
        return self.value(x) - self.optimum.f_star

    def _value(self, x: Vector) -> float:
        raise NotImplementedError

    def _gradient(self, x: Vector) -> Vector:
        raise NotImplementedError

    def with_optimum(self, x_star: ArrayLike) -> "Objective":
        """Copy with optimum metadata filled in at ``x_star``."""
        x = as_vector(x_star)
        out = self._copy()
        out.optimum = Optimum(x, self.value(x), self.gradient(x))
        return out

    def with_constants(self, **kw: float) -> "Objective":
        out = self._copy()
        out.constants = replace(self.constants, **kw)
        return out

    def _copy(self) -> "Objective":
        out = object.__new__(type(self))
        out.__dict__.update(self.__dict__)
        return out

    def check(self) -> list[str]:
        problems = []
        if self.optimum is not None:
            o = self.optimum
            if abs(self.value(o.x_star) - o.f_star) > 1e-9:
                problems.append("optimum f_star inconsistent with value(x_star)")
            if np.linalg.norm(self.gradient(o.x_star) - o.grad_star) > 1e-9:
                problems.append("optimum grad_star inconsistent with gradient(x_star)")
        return problems

    # serialization
    def _payload(self) -> dict[str, Any]:
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        out = {"variant": self.variant, **self._payload()}
        if self.constants.to_dict():
            out["constants"] = self.constants.to_dict()
        if self.optimum is not None:
            out["optimum"] = self.optimum.to_dict()
        if self.strictly_convex:
            out["strictly_convex"] = True
        return out

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._payload()})"


class Quadratic(Objective):
    """``f(x) = 0.5 x^T Q x + q^T x + c0``."""

    variant = "Quadratic"

    def __init__(self, Q: ArrayLike, q: ArrayLike | None = None, c0: float = 0.0, **kw):
        super().__init__(**kw)
        self.Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
        self.dim = self.Q.shape[0]
        self.q = np.zeros(self.dim) if q is None else as_vector(q, "q")
        self.c0 = float(c0)
        problems = self.check()
        if problems:
            raise ObjectiveError("; ".join(problems))

    def check(self) -> list[str]:
        Q = self.Q
        if Q.shape != (self.dim, self.dim) or self.q.size != self.dim:
            return ["Q must be square and match q"]
        problems = []
        if np.abs(Q - Q.T).max() > 1e-12:
            problems.append("Q symmetric violated")
            return problems
        eig = np.linalg.eigvalsh(Q)
        c = self.constants
        # declared constants are checked to 1e-8 relative: literal matrices
        # rounded to 8 decimals miss their nominal spectrum by ~2e-9
        if c.mu is not None and eig[0] < c.mu - 1e-8 * max(1.0, abs(c.mu)):
            problems.append(f"lambda_min(Q)={eig[0]} below declared mu={c.mu}")
        if c.L is not None and eig[-1] > c.L + 1e-8 * max(1.0, abs(c.L)):
            problems.append(f"lambda_max(Q)={eig[-1]} above declared L={c.L}")
        return problems + super().check()

    @property
    def convex(self):
        return bool(np.linalg.eigvalsh(self.Q)[0] >= -1e-12)

    def gap(self, x):
        # expanded around x_star to avoid cancelling two nearly equal values
        if self.optimum is None:
            return super().gap(x)
        d = self._domain(x) - self.optimum.x_star
        return float(self.optimum.grad_star @ d + 0.5 * d @ self.Q @ d)

    def _value(self, x):
        return 0.5 * x @ self.Q @ x + self.q @ x + self.c0

    def _gradient(self, x):
        return self.Q @ x + self.q

    def _payload(self):
        return {"Q": self.Q.tolist(), "q": self.q.tolist(), "c0": self.c0}


class PowerThreeHalves(Objective):
    """``f(x) = x^{3/2}`` on [0, 1]; gradients bounded by 3/2 but not Lipschitz at 0."""

    variant = "PowerThreeHalves"
    dim = 1

    def __init__(self, **kw):
        kw.setdefault("constants", Constants(G=1.5))
        kw.setdefault("optimum", Optimum(np.zeros(1), 0.0, np.zeros(1)))
        super().__init__(**kw)

    def _domain(self, x):
        v = super()._domain(x)
        if v[0] < 0 or v[0] > 1:
            raise DomainError(f"x^(3/2) is defined here on [0, 1], got {v[0]}")
        return v

    def _value(self, x):
        return x[0] ** 1.5

    def _gradient(self, x):
        # one-sided derivative at 0 is 0
        return np.array([1.5 * math.sqrt(x[0])])

    def _payload(self):
        return {}


class CounterexampleAlpha(Objective):
    """``f(u, v) = (alpha/4)(u + 2v)^2 + v``; convex, L = 5 alpha / 2."""

    variant = "CounterexampleAlpha"
    dim = 2

    def __init__(self, alpha: float, **kw):
        if not alpha > 0:
            raise ObjectiveError("alpha > 0 violated")
        self.alpha = float(alpha)
        kw.setdefault("constants", Constants(L=2.5 * self.alpha))
        kw.setdefault("optimum", Optimum(np.zeros(2), 0.0, np.array([0.0, 1.0])))
        super().__init__(**kw)

    def _value(self, x):
        u, v = x
        return 0.25 * self.alpha * (u + 2 * v) ** 2 + v

    def _gradient(self, x):
        u, v = x
        a = self.alpha
        return np.array([0.5 * a * u + a * v, a * u + 2 * a * v + 1.0])

    def _payload(self):
        return {"alpha": self.alpha}


class AbsoluteValue(Objective):
    """``f(x) = ||x||_1``; non-smooth, subgradient ``sign(x)`` (0 at kinks)."""

    variant = "AbsoluteValue"

    def __init__(self, dim: int = 1, **kw):
        self.dim = int(dim)
        kw.setdefault("constants", Constants(G=math.sqrt(self.dim)))
        kw.setdefault("optimum", Optimum(np.zeros(self.dim), 0.0, np.zeros(self.dim)))
        super().__init__(**kw)

    def _value(self, x):
        return np.abs(x).sum()

    def _gradient(self, x):
        if np.any(x == 0):
            raise DomainError("|x| is not differentiable where a coordinate is 0")
        return np.sign(x)

    def subgradient(self, x):
        return np.sign(self._domain(x))

    def _payload(self):
        return {"dim": self.dim}


class QuarticTwoWell(Objective):
    """Non-convex ``f(x) = (x_1^2 - 1)^2 / 4 + (s/2) ||x_{2:}||^2``.

    Wells at ``x_1 = +-1``. On a box with ``|x_1| <= m`` the Hessian is
    bounded by ``max(3 m^2 - 1, s)``, which is what ``smoothness_on`` returns.
    """

    variant = "QuarticTwoWell"
    convex = False

    def __init__(self, dim: int = 2, s: float = 1.0, **kw):
        self.dim = int(dim)
        self.s = float(s)
        super().__init__(**kw)

    def smoothness_on(self, box: Box) -> float:
        m = max(abs(box.lo[0]), abs(box.hi[0]))
        return max(3 * m * m - 1, self.s)

    def _value(self, x):
        return 0.25 * (x[0] ** 2 - 1) ** 2 + 0.5 * self.s * (x[1:] @ x[1:])

    def _gradient(self, x):
        g = self.s * x.copy()
        g[0] = x[0] ** 3 - x[0]
        return g

    def _payload(self):
        return {"dim": self.dim, "s": self.s}


class ExpSum(Objective):
    """``f(x) = sum_i exp(w_i x_i)``: convex, asymmetrically (L0, L1)-smooth on boxes."""

    variant = "ExpSum"

    def __init__(self, w: ArrayLike, **kw):
        self.w = as_vector(w, "w")
        self.dim = self.w.size
        super().__init__(**kw)

    def l0l1_on(self, box: Box, L0: float = 1e-3) -> tuple[float, float]:
        """(L0, L1) valid for all pairs in ``box``: L1 = max_i (e^{|w_i| D} - 1) / D."""
        D = float(np.linalg.norm(box.hi - box.lo))
        L1 = float(np.max(np.expm1(np.abs(self.w) * D))) / D
        return L0, L1

    def _value(self, x):
        return np.exp(self.w * x).sum()

    def _gradient(self, x):
        return self.w * np.exp(self.w * x)

    def _payload(self):
        return {"w": self.w.tolist()}


class FiniteSum(Objective):
    """Uniform average of component objectives sharing one dimension."""

    variant = "FiniteSum"

    def __init__(self, components: Sequence[Objective], **kw):
        if not components:
            raise ObjectiveError("FiniteSum needs at least one component")
        dims = {c.dim for c in components}
        if len(dims) != 1:
            raise ObjectiveError("FiniteSum components must share dimension")
        self.components = list(components)
        self.dim = dims.pop()
        super().__init__(**kw)

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def convex(self):
        return all(c.convex for c in self.components)

    def _value(self, x):
        return sum(c.value(x) for c in self.components) / self.n

    def _gradient(self, x):
        return sum(c.gradient(x) for c in self.components) / self.n

    def subgradient(self, x):
        return sum(c.subgradient(x) for c in self.components) / self.n

    def heterogeneity(self) -> float:
        """D = max_i ||x_star_i - x_star||."""
        if self.optimum is None or any(c.optimum is None for c in self.components):
            raise ObjectiveError("heterogeneity needs optimum metadata on the sum and every component")
        return max(float(np.linalg.norm(c.optimum.x_star - self.optimum.x_star)) for c in self.components)

    def _payload(self):
        return {"components": [c.to_dict() for c in self.components]}


# construction helpers ------------------------------------------------------------------

PAPER_Q = np.array([[25.75, -42.86825749], [-42.86825749, 75.25]])
PAPER_BOX = ((2.0, 2.0), (4.0, 4.0))


def box_qp_minimizer(Q: ArrayLike, q: ArrayLike, lo: ArrayLike, hi: ArrayLike) -> Vector:
    """Exact minimizer of a convex quadratic over a box by face enumeration.

    Each coordinate is pinned at ``lo``, pinned at ``hi`` or free; the free
    block solves its stationarity system. The best feasible KKT point wins.
    """
    Q = np.asarray(Q, float)
    q = np.asarray(q, float)
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    d = q.size
    best, best_val = None, math.inf
    for pattern in itertools.product((0, 1, 2), repeat=d):
        x = np.where(np.array(pattern) == 1, lo, hi)
        free = np.array([p == 0 for p in pattern])
        if free.any():
            fixed = ~free
            rhs = -(q[free] + Q[np.ix_(free, fixed)] @ x[fixed])
            try:
                x[free] = np.linalg.solve(Q[np.ix_(free, free)], rhs)
            except np.linalg.LinAlgError:
                continue
        if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
            continue
        g = Q @ x + q
        # KKT sign conditions for the pinned coordinates
        pins = np.array(pattern)
        if np.any(g[pins == 1] < -1e-12) or np.any(g[pins == 2] > 1e-12):
            continue
        val = 0.5 * x @ Q @ x + q @ x
        if val < best_val:
            best, best_val = x, val
    if best is None:
        raise ObjectiveError("no KKT point found; is Q positive definite?")
    return np.clip(best, lo, hi)


def make_paper_quadratic() -> Quadratic:
    """Rotated ill-conditioned quadratic (mu=1, L=100) with its optimum on [2, 4]^2."""
    f = Quadratic(PAPER_Q, np.zeros(2), 0.0, constants=Constants(L=100.0, mu=1.0),
                  strictly_convex=True)
    x_star = box_qp_minimizer(PAPER_Q, np.zeros(2), *PAPER_BOX)
    return f.with_optimum(x_star)


def paper_box() -> Box:
    return Box(*PAPER_BOX)


def constrained_optimum(obj: Objective, s: ConstraintSet, x0: ArrayLike,
                        iters: int = 20000, tol: float = 0.0) -> Vector:
    """Minimizer over ``s`` by projected gradient with step 2/(L+mu) (1/L if mu unknown).

    Intended for strongly convex problems where this contracts linearly; runs
    until the iterate stops moving or ``iters`` is exhausted.
    """
    L, mu = obj.constants.L, obj.constants.mu
    if L is None:
        raise ObjectiveError("constrained_optimum needs a declared L")
    gamma = 2.0 / (L + mu) if mu else 1.0 / L
    x = s.project(as_vector(x0))
    for _ in range(iters):
        nxt = s.project(x - gamma * obj.gradient(x))
        if np.linalg.norm(nxt - x) <= tol:
            return nxt
        x = nxt
    return x


def fd_gradient_check(obj: Objective, x: ArrayLike, h: float) -> float:
    """Max componentwise error between the analytic gradient and central differences.

    The error of component i is scaled by ``max(1, |g_i|)`` so that it is
    relative for large gradients and absolute near zero.
    """
    if not h > 0:
        raise ValueError("h > 0 violated")
    x = obj._domain(x)
    g = obj.gradient(x)
    worst = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fd = (obj.value(x + e) - obj.value(x - e)) / (2 * h)
        worst = max(worst, abs(fd - g[i]) / max(1.0, abs(g[i])))
    return worst


# serialization ---------------------------------------------------------------------------

def objective_from_dict(data: Mapping[str, Any]) -> Objective:
    kind = data.get("variant")
    kw: dict[str, Any] = {}
    if "constants" in data:
        kw["constants"] = Constants(**{k: float(v) for k, v in data["constants"].items()})
    if "optimum" in data:
        o = data["optimum"]
        kw["optimum"] = Optimum(as_vector(o["x_star"]), float(o["f_star"]), as_vector(o["grad_star"]))
    if data.get("strictly_convex"):
        kw["strictly_convex"] = True
    if kind == "Quadratic":
        return Quadratic(data["Q"], data.get("q"), data.get("c0", 0.0), **kw)
    if kind == "PowerThreeHalves":
        return PowerThreeHalves(**kw)
    if kind == "CounterexampleAlpha":
        return CounterexampleAlpha(data["alpha"], **kw)
    if kind == "AbsoluteValue":
        return AbsoluteValue(data.get("dim", 1), **kw)
    if kind == "QuarticTwoWell":
        return QuarticTwoWell(data.get("dim", 2), data.get("s", 1.0), **kw)
    if kind == "ExpSum":
        return ExpSum(data["w"], **kw)
    if kind == "FiniteSum":
        return FiniteSum([objective_from_dict(c) for c in data["components"]], **kw)
    raise ObjectiveError(f"unknown objective variant {kind!r}")


# functional interface
def value(obj: Objective, x: ArrayLike) -> float:
    return obj.value(x)


def gradient(obj: Objective, x: ArrayLike) -> Vector:
    return obj.gradient(x)


def subgradient(obj: Objective, x: ArrayLike) -> Vector:
    return obj.subgradient(x)
