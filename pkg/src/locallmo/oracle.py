"""Brute-force reference solver for the local LMO and trajectory invariant checks.

The reference solver only touches a set through ``project`` and ``contains``
(plus the raw bounds of a 2-D box for candidate enumeration), so it shares no
case analysis with the closed-form oracles in ``geometry``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np
from numpy.typing import ArrayLike

from .geometry import Box, ConstraintSet, InfeasibleCenter, LocalBall, Vector, as_vector
from .objectives import Objective
from .rules import contraction_factor, gradient_mapping
from .solvers import Trajectory

FEAS_TOL = 1e-9


class NonConvergence(RuntimeError):
    pass


class UnknownClaim(KeyError):
    pass


@dataclass(frozen=True)
class OracleResult:
    point: Vector
    objective: float
    method_tag: str

    def to_dict(self) -> dict[str, Any]:
        return {"point": self.point.tolist(), "objective": self.objective, "method_tag": self.method_tag}


# local LMO reference ---------------------------------------------------------------------

def _candidates_box2d(lo: Vector, hi: Vector, c: Vector, t: float, g: Vector) -> list[Vector]:
    out = []
    gn = np.linalg.norm(g)
    out.append(c - t * g / gn)
    for x in (lo[0], hi[0]):
        for y in (lo[1], hi[1]):
            out.append(np.array([x, y]))
    # circle (z - c)^2 = t^2 meets the four edge lines
    for axis in (0, 1):
        other = 1 - axis
        for val in (lo[axis], hi[axis]):
            h = val - c[axis]
            rem = t * t - h * h
            if rem < 0:
                continue
            for sgn in (-1.0, 1.0):
                p = np.empty(2)
                p[axis] = val
                p[other] = c[other] + sgn * math.sqrt(rem)
                out.append(p)
    return out


def candidate_enum_2d(box: Box, ball: LocalBall, g: Vector) -> OracleResult:
    """Exact enumeration for a planar box: ball minimizer, corners, circle-edge hits."""
    lo, hi, c, t = box.lo, box.hi, ball.center, ball.radius
    best = None
    for p in _candidates_box2d(lo, hi, c, t, g):
        if np.any(p < lo - 1e-12) or np.any(p > hi + 1e-12):
            continue
        if np.linalg.norm(p - c) > t * (1 + 1e-12) + 1e-15:
            continue
        p = np.clip(p, lo, hi)
        key = (float(g @ p), *p)
        if best is None or key < best[0]:
            best = (key, p)
    if best is None:
        raise NonConvergence("no feasible candidate; center must lie outside the box")
    return OracleResult(best[1], best[0][0], "CandidateEnum2D")


def _into_ball(p: Vector, c: Vector, t: float) -> Vector:
    """Pull a set point toward the (feasible) center until it lies in the ball."""
    d = np.linalg.norm(p - c)
    return p if d <= t else c + (p - c) * (t / d)


def _dykstra(s: ConstraintSet, ball: LocalBall, y: Vector, max_iter: int, tol: float) -> Vector:
    """Dykstra's alternating projections of ``y`` onto set ∩ ball."""
    c, t = ball.center, ball.radius

    def pball(z):
        d = z - c
        n = np.linalg.norm(d)
        return z if n <= t else c + d * (t / n)

    x = y.copy()
    p = np.zeros_like(y)
    q = np.zeros_like(y)
    for _ in range(max_iter):
        yk = s.project(x + p)
        p = x + p - yk
        xn = pball(yk + q)
        q = yk + q - xn
        if np.linalg.norm(xn - x) <= tol and np.linalg.norm(xn - yk) <= 1e3 * tol:
            return _into_ball(s.project(xn), c, t)
        x = xn
    raise NonConvergence(f"Dykstra did not converge in {max_iter} iterations from {y.tolist()}")


def penalized_projection(s: ConstraintSet, ball: LocalBall, g: Vector, max_iter: int = 100_000) -> OracleResult:
    """Project center - lam g onto set ∩ ball for a geometric sweep of lam.

    The minimizer of <g, z> over a compact convex set is the limit of these
    projections as lam grows; the sweep stops once the objective no longer
    decreases by more than 1e-12 relative, or once Dykstra stalls on a far
    point, and returns the best point seen.
    """
    c, t = ball.center, ball.radius
    gn = np.linalg.norm(g)
    best = None
    for e in range(9):
        lam = 10.0 ** e * t / gn
        try:
            z = _dykstra(s, ball, c - lam * g, max_iter, 1e-13 * (1 + t))
        except NonConvergence:
            if best is None:
                raise
            break
        val = float(g @ z)
        if best is not None and val >= best[0] - 1e-12 * max(1.0, abs(val)):
            break
        if best is None or val < best[0]:
            best = (val, z)
    return OracleResult(best[1], best[0], "PenalizedProjection")


def grid_refine(s: ConstraintSet, ball: LocalBall, g: Vector) -> OracleResult:
    """Bisection on lam so that ||P(center - lam g) - center|| = radius.

    Along the projection path z(lam) = P(center - lam g) the distance to the
    center is nondecreasing. When the ball is active the answer is z(lam) at
    the crossing; otherwise it is the limit of z(lam), whose distance to the
    center stays below the radius.
    """
    c, t = ball.center, ball.radius

    def z(lam):
        return s.project(c - lam * g)

    def r(lam):
        return float(np.linalg.norm(z(lam) - c))

    gn = np.linalg.norm(g)
    hi = t / gn
    last = z(hi)
    for _ in range(200):
        if r(hi) >= t:
            break
        nxt = z(2 * hi)
        if np.linalg.norm(nxt - last) <= 1e-15 * (1 + np.linalg.norm(last)):
            last = nxt
            break
        hi *= 2
        last = nxt
    else:
        raise NonConvergence("projection path did not reach the ball boundary nor stabilize")
    if r(hi) < t:
        p = last
    else:
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if r(mid) < t:
                lo = mid
            else:
                hi = mid
        p = z(hi)
    p = _into_ball(p, c, t)
    return OracleResult(p, float(g @ p), "GridRefine")


def oracle_local_lmo(s: ConstraintSet, ball: LocalBall, g: ArrayLike, method: str | None = None) -> OracleResult:
    """Reference solution of min <g, z> over set ∩ ball.

    ``method`` forces one of CandidateEnum2D (2-D boxes only),
    PenalizedProjection or GridRefine; by default 2-D boxes use enumeration
    and everything else uses GridRefine.
    """
    g = as_vector(g, "g")
    c = as_vector(ball.center, "center")
    if not s.contains(c, FEAS_TOL):
        raise InfeasibleCenter(f"ball center {c.tolist()} is not in {s!r}")
    if not ball.radius > 0:
        raise ValueError("oracle needs a positive radius")
    if not np.any(g):
        return OracleResult(c.copy(), 0.0, method or "GridRefine")
    is_box2 = isinstance(s, Box) and s.dim == 2
    if method is None:
        method = "CandidateEnum2D" if is_box2 else "GridRefine"
    if method == "CandidateEnum2D":
        if not is_box2:
            raise ValueError("CandidateEnum2D applies to 2-D boxes only")
        return candidate_enum_2d(s, ball, g)
    if method == "PenalizedProjection":
        return penalized_projection(s, ball, g)
    if method == "GridRefine":
        return grid_refine(s, ball, g)
    raise ValueError(f"unknown oracle method {method!r}")


# counterexample --------------------------------------------------------------------------

def counterexample_E2(alpha: float, C: float) -> dict[str, Any]:
    """Two PGD steps on f(u, v) = alpha/4 (u + 2v)^2 + v over R x R_+ in exact arithmetic.

    Start x0 = (1, 0), step 2/(5 alpha), optimum (0, 0) with gradient (0, 1).
    """
    a = Fraction(alpha)
    C = Fraction(C)
    L = Fraction(5, 2) * a
    gamma = 1 / L

    def grad(u, v):
        s = a / 2 * (u + 2 * v)
        return s, 2 * s + 1

    def step(u, v):
        gu, gv = grad(u, v)
        return u - gamma * gu, max(Fraction(0), v - gamma * gv)

    xs = [(Fraction(1), Fraction(0))]
    xs.append(step(*xs[0]))
    xs.append(step(*xs[1]))
    gs = (Fraction(0), Fraction(1))

    def gd_sq(x):
        gu, gv = grad(*x)
        return (gu - gs[0]) ** 2 + (gv - gs[1]) ** 2

    gd = [gd_sq(x) for x in xs[:2]]
    min_gd = min(gd)
    r0_sq = xs[0][0] ** 2 + xs[0][1] ** 2
    bound = C * L * r0_sq / 2
    return {
        "x1": (float(xs[1][0]), float(xs[1][1])),
        "x2": (float(xs[2][0]), float(xs[2][1])),
        "grad_diff_sq": [float(v) for v in gd],
        "min_grad_diff_sq": float(min_gd),
        "hypothetical_bound": float(bound),
        "violated": bool(min_gd > bound),
    }


# trajectory checks -----------------------------------------------------------------------

@dataclass
class ClaimResult:
    claim: str
    passed: bool
    worst_slack: float
    tol: float
    note: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.claim}: worst slack {self.worst_slack:.3e} (tol {self.tol:.0e}){' ' + self.note if self.note else ''}"


@dataclass
class CheckReport:
    results: list[ClaimResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, claim: str) -> ClaimResult:
        for r in self.results:
            if r.claim == claim:
                return r
        raise KeyError(claim)

    def lines(self) -> list[str]:
        return [r.line() for r in self.results]


class _Ctx:
    """Quantities re-evaluated from the objective along a trajectory."""

    def __init__(self, traj: Trajectory, obj: Objective):
        self.traj, self.obj = traj, obj
        self.X = traj.x
        self.t = np.asarray(traj.steps, dtype=float)
        self.K = len(self.t)

    def need_opt(self):
        if self.obj.optimum is None:
            raise ValueError("claim needs optimum metadata on the objective")
        return self.obj.optimum

    def dist(self) -> np.ndarray:
        return np.linalg.norm(self.X - self.need_opt().x_star, axis=1)

    def fgap(self) -> np.ndarray:
        self.need_opt()
        return np.array([self.obj.gap(x) for x in self.X])

    def gd_sq(self) -> np.ndarray:
        gs = self.need_opt().grad_star
        return np.array([np.sum((self.obj.gradient(x) - gs) ** 2) for x in self.X])

    def const(self, name: str) -> float:
        v = getattr(self.obj.constants, name)
        if v is None:
            raise ValueError(f"claim needs constant {name}")
        return v

    def gmap_sq(self, gamma: float) -> np.ndarray:
        if self.traj.set is None:
            raise ValueError("claim needs the constraint set on the trajectory")
        return np.array([np.sum(gradient_mapping(self.traj.set, self.obj, x, gamma) ** 2) for x in self.X])


def _running_min(a):
    return np.minimum.accumulate(a)


def _fejer(c):
    d2 = c.dist() ** 2
    return (d2[1:] - (d2[:-1] - c.t ** 2)) / (1 + d2[:-1])


def _boundary(c):
    step = np.linalg.norm(np.diff(c.X, axis=0), axis=1)
    return np.abs(step - c.t) / np.maximum(1.0, c.t)


def _radius_bound(c):
    return c.t - c.dist()[:-1]


def _contraction(c):
    q = contraction_factor(c.const("mu"), c.const("L"))
    d = c.dist()
    return d[1:] - q * d[:-1]


def _smooth_rate(c):
    L = c.const("L")
    r0 = c.dist()[0] ** 2
    K = np.arange(1, c.K + 1)
    return _running_min(c.gd_sq()[:-1]) - L * L * r0 / K


def _polyak_rate(c):
    G = c.const("G")
    r0 = c.dist()[0] ** 2
    K = np.arange(1, c.K + 1)
    return np.cumsum(c.fgap()[:-1] ** 2) / K - G * G * r0 / K


def _avg_iterate(c):
    G = c.const("G")
    R0 = c.dist()[0]
    fs = c.need_opt().f_star
    avg = np.cumsum(c.X[:-1], axis=0) / np.arange(1, c.K + 1)[:, None]
    gaps = np.array([c.obj.value(x) - fs for x in avg])
    return gaps - G * R0 / np.sqrt(np.arange(1, c.K + 1))


def _l0l1_rate(c):
    L0, L1 = c.const("L0"), c.const("L1")
    gs = c.need_opt().grad_star
    a = []
    for x in c.X[:-1]:
        g = c.obj.gradient(x)
        dn = np.linalg.norm(g - gs)
        a.append((0.5 * (dn / (L0 + L1 * np.linalg.norm(g)) + dn / (L0 + L1 * np.linalg.norm(gs)))) ** 2)
    r0 = c.dist()[0] ** 2
    K = np.arange(1, c.K + 1)
    return np.cumsum(a) / K - r0 / K


def _gamma(c):
    gamma = c.traj.grad_map_gamma
    if gamma is None:
        raise ValueError("claim needs the gradient-mapping stepsize recorded on the trajectory")
    return gamma


def _nonconvex_descent(c):
    gamma = _gamma(c)
    f = np.array([c.obj.value(x) for x in c.X])
    return f[1:] - (f[:-1] - gamma / 2 * c.gmap_sq(gamma)[:-1])


def _nonconvex_rate(c):
    gamma = _gamma(c)
    f0 = c.obj.value(c.X[0])
    fs = c.need_opt().f_star
    K = np.arange(1, c.K + 1)
    return _running_min(c.gmap_sq(gamma)[:-1]) - 2 * (f0 - fs) / (gamma * K)


def _pgd_gamma(c):
    if not np.allclose(c.t, c.t[0], rtol=0, atol=0):
        raise ValueError("PGD claims assume a constant stepsize")
    return float(c.t[0])


def _pgd_descent(c):
    gamma = _pgd_gamma(c)
    f = np.array([c.obj.value(x) for x in c.X])
    return f[1:] - (f[:-1] - gamma / 2 * c.gmap_sq(gamma)[:-1])


def _pgd_fejer(c):
    gamma = _pgd_gamma(c)
    d2 = c.dist() ** 2
    return d2[1:] - (d2[:-1] - 2 * gamma * c.fgap()[1:])


def _pgd_rate(c):
    gamma = _pgd_gamma(c)
    r0 = c.dist()[0] ** 2
    k = np.arange(1, c.K + 1)
    return c.fgap()[1:] - r0 / (2 * gamma * k)


def _pgd_grad_diff(c):
    gamma = _pgd_gamma(c)
    r0 = c.dist()[0] ** 2
    k = np.arange(1, c.K + 1)
    return _running_min(c.gd_sq()[:-1]) - r0 / (gamma * gamma * k)


_LMO = frozenset({"LocalLMO", "NonsmoothLocalLMO"})
_PGD = frozenset({"PGD"})

# claim -> (methods it applies to, evaluator returning per-step violations, tolerance)
CLAIMS: dict[str, tuple[frozenset, Callable[[_Ctx], np.ndarray], float]] = {
    "fejer": (_LMO, _fejer, 1e-10),
    "boundary_step": (_LMO, _boundary, 1e-9),
    "radius_bound": (_LMO, _radius_bound, 1e-9),
    "contraction": (frozenset({"LocalLMO"}), _contraction, 1e-9),
    "smooth_rate": (frozenset({"LocalLMO"}), _smooth_rate, 1e-8),
    "polyak_rate": (_LMO, _polyak_rate, 1e-8),
    "avg_iterate": (_LMO, _avg_iterate, 1e-8),
    "l0l1_rate": (frozenset({"LocalLMO"}), _l0l1_rate, 1e-8),
    "nonconvex_descent": (frozenset({"LocalLMO"}), _nonconvex_descent, 1e-10),
    "nonconvex_rate": (frozenset({"LocalLMO"}), _nonconvex_rate, 1e-8),
    "pgd_descent": (_PGD, _pgd_descent, 1e-9),
    "pgd_fejer": (_PGD, _pgd_fejer, 1e-9),
    "pgd_rate": (_PGD, _pgd_rate, 1e-9),
    "pgd_grad_diff": (_PGD, _pgd_grad_diff, 1e-9),
}


def check_trajectory(traj: Trajectory, obj: Objective, claims: list[str] | str) -> CheckReport:
    """Evaluate each named inequality at every step and report the worst slack.

    Slack is lhs - rhs (normalized for ``fejer`` and ``boundary_step``); a
    claim passes when its worst slack is at most the claim tolerance.
    """
    if isinstance(claims, str):
        claims = [c for c in claims.split(",") if c]
    for name in claims:
        if name not in CLAIMS:
            raise UnknownClaim(f"unknown claim {name!r}; known: {sorted(CLAIMS)}")
        methods = CLAIMS[name][0]
        if traj.method not in methods:
            raise UnknownClaim(f"claim {name!r} does not apply to {traj.method} runs")
    ctx = _Ctx(traj, obj)
    report = CheckReport()
    for name in claims:
        _, fn, tol = CLAIMS[name]
        if ctx.K == 0:
            report.results.append(ClaimResult(name, True, -math.inf, tol, "empty trajectory"))
            continue
        v = np.asarray(fn(ctx), dtype=float)
        worst = float(np.max(v)) if v.size else -math.inf
        report.results.append(ClaimResult(name, bool(worst <= tol), worst, tol))
    return report


def stochastic_polyak_bound(G: float, R0: float, D: float, K: int, eta: float = 0.5) -> float:
    """Right-hand side of the averaged squared-gap bound for stochastic Polyak radii."""
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    return G * G * R0 * R0 / ((1 - eta) * K) + G * G * D * D / (eta * (1 - eta))

