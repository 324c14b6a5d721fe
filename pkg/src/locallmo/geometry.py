"""Convex constraint sets with projection, LMO and local LMO oracles.

Every set is an immutable value object. The local linear minimization oracle
solves

    min  <g, z>   subject to  z in X,  ||z - x|| <= t

exactly for every family implemented here. Affine families, one-dimensional
sets, Euclidean balls and slabs use closed-form case analysis. Boxes in any
dimension use an exact breakpoint walk along the dual path
``lam -> clip(x - lam * g)``; the two-dimensional l1 ball ("diamond") uses
candidate enumeration on its polygon boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, ClassVar, Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

Vector = NDArray[np.float64]

MEMBERSHIP_TOL = 1e-9
ORTHONORMAL_TOL = 1e-12
# tangential components below this fraction of ||g|| are rounding residue
TANGENT_TOL = 1e-12


class GeometryError(ValueError):
    """Base class for errors raised by constraint-set operations."""


class DimensionMismatch(GeometryError):
    pass


class Unbounded(GeometryError):
    """The linear objective has no minimizer over the set."""


class InfeasibleCenter(GeometryError):
    pass


class BadRadius(GeometryError):
    pass


class InvalidSet(GeometryError):
    def __init__(self, variant: str, violations: list[str]):
        self.variant = variant
        self.violations = violations
        super().__init__(f"invalid {variant}: " + "; ".join(violations))


def as_vector(x: ArrayLike, name: str = "x") -> Vector:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1 or v.size == 0:
        raise GeometryError(f"{name} must be a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise GeometryError(f"{name} has non-finite entries")
    return v


def _lexmin(points: Sequence[Vector]) -> Vector:
    """Lexicographically smallest point."""
    return min(points, key=lambda p: tuple(p.tolist()))


def _lexmin_on_sphere(center: Vector, radius: float, normal: Vector | None) -> Vector:
    """Lexicographic minimizer over a sphere, optionally inside the hyperplane
    through ``center`` orthogonal to the unit vector ``normal``."""
    d = center.size
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        if normal is not None:
            e = e - normal[i] * normal
        n = np.linalg.norm(e)
        if n > 1e-12:
            return center - radius * e / n
    return center.copy()


@dataclass(frozen=True)
class LocalBall:
    center: Vector
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center, "center"))
        r = float(self.radius)
        if not math.isfinite(r) or r < 0:
            raise BadRadius(f"radius must be finite and >= 0, got {self.radius!r}")
        object.__setattr__(self, "radius", r)


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Nonempty closed convex subset of R^d.

    Subclasses list their parameters in ``_params``; vectors are coerced to
    float arrays and checked by ``check`` at construction.
    """

    variant: ClassVar[str] = ""
    _params: ClassVar[tuple[str, ...]] = ()
    _vector_params: ClassVar[tuple[str, ...]] = ()
    compact: ClassVar[bool] = False

    def __post_init__(self):
        for name in self._vector_params:
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        problems = type(self).check(**self.params())
        if problems:
            raise InvalidSet(self.variant, problems)
        for name in self._vector_params:
            getattr(self, name).setflags(write=False)

    # construction / serialization -------------------------------------------------
    @classmethod
    def check(cls, **params: Any) -> list[str]:
        raise NotImplementedError

    def params(self) -> dict[str, Any]:
        return {name: getattr(self, name) for name in self._params}

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"variant": self.variant}
        for name, value in self.params().items():
            out[name] = value.tolist() if isinstance(value, np.ndarray) else value
        return out

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self.to_dict().items() if k != "variant")
        return f"{type(self).__name__}({inner})"

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def _check_dim(self, x: ArrayLike, name: str = "x") -> Vector:
        v = as_vector(x, name)
        if v.size != self.dim:
            raise DimensionMismatch(f"{name} has dimension {v.size}, set has dimension {self.dim}")
        return v

    # oracles ----------------------------------------------------------------------
    def project(self, x: ArrayLike) -> Vector:
        """Euclidean projection. Accepts a vector or an (n, d) batch."""
        arr = np.asarray(x, dtype=np.float64)
        if arr.shape[-1:] != (self.dim,):
            raise DimensionMismatch(f"expected trailing dimension {self.dim}, got shape {arr.shape}")
        return self._project(arr)

    def contains(self, x: ArrayLike, tol: float = MEMBERSHIP_TOL) -> bool:
        v = self._check_dim(x)
        return bool(np.linalg.norm(v - self._project(v)) <= tol)

    def global_lmo(self, g: ArrayLike) -> Vector:
        return self._global_lmo(self._check_dim(g, "g"))

    def local_lmo(self, ball: LocalBall, g: ArrayLike) -> Vector:
        x = self._check_dim(ball.center, "center")
        g = self._check_dim(g, "g")
        t = ball.radius
        if not (t > 0 and math.isfinite(t)):
            raise BadRadius(f"local LMO needs a positive finite radius, got {t!r}")
        if not self.contains(x, MEMBERSHIP_TOL):
            raise InfeasibleCenter(f"ball center {x.tolist()} is not in {self!r}")
        gn = float(np.linalg.norm(g))
        if gn == 0.0:
            return x.copy()
        return self._local_lmo(x, t, g, gn)

    def _project(self, x: NDArray) -> NDArray:
        raise NotImplementedError

    def _global_lmo(self, g: Vector) -> Vector:
        raise NotImplementedError

    def _local_lmo(self, x: Vector, t: float, g: Vector, gn: float) -> Vector:
        raise NotImplementedError


def _finite(name: str, v: Any) -> list[str]:
    arr = np.asarray(v, dtype=np.float64)
    if arr.size == 0:
        return [f"{name} is empty"]
    if not np.all(np.isfinite(arr)):
        return [f"{name} has non-finite entries"]
    return []


@dataclass(frozen=True, eq=False)
class WholeSpace(ConstraintSet):
    d: int
    variant: ClassVar[str] = "WholeSpace"
    _params: ClassVar[tuple[str, ...]] = ("d",)

    @classmethod
    def check(cls, d) -> list[str]:
        return [] if int(d) == d and d >= 1 else ["d >= 1 violated"]

    @property
    def dim(self) -> int:
        return int(self.d)

    def _project(self, x):
        return x.copy()

    def _global_lmo(self, g):
        if np.any(g != 0):
            raise Unbounded("linear form is unbounded below on the whole space")
        return np.zeros(self.dim)

    def _local_lmo(self, x, t, g, gn):
        return x - t * g / gn


@dataclass(frozen=True, eq=False)
class Singleton(ConstraintSet):
    c: Vector
    variant: ClassVar[str] = "Singleton"
    _params: ClassVar[tuple[str, ...]] = ("c",)
    _vector_params: ClassVar[tuple[str, ...]] = ("c",)
    compact: ClassVar[bool] = True

    @classmethod
    def check(cls, c) -> list[str]:
        return _finite("c", c)

    @property
    def dim(self):
        return self.c.size

    def _project(self, x):
        return np.broadcast_to(self.c, x.shape).copy()

    def _global_lmo(self, g):
        return self.c.copy()

    def _local_lmo(self, x, t, g, gn):
        return self.c.copy()


@dataclass(frozen=True, eq=False)
class AffineSubspace(ConstraintSet):
    """``a + span(basis)``; ``basis`` rows are orthonormal."""

    a: Vector
    basis: NDArray
    variant: ClassVar[str] = "AffineSubspace"
    _params: ClassVar[tuple[str, ...]] = ("a", "basis")
    _vector_params: ClassVar[tuple[str, ...]] = ("a", "basis")

    @classmethod
    def check(cls, a, basis) -> list[str]:
        problems = _finite("a", a)
        B = np.atleast_2d(np.asarray(basis, dtype=np.float64))
        if B.size == 0:
            return problems + ["basis is empty"]
        if B.shape[1] != np.asarray(a).size:
            return problems + ["basis vectors must have the dimension of a"]
        problems += _finite("basis", B)
        if not problems and not np.allclose(B @ B.T, np.eye(B.shape[0]), rtol=0, atol=ORTHONORMAL_TOL):
            problems.append("basis orthonormality violated")
        return problems

    def __post_init__(self):
        object.__setattr__(self, "basis", np.atleast_2d(np.asarray(self.basis, dtype=np.float64)))
        super().__post_init__()

    @classmethod
    def from_spanning(cls, a: ArrayLike, vectors: ArrayLike) -> "AffineSubspace":
        """Orthonormalize arbitrary spanning vectors (rows) before building."""
        V = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        q, r = np.linalg.qr(V.T)
        keep = np.abs(np.diag(r)) > 1e-12 * max(1.0, np.abs(r).max())
        return cls(a, q[:, keep].T)

    @property
    def dim(self):
        return self.a.size

    def tangent(self, v: NDArray) -> NDArray:
        """Orthogonal projection onto span(basis)."""
        return (v @ self.basis.T) @ self.basis

    def _project(self, x):
        return self.a + self.tangent(x - self.a)

    def _global_lmo(self, g):
        if np.linalg.norm(self.tangent(g)) > TANGENT_TOL * np.linalg.norm(g):
            raise Unbounded("linear form is unbounded below on the affine subspace")
        return self.a.copy()

    def _local_lmo(self, x, t, g, gn):
        pg = self.tangent(g)
        n = np.linalg.norm(pg)
        if n <= TANGENT_TOL * gn:
            return x.copy()
        return x - t * pg / n


@dataclass(frozen=True, eq=False)
class Hyperplane(ConstraintSet):
    """``{z : <a, z> = b}``."""

    a: Vector
    b: float
    variant: ClassVar[str] = "Hyperplane"
    _params: ClassVar[tuple[str, ...]] = ("a", "b")
    _vector_params: ClassVar[tuple[str, ...]] = ("a",)

    @classmethod
    def check(cls, a, b) -> list[str]:
        problems = _finite("a", a)
        if not problems and not np.any(np.asarray(a) != 0):
            problems.append("a != 0 violated")
        if not math.isfinite(b):
            problems.append("b must be finite")
        return problems

    @property
    def dim(self):
        return self.a.size

    def _tangential(self, v):
        return v - (v @ self.a / (self.a @ self.a))[..., None] * self.a

    def _project(self, x):
        return x - ((x @ self.a - self.b) / (self.a @ self.a))[..., None] * self.a

    def _global_lmo(self, g):
        if np.linalg.norm(self._tangential(g)) > TANGENT_TOL * np.linalg.norm(g):
            raise Unbounded("linear form is unbounded below on the hyperplane")
        return self.b * self.a / (self.a @ self.a)

    def _local_lmo(self, x, t, g, gn):
        gt = self._tangential(g)
        n = np.linalg.norm(gt)
        if n <= TANGENT_TOL * gn:
            return x.copy()
        return x - t * gt / n


def _unit_problems(v) -> list[str]:
    problems = _finite("v", v)
    if not problems and abs(np.linalg.norm(v) - 1.0) > ORTHONORMAL_TOL:
        problems.append("v must be a unit vector")
    return problems


@dataclass(frozen=True, eq=False)
class AffineLine(ConstraintSet):
    """``a + span{v}`` with ``||v|| = 1``."""

    a: Vector
    v: Vector
    variant: ClassVar[str] = "AffineLine"
    _params: ClassVar[tuple[str, ...]] = ("a", "v")
    _vector_params: ClassVar[tuple[str, ...]] = ("a", "v")

    @classmethod
    def check(cls, a, v) -> list[str]:
        problems = _finite("a", a) + _unit_problems(v)
        if np.asarray(a).size != np.asarray(v).size:
            problems.append("a and v must have equal dimension")
        return problems

    @property
    def dim(self):
        return self.a.size

    def _project(self, x):
        return self.a + ((x - self.a) @ self.v)[..., None] * self.v

    def _global_lmo(self, g):
        if g @ self.v != 0:
            raise Unbounded("linear form is unbounded below on the line")
        return self.a.copy()

    def _local_lmo(self, x, t, g, gn):
        s = g @ self.v
        if s > 0:
            return x - t * self.v
        if s < 0:
            return x + t * self.v
        return _lexmin([x - t * self.v, x + t * self.v])


@dataclass(frozen=True, eq=False)
class Ray(ConstraintSet):
    """``{a + alpha v : alpha >= 0}`` with ``||v|| = 1``."""

    a: Vector
    v: Vector
    variant: ClassVar[str] = "Ray"
    _params: ClassVar[tuple[str, ...]] = ("a", "v")
    _vector_params: ClassVar[tuple[str, ...]] = ("a", "v")

    check = AffineLine.check

    @property
    def dim(self):
        return self.a.size

    def _project(self, x):
        alpha = np.maximum((x - self.a) @ self.v, 0.0)
        return self.a + np.asarray(alpha)[..., None] * self.v

    def _global_lmo(self, g):
        if g @ self.v < 0:
            raise Unbounded("linear form is unbounded below along the ray")
        return self.a.copy()

    def _local_lmo(self, x, t, g, gn):
        ax = max((x - self.a) @ self.v, 0.0)
        lo, hi = max(0.0, ax - t), ax + t
        s = g @ self.v
        if s > 0:
            alpha = lo
        elif s < 0:
            alpha = hi
        else:
            return _lexmin([self.a + lo * self.v, self.a + hi * self.v])
        return self.a + alpha * self.v


@dataclass(frozen=True, eq=False)
class Segment(ConstraintSet):
    a: Vector
    b: Vector
    variant: ClassVar[str] = "Segment"
    _params: ClassVar[tuple[str, ...]] = ("a", "b")
    _vector_params: ClassVar[tuple[str, ...]] = ("a", "b")
    compact: ClassVar[bool] = True

    @classmethod
    def check(cls, a, b) -> list[str]:
        problems = _finite("a", a) + _finite("b", b)
        if np.asarray(a).size != np.asarray(b).size:
            problems.append("a and b must have equal dimension")
        elif not problems and np.array_equal(np.asarray(a), np.asarray(b)):
            problems.append("a != b violated")
        return problems

    @property
    def dim(self):
        return self.a.size

    def _point(self, lam):
        return (1.0 - lam) * self.a + lam * self.b

    def _project(self, x):
        e = self.b - self.a
        lam = np.clip((x - self.a) @ e / (e @ e), 0.0, 1.0)
        return self.a + np.asarray(lam)[..., None] * e

    def _global_lmo(self, g):
        s = g @ (self.b - self.a)
        if s > 0:
            return self.a.copy()
        if s < 0:
            return self.b.copy()
        return _lexmin([self.a, self.b]).copy()

    def _local_lmo(self, x, t, g, gn):
        e = self.b - self.a
        length = np.linalg.norm(e)
        lam_x = float(np.clip((x - self.a) @ e / (e @ e), 0.0, 1.0))
        lo = max(0.0, lam_x - t / length)
        hi = min(1.0, lam_x + t / length)
        s = g @ e
        if s > 0:
            return self._point(lo)
        if s < 0:
            return self._point(hi)
        return _lexmin([self._point(lo), self._point(hi)])


@dataclass(frozen=True, eq=False)
class EuclideanBall(ConstraintSet):
    c: Vector
    R: float
    variant: ClassVar[str] = "EuclideanBall"
    _params: ClassVar[tuple[str, ...]] = ("c", "R")
    _vector_params: ClassVar[tuple[str, ...]] = ("c",)
    compact: ClassVar[bool] = True

    @classmethod
    def check(cls, c, R) -> list[str]:
        problems = _finite("c", c)
        if not (math.isfinite(R) and R > 0):
            problems.append("R > 0 violated")
        return problems

    @property
    def dim(self):
        return self.c.size

    def _project(self, x):
        d = x - self.c
        n = np.linalg.norm(d, axis=-1, keepdims=True)
        scale = np.where(n > self.R, self.R / np.where(n > 0, n, 1.0), 1.0)
        return self.c + d * scale

    def _global_lmo(self, g):
        n = np.linalg.norm(g)
        if n == 0:
            return _lexmin_on_sphere(self.c, self.R, None)
        return self.c - self.R * g / n

    def _local_lmo(self, x, t, g, gn):
        u = g / gn
        z = x - t * u
        if np.linalg.norm(z - self.c) <= self.R:
            return z
        w = self.c - self.R * u
        if np.linalg.norm(w - x) <= t:
            return w
        # both spheres active
        d = self.c - x
        rho = np.linalg.norm(d)
        e1 = d / rho
        alpha = (rho * rho + t * t - self.R * self.R) / (2.0 * rho)
        s = math.sqrt(max(t * t - alpha * alpha, 0.0))
        p = u - (u @ e1) * e1
        pn = np.linalg.norm(p)
        if pn <= 1e-15:
            return _lexmin_on_sphere(x + alpha * e1, s, e1)
        return x + alpha * e1 - s * p / pn


@dataclass(frozen=True, eq=False)
class Box(ConstraintSet):
    lo: Vector
    hi: Vector
    variant: ClassVar[str] = "Box"
    _params: ClassVar[tuple[str, ...]] = ("lo", "hi")
    _vector_params: ClassVar[tuple[str, ...]] = ("lo", "hi")
    compact: ClassVar[bool] = True

    @classmethod
    def check(cls, lo, hi) -> list[str]:
        problems = _finite("lo", lo) + _finite("hi", hi)
        if np.asarray(lo).size != np.asarray(hi).size:
            problems.append("lo and hi must have equal dimension")
        elif not problems and np.any(np.asarray(lo) > np.asarray(hi)):
            problems.append("lo <= hi violated")
        return problems

    @property
    def dim(self):
        return self.lo.size

    def contains(self, x, tol=MEMBERSHIP_TOL):
        v = self._check_dim(x)
        return bool(np.all(v >= self.lo - tol) and np.all(v <= self.hi + tol))

    def _project(self, x):
        return np.clip(x, self.lo, self.hi)

    def _global_lmo(self, g):
        return np.where(g < 0, self.hi, self.lo)

    def _local_lmo(self, x, t, g, gn):
        x = np.clip(x, self.lo, self.hi)
        # z(lam) = clip(x - lam g) walks the dual path; coordinate i freezes at
        # its target bound once lam passes gap_i / |g_i|.
        moving = np.flatnonzero(g != 0)
        target = np.where(g > 0, self.lo, self.hi)
        gap = np.abs(x - target)
        brk = gap[moving] / np.abs(g[moving])
        order = moving[np.argsort(brk, kind="stable")]
        frozen_sq = 0.0
        lam = math.inf
        for j, i in enumerate(order):
            lam_i = gap[i] / abs(g[i])
            free = order[j:]
            free_g2 = float(g[free] @ g[free])
            if frozen_sq + lam_i * lam_i * free_g2 >= t * t:
                lam = math.sqrt(max(t * t - frozen_sq, 0.0) / free_g2)
                break
            frozen_sq += gap[i] * gap[i]
        z = np.clip(x - lam * g if math.isfinite(lam) else np.where(g != 0, target, x), self.lo, self.hi)
        if math.isfinite(lam):
            # coordinates past their breakpoint sit exactly on the bound
            done = np.zeros(g.size, dtype=bool)
            done[moving] = gap[moving] <= lam * np.abs(g[moving])
            z[done] = target[done]
        return z


@dataclass(frozen=True, eq=False)
class Slab(ConstraintSet):
    """``{z : lo <= <a, z> <= hi}``; either bound may be infinite."""

    a: Vector
    lo: float
    hi: float
    variant: ClassVar[str] = "Slab"
    _params: ClassVar[tuple[str, ...]] = ("a", "lo", "hi")
    _vector_params: ClassVar[tuple[str, ...]] = ("a",)

    @classmethod
    def check(cls, a, lo, hi) -> list[str]:
        problems = _finite("a", a)
        if not problems and not np.any(np.asarray(a) != 0):
            problems.append("a != 0 violated")
        if math.isnan(lo) or math.isnan(hi) or lo == math.inf or hi == -math.inf:
            problems.append("bounds must be ordered reals")
        elif lo > hi:
            problems.append("lo <= hi violated")
        return problems

    @property
    def dim(self):
        return self.a.size

    def contains(self, x, tol=MEMBERSHIP_TOL):
        v = self._check_dim(x)
        s = v @ self.a
        na = np.linalg.norm(self.a)
        return bool((self.lo - s) / na <= tol and (s - self.hi) / na <= tol)

    def _project(self, x):
        s = x @ self.a
        return x + ((np.clip(s, self.lo, self.hi) - s) / (self.a @ self.a))[..., None] * self.a

    def _global_lmo(self, g):
        aa = self.a @ self.a
        gt = g - (g @ self.a) / aa * self.a
        s = g @ self.a
        if np.linalg.norm(gt) > TANGENT_TOL * np.linalg.norm(g):
            raise Unbounded("linear form is unbounded below on the slab")
        level = self.lo if s > 0 else self.hi if s < 0 else (self.lo if math.isfinite(self.lo) else self.hi)
        if not math.isfinite(level):
            raise Unbounded("linear form is unbounded below on the half-space")
        return level * self.a / aa

    def _local_lmo(self, x, t, g, gn):
        z = x - t * g / gn
        s = z @ self.a
        if self.lo <= s <= self.hi:
            return z
        na = np.linalg.norm(self.a)
        n = self.a / na
        level = self.lo if s < self.lo else self.hi
        # perpendicular move onto the active boundary, rest of the budget
        # along the tangential descent direction inside it
        h = (level - x @ self.a) / na
        base = x + h * n
        gt = g - (g @ n) * n
        gtn = np.linalg.norm(gt)
        if gtn <= TANGENT_TOL * gn:
            return base
        return base - math.sqrt(max(t * t - h * h, 0.0)) * gt / gtn


@dataclass(frozen=True, eq=False)
class Diamond(ConstraintSet):
    """Planar l1 ball ``{z in R^2 : ||z - c||_1 <= R}``."""

    c: Vector
    R: float
    variant: ClassVar[str] = "Diamond"
    _params: ClassVar[tuple[str, ...]] = ("c", "R")
    _vector_params: ClassVar[tuple[str, ...]] = ("c",)
    compact: ClassVar[bool] = True

    @classmethod
    def check(cls, c, R) -> list[str]:
        problems = _finite("c", c)
        if np.asarray(c).size != 2:
            problems.append("Diamond is defined in dimension 2 only")
        if not (math.isfinite(R) and R > 0):
            problems.append("R > 0 violated")
        return problems

    @property
    def dim(self):
        return 2

    def vertices(self) -> NDArray:
        R = self.R
        return self.c + np.array([[R, 0.0], [0.0, R], [-R, 0.0], [0.0, -R]])

    def contains(self, x, tol=MEMBERSHIP_TOL):
        v = self._check_dim(x)
        return bool(np.abs(v - self.c).sum() <= self.R + tol)

    def _project(self, x):
        d = np.atleast_2d(x - self.c)
        out = d.copy()
        outside = np.abs(d).sum(axis=1) > self.R
        for row in np.flatnonzero(outside):
            a = np.abs(d[row])
            mu = np.sort(a)[::-1]
            cs = np.cumsum(mu)
            k = np.arange(1, a.size + 1)
            rho = np.nonzero(mu * k > cs - self.R)[0][-1]
            theta = (cs[rho] - self.R) / (rho + 1.0)
            out[row] = np.sign(d[row]) * np.maximum(a - theta, 0.0)
        return self.c + out.reshape(np.shape(x))

    def _global_lmo(self, g):
        i = int(np.argmax(np.abs(g)))
        z = self.c.copy()
        z[i] -= self.R * (1.0 if g[i] > 0 else -1.0 if g[i] < 0 else 1.0)
        return z

    def _local_lmo(self, x, t, g, gn):
        z = x - t * g / gn
        if np.abs(z - self.c).sum() <= self.R:
            return z
        verts = self.vertices()
        cands = [v for v in verts if np.linalg.norm(v - x) <= t]
        for i in range(4):
            p, q = verts[i], verts[(i + 1) % 4]
            cands.extend(_circle_segment(x, t, p, q))
        if not cands:
            # t below rounding at a vertex: the center is the only certified feasible point
            return x.copy()
        best = min(float(g @ c) for c in cands)
        return _lexmin([c for c in cands if g @ c <= best])


def _circle_segment(x: Vector, t: float, p: Vector, q: Vector) -> list[Vector]:
    """Points of the segment [p, q] at distance exactly ``t`` from ``x``.

    Uses the foot of the perpendicular and the half chord, which stays
    accurate when ``t`` is tiny next to the segment length.
    """
    e = q - p
    el = math.sqrt(e @ e)
    s0 = (x - p) @ e / (el * el)
    h2 = float(np.sum((p + s0 * e - x) ** 2))
    if h2 > t * t:
        return []
    w = math.sqrt(t * t - h2) / el
    return [p + s * e for s in (s0 - w, s0 + w) if 0.0 <= s <= 1.0]


VARIANTS: dict[str, type[ConstraintSet]] = {
    cls.variant: cls
    for cls in (WholeSpace, Singleton, AffineSubspace, Hyperplane, AffineLine, Ray,
                Segment, EuclideanBall, Box, Slab, Diamond)
}


def _decode_params(cls: type[ConstraintSet], data: Mapping[str, Any]) -> dict[str, Any]:
    try:
        params = {name: data[name] for name in cls._params}
    except KeyError as exc:
        raise GeometryError(f"{cls.variant} document missing field {exc.args[0]!r}") from None
    for name in cls._params:
        if name in cls._vector_params:
            params[name] = np.asarray(params[name], dtype=np.float64)
        elif name == "d":
            params[name] = int(params[name])
        else:
            params[name] = float(params[name])
    return params


def set_from_dict(data: Mapping[str, Any]) -> ConstraintSet:
    try:
        cls = VARIANTS[data["variant"]]
    except KeyError:
        raise GeometryError(f"unknown constraint-set variant {data.get('variant')!r}") from None
    return cls(**_decode_params(cls, data))


# functional interface ----------------------------------------------------------------

def contains(s: ConstraintSet, x: ArrayLike, tol: float = MEMBERSHIP_TOL) -> bool:
    return s.contains(x, tol)


def project(s: ConstraintSet, x: ArrayLike) -> Vector:
    return s.project(as_vector(x))


def global_lmo(s: ConstraintSet, g: ArrayLike) -> Vector:
    return s.global_lmo(g)


def local_lmo(s: ConstraintSet, ball: LocalBall, g: ArrayLike) -> Vector:
    return s.local_lmo(ball, g)


def validate(s: ConstraintSet | Mapping[str, Any]) -> list[str]:
    """List invariant violations of a set or of a serialized set document."""
    if isinstance(s, ConstraintSet):
        return type(s).check(**s.params())
    cls = VARIANTS.get(s.get("variant"))
    if cls is None:
        return [f"unknown variant {s.get('variant')!r}"]
    try:
        return cls.check(**_decode_params(cls, s))
    except (GeometryError, TypeError, ValueError) as exc:
        return [str(exc)]
