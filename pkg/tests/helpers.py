"""Random instance builders shared by the test modules."""
import numpy as np

from locallmo import geometry as geo
from locallmo.objectives import Quadratic

FAMILIES = ("WholeSpace", "Singleton", "AffineSubspace", "Hyperplane", "AffineLine", "Ray",
            "Segment", "EuclideanBall", "Box", "Slab", "Diamond")


def unit(rng, d):
    v = rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_set(family, d, rng):
    a = rng.uniform(-2, 2, d)
    if family == "WholeSpace":
        return geo.WholeSpace(d)
    if family == "Singleton":
        return geo.Singleton(a)
    if family == "AffineSubspace":
        k = int(rng.integers(1, d + 1))
        return geo.AffineSubspace.from_spanning(a, rng.normal(size=(k, d)))
    if family == "Hyperplane":
        return geo.Hyperplane(rng.normal(size=d), float(rng.normal()))
    if family == "AffineLine":
        return geo.AffineLine(a, unit(rng, d))
    if family == "Ray":
        return geo.Ray(a, unit(rng, d))
    if family == "Segment":
        return geo.Segment(a, a + rng.uniform(-2, 2, d))
    if family == "EuclideanBall":
        return geo.EuclideanBall(a, float(rng.uniform(0.2, 2)))
    if family == "Box":
        return geo.Box(a, a + rng.uniform(0.05, 2, d))
    if family == "Slab":
        lo = float(rng.normal())
        kind = rng.integers(3)
        hi = lo + float(rng.uniform(0.05, 2))
        if kind == 1:
            lo = -np.inf
        elif kind == 2:
            hi = np.inf
        return geo.Slab(rng.normal(size=d), lo, hi)
    if family == "Diamond":
        return geo.Diamond(rng.uniform(-2, 2, 2), float(rng.uniform(0.2, 2)))
    raise ValueError(family)


def family_dims(family):
    return (2,) if family == "Diamond" else (1, 2, 3)


def random_point_in(s, rng, spread=3.0):
    """Feasible point; projections of random points land on faces often."""
    x = s.project(rng.normal(scale=spread, size=s.dim))
    if rng.random() < 0.5:
        # pull toward an interior-ish point so not every center sits on the boundary
        y = s.project(rng.normal(scale=spread, size=s.dim))
        lam = rng.random()
        x = lam * x + (1 - lam) * y
    return s.project(x)


def random_lmo_instance(family, d, rng):
    s = random_set(family, d, rng)
    c = random_point_in(s, rng)
    t = float(10 ** rng.uniform(-2, 0.5))
    g = rng.normal(size=d) * 10 ** rng.uniform(-1, 1)
    return s, geo.LocalBall(c, t), g


def random_spd(rng, d, cond=50.0):
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    ev = np.exp(rng.uniform(0, np.log(cond), d))
    ev[0], ev[-1] = 1.0, cond if d > 1 else 1.0
    ev = ev * rng.uniform(0.2, 3)
    Q = q @ np.diag(ev) @ q.T
    return (Q + Q.T) / 2, ev


def random_quadratic(rng, d):
    Q, ev = random_spd(rng, d)
    q = rng.normal(size=d) * 3
    return Quadratic(Q, q, 0.0)


def planted_quadratic(s, rng, cond=50.0):
    """Strongly convex quadratic whose minimizer over ``s`` is known exactly.

    x_star = P(y) for a random y, so y - x_star is a normal-cone vector; the
    linear term is chosen so that -grad f(x_star) equals it.
    """
    from locallmo.objectives import Constants

    d = s.dim
    Q, ev = random_spd(rng, d, cond)
    y = rng.normal(scale=3.0, size=d)
    x_star = s.project(y)
    normal = (y - x_star) * rng.uniform(0, 2)
    q = -normal - Q @ x_star
    f = Quadratic(Q, q, 0.0, constants=Constants(L=float(ev.max()), mu=float(ev.min())),
                  strictly_convex=True)
    return f.with_optimum(x_star)
