"""Acceptance criteria, one test per criterion; each prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also collected into the terminal summary.
"""
import time

import numpy as np
import pytest
from helpers import FAMILIES, family_dims, planted_quadratic, random_lmo_instance, random_point_in, random_set

from locallmo import geometry as geo
from locallmo import objectives as O
from locallmo import oracle as orc
from locallmo import rules as R
from locallmo import solvers as S
from locallmo.harness import paperK_comparison, paperL_qsweep, run_experiment

# squared distances after 100 iterations
REFERENCE_DIST_SQ = {"local_lmo": 1.32e-18, "pgd": 6.71e-24, "fw": 1.58e-5}
# distances after 100 iterations, per schedule
TABLE3 = {
    "adaptive": 1.15e-9,
    "q=0.800": 3.47e-1, "q=0.817": 2.05e-1, "q=0.833": 1.93e-3, "q=0.850": 4.45e-9, "q=0.867": 5.15e-9,
    "q=0.883": 1.91e-6, "q=0.900": 7.27e-8, "q=0.917": 6.86e-5, "q=0.933": 4.22e-4, "q=0.950": 1.39e-6,
}


def test_method_comparison_reproduction(criterion):
    run_experiment(paperK_comparison(), write=False)  # warm caches before timing
    t0 = time.perf_counter()
    rep = run_experiment(paperK_comparison(), write=False)
    secs = time.perf_counter() - t0
    d = {k: rep.row(k)["dist_sq"] for k in REFERENCE_DIST_SQ}
    ok = (d["local_lmo"] <= 1e-15 and d["pgd"] <= 1e-19
          and REFERENCE_DIST_SQ["fw"] / 2 <= d["fw"] <= REFERENCE_DIST_SQ["fw"] * 2 and secs < 1.0)
    detail = ", ".join(f"{k}={v:.3e}" for k, v in d.items()) + f", {secs:.3f}s"
    assert criterion("Method comparison reproduction", ok, detail)


def test_radius_schedule_sweep_reproduction(criterion):
    t0 = time.perf_counter()
    rep = run_experiment(paperL_qsweep(), write=False)
    secs = time.perf_counter() - t0
    bad = []
    worst = 1.0
    for label, ref in TABLE3.items():
        got = rep.row(label)["dist"]
        ratio = max(got / ref, ref / got)
        worst = max(worst, ratio)
        if ratio > (3.0 if ref >= 1e-6 else 10.0):
            bad.append(f"{label}: {got:.3e} vs {ref:.3e}")
    ok = not bad and secs < 2.0
    assert criterion("Radius schedule sweep reproduction", ok,
                     f"worst ratio {worst:.2f}, {secs:.3f}s" + (f"; off: {bad}" if bad else ""))


def test_admissible_radius_property_suite(criterion):
    rng = np.random.default_rng(31)
    rules = [R.StronglyConvexTheta(), R.SmoothGradDiff(), R.Polyak()]
    fams = [f for f in FAMILIES if f != "Singleton"]
    worst = {"fejer": -np.inf, "boundary_step": -np.inf, "radius_bound": -np.inf}
    n = 0
    t0 = time.perf_counter()
    while n < 520:
        for fam in fams:
            for d in family_dims(fam):
                s = random_set(fam, d, rng)
                f = planted_quadratic(s, rng)
                x0 = random_point_in(s, rng)
                tr = S.run_local_lmo(s, f, x0, S.SolverConfig("LocalLMO", rules[n % 3], 60))
                for r in orc.check_trajectory(tr, f, list(worst)).results:
                    worst[r.claim] = max(worst[r.claim], r.worst_slack)
                n += 1
    secs = time.perf_counter() - t0
    ok = n >= 500 and max(worst.values()) < 1e-9 and secs < 30
    detail = f"{n} instances, " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", {secs:.1f}s"
    assert criterion("Admissible radius property suite", ok, detail)


def _bounded_gradient_quadratic(s, rng):
    f = planted_quadratic(s, rng)
    G = np.linalg.norm(f.Q, 2) * (np.linalg.norm(s.c) + s.R) + np.linalg.norm(f.q)
    return f.with_constants(G=float(G))


def test_rate_bounds(criterion):
    rng = np.random.default_rng(32)
    worst = {}

    def track(report):
        for r in report.results:
            worst[r.claim] = max(worst.get(r.claim, -np.inf), r.worst_slack)

    f = O.make_paper_quadratic()
    box = O.paper_box()
    track(orc.check_trajectory(S.run(box, f, [4, 4], S.SolverConfig("LocalLMO", R.SmoothGradDiff(), 200)),
                               f, ["smooth_rate"]))
    track(orc.check_trajectory(S.run(box, f, [4, 4], S.SolverConfig("LocalLMO", R.StronglyConvexTheta(), 200)),
                               f, ["contraction"]))
    for _ in range(20):
        d = int(rng.integers(1, 4))
        s = geo.EuclideanBall(rng.uniform(-2, 2, d), float(rng.uniform(0.5, 2)))
        g = _bounded_gradient_quadratic(s, rng)
        x0 = random_point_in(s, rng)
        track(orc.check_trajectory(S.run(s, g, x0, S.SolverConfig("LocalLMO", R.SmoothGradDiff(), 150)),
                                   g, ["smooth_rate"]))
        track(orc.check_trajectory(S.run(s, g, x0, S.SolverConfig("LocalLMO", R.StronglyConvexTheta(), 150)),
                                   g, ["contraction"]))
        track(orc.check_trajectory(S.run(s, g, x0, S.SolverConfig("LocalLMO", R.Polyak(), 150)),
                                   g, ["polyak_rate"]))

    p = O.PowerThreeHalves()
    seg = geo.Segment([0.0], [1.0])
    track(orc.check_trajectory(S.run(seg, p, [1.0], S.SolverConfig("NonsmoothLocalLMO", R.Polyak(), 500)),
                               p, ["avg_iterate", "polyak_rate"]))

    for w in ([1.0, -2.0, 0.5], [0.7, 1.3], [-1.5]):
        w = np.array(w)
        box3 = geo.Box(-np.ones(w.size), np.ones(w.size))
        e = O.ExpSum(w)
        L0, L1 = e.l0l1_on(box3)
        e = e.with_constants(L0=L0, L1=L1, L=float(np.max(w ** 2 * np.exp(np.abs(w)))))
        e = e.with_optimum(O.constrained_optimum(e, box3, np.zeros(w.size), 50_000, 1e-14))
        track(orc.check_trajectory(S.run(box3, e, np.ones(w.size), S.SolverConfig("LocalLMO", R.AsymL0L1(), 300)),
                                   e, ["l0l1_rate"]))

    ok = max(worst.values()) < 1e-8
    assert criterion("Rate bounds", ok, ", ".join(f"{k} {v:.1e}" for k, v in sorted(worst.items())))


def test_nonconvex_descent(criterion):
    worst = {}
    rng = np.random.default_rng(33)
    for _ in range(10):
        qw = O.QuarticTwoWell(2, float(rng.uniform(0.5, 2)))
        box = geo.Box([-1.5, -1.0], [1.5, 1.0])
        L = qw.smoothness_on(box)
        qw = qw.with_constants(L=L).with_optimum([1.0, 0.0])
        x0 = rng.uniform(box.lo, box.hi)
        tr = S.run(box, qw, x0, S.SolverConfig("LocalLMO", R.GradientMapping(1 / L), 200))
        for r in orc.check_trajectory(tr, qw, ["nonconvex_descent", "nonconvex_rate"]).results:
            worst[r.claim] = max(worst.get(r.claim, -np.inf), r.worst_slack)
    ok = worst["nonconvex_descent"] <= 1e-10 and worst["nonconvex_rate"] <= 1e-8
    assert criterion("Non-convex descent", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_pgd_counterexample(criterion):
    bad = []
    for alpha in (0.5, 1.0, 25 / 16, 1.6, 10.0, 123.0):
        for C in (0.2, 1.0, 4.0):
            r = orc.counterexample_E2(alpha, C)
            x1 = np.asarray(r["x1"], dtype=float)
            if np.linalg.norm(x1 - [0.8, 0.0]) > 1e-12 * 0.8:
                bad.append(("x1", alpha, C))
            if abs(r["min_grad_diff_sq"] - 4 * alpha ** 2 / 5) > 1e-12 * 4 * alpha ** 2 / 5:
                bad.append(("min", alpha, C))
            if r["violated"] != (alpha > 25 * C / 16):
                bad.append(("violated", alpha, C))
    assert criterion("PGD counterexample", not bad, f"18 (alpha, C) pairs, mismatches {bad}")


def test_oracle_equivalence(criterion):
    rng = np.random.default_rng(34)
    t0 = time.perf_counter()
    worst = {}
    for fam in FAMILIES:
        n = 0
        w = 0.0
        while n < 1000:
            for d in family_dims(fam):
                s, ball, g = random_lmo_instance(fam, d, rng)
                ref = orc.oracle_local_lmo(s, ball, g)
                z = s.local_lmo(ball, g)
                w = max(w, abs(float(g @ z) - ref.objective))
                n += 1
        worst[fam] = w
    secs = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-8 and secs < 60
    assert criterion("Oracle equivalence", ok,
                     f"{len(FAMILIES)} families x 1000+, worst {max(worst.values()):.1e}, {secs:.1f}s")


def test_affine_subspace_reduction(criterion):
    rng = np.random.default_rng(35)
    worst = 0.0
    for _ in range(5):
        B = np.linalg.qr(rng.normal(size=(4, 2)))[0]
        a = rng.normal(size=4)
        sub = geo.AffineSubspace(a, B.T)
        f = planted_quadratic(sub, rng)
        L, gs = f.constants.L, f.optimum.grad_star
        x0 = sub.project(rng.normal(scale=3, size=4))
        tr = S.run(sub, f, x0, S.SolverConfig("LocalLMO", R.SmoothGradDiff(), 50))
        # normalized GD on h(y) = f(a + B y)
        y = B.T @ (x0 - a)
        for k in range(len(tr.iterates)):
            x = a + B @ y
            worst = max(worst, float(np.linalg.norm(x - tr.iterates[k])))
            g = f.gradient(x)
            gh = B.T @ g
            y = y - (np.linalg.norm(g - gs) / L) * gh / np.linalg.norm(gh)
        assert len(tr.iterates) == 51
    assert criterion("Affine-subspace reduction", worst <= 1e-12, f"5 subspaces x 50 steps, worst {worst:.1e}")


def _interpolating_sum(s, rng, n):
    """Quadratic components over ``s`` that all share the constrained minimizer."""
    from helpers import random_spd

    y = rng.normal(scale=3, size=s.dim)
    xs = s.project(y)
    comps = []
    for _ in range(n):
        Q, ev = random_spd(rng, s.dim, 20.0)
        q = -(y - xs) * rng.uniform(0, 2) - Q @ xs
        c = O.Quadratic(Q, q, 0.0, constants=O.Constants(L=float(ev.max()), mu=float(ev.min())))
        comps.append(c.with_optimum(xs))
    return O.FiniteSum(comps).with_optimum(xs)


def test_stochastic_sanity(criterion):
    rng = np.random.default_rng(36)
    notes = []
    ok = True
    # n = 1 reduces to the deterministic method for any seed
    s = geo.Box([-1, -1], [1, 1])
    f1 = planted_quadratic(s, rng)
    det = S.run(s, f1, [1, 1], S.SolverConfig("LocalLMO", R.StronglyConvexTheta(), 60))
    for seed in (0, 1, 2**63 - 1):
        st = S.run(s, O.FiniteSum([f1]).with_optimum(f1.optimum.x_star), [1, 1],
                   S.SolverConfig("StochasticLocalLMO", R.StronglyConvexTheta(), 60, seed=seed))
        ok &= np.array_equal(st.x, det.x)
    notes.append(f"n=1 identical {ok}")
    # interpolation: every realization contracts by the sampled component's factor
    worst = -np.inf
    for trial in range(30):
        fam = ("Box", "EuclideanBall", "Slab", "Hyperplane")[trial % 4]
        s = random_set(fam, 3, rng)
        F = _interpolating_sum(s, rng, 4)
        xs = F.optimum.x_star
        x0 = random_point_in(s, rng)
        for seed in range(5):
            tr = S.run(s, F, x0, S.SolverConfig("StochasticLocalLMO", R.StronglyConvexTheta(), 40, seed=seed))
            d = np.linalg.norm(tr.x - xs, axis=1)
            for k, i in enumerate(tr.indices):
                c = F.components[i].constants
                worst = max(worst, d[k + 1] - R.contraction_factor(c.mu, c.L) * d[k] - 1e-9)
    ok &= worst <= 0
    notes.append(f"D=0 contraction slack {worst:.1e}")
    # heterogeneous: Monte Carlo mean of the averaged squared gap against the bound
    comps = [O.Quadratic(np.eye(1), [-1.0], 0.5, constants=O.Constants(L=1, mu=1)).with_optimum([1.0]),
             O.Quadratic(np.eye(1), [1.0], 0.5, constants=O.Constants(L=1, mu=1)).with_optimum([-1.0])]
    F = O.FiniteSum(comps).with_optimum([0.0])
    seg = geo.Segment([-2.0], [2.0])
    K, G, x0 = 40, 3.0, np.array([2.0])
    means = []
    for seed in range(1000):
        tr = S.run(seg, F, x0, S.SolverConfig("StochasticLocalLMO", R.Polyak(), K, seed=seed))
        means.append(np.mean(np.asarray(tr.metrics["f_gap"][:K]) ** 2))
    mc = float(np.mean(means))
    bound = orc.stochastic_polyak_bound(G, float(np.linalg.norm(x0)), F.heterogeneity(), K, eta=0.5)
    ok &= (mc - bound) / bound < 0.05
    notes.append(f"D={F.heterogeneity():g} MC mean {mc:.3e} <= bound {bound:.3e}")
    assert criterion("Stochastic sanity", bool(ok), "; ".join(notes))


def _shipped_objectives():
    rng = np.random.default_rng(37)
    box = geo.Box([-1, -1], [1, 1])
    return [
        (O.make_paper_quadratic(), lambda: rng.uniform(2, 4, 2), 1e-6),
        (O.Quadratic(*_rand_quadratic(rng)), lambda: rng.normal(size=3), 1e-6),
        (O.PowerThreeHalves(), lambda: rng.uniform(0.05, 0.95, 1), 1e-7),
        (O.CounterexampleAlpha(10.0), lambda: rng.normal(size=2), 1e-6),
        (O.AbsoluteValue(3), lambda: rng.choice([-1, 1], 3) * rng.uniform(0.1, 2, 3), 1e-6),
        (O.QuarticTwoWell(2, 1.0), lambda: rng.uniform(box.lo, box.hi) * 1.5, 1e-6),
        (O.ExpSum([1.0, -2.0, 0.5]), lambda: rng.uniform(-1, 1, 3), 1e-6),
        (O.FiniteSum([O.Quadratic(*_rand_quadratic(rng)), O.ExpSum([0.3, 0.1, -0.4])]),
         lambda: rng.normal(size=3), 1e-6),
    ]


def _rand_quadratic(rng):
    from helpers import random_spd

    Q, _ = random_spd(rng, 3)
    return Q, rng.normal(size=3), float(rng.normal())


def test_gradient_checks(criterion):
    worst = {}
    for obj, sample, h in _shipped_objectives():
        worst[obj.variant + str(obj.dim)] = max(O.fd_gradient_check(obj, sample(), h) for _ in range(20))
    ok = max(worst.values()) < 1e-5
    assert criterion("Gradient checks", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
