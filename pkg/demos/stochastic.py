"""Stochastic Local LMO with Polyak radii on a two-component finite sum.

f(x) = (1/2)[(x - 1)^2 / 2 + (x + 1)^2 / 2] on [-2, 2]; the components disagree at
x* = 0, so the iterates hover in a band whose width is set by the heterogeneity D.
"""
import numpy as np

from locallmo import geometry as geo
from locallmo import objectives as O
from locallmo import oracle
from locallmo import rules as R
from locallmo import solvers as S

comps = [O.Quadratic(np.eye(1), [s], 0.5, constants=O.Constants(L=1, mu=1)).with_optimum([-s])
         for s in (-1.0, 1.0)]
F = O.FiniteSum(comps).with_optimum([0.0])
seg = geo.Segment([-2.0], [2.0])
K = 40

gaps = []
for seed in range(300):
    tr = S.run(seg, F, [2.0], S.SolverConfig("StochasticLocalLMO", R.Polyak(), K, seed=seed))
    gaps.append(np.asarray(tr.metrics["f_gap"][:K]) ** 2)
gaps = np.array(gaps)

print("D =", F.heterogeneity())
print("mean squared gap, first and last 5 iterations:")
print(np.round(gaps.mean(axis=0)[:5], 4), "...", np.round(gaps.mean(axis=0)[-5:], 4))
bound = oracle.stochastic_polyak_bound(3.0, 2.0, F.heterogeneity(), K, eta=0.5)
print(f"averaged: {gaps.mean():.3f}  bound: {bound:.3f}")

# same seed, same sample path
a = S.run(seg, F, [2.0], S.SolverConfig("StochasticLocalLMO", R.Polyak(), K, seed=7))
b = S.run(seg, F, [2.0], S.SolverConfig("StochasticLocalLMO", R.Polyak(), K, seed=7))
print("reproducible:", a.indices == b.indices)
