"""Local LMO over unit balls in three norms, with the optimum on the boundary."""
import numpy as np

from locallmo import geometry as geo
from locallmo import harness

spec = harness.paperM_geometries()
report = harness.run_experiment(spec, write=False)
for run in spec.runs:
    p = spec.problem_for(run)
    traj = report.trajectories[run.label]
    xs = p.objective.optimum.x_star
    print(f"{run.label:>5}: {type(p.set).__name__:<14} x* = {np.round(xs, 6)}  "
          f"dist_sq after {len(traj.steps)} steps = {traj.metrics['dist_sq'][-1]:.2e}")

# one oracle call in each geometry from the same center and gradient direction
g = np.array([1.0, 1.0])
for s in (geo.Diamond(np.zeros(2), 1.0), geo.EuclideanBall(np.zeros(2), 1.0), geo.Box(-np.ones(2), np.ones(2))):
    for t in (0.3, 2.0):
        z = s.local_lmo(geo.LocalBall([0.5, 0.0], t), g)
        print(f"{type(s).__name__:<14} t={t:<4} z = {np.round(z, 4)}")
