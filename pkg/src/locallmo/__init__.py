"""Local linear minimization oracle methods for constrained convex optimization."""
from .geometry import (
    AffineLine,
    AffineSubspace,
    Box,
    ConstraintSet,
    Diamond,
    EuclideanBall,
    Hyperplane,
    LocalBall,
    Ray,
    Segment,
    Singleton,
    Slab,
    WholeSpace,
    set_from_dict,
)
from .objectives import (
    AbsoluteValue,
    Constants,
    CounterexampleAlpha,
    ExpSum,
    FiniteSum,
    Objective,
    Optimum,
    PowerThreeHalves,
    Quadratic,
    QuarticTwoWell,
    fd_gradient_check,
    make_paper_quadratic,
    objective_from_dict,
    paper_box,
)
from .oracle import check_trajectory, counterexample_E2, oracle_local_lmo
from .rules import (
    AsymL0L1,
    Constant,
    ConstantGamma,
    FWClassic,
    GeometricSchedule,
    GradientMapping,
    InverseL,
    PGDAsymL0L1,
    Polyak,
    SmoothGradDiff,
    StronglyConvexTheta,
    TwoOverLplusMu,
    gradient_mapping,
)
from .solvers import (
    SolverConfig,
    Trajectory,
    run,
    run_frank_wolfe,
    run_local_lmo,
    run_nonsmooth_local_lmo,
    run_pgd,
    run_stochastic_local_lmo,
)

__version__ = "0.1.0"
