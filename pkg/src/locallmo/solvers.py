"""Iteration drivers: Local LMO (deterministic, stochastic, subgradient), PGD and Frank-Wolfe."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
from numpy.typing import ArrayLike

from .geometry import ConstraintSet, GeometryError, LocalBall, Unbounded, Vector, as_vector, set_from_dict
from .objectives import FiniteSum, Objective, ObjectiveError, objective_from_dict
from .rules import (
    GradientMapping,
    RadiusRule,
    RuleError,
    StepsizeRule,
    ZeroDenominator,
    check_requirements,
    gradient_mapping,
    rule_from_dict,
)

LMO_METHODS = ("LocalLMO", "StochasticLocalLMO", "NonsmoothLocalLMO")
STEP_METHODS = ("PGD", "FrankWolfe")
METHODS = LMO_METHODS + STEP_METHODS
METRICS = ("dist_sq", "f_gap", "grad_diff_sq", "grad_map_norm", "fw_gap")


class ConfigError(ValueError):
    pass


class IterationError(RuntimeError):
    """A failure inside iteration ``k``; ``context`` holds the offending inputs."""

    def __init__(self, k: int, cause: Exception, context: dict[str, Any]):
        self.k = k
        self.cause = cause
        self.context = context
        super().__init__(f"iteration {k}: {type(cause).__name__}: {cause} | inputs {json.dumps(context)}")


@dataclass(frozen=True)
class SolverConfig:
    method: str
    rule: RadiusRule | StepsizeRule
    max_iters: int = 100
    seed: int = 0
    stop_tol: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.method in LMO_METHODS and not isinstance(self.rule, RadiusRule):
            raise ConfigError(f"{self.method} needs a radius rule, got {type(self.rule).__name__}")
        if self.method in STEP_METHODS and not isinstance(self.rule, StepsizeRule):
            raise ConfigError(f"{self.method} needs a stepsize rule, got {type(self.rule).__name__}")
        if not (isinstance(self.max_iters, (int, np.integer)) and self.max_iters >= 1):
            raise ConfigError("max_iters must be an integer >= 1")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not (self.stop_tol >= 0 and math.isfinite(self.stop_tol)):
            raise ConfigError("stop_tol must be finite and >= 0")

    def to_dict(self) -> dict[str, Any]:
        return {"method": self.method, "rule": self.rule.to_dict(), "max_iters": int(self.max_iters),
                "seed": int(self.seed), "stop_tol": self.stop_tol}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SolverConfig":
        try:
            return cls(method=data["method"], rule=rule_from_dict(data["rule"]),
                       max_iters=int(data.get("max_iters", 100)), seed=int(data.get("seed", 0)),
                       stop_tol=float(data.get("stop_tol", 0.0)))
        except KeyError as e:
            raise ConfigError(f"solver config missing field {e}") from None
        except RuleError as e:
            raise ConfigError(str(e)) from None


@dataclass
class Trajectory:
    """Iterates x_0..x_K, steps t_0..t_{K-1} and per-iterate metrics.

    Metrics hold one value per iterate; a metric that cannot be computed for a
    run is absent from ``metrics`` rather than filled with zeros.
    """

    method: str
    iterates: list[Vector] = field(default_factory=list)
    steps: list[float] = field(default_factory=list)
    metrics: dict[str, list[float]] = field(default_factory=dict)
    status: str = "MaxIters"
    rule: dict[str, Any] = field(default_factory=dict)
    indices: list[int] | None = None
    grad_map_gamma: float | None = None
    set: ConstraintSet | None = None
    problem: dict[str, Any] | None = None

    @property
    def x(self) -> np.ndarray:
        return np.array(self.iterates)

    @property
    def final(self) -> Vector:
        return self.iterates[-1]

    def __len__(self) -> int:
        return len(self.steps)

    def validate(self) -> list[str]:
        problems = []
        if len(self.iterates) != len(self.steps) + 1:
            problems.append("iterates must have one more entry than steps")
        for name, vals in self.metrics.items():
            if len(vals) != len(self.iterates):
                problems.append(f"metric {name} has {len(vals)} entries for {len(self.iterates)} iterates")
            if not np.all(np.isfinite(vals)):
                problems.append(f"metric {name} has non-finite entries")
        if not np.all(np.isfinite(self.steps)) or not all(np.all(np.isfinite(x)) for x in self.iterates):
            problems.append("non-finite iterate or step")
        return problems

    # CSV -----------------------------------------------------------------------------
    def header(self) -> list[str]:
        d = self.iterates[0].size
        return ["k", *[f"x{i}" for i in range(d)], "t_or_gamma", *METRICS]

    def to_csv(self, path: str | Path) -> Path:
        """Write one row per iterate plus a ``.meta.json`` sidecar; floats use 17 significant digits."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fmt = "{:.17g}".format
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.header())
            for k, x in enumerate(self.iterates):
                row = [str(k), *map(fmt, x)]
                row.append(fmt(self.steps[k]) if k < len(self.steps) else "")
                row += [fmt(self.metrics[m][k]) if m in self.metrics else "" for m in METRICS]
                w.writerow(row)
        meta = {"method": self.method, "status": self.status, "rule": self.rule, "indices": self.indices,
                "grad_map_gamma": self.grad_map_gamma, "problem": self.problem}
        meta_path(path).write_text(json.dumps(meta, indent=2))
        return path

    @classmethod
    def from_csv(cls, path: str | Path) -> "Trajectory":
        path = Path(path)
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        head, body = rows[0], rows[1:]
        xcols = [i for i, h in enumerate(head) if h.startswith("x")]
        tcol = head.index("t_or_gamma")
        meta = json.loads(meta_path(path).read_text()) if meta_path(path).exists() else {}
        traj = cls(method=meta.get("method", ""), status=meta.get("status", "MaxIters"),
                   rule=meta.get("rule", {}), indices=meta.get("indices"),
                   grad_map_gamma=meta.get("grad_map_gamma"), problem=meta.get("problem"))
        traj.iterates = [np.array([float(r[i]) for i in xcols]) for r in body]
        traj.steps = [float(r[tcol]) for r in body if r[tcol] != ""]
        for m in METRICS:
            j = head.index(m)
            if body and body[0][j] != "":
                traj.metrics[m] = [float(r[j]) for r in body]
        if traj.problem and "set" in traj.problem:
            traj.set = set_from_dict(traj.problem["set"])
        return traj


def meta_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".meta.json")


# metric bookkeeping ----------------------------------------------------------------------

class _Recorder:
    def __init__(self, s: ConstraintSet, obj: Objective, method: str, cfg: SolverConfig,
                 gamma: float | None, fw: bool):
        self.s, self.obj, self.gamma = s, obj, gamma
        self.traj = Trajectory(method=method, rule=cfg.rule.to_dict(), grad_map_gamma=gamma, set=s,
                               problem=_problem_dict(s, obj))
        names = []
        if obj.optimum is not None:
            names += ["dist_sq", "f_gap", "grad_diff_sq"]
        if gamma is not None:
            names.append("grad_map_norm")
        if fw:
            names.append("fw_gap")
        self.traj.metrics = {n: [] for n in names}

    def record(self, x: Vector, fw_gap: float | None = None) -> None:
        tr, obj = self.traj, self.obj
        tr.iterates.append(x.copy())
        m = tr.metrics
        if obj.optimum is not None:
            o = obj.optimum
            m["dist_sq"].append(float(np.sum((x - o.x_star) ** 2)))
            m["f_gap"].append(obj.gap(x))
            m["grad_diff_sq"].append(float(np.sum((_safe_grad(obj, x) - o.grad_star) ** 2)))
        if "grad_map_norm" in m:
            m["grad_map_norm"].append(float(np.linalg.norm(gradient_mapping(self.s, obj, x, self.gamma))))
        if "fw_gap" in m:
            m["fw_gap"].append(fw_gap)


def _safe_grad(obj: Objective, x: Vector) -> Vector:
    return obj.subgradient(x) if obj.convex else obj.gradient(x)


def _problem_dict(s: ConstraintSet, obj: Objective) -> dict[str, Any] | None:
    try:
        return {"set": s.to_dict(), "objective": obj.to_dict()}
    except NotImplementedError:
        return None


def _default_gamma(obj: Objective, rule: Any) -> float | None:
    if isinstance(rule, GradientMapping):
        return rule.gamma
    return 1.0 / obj.constants.L if obj.constants.L else None


def _prepare(s: ConstraintSet, obj: Objective, x0: ArrayLike, cfg: SolverConfig, method: str) -> Vector:
    if cfg.method != method:
        raise ConfigError(f"config method {cfg.method} does not match driver {method}")
    x = as_vector(x0, "x0")
    if x.size != s.dim or x.size != obj.dim:
        raise ConfigError(f"x0 dimension {x.size}, set {s.dim}, objective {obj.dim} disagree")
    if not s.contains(x):
        raise ConfigError(f"x0 = {x.tolist()} is not in {s!r}")
    return x


def _context(k: int, x: Vector, **extra: Any) -> dict[str, Any]:
    out: dict[str, Any] = {"k": k, "x": x.tolist()}
    for key, v in extra.items():
        out[key] = v.tolist() if isinstance(v, np.ndarray) else v
    return out


def _lmo_loop(s: ConstraintSet, obj: Objective, x: Vector, cfg: SolverConfig, rec: _Recorder,
              step: Callable[[int, Vector], tuple[float, Vector]], stop_on_zero: bool = True) -> Trajectory:
    """Shared Local LMO loop; ``step`` returns (t_k, g_k) for iterate k.

    A zero radius or zero direction is recorded as a zero-length step. It ends
    the run as Stationary unless ``stop_on_zero`` is off (stochastic runs, where
    only the sampled component is stationary).
    """
    tr = rec.traj
    rec.record(x)
    for k in range(cfg.max_iters):
        g = None
        try:
            try:
                t, g = step(k, x)
            except ZeroDenominator:
                # zero gradient at a point the rule sees as non-optimal: stationary
                t, g = 0.0, None
            if t == 0.0 or not np.any(g):
                tr.steps.append(0.0)
                rec.record(x)
                if stop_on_zero:
                    tr.status = "Stationary"
                    return tr
                continue
            x_new = s.local_lmo(LocalBall(x, t), g)
        except (GeometryError, RuleError, ObjectiveError) as e:
            raise IterationError(k, e, _context(k, x, g=g, rule=cfg.rule.to_dict())) from e
        tr.steps.append(float(t))
        moved = float(np.linalg.norm(x_new - x))
        x = x_new
        rec.record(x)
        if cfg.stop_tol > 0 and moved <= cfg.stop_tol:
            tr.status = "Converged"
            return tr
    return tr


def run_local_lmo(s: ConstraintSet, obj: Objective, x0: ArrayLike, cfg: SolverConfig) -> Trajectory:
    """Deterministic Local LMO: x_{k+1} = local_lmo(X, B(x_k, t_k), grad f(x_k))."""
    x = _prepare(s, obj, x0, cfg, "LocalLMO")
    check_requirements(cfg.rule, obj)
    rec = _Recorder(s, obj, "LocalLMO", cfg, _default_gamma(obj, cfg.rule), fw=False)

    def step(k, x):
        g = obj.gradient(x)
        return cfg.rule.radius(obj, s, x, k, g), g

    return _lmo_loop(s, obj, x, cfg, rec, step)


def run_nonsmooth_local_lmo(s: ConstraintSet, obj: Objective, x0: ArrayLike, cfg: SolverConfig) -> Trajectory:
    """Local LMO driven by a selected subgradient; stops Stationary when it vanishes."""
    x = _prepare(s, obj, x0, cfg, "NonsmoothLocalLMO")
    if not obj.convex:
        raise ConfigError("the subgradient variant needs a convex objective")
    check_requirements(cfg.rule, obj)
    rec = _Recorder(s, obj, "NonsmoothLocalLMO", cfg, None, fw=False)

    def step(k, x):
        g = obj.subgradient(x)
        if not np.any(g):
            return 0.0, g
        return cfg.rule.radius(obj, s, x, k, g), g

    return _lmo_loop(s, obj, x, cfg, rec, step)


def sample_index(seed: int, k: int, n: int) -> int:
    """Uniform index in [0, n) from a Philox stream keyed by ``seed`` at counter ``k``."""
    return int(np.random.Generator(np.random.Philox(key=seed, counter=k)).integers(n))


def run_stochastic_local_lmo(s: ConstraintSet, obj: FiniteSum, x0: ArrayLike, cfg: SolverConfig) -> Trajectory:
    """Local LMO on a finite sum with one uniformly sampled component per step.

    The radius rule is evaluated on the sampled component, so component
    metadata (f_star, x_star, L, mu, grad_star) must be declared as the rule
    requires. Metrics refer to the full objective.
    """
    x = _prepare(s, obj, x0, cfg, "StochasticLocalLMO")
    if not isinstance(obj, FiniteSum):
        raise ConfigError("stochastic Local LMO needs a FiniteSum objective")
    for c in obj.components:
        check_requirements(cfg.rule, c)
    rec = _Recorder(s, obj, "StochasticLocalLMO", cfg, _default_gamma(obj, cfg.rule), fw=False)
    rec.traj.indices = []

    def step(k, x):
        i = sample_index(cfg.seed, k, obj.n)
        rec.traj.indices.append(i)
        comp = obj.components[i]
        g = comp.subgradient(x) if comp.convex else comp.gradient(x)
        return cfg.rule.radius(comp, s, x, k, g), g

    return _lmo_loop(s, obj, x, cfg, rec, step, stop_on_zero=False)


def run_pgd(s: ConstraintSet, obj: Objective, x0: ArrayLike, cfg: SolverConfig) -> Trajectory:
    """Projected gradient descent x_{k+1} = P(x_k - gamma_k grad f(x_k))."""
    x = _prepare(s, obj, x0, cfg, "PGD")
    check_requirements(cfg.rule, obj)
    gamma0 = cfg.rule.stepsize(obj, x, 0)
    rec = _Recorder(s, obj, "PGD", cfg, gamma0, fw=False)
    tr = rec.traj
    rec.record(x)
    for k in range(cfg.max_iters):
        try:
            gamma = cfg.rule.stepsize(obj, x, k)
            x_new = s.project(x - gamma * obj.gradient(x))
        except (GeometryError, RuleError, ObjectiveError) as e:
            raise IterationError(k, e, _context(k, x, rule=cfg.rule.to_dict())) from e
        tr.steps.append(float(gamma))
        moved = float(np.linalg.norm(x_new - x))
        x = x_new
        rec.record(x)
        if cfg.stop_tol > 0 and moved <= cfg.stop_tol:
            tr.status = "Converged"
            break
    return tr


def fw_gap(s: ConstraintSet, g: Vector, x: Vector) -> tuple[float, Vector]:
    """Frank-Wolfe gap <g, x - s> with s = global_lmo(g)."""
    v = s.global_lmo(g)
    return float(g @ (x - v)), v


def run_frank_wolfe(s: ConstraintSet, obj: Objective, x0: ArrayLike, cfg: SolverConfig) -> Trajectory:
    """Classical Frank-Wolfe x_{k+1} = (1 - gamma_k) x_k + gamma_k s_k."""
    x = _prepare(s, obj, x0, cfg, "FrankWolfe")
    check_requirements(cfg.rule, obj)
    rec = _Recorder(s, obj, "FrankWolfe", cfg, _default_gamma(obj, cfg.rule), fw=s.compact)
    tr = rec.traj

    def lmo(k, x, g):
        try:
            return fw_gap(s, g, x)
        except Unbounded as e:
            msg = Unbounded(f"Frank-Wolfe requires a compact set; global LMO over {s!r} is unbounded")
            raise IterationError(k, msg, _context(k, x, g=g)) from e

    g = obj.gradient(x)
    gap, v = lmo(0, x, g)
    rec.record(x, gap)
    for k in range(cfg.max_iters):
        try:
            gamma = cfg.rule.stepsize(obj, x, k)
        except RuleError as e:
            raise IterationError(k, e, _context(k, x)) from e
        x_new = (1.0 - gamma) * x + gamma * v
        tr.steps.append(float(gamma))
        moved = float(np.linalg.norm(x_new - x))
        x = x_new
        g = obj.gradient(x)
        gap, v = lmo(k + 1, x, g)
        rec.record(x, gap)
        if cfg.stop_tol > 0 and moved <= cfg.stop_tol:
            tr.status = "Converged"
            break
    return tr


DRIVERS = {
    "LocalLMO": run_local_lmo,
    "StochasticLocalLMO": run_stochastic_local_lmo,
    "NonsmoothLocalLMO": run_nonsmooth_local_lmo,
    "PGD": run_pgd,
    "FrankWolfe": run_frank_wolfe,
}


def run(s: ConstraintSet, obj: Objective, x0: ArrayLike, cfg: SolverConfig) -> Trajectory:
    return DRIVERS[cfg.method](s, obj, x0, cfg)


def problem_from_dict(data: dict[str, Any]) -> tuple[ConstraintSet, Objective]:
    return set_from_dict(data["set"]), objective_from_dict(data["objective"])
