"""Experiment registry, runner, bound curves and command-line entry point."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .geometry import Box, ConstraintSet, Diamond, EuclideanBall, GeometryError, LocalBall, set_from_dict
from .objectives import (
    Objective,
    ObjectiveError,
    Quadratic,
    box_qp_minimizer,
    constrained_optimum,
    make_paper_quadratic,
    objective_from_dict,
    paper_box,
)
from .oracle import CheckReport, UnknownClaim, check_trajectory, oracle_local_lmo
from .rules import (
    FWClassic,
    GeometricSchedule,
    InverseL,
    MissingConstant,
    RuleError,
    StronglyConvexTheta,
    contraction_factor,
)
from .solvers import ConfigError, IterationError, SolverConfig, Trajectory, run

DEFAULT_OUT = "out"
OUT_ENV = "LOCAL_LMO_OUT"


@dataclass(frozen=True)
class Problem:
    set: ConstraintSet
    objective: Objective
    x0: np.ndarray

    def to_dict(self) -> dict[str, Any]:
        return {"set": self.set.to_dict(), "objective": self.objective.to_dict(), "x0": self.x0.tolist()}


@dataclass(frozen=True)
class RunSpec:
    label: str
    config: SolverConfig
    claims: tuple[str, ...] = ()
    problem: Problem | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"label": self.label, "config": self.config.to_dict(), "claims": list(self.claims)}
        if self.problem is not None:
            out["problem"] = self.problem.to_dict()
        return out


@dataclass(frozen=True)
class ExperimentSpec:
    """A problem plus labelled solver runs; a run may override the problem."""

    name: str
    problem: Problem
    runs: tuple[RunSpec, ...]
    description: str = ""

    def __post_init__(self):
        labels = [r.label for r in self.runs]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"run labels must be unique in {self.name}: {labels}")
        for r in self.runs:
            p = r.problem or self.problem
            if not p.set.contains(p.x0):
                raise ConfigError(f"x0 of run {r.label} is not feasible")

    def problem_for(self, run_spec: RunSpec) -> Problem:
        return run_spec.problem or self.problem

    def with_overrides(self, iters: int | None = None, seed: int | None = None) -> "ExperimentSpec":
        def fix(r: RunSpec) -> RunSpec:
            cfg = r.config
            if iters is not None:
                cfg = replace(cfg, max_iters=iters)
            if seed is not None:
                cfg = replace(cfg, seed=seed)
            return replace(r, config=cfg)

        return replace(self, runs=tuple(fix(r) for r in self.runs))

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "description": self.description, "problem": self.problem.to_dict(),
                "runs": [r.to_dict() for r in self.runs]}


@dataclass
class RunReport:
    name: str
    rows: list[dict[str, Any]] = field(default_factory=list)
    trajectories: dict[str, Trajectory] = field(default_factory=dict)
    checks: dict[str, CheckReport] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)
    files: list[Path] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.errors and all(c.passed for c in self.checks.values())

    def row(self, label: str) -> dict[str, Any]:
        for r in self.rows:
            if r["label"] == label:
                return r
        raise KeyError(label)


# config documents ------------------------------------------------------------------------

def _solve_optimum(s: ConstraintSet, obj: Objective, x0: np.ndarray) -> Objective:
    if isinstance(obj, Quadratic) and isinstance(s, Box):
        return obj.with_optimum(box_qp_minimizer(obj.Q, obj.q, s.lo, s.hi))
    return obj.with_optimum(constrained_optimum(obj, s, x0, iters=50_000, tol=1e-14))


def problem_from_dict(data: dict[str, Any]) -> Problem:
    """Build a problem; ``"optimum": "solve"`` computes the constrained minimizer."""
    try:
        s = set_from_dict(data["set"])
        odoc = dict(data["objective"])
        solve = odoc.get("optimum") == "solve"
        if solve:
            del odoc["optimum"]
        obj = objective_from_dict(odoc)
        x0 = np.asarray(data["x0"], dtype=np.float64)
    except KeyError as e:
        raise ConfigError(f"problem document missing field {e}") from None
    if solve:
        obj = _solve_optimum(s, obj, x0)
    return Problem(s, obj, x0)


def _resolve_rule(doc: dict[str, Any], p: Problem) -> dict[str, Any]:
    # GeometricSchedule accepts c = "theta_R0", the optimum-aware constant
    if doc.get("rule") == "GeometricSchedule" and doc.get("c") == "theta_R0":
        sched = GeometricSchedule.optimum_aware(p.objective, p.x0, float(doc["q"]))
        return {**doc, "c": sched.c}
    return doc


def spec_from_dict(data: dict[str, Any]) -> ExperimentSpec:
    try:
        base = problem_from_dict(data["problem"])
        runs = []
        for r in data["runs"]:
            p = problem_from_dict(r["problem"]) if "problem" in r else None
            cdoc = dict(r["config"])
            cdoc["rule"] = _resolve_rule(cdoc["rule"], p or base)
            runs.append(RunSpec(r["label"], SolverConfig.from_dict(cdoc), tuple(r.get("claims", ())), p))
        return ExperimentSpec(data["name"], base, tuple(runs), data.get("description", ""))
    except KeyError as e:
        raise ConfigError(f"experiment document missing field {e}") from None
    except (GeometryError, ObjectiveError, RuleError) as e:
        raise ConfigError(str(e)) from None


def load_spec(path: str | Path) -> ExperimentSpec:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    return spec_from_dict(data)


def dump_spec(spec: ExperimentSpec, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(spec.to_dict(), indent=2) + "\n")
    return path


# built-in experiments --------------------------------------------------------------------

LMO_CLAIMS = ("fejer", "boundary_step", "radius_bound", "contraction")
PGD_CLAIMS = ("pgd_descent", "pgd_fejer", "pgd_rate", "pgd_grad_diff")
PAPER_QS = tuple(float(q) for q in np.linspace(0.8, 0.95, 10))
# l1, l2 and l-infinity unit balls; the unconstrained minimizer (0, 0) lies outside each
PAPER_M_CENTERS = {"l1": (2.0, 1.5), "l2": (2.0, 2.5), "linf": (3.0, 3.0)}


def paper_problem() -> Problem:
    return Problem(paper_box(), make_paper_quadratic(), np.array([4.0, 4.0]))


def paperK_comparison(iters: int = 100) -> ExperimentSpec:
    return ExperimentSpec(
        "paperK-comparison",
        paper_problem(),
        (
            RunSpec("local_lmo", SolverConfig("LocalLMO", StronglyConvexTheta(), iters), LMO_CLAIMS),
            RunSpec("pgd", SolverConfig("PGD", InverseL(), iters), PGD_CLAIMS),
            RunSpec("fw", SolverConfig("FrankWolfe", FWClassic(), iters)),
        ),
        BUILTIN_DESCRIPTIONS["paperK-comparison"],
    )


def paperL_qsweep(iters: int = 100) -> ExperimentSpec:
    p = paper_problem()
    runs = [RunSpec("adaptive", SolverConfig("LocalLMO", StronglyConvexTheta(), iters), LMO_CLAIMS)]
    for q in PAPER_QS:
        rule = GeometricSchedule.optimum_aware(p.objective, p.x0, q)
        runs.append(RunSpec(f"q={q:.3f}", SolverConfig("LocalLMO", rule, iters), ("boundary_step",)))
    return ExperimentSpec("paperL-qsweep", p, tuple(runs), BUILTIN_DESCRIPTIONS["paperL-qsweep"])


def paperM_geometries(iters: int = 100) -> ExperimentSpec:
    f = make_paper_quadratic()
    sets = {
        "l1": Diamond(np.array(PAPER_M_CENTERS["l1"]), 1.0),
        "l2": EuclideanBall(np.array(PAPER_M_CENTERS["l2"]), 1.0),
        "linf": Box(np.array(PAPER_M_CENTERS["linf"]) - 1.0, np.array(PAPER_M_CENTERS["linf"]) + 1.0),
    }
    starts = {"l1": (2.0, 2.5), "l2": (2.0 + 0.6, 2.5 + 0.8), "linf": (4.0, 4.0)}
    runs = []
    for key, s in sets.items():
        x0 = np.array(starts[key])
        p = Problem(s, _solve_optimum(s, f, x0), x0)
        runs.append(RunSpec(key, SolverConfig("LocalLMO", StronglyConvexTheta(), iters), LMO_CLAIMS, p))
    return ExperimentSpec("paperM-geometries", runs[-1].problem, tuple(runs),
                          BUILTIN_DESCRIPTIONS["paperM-geometries"])


BUILTINS = {
    "paperK-comparison": paperK_comparison,
    "paperL-qsweep": paperL_qsweep,
    "paperM-geometries": paperM_geometries,
}


BUILTIN_DESCRIPTIONS = {
    "paperK-comparison": "Local LMO, PGD (1/L) and Frank-Wolfe on the rotated quadratic over [2, 4]^2",
    "paperL-qsweep": "geometric radius schedules theta ||x0 - x*|| q^k against the adaptive rule",
    "paperM-geometries": "Local LMO over l1, l2 and l-infinity unit balls",
}


def builtin(name: str) -> ExperimentSpec:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise ConfigError(f"unknown experiment {name!r}; built-ins: {sorted(BUILTINS)}") from None


# running ---------------------------------------------------------------------------------

def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, DEFAULT_OUT))


def _summary_row(label: str, traj: Trajectory) -> dict[str, Any]:
    row: dict[str, Any] = {"label": label, "method": traj.method, "rule": traj.rule.get("rule", ""),
                           "status": traj.status, "iterations": len(traj)}
    for m, vals in traj.metrics.items():
        row[m] = vals[-1]
    if "dist_sq" in traj.metrics:
        row["dist"] = float(np.sqrt(traj.metrics["dist_sq"][-1]))
    return row


SUMMARY_COLUMNS = ("label", "method", "rule", "status", "iterations", "dist_sq", "dist", "f_gap",
                   "grad_diff_sq", "grad_map_norm", "fw_gap", "checks", "error")


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return "" if v is None else str(v)


def write_summary(report: RunReport, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    path = out / "summary.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for row in report.rows:
            w.writerow([_fmt(row.get(c)) for c in SUMMARY_COLUMNS])
    jpath = out / "summary.json"
    doc = {"name": report.name, "rows": report.rows,
           "checks": {k: c.lines() for k, c in report.checks.items()}, "errors": report.errors}
    jpath.write_text(json.dumps(doc, indent=2) + "\n")
    return [path, jpath]


def run_experiment(spec: ExperimentSpec, out: str | Path | None = None, write: bool = True) -> RunReport:
    """Run every configured solver; a failing run is recorded and the others continue."""
    t0 = time.perf_counter()
    report = RunReport(spec.name)
    out_dir = Path(out) if out is not None else default_out_dir()
    for r in spec.runs:
        p = spec.problem_for(r)
        try:
            traj = run(p.set, p.objective, p.x0, r.config)
        except (IterationError, ConfigError, RuleError, GeometryError, ObjectiveError) as e:
            report.errors[r.label] = f"{type(e).__name__}: {e}"
            report.rows.append({"label": r.label, "method": r.config.method, "error": report.errors[r.label]})
            continue
        report.trajectories[r.label] = traj
        row = _summary_row(r.label, traj)
        if r.claims:
            chk = check_trajectory(traj, p.objective, list(r.claims))
            report.checks[r.label] = chk
            row["checks"] = "pass" if chk.passed else "FAIL"
        report.rows.append(row)
        if write:
            report.files.append(traj.to_csv(out_dir / f"{r.label}.csv"))
    if write:
        report.files += write_summary(report, out_dir)
    report.seconds = time.perf_counter() - t0
    return report


def bound_curves(traj: Trajectory, obj: Objective) -> dict[str, np.ndarray]:
    """Observed metrics with the contraction and smooth-rate bounds for every k."""
    c = obj.constants
    if obj.optimum is None or c.L is None or c.mu is None:
        raise MissingConstant("bound curves need L, mu and optimum metadata")
    k = np.arange(len(traj.iterates))
    d2 = np.asarray(traj.metrics["dist_sq"])
    gd2 = np.asarray(traj.metrics["grad_diff_sq"])
    r0 = d2[0]
    return {
        "k": k,
        "dist_sq": d2,
        "contraction_bound": contraction_factor(c.mu, c.L) ** (2 * k) * r0,
        "grad_diff_sq": gd2,
        "min_grad_diff_sq": np.minimum.accumulate(gd2),
        "smooth_bound": c.L ** 2 * r0 / (k + 1),
    }


def emit_bound_curves(spec: ExperimentSpec, out: str | Path | None = None,
                      report: RunReport | None = None) -> list[Path]:
    """Write ``<label>_bounds.csv`` for every Local LMO run of ``spec``."""
    out_dir = Path(out) if out is not None else default_out_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for r in spec.runs:
        if r.config.method != "LocalLMO":
            continue
        p = spec.problem_for(r)
        if p.objective.optimum is None or p.objective.constants.L is None or p.objective.constants.mu is None:
            raise MissingConstant(f"run {r.label}: bound curves need L, mu and optimum metadata")
        traj = report.trajectories[r.label] if report and r.label in report.trajectories \
            else run(p.set, p.objective, p.x0, r.config)
        cols = bound_curves(traj, p.objective)
        path = out_dir / f"{r.label}_bounds.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(cols))
            for i in range(len(cols["k"])):
                w.writerow([str(cols["k"][i])] + [f"{cols[n][i]:.17g}" for n in list(cols)[1:]])
        paths.append(path)
    return paths


# CLI -------------------------------------------------------------------------------------

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.replace(" ", "").split(",") if v], dtype=np.float64)
    except ValueError:
        raise ConfigError(f"cannot parse vector {text!r}; use comma-separated numbers") from None


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="locallmo", description="Local LMO experiments and checks")
    sub = ap.add_subparsers(dest="cmd", required=True)
    sub.add_parser("list", help="list built-in experiments")
    r = sub.add_parser("run", help="run a built-in experiment or a config file")
    r.add_argument("target")
    r.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--iters", type=int, default=None)
    r.add_argument("--bounds", action="store_true", help="also write bound-curve CSVs")
    c = sub.add_parser("check", help="re-check a trajectory CSV against named claims")
    c.add_argument("csv")
    c.add_argument("--claims", required=True, help="comma-separated claim names")
    o = sub.add_parser("oracle", help="solve one local LMO subproblem with the reference oracle")
    o.add_argument("set_cfg", help="JSON file holding a set document")
    o.add_argument("center")
    o.add_argument("radius", type=float)
    o.add_argument("g")
    return ap


def _cmd_run(args, out) -> int:
    target = args.target
    if target in BUILTINS:
        spec = builtin(target)
    elif Path(target).is_file():
        spec = load_spec(target)
    else:
        raise ConfigError(f"unknown experiment {target!r}; built-ins: {sorted(BUILTINS)}")
    spec = spec.with_overrides(args.iters, args.seed)
    out_dir = Path(args.out) if args.out else default_out_dir()
    report = run_experiment(spec, out_dir)
    for row in report.rows:
        if "error" in row:
            print(f"{row['label']}: ERROR {row['error']}", file=out)
        else:
            d2 = row.get("dist_sq")
            extra = f" dist_sq={d2:.3e}" if d2 is not None else ""
            print(f"{row['label']}: {row['method']} {row['status']} after {row['iterations']}{extra}", file=out)
    for label, chk in report.checks.items():
        for line in chk.lines():
            print(f"  [{label}] {line}", file=out)
    if args.bounds:
        emit_bound_curves(spec, out_dir, report)
    print(f"wrote {len(report.files)} files to {out_dir}", file=out)
    return EXIT_OK if report.ok else EXIT_SOLVER


def _cmd_check(args, out) -> int:
    path = Path(args.csv)
    if not path.is_file():
        raise ConfigError(f"no such trajectory file {path}")
    traj = Trajectory.from_csv(path)
    if not traj.problem:
        raise ConfigError(f"{path} has no problem metadata sidecar")
    obj = objective_from_dict(traj.problem["objective"])
    report = check_trajectory(traj, obj, args.claims)
    for line in report.lines():
        print(line, file=out)
    return EXIT_OK if report.passed else EXIT_SOLVER


def _cmd_oracle(args, out) -> int:
    try:
        s = set_from_dict(json.loads(Path(args.set_cfg).read_text()))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read set document {args.set_cfg}: {e}") from None
    res = oracle_local_lmo(s, LocalBall(_vector(args.center), args.radius), _vector(args.g))
    print(json.dumps(res.to_dict()), file=out)
    return EXIT_OK


def cli(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    try:
        if args.cmd == "list":
            for name, desc in BUILTIN_DESCRIPTIONS.items():
                print(f"{name}: {desc}", file=out)
            return EXIT_OK
        if args.cmd == "run":
            return _cmd_run(args, out)
        if args.cmd == "check":
            return _cmd_check(args, out)
        return _cmd_oracle(args, out)
    except (ConfigError, UnknownClaim, GeometryError, ObjectiveError, RuleError, ValueError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (IterationError, RuntimeError) as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
