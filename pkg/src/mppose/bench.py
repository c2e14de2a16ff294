"""Batch experiments: noiseless accuracy/timing and the pixel-noise sweep.

Every trial draws its own scene from ``trial_seed(seed, trial)`` so rows do
not depend on worker count or order. The same scene seed is reused at every
noise level, which pairs the levels and keeps the sweep's trend readable.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence

import numpy as np

from .errors import DegenerateInput
from .io import ReportRow
from .p1l2 import solve_p1l2
from .p2l1 import solve_p2l1
from .scene import SceneConfig, generate_scene, rotation_error_deg, trial_seed, translation_error

SOLVERS = {"p2l1": solve_p2l1, "p1l2": solve_p1l2}
RECOVERY_TOL = {"p2l1": 1e-6, "p1l2": 1e-5}


@dataclass(frozen=True)
class BenchConfig:
    trials: int = 10_000
    seed: int = 0
    noise_px: float = 0.0
    central: bool = False
    solvers: Sequence[str] = ("p2l1", "p1l2")
    threads: int = 0  # 0: MPPOSE_THREADS or 1


def worker_count(requested: int = 0) -> int:
    if requested > 0:
        return requested
    env = os.environ.get("MPPOSE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def run_trial(solver: str, seed: int, trial: int, noise_px: float = 0.0, central: bool = False) -> ReportRow:
    """One scene, one solver call, errors of the solution closest to ground truth."""
    scene = generate_scene(SceneConfig(seed=trial_seed(seed, trial), noise_px=noise_px, central=central))
    problem = scene.p2l1_problem() if solver == "p2l1" else scene.p1l2_problem()
    solve = SOLVERS[solver]
    t0 = time.perf_counter_ns()
    try:
        sols = solve(problem)
        status = "ok" if sols else "no_solution"
    except DegenerateInput:
        sols, status = [], "degenerate"
    elapsed_us = (time.perf_counter_ns() - t0) / 1000.0
    T = scene.ground_truth_pose
    rot, trans = math.inf, math.inf
    for s in sols:
        r = rotation_error_deg(s.pose.rotation, T.rotation)
        if r < rot:
            rot, trans = r, translation_error(s.pose.translation, T.translation)
    return ReportRow(
        solver=solver,
        noise_px=float(noise_px),
        trial=int(trial),
        n_solutions=len(sols),
        n_solutions_cheiral=sum(1 for s in sols if s.cheirality_ok),
        rot_err_deg=rot,
        trans_err=trans,
        solve_time_us=elapsed_us,
        status=status,
    )


def _run_chunk(tasks) -> List[ReportRow]:
    return [run_trial(*t) for t in tasks]


def run_tasks(tasks: Sequence[tuple], threads: int = 0) -> List[ReportRow]:
    """Run ``run_trial`` argument tuples, returning rows in task order."""
    n = worker_count(threads)
    if n <= 1 or len(tasks) < 2:
        return [run_trial(*t) for t in tasks]
    chunks = [tasks[k::n] for k in range(n)]
    with ProcessPoolExecutor(max_workers=n) as pool:
        parts = list(pool.map(_run_chunk, chunks))
    rows = [None] * len(tasks)
    for k, part in enumerate(parts):
        rows[k::n] = part
    return rows


def bench_numeric(cfg: BenchConfig) -> List[ReportRow]:
    tasks = [(s, cfg.seed, t, cfg.noise_px, cfg.central) for t in range(cfg.trials) for s in cfg.solvers]
    return run_tasks(tasks, cfg.threads)


def bench_noise(levels: Sequence[float], cfg: BenchConfig) -> List[ReportRow]:
    if any(l < 0 for l in levels):
        raise ValueError("noise levels must be non-negative")
    tasks = [
        (s, cfg.seed, t, float(level), cfg.central)
        for level in levels
        for t in range(cfg.trials)
        for s in cfg.solvers
    ]
    return run_tasks(tasks, cfg.threads)


# --------------------------------------------------------------------------
# summaries


def _finite(a: np.ndarray) -> np.ndarray:
    return a[np.isfinite(a)]


def summarize_numeric(rows: Iterable[ReportRow]) -> Dict[str, dict]:
    out = {}
    rows = list(rows)
    for solver in sorted({r.solver for r in rows}):
        rs = [r for r in rows if r.solver == solver]
        rot = np.array([r.rot_err_deg for r in rs])
        trans = np.array([r.trans_err for r in rs])
        times = np.array([r.solve_time_us for r in rs])
        tol = RECOVERY_TOL.get(solver, 1e-6)
        q = [0.5, 0.9, 0.99]
        out[solver] = {
            "trials": len(rs),
            "recovered_fraction": float(np.mean((rot < tol) & (trans < tol))),
            "recovery_tol": tol,
            "rot_err_quantiles": dict(zip(map(str, q), np.quantile(rot, q).tolist())),
            "trans_err_quantiles": dict(zip(map(str, q), np.quantile(trans, q).tolist())),
            "n_solutions_hist": _hist([r.n_solutions for r in rs]),
            "n_solutions_cheiral_hist": _hist([r.n_solutions_cheiral for r in rs]),
            "median_time_us": float(np.median(times)),
            "total_time_us": float(np.sum(times)),
            "status_counts": _hist([r.status for r in rs]),
        }
    return out


def _hist(values) -> dict:
    out: dict = {}
    for v in values:
        out[str(v)] = out.get(str(v), 0) + 1
    return dict(sorted(out.items()))


def summarize_noise(rows: Iterable[ReportRow]) -> Dict[str, List[dict]]:
    """Per solver and level: mean, standard deviation and standard error of both errors."""
    rows = list(rows)
    out: Dict[str, List[dict]] = {}
    for solver in sorted({r.solver for r in rows}):
        per = []
        for level in sorted({r.noise_px for r in rows if r.solver == solver}):
            rs = [r for r in rows if r.solver == solver and r.noise_px == level]
            entry = {"noise_px": level, "trials": len(rs), "failed": 0}
            for key in ("rot_err_deg", "trans_err"):
                a = np.array([getattr(r, key) for r in rs])
                f = _finite(a)
                entry["failed"] = int(a.size - f.size)
                n = max(f.size, 1)
                std = float(np.std(f, ddof=1)) if f.size > 1 else 0.0
                entry[f"{key}_mean"] = float(np.mean(f)) if f.size else math.inf
                entry[f"{key}_std"] = std
                entry[f"{key}_se"] = std / math.sqrt(n)
            per.append(entry)
        out[solver] = per
    return out


def noise_trend_violations(summary: Dict[str, List[dict]]) -> List[str]:
    """Adjacent levels whose mean error drops by more than one standard error."""
    bad = []
    for solver, per in summary.items():
        for a, b in zip(per, per[1:]):
            for key in ("rot_err_deg", "trans_err"):
                se = math.hypot(a[f"{key}_se"], b[f"{key}_se"])
                if b[f"{key}_mean"] < a[f"{key}_mean"] - se:
                    bad.append(f"{solver} {key}: {a['noise_px']} -> {b['noise_px']}")
    return bad
