"""``mppose`` command line: solve, synth, bench-numeric, bench-noise, ransac."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path
from typing import List, Optional

from .bench import (
    BenchConfig,
    bench_noise,
    bench_numeric,
    noise_trend_violations,
    summarize_noise,
    summarize_numeric,
)
from .errors import DegenerateInput, InsufficientData, MPPoseError, SchemaError
from .io import Instance, dumps_instance, instance_from_scene, load_instance, write_report
from .p1l2 import solve_p1l2
from .p2l1 import solve_p2l1
from .ransac import NoConsensus, RansacConfig, ransac_pose
from .scene import SceneConfig, generate_scene, trial_seed
from .solution import P1L2Problem, P2L1Problem, cheirality_filter

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DEGENERATE = 2
EXIT_NO_CONSENSUS = 3


def _err(msg: str) -> None:
    print(f"mppose: {msg}", file=sys.stderr)


def _open_out(path: Optional[str]):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


# --------------------------------------------------------------------------
# solve


def build_problem(inst: Instance, solver: str):
    """Minimal problem from the first features of an instance file."""
    need_points, need_lines = (2, 1) if solver == "p2l1" else (1, 2)
    if len(inst.lines) < need_lines:
        raise SchemaError(f"solver {solver} needs lines[{need_lines - 1}] but the file has {len(inst.lines)} line(s)")
    if len(inst.points) < need_points:
        raise SchemaError(
            f"solver {solver} needs points[{need_points - 1}] but the file has {len(inst.points)} point(s)"
        )
    if solver == "p2l1":
        return P2L1Problem(inst.lines[0], inst.points[0], inst.points[1], inst.rig)
    return P1L2Problem(inst.lines[0], inst.points[0], inst.lines[1], inst.rig)


def cmd_solve(args) -> int:
    try:
        inst = load_instance(args.input)
        problem = build_problem(inst, args.solver)
    except SchemaError as exc:
        _err(str(exc))
        return EXIT_ERROR
    solve = solve_p2l1 if args.solver == "p2l1" else solve_p1l2
    try:
        sols = solve(problem)
    except DegenerateInput as exc:
        _err(f"degenerate configuration: {exc}")
        return EXIT_DEGENERATE
    if args.cheirality == "on":
        sols = cheirality_filter(sols)
    json.dump([s.to_dict() for s in sols], sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# synth


def _scene_config(data: dict) -> SceneConfig:
    known = {f.name for f in fields(SceneConfig)}
    unknown = set(data) - known - {"count", "seed"}
    if unknown:
        raise SchemaError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    kw = {k: v for k, v in data.items() if k in known and k != "seed"}
    if "depth_range" in kw:
        kw["depth_range"] = tuple(kw["depth_range"])
    try:
        return SceneConfig(**kw)
    except TypeError as exc:
        raise SchemaError(str(exc)) from None


def cmd_synth(args) -> int:
    try:
        data = json.loads(Path(args.config).read_text())
    except OSError as exc:
        _err(f"{args.config}: {exc.strerror}")
        return EXIT_ERROR
    except json.JSONDecodeError as exc:
        _err(f"{args.config}: line {exc.lineno}: {exc.msg}")
        return EXIT_ERROR
    try:
        if "instances" in data:  # a manifest written by an earlier run
            config = data["config"]
            seeds = [int(e["seed"]) for e in data["instances"]]
        else:
            config = data
            count = int(config.get("count", 10))
            base = int(config.get("seed", 0))
            seeds = [trial_seed(base, k) for k in range(count)]
        base_cfg = _scene_config(config)
    except (SchemaError, KeyError, TypeError, ValueError) as exc:
        _err(f"invalid config: {exc}")
        return EXIT_ERROR
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        entries = []
        for k, seed in enumerate(seeds):
            scene = generate_scene(SceneConfig(**{**asdict(base_cfg), "seed": seed}))
            name = f"instance_{k:04d}.json"
            (out / name).write_text(dumps_instance(instance_from_scene(scene)))
            entries.append({"file": name, "seed": seed})
        manifest = {"config": config, "instances": entries}
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    except OSError as exc:
        _err(str(exc))
        return EXIT_ERROR
    except (MPPoseError, ValueError) as exc:
        _err(f"generation failed: {exc}")
        return EXIT_ERROR
    return EXIT_OK


# --------------------------------------------------------------------------
# benches


def _write_rows_and_summary(rows, summary, args) -> int:
    try:
        fh, close = _open_out(args.out)
        try:
            write_report(rows, fh)
        finally:
            if close:
                fh.close()
        text = json.dumps(summary, indent=2) + "\n"
        if args.summary:
            Path(args.summary).write_text(text)
        elif args.out not in (None, "-"):
            sys.stdout.write(text)
        else:
            sys.stderr.write(text)
    except OSError as exc:
        _err(str(exc))
        return EXIT_ERROR
    return EXIT_OK


def cmd_bench_numeric(args) -> int:
    if args.trials < 1:
        _err("--trials must be >= 1")
        return EXIT_ERROR
    cfg = BenchConfig(trials=args.trials, seed=args.seed, central=args.central, threads=args.threads)
    rows = bench_numeric(cfg)
    return _write_rows_and_summary(rows, summarize_numeric(rows), args)


def cmd_bench_noise(args) -> int:
    try:
        levels = [float(x) for x in args.levels.split(",") if x.strip()]
    except ValueError:
        _err(f"bad --levels {args.levels!r}")
        return EXIT_ERROR
    if not levels or any(l < 0 for l in levels):
        _err("noise levels must be non-negative")
        return EXIT_ERROR
    cfg = BenchConfig(trials=args.trials_per_level, seed=args.seed, central=args.central, threads=args.threads)
    rows = bench_noise(levels, cfg)
    summary = summarize_noise(rows)
    summary = {"levels": summary, "trend_violations": noise_trend_violations(summary)}
    return _write_rows_and_summary(rows, summary, args)


# --------------------------------------------------------------------------
# ransac


def cmd_ransac(args) -> int:
    try:
        inst = load_instance(args.input)
    except SchemaError as exc:
        _err(str(exc))
        return EXIT_ERROR
    if len(inst.points) + len(inst.lines) < 3:
        _err("dataset needs at least 3 features")
        return EXIT_ERROR
    try:
        cfg = RansacConfig(
            point_threshold_px=args.point_thresh,
            line_threshold=args.line_thresh,
            required_inlier_fraction=args.inlier_frac,
            max_iterations=args.max_iter,
            sampling_mode=args.mode,
            rng_seed=args.seed,
        )
        result = ransac_pose(inst.points, inst.lines, inst.rig, cfg)
        payload = result.to_dict()
        code = EXIT_OK if result.success else EXIT_NO_CONSENSUS
    except (ValueError, InsufficientData) as exc:
        _err(str(exc))
        return EXIT_ERROR
    except NoConsensus as exc:
        payload = {"status": "no_consensus", "best_pose": None, "message": str(exc)}
        code = EXIT_NO_CONSENSUS
    try:
        fh, close = _open_out(args.out)
        try:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        finally:
            if close:
                fh.close()
    except OSError as exc:
        _err(str(exc))
        return EXIT_ERROR
    if code == EXIT_NO_CONSENSUS:
        _err("no consensus: required inlier fraction not reached")
    return code


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mppose", description="Multi-camera pose from points and lines.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one instance file")
    s.add_argument("--input", required=True)
    s.add_argument("--solver", choices=("p2l1", "p1l2"), required=True)
    s.add_argument("--cheirality", choices=("on", "off"), default="on")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("synth", help="generate instance files from a scene config or manifest")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    for name, func in (("bench-numeric", cmd_bench_numeric), ("bench-noise", cmd_bench_noise)):
        s = sub.add_parser(name)
        if name == "bench-numeric":
            s.add_argument("--trials", type=int, default=10_000)
        else:
            s.add_argument("--trials-per-level", type=int, default=1000)
            s.add_argument("--levels", default="0,1,2,3,4,5")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
        s.add_argument("--summary", help="JSON summary path (default: stdout, or stderr when CSV goes to stdout)")
        s.add_argument("--central", action="store_true", help="give every camera the same extrinsic")
        s.add_argument("--threads", type=int, default=0, help="worker processes (default: $MPPOSE_THREADS or 1)")
        s.set_defaults(func=func)

    s = sub.add_parser("ransac", help="robust pose on a dataset file")
    s.add_argument("--input", required=True)
    s.add_argument("--point-thresh", type=float, default=2.0)
    s.add_argument("--line-thresh", type=float, default=2.0)
    s.add_argument("--inlier-frac", type=float, default=0.4)
    s.add_argument("--max-iter", type=int, default=1000)
    s.add_argument("--mode", choices=("auto", "p2l1", "p1l2"), default="auto")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_ransac)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
