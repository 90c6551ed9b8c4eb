"""Batch command-line front end with seeded reproducibility.

Every subcommand is a thin wrapper over one library operation: inputs come
from JSON/CSV/PNG files or flags, outputs are written to ``--out`` (never
overwriting without ``--force``), and a machine-readable JSON line goes to
stdout.  All randomness flows from explicit ``--seed`` flags, so reruns are
byte-identical.  Failures print an error JSON and exit with 2 (unknown
command), 3 (validation), or 4 (I/O).

The ``batch`` subcommand executes a manifest of entries (optionally in
parallel), skips entries whose outputs already exist, and writes a summary
CSV.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, costmap, datasets, planner, rewards, stability, terrain
from . import heightfield as hfmod

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4

COMMANDS = ("terrain-gen", "terrain-eval", "patch", "costmap", "margin", "region",
            "plan", "gate", "reward", "resample", "randomize", "kde", "batch")


class _UsageError(Exception):
    pass


def _json_line(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True)


def _check_output(path: Path, force: bool) -> None:
    if path.exists() and not force:
        raise ValueError(f"output {path} exists; pass --force to overwrite")
    path.parent.mkdir(parents=True, exist_ok=True)


def _load_json(path: str):
    return json.loads(Path(path).read_text())


def _grid_to_csv(values: np.ndarray) -> str:
    buf = io.StringIO()
    np.savetxt(buf, values, delimiter=",", fmt="%.17g")  # exact float64 round trip
    return buf.getvalue()


def _grid_from_csv(path: str) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def _state_from_dict(d: dict) -> stability.CentroidalState:
    return stability.CentroidalState(**d)


def _contacts_from_list(items: list) -> stability.ContactSet:
    contacts = []
    for item in items:
        item = dict(item)
        if item.get("f_max") is None:
            item["f_max"] = math.inf
        contacts.append(stability.Contact(**item))
    return stability.ContactSet(tuple(contacts))


def _region_to_dict(region: stability.FeasibleRegion) -> dict:
    payload = {"kind": region.kind,
               "vertices": region.vertices.tolist(),
               "achieved_tolerance": region.achieved_tolerance}
    if region.outer_vertices is not None:
        payload["outer_vertices"] = region.outer_vertices.tolist()
    return payload


# ---------------------------------------------------------------------------
# Subcommand implementations.  Each returns the JSON payload for stdout.

def _run_terrain_gen(args) -> dict:
    specs = terrain.specs_from_json(Path(args.spec).read_text())
    hf = terrain.generate_terrain(specs, args.seed)
    out = Path(args.out)
    _check_output(out, args.force)
    hfmod.write_heightfield(hf, out)
    return {"out": str(out), "rows": hf.rows, "cols": hf.cols}


def _run_terrain_eval(args) -> dict:
    spec, length = terrain.sample_eval_object(args.kind, args.seed)
    if args.length is not None:
        length = args.length  # compose_eval_terrain refits the footprint
    hf = terrain.compose_eval_terrain(spec, length, args.seed)
    out = Path(args.out)
    _check_output(out, args.force)
    hfmod.write_heightfield(hf, out)
    return {"out": str(out), "kind": args.kind, "length": length,
            "object": terrain.spec_to_dict(spec)}


def _run_patch(args) -> dict:
    hf = hfmod.read_heightfield(args.terrain)
    patch = hfmod.slice_patch(hf, (args.x, args.y), args.yaw)
    out = Path(args.out)
    _check_output(out, args.force)
    out.write_text(_grid_to_csv(patch.values))
    return {"out": str(out), "center": [args.x, args.y, args.yaw]}


def _run_costmap(args) -> dict:
    values = _grid_from_csv(args.patch)
    patch = hfmod.ElevationPatch(values)
    cost = costmap.edge_cost_map(patch)
    out = Path(args.out)
    _check_output(out, args.force)
    out.write_text(_grid_to_csv(cost.values))
    return {"out": str(out), "max_cost": float(cost.values.max())}


def _run_margin(args) -> dict:
    state = _state_from_dict(_load_json(args.state))
    contacts = _contacts_from_list(_load_json(args.contacts))
    result = stability.stability_margin(state, contacts, args.tol)
    payload = {"margin": result.margin, "unbounded": result.unbounded,
               "icp": result.icp.tolist(), "region": _region_to_dict(result.region)}
    if args.out:
        out = Path(args.out)
        _check_output(out, args.force)
        out.write_text(_json_line(payload) + "\n")
        payload["out"] = str(out)
    return payload


def _run_region(args) -> dict:
    state = _state_from_dict(_load_json(args.state))
    contacts = _contacts_from_list(_load_json(args.contacts))
    region = stability.feasible_region(contacts, state, args.tol)
    payload = _region_to_dict(region)
    if args.out:
        out = Path(args.out)
        _check_output(out, args.force)
        out.write_text(_json_line(payload) + "\n")
        payload["out"] = str(out)
    return payload


def _run_plan(args) -> dict:
    query_dict = _load_json(args.query)
    if args.gait:
        gait = planner.GaitConfig.from_json(Path(args.gait).read_text())
        query_dict.setdefault("stance_duration", gait.stance_duration)
    query = planner.FootholdQuery(**query_dict)
    hf = hfmod.read_heightfield(args.terrain)
    if args.mode == "blind":
        feet = planner.plan_footholds_blind(query, hf)
    else:
        feet = planner.plan_footholds_perceptive(query, hf)
    payload = {"mode": args.mode, "footholds": feet.tolist()}
    if args.out:
        out = Path(args.out)
        _check_output(out, args.force)
        out.write_text(_json_line(payload) + "\n")
        payload["out"] = str(out)
    return payload


def _run_gate(args) -> dict:
    hf = hfmod.read_heightfield(args.terrain)
    vx, vy, wz = args.cmd
    cmd = planner.VelocityCommand((vx, vy), wz)
    accept = planner.velocity_gate(hf, tuple(args.pose), cmd, args.threshold, args.horizon)
    return {"accept": bool(accept)}


def _run_reward(args) -> dict:
    weights = rewards.RewardWeights.from_dict(_load_json(args.weights)) if args.weights \
        else rewards.RewardWeights()
    payload_in = _load_json(args.snapshot)
    if args.kind == "tracking":
        value = rewards.tracking_reward(payload_in["desired_state"],
                                        payload_in["measured_state"],
                                        payload_in.get("stability_margin", 0.0),
                                        weights)
    else:
        snapshot = rewards.RobotSnapshot(**payload_in)
        fn = {"recurrent": rewards.footstep_recurrent_reward,
              "final": rewards.footstep_final_reward,
              "recovery": rewards.recovery_reward}[args.kind]
        value = fn(snapshot, weights)
    return {"kind": args.kind, "reward": value}


def _run_resample(args) -> dict:
    rows = datasets.records_from_csv(Path(args.input).read_text())
    spec = datasets.RelevanceSpec(**_load_json(args.spec)) if args.spec \
        else datasets.RelevanceSpec()
    result = datasets.smogn_resample(rows, spec, args.seed, ratio=args.ratio)
    out = Path(args.out)
    _check_output(out, args.force)
    out.write_text(datasets.records_to_csv(result))
    return {"out": str(out), "rows_in": len(rows), "rows_out": len(result)}


def _run_randomize(args) -> dict:
    cfg = datasets.RandomizationConfig.from_dict(_load_json(args.config)) if args.config \
        else datasets.RandomizationConfig()
    draw = datasets.sample_randomization(cfg, args.kind, args.seed)
    payload = {"gravity": draw.gravity, "torque_scale": draw.torque_scale,
               "mass_scale": draw.mass_scale, "size_scale": draw.size_scale,
               "damping_gain": draw.damping_gain, "force_xy": list(draw.force_xy),
               "duration": draw.duration, "smooth_elevation": draw.smooth_elevation}
    if args.out:
        out = Path(args.out)
        _check_output(out, args.force)
        out.write_text(_json_line(payload) + "\n")
        payload["out"] = str(out)
    return payload


def _run_kde(args) -> dict:
    trials = analysis.trials_from_csv(Path(args.trials).read_text())
    if args.grid:
        x0, x1, y0, y1, nx, ny = (float(v) for v in args.grid.split(","))
        grid_spec = analysis.GridSpec(x0, x1, y0, y1, int(nx), int(ny))
    else:
        grid_spec = analysis.GridSpec.covering(trials)
    bandwidth = None
    if args.bandwidth:
        hx, hy = (float(v) for v in args.bandwidth.split(","))
        bandwidth = (hx, hy)
    grid = analysis.kde_success_grid(trials, grid_spec, bandwidth)
    out = Path(args.out)
    _check_output(out, args.force)
    out.write_text(analysis.grid_to_csv(grid))
    pgm = out.with_suffix(".pgm")
    _check_output(pgm, args.force)
    pgm.write_bytes(analysis.grid_to_pgm(grid))
    return {"out": str(out), "preview": str(pgm),
            "bandwidth": [grid.bandwidth[0], grid.bandwidth[1]],
            "trials": len(trials)}


# ---------------------------------------------------------------------------
# Batch execution.

def _entry_outputs(command: str, args: dict) -> list[str]:
    """Paths an entry will produce, used for resume detection."""
    outs = []
    if "out" in args:
        out = str(args["out"])
        outs.append(out)
        if out.endswith(".png"):
            outs.append(str(Path(out).with_suffix(".json")))
        if command == "kde":
            outs.append(str(Path(out).with_suffix(".pgm")))
    return outs


def _run_batch(args) -> dict:
    manifest = _load_json(args.manifest)
    if not isinstance(manifest, list):
        raise ValueError("manifest must be a JSON array of entries")
    out_dir = Path(args.dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def rebase(entry_args: dict) -> dict:
        rebased = dict(entry_args)
        if "out" in rebased and not Path(str(rebased["out"])).is_absolute():
            rebased["out"] = str(out_dir / str(rebased["out"]))
        return rebased

    entries = []
    for index, entry in enumerate(manifest):
        command = entry.get("command")
        if command not in COMMANDS or command == "batch":
            raise ValueError(f"manifest entry {index}: unknown command {command!r}")
        entries.append((index, command, rebase(dict(entry.get("args", {})))))

    def execute(item):
        index, command, entry_args = item
        outputs = _entry_outputs(command, entry_args)
        if outputs and all(Path(o).exists() for o in outputs) and not args.force:
            return index, command, entry_args.get("out", ""), "skipped"
        argv = [command]
        for key, value in sorted(entry_args.items()):
            if isinstance(value, bool):
                if value:
                    argv.append(f"--{key}")
            elif isinstance(value, (list, tuple)):
                argv.append(f"--{key}")
                argv.extend(str(v) for v in value)
            else:
                argv.extend([f"--{key}", str(value)])
        if args.force and "out" in entry_args:
            argv.append("--force")
        code, _ = _dispatch(argv)
        status = "ok" if code == EXIT_OK else f"error:{code}"
        return index, command, entry_args.get("out", ""), status

    if args.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(execute, entries))
    else:
        results = [execute(item) for item in entries]
    results.sort(key=lambda r: r[0])

    summary_path = out_dir / "summary.csv"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "command", "out", "status"])
    for index, command, out, status in results:
        try:  # record outputs relative to the batch dir so summaries are portable
            out = str(Path(out).relative_to(out_dir))
        except ValueError:
            pass
        writer.writerow([index, command, out, status])
    summary_path.write_text(buf.getvalue())

    failed = sum(1 for r in results if r[3].startswith("error"))
    return {"summary": str(summary_path), "entries": len(results),
            "failed": failed, "skipped": sum(1 for r in results if r[3] == "skipped")}


# ---------------------------------------------------------------------------
# Argument parsing.

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2) with plain text
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="quadkit", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    def add(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        return p

    p = add("terrain-gen", help="generate a 20x20 m terrain from an object spec list")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--spec", required=True, help="JSON list of terrain objects")
    p.add_argument("--out", required=True, help="output PNG path (sidecar JSON written alongside)")
    p.add_argument("--force", action="store_true")

    p = add("terrain-eval", help="generate a 5x5 m evaluation tile with one centered object")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--kind", required=True,
                   choices=["stairs", "wave", "bricks", "unstructured", "planks"])
    p.add_argument("--length", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")

    p = add("patch", help="slice a 91x91 elevation patch from a terrain PNG")
    p.add_argument("--terrain", required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--yaw", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")

    p = add("costmap", help="edge cost map of a patch CSV")
    p.add_argument("--patch", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")

    for name, help_text in (("margin", "stability margin for a state and contact set"),
                            ("region", "feasible region for a state and contact set")):
        p = add(name, help=help_text)
        p.add_argument("--state", required=True)
        p.add_argument("--contacts", required=True)
        p.add_argument("--tol", type=float, default=stability.DEFAULT_TOLERANCE)
        p.add_argument("--out", default=None)
        p.add_argument("--force", action="store_true")

    p = add("plan", help="baseline foothold plan over a terrain")
    p.add_argument("--query", required=True)
    p.add_argument("--terrain", required=True)
    p.add_argument("--mode", choices=["blind", "perceptive"], default="blind")
    p.add_argument("--gait", default=None, help="gait config JSON (stance_duration, name)")
    p.add_argument("--out", default=None)
    p.add_argument("--force", action="store_true")

    p = add("gate", help="accept or reject a velocity command on a terrain")
    p.add_argument("--terrain", required=True)
    p.add_argument("--pose", required=True, nargs=3, type=float,
                   metavar=("X", "Y", "YAW"))
    p.add_argument("--cmd", required=True, nargs=3, type=float,
                   metavar=("VX", "VY", "YAW_RATE"))
    p.add_argument("--threshold", type=float, default=planner.GATE_THRESHOLD)
    p.add_argument("--horizon", type=float, default=planner.GATE_HORIZON)

    p = add("reward", help="evaluate one reward family on a snapshot")
    p.add_argument("--kind", required=True,
                   choices=["recurrent", "final", "recovery", "tracking"])
    p.add_argument("--snapshot", required=True)
    p.add_argument("--weights", default=None)

    p = add("resample", help="SMOGN-rebalance a record CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--spec", default=None, help="RelevanceSpec JSON")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")

    p = add("randomize", help="draw one domain-randomization assignment")
    p.add_argument("--config", default=None)
    p.add_argument("--kind", required=True, choices=list(datasets.POLICY_KINDS))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--force", action="store_true")

    p = add("kde", help="success-rate surface from a trial CSV")
    p.add_argument("--trials", required=True)
    p.add_argument("--grid", default=None, help="xmin,xmax,ymin,ymax,nx,ny")
    p.add_argument("--bandwidth", default=None, help="hx,hy")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")

    p = add("batch", help="run a manifest of subcommand entries")
    p.add_argument("--manifest", required=True)
    p.add_argument("--dir", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--force", action="store_true")

    return parser


_RUNNERS = {
    "terrain-gen": _run_terrain_gen,
    "terrain-eval": _run_terrain_eval,
    "patch": _run_patch,
    "costmap": _run_costmap,
    "margin": _run_margin,
    "region": _run_region,
    "plan": _run_plan,
    "gate": _run_gate,
    "reward": _run_reward,
    "resample": _run_resample,
    "randomize": _run_randomize,
    "kde": _run_kde,
    "batch": _run_batch,
}


def _dispatch(argv: list[str]) -> tuple[int, dict]:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return EXIT_USAGE, {"error": {"type": "usage", "message": str(exc)}}
    if args.command is None:
        return EXIT_USAGE, {"error": {"type": "usage", "message": "missing subcommand"}}
    runner = _RUNNERS[args.command]
    try:
        return EXIT_OK, runner(args)
    except (OSError, json.JSONDecodeError) as exc:
        return EXIT_IO, {"error": {"type": "io", "message": str(exc)}}
    except (ValueError, TypeError, KeyError, RuntimeError) as exc:
        return EXIT_VALIDATION, {"error": {"type": "validation", "message": str(exc)}}


def main(argv: list[str] | None = None) -> int:
    code, payload = _dispatch(list(sys.argv[1:] if argv is None else argv))
    print(_json_line(payload))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
