"""Demo runner: binds flat `key = value` configuration to registered units,
steps the simulation, and writes frames, particle dumps, and snapshots.

Override precedence for every config key: command line (--set/--seed)
beats the --config file, which beats built-in demo defaults.  A manifest
recording the fully resolved configuration is written to the output
directory before step 0, and `--manifest` reruns it bit-identically.

Exit codes: 0 ok, 1 runtime failure, 2 usage/config error.
"""

import argparse
import os
import sys

from . import media
from .diagnostics import LOG, ProfileSession, report
from .fluid.dumps import write_particle_dump
from .fluid.errors import SimError
from .fluid.mgpcg import NonConvergenceError
from .fluid.scenes import DEMO_DEFAULTS
from .fluid.sim import SimState
from .layout_bench import run_layout_benchmark
from .registry import (ConfigError, ConfigMap, RegistryError, UnknownUnitError,
                       register_all_units)
from .snapshot import SnapshotError, read_snapshot, write_snapshot

FRAME_FMT = "frame_%06d.ppm"
DUMP_FMT = "particles_%06d.tcpart"
SNAP_FMT = "snap_%06d.tcsnap"

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def build_parser():
    parser = argparse.ArgumentParser(prog="simkit")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a simulation demo")
    run.add_argument("--demo", help="registered demo name")
    run.add_argument("--list-demos", action="store_true",
                     help="print registered demos and exit")
    run.add_argument("--config", help="flat key = value config file")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="config override (repeatable)")
    run.add_argument("--frames", type=int, default=None,
                     help="number of frames to produce (default 1)")
    run.add_argument("--out", default=None, help="output directory (default out)")
    run.add_argument("--frame-every", type=int, default=None,
                     help="steps per frame; 0 disables frames (default 1)")
    run.add_argument("--snapshot-every", type=int, default=None,
                     help="steps between snapshots; 0 disables (default 0)")
    run.add_argument("--restore", default=None, help="resume from snapshot file")
    run.add_argument("--manifest", default=None,
                     help="rerun from a recorded manifest.cfg")
    run.add_argument("--profile", dest="profile", action="store_true", default=True)
    run.add_argument("--no-profile", dest="profile", action="store_false")
    run.add_argument("--seed", type=int, default=None, help="override config seed")
    run.add_argument("--video", default=None,
                     help="assemble frames into this video file (needs ffmpeg)")

    bench = sub.add_parser("bench", help="run the storage layout benchmark")
    bench.add_argument("--n", type=int, default=1_000_000)
    bench.add_argument("--passes", type=int, default=10)
    bench.add_argument("--seed", type=int, default=42)
    bench.add_argument("--foil", choices=("packed", "aligned"), default="packed")
    return parser


def _parse_override(item):
    key, sep, value = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
    from .registry import parse_scalar
    return key.strip(), parse_scalar(value.strip())


def _resolve_run_inputs(args):
    """Merge demo defaults, manifest, config file, and overrides."""
    manifest = None
    if args.manifest:
        with open(args.manifest, "r", encoding="utf-8") as f:
            manifest = ConfigMap.from_text(f.read())

    def run_param(name, flag_value, default, getter="get_int"):
        if flag_value is not None:
            return flag_value
        if manifest is not None and f"run.{name}" in manifest:
            return getattr(manifest, getter)(f"run.{name}")
        return default

    demo = run_param("demo", args.demo, None, "get_str")
    restore = run_param("restore", args.restore, None, "get_str")
    frames = run_param("frames", args.frames, 1)
    frame_every = run_param("frame_every", args.frame_every, 1)
    snapshot_every = run_param("snapshot_every", args.snapshot_every, 0)
    out_dir = run_param("out", args.out, "out", "get_str")

    if demo and restore:
        raise ConfigError("--demo and --restore are mutually exclusive")
    if not demo and not restore:
        raise ConfigError("one of --demo or --restore is required")
    if frames < 0 or frame_every < 0 or snapshot_every < 0:
        raise ConfigError("--frames and cadences must be non-negative")

    cfg = ConfigMap()
    if demo:
        if demo not in DEMO_DEFAULTS:
            raise UnknownUnitError(
                f"unknown demo {demo!r}; available: "
                f"{', '.join(sorted(DEMO_DEFAULTS))}")
        for k, v in DEMO_DEFAULTS[demo].items():
            cfg.set(k, v)
    if manifest is not None:
        for k, v in manifest.items():
            if not k.startswith("run."):
                cfg.set(k, v)
    if args.config:
        with open(args.config, "r", encoding="utf-8") as f:
            cfg.update(ConfigMap.from_text(f.read()))
    for item in args.overrides:
        k, v = _parse_override(item)
        cfg.set(k, v)
    if args.seed is not None:
        cfg.set("seed", args.seed)

    return {
        "demo": demo,
        "restore": restore,
        "frames": frames,
        "frame_every": frame_every,
        "snapshot_every": snapshot_every,
        "out_dir": out_dir,
        "config": cfg,
    }


def _write_manifest(run, path):
    m = ConfigMap()
    if run["demo"]:
        m.set("run.demo", run["demo"])
    if run["restore"]:
        m.set("run.restore", run["restore"])
    m.set("run.frames", run["frames"])
    m.set("run.frame_every", run["frame_every"])
    m.set("run.snapshot_every", run["snapshot_every"])
    m.set("run.out", run["out_dir"])
    for k, v in run["config"].items():
        m.set(k, v)
    with open(path, "w", encoding="utf-8") as f:
        f.write(m.to_text())


def _write_frame_outputs(state, cfg, out_dir):
    width = cfg.get_int("render.width", 256)
    height = cfg.get_int("render.height", 256)
    image = media.render_particles(state, width, height)
    frame_path = os.path.join(out_dir, FRAME_FMT % state.step_index)
    media.write_ppm(image, frame_path)
    write_particle_dump(state.particles,
                        os.path.join(out_dir, DUMP_FMT % state.step_index))
    return frame_path


def cmd_run(args) -> int:
    registry = register_all_units()
    if args.list_demos:
        for name in registry.list_units("demo"):
            print(name)
        return EXIT_OK

    run = _resolve_run_inputs(args)
    cfg = run["config"]
    out_dir = run["out_dir"]
    os.makedirs(out_dir, exist_ok=True)

    if run["restore"]:
        state = SimState.from_record(read_snapshot(run["restore"]))
    else:
        scene = registry.create("demo", run["demo"], cfg)
        state = scene.state

    _write_manifest(run, os.path.join(out_dir, "manifest.cfg"))
    unit = registry.create("simulation", state.config.scheme,
                           state.config.to_config())

    total_steps = run["frames"] * max(run["frame_every"], 1)
    frame_every = run["frame_every"]
    snapshot_every = run["snapshot_every"]
    frame_paths = []
    last_snap_index = None

    session = ProfileSession() if args.profile else None
    try:
        if session:
            session.__enter__()
        if total_steps == 0 and frame_every > 0:
            frame_paths.append(_write_frame_outputs(state, cfg, out_dir))
        for rel_step in range(1, total_steps + 1):
            unit.step(state)
            if frame_every > 0 and rel_step % frame_every == 0:
                frame_paths.append(_write_frame_outputs(state, cfg, out_dir))
            if snapshot_every > 0 and state.step_index % snapshot_every == 0:
                write_snapshot(state.to_record(),
                               os.path.join(out_dir, SNAP_FMT % state.step_index))
                last_snap_index = state.step_index
        if snapshot_every > 0 and last_snap_index != state.step_index:
            write_snapshot(state.to_record(),
                           os.path.join(out_dir, SNAP_FMT % state.step_index))
    except (SimError, NonConvergenceError, SnapshotError) as e:
        where = session.failure_path if session else None
        LOG.error("simulation failed{}: {}",
                  f" in scope {where}" if where else "", e)
        return EXIT_RUNTIME
    finally:
        if session:
            session.__exit__(None, None, None)

    if args.video:
        result = media.encode_video(frame_paths, args.video, fps=30)
        if not result.encoded:
            LOG.warn("{} (frames kept in {})", result.reason, out_dir)

    if session:
        print(report(session), end="")
    return EXIT_OK


def cmd_bench(args) -> int:
    rep = run_layout_benchmark(args.n, args.passes, args.seed, foil=args.foil)
    for part in rep.as_text().split(" "):
        print(part)
    return EXIT_OK if rep.checksums_match() else EXIT_RUNTIME


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_bench(args)
    except (ConfigError, RegistryError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
