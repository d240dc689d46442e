"""Command-line entry point.

Subcommands:

* ``simulate``  generate trial logs (or a coefficient-calibration grid)
* ``evaluate``  run the simulated comparison across techniques
* ``fit``       recover coefficients and per-device models from datasets
* ``predict``   stream recognition over stdin/stdout, one JSON record per line
* ``serve``     run the interactive demo session server

Exit codes: 0 success, 2 usage, 3 data error, 4 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Optional

from . import __version__
import numpy as np

from .behavior import BehaviorCoefficients, EndpointSample, default_coefficients
from .errors import (
    CasualGazeError,
    EmptyInput,
    InsufficientData,
    InvalidProfile,
    ParseError,
    SchemaVersionMismatch,
    ValidationError,
)
from .evaluation import ExperimentReport
from .fitting import (
    fit_behavior_coefficients,
    fit_device_models,
    generate_calibration_grid,
    load_fit_inputs,
)
from .recognizer import (
    TECHNIQUE_NAMES,
    prediction_to_record,
    sample_from_record,
)
from .scene_io import (
    Scene,
    load_coefficients,
    load_scene,
    save_coefficients,
    save_endpoints,
    validate_scene,
)
from .scenes import BUILTIN_NAMES, builtin_scene
from .geometry import direction_angles
from .simulator import (
    DEFAULT_PROFILE_MIX,
    PROFILE_KINDS,
    TrajectoryProfile,
    make_technique,
    run_experiment,
    synth_trial,
    _choose_profile,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4

DATA_ERRORS = (
    InsufficientData,
    ParseError,
    SchemaVersionMismatch,
    ValidationError,
    EmptyInput,
    InvalidProfile,
    FileNotFoundError,
)


class UsageError(Exception):
    """Bad command-line input: reported with exit code 2."""


def resolve_scene(name_or_path: str) -> Scene:
    if name_or_path in BUILTIN_NAMES:
        return builtin_scene(name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise UsageError(f"scene not found: {name_or_path} "
                         f"(builtins: {', '.join(BUILTIN_NAMES)})")
    return load_scene(path)


def positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def techniques_list(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    unknown = [t for t in names if t not in TECHNIQUE_NAMES]
    if unknown or not names:
        raise argparse.ArgumentTypeError(
            f"unknown technique(s) {unknown}; valid names: {', '.join(TECHNIQUE_NAMES)}"
        )
    return names


def resolve_coeffs(path: Optional[str]) -> BehaviorCoefficients:
    if path is None:
        return default_coefficients()
    return load_coefficients(path).coeffs


def profile_mix(text: str) -> dict[str, float]:
    parts = text.split(",")
    if len(parts) != len(PROFILE_KINDS):
        raise argparse.ArgumentTypeError(
            f"wants {len(PROFILE_KINDS)} comma-separated fractions "
            f"(normal,overshoot,undershoot), got {text!r}"
        )
    try:
        weights = [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if any(w < 0 for w in weights) or sum(weights) <= 0:
        raise argparse.ArgumentTypeError("fractions must be nonnegative and sum > 0")
    total = sum(weights)
    return {k: w / total for k, w in zip(PROFILE_KINDS, weights)}


def _echo_report(report: ExperimentReport, out=sys.stdout) -> None:
    print(f"seed={report.seed}  scene={report.config.get('scene')}  "
          f"trials={report.config.get('n_trials')}", file=out)
    header = f"{'technique':<12} {'acc':>7} {'DT':>7} {'CT':>7} {'ST':>7} {'E-Num':>7}"
    print(header, file=out)
    fmt = lambda x: "-" if x is None else f"{x:.3f}"
    for tech in sorted(report.techniques):
        a = report.techniques[tech]
        print(
            f"{tech:<12} {a.accuracy:>7.4f} {fmt(a.mean_dt):>7} {fmt(a.mean_ct):>7} "
            f"{fmt(a.mean_st):>7} {a.mean_enum:>7.3f}",
            file=out,
        )


def write_report(report: ExperimentReport, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(
        json.dumps(report.to_doc(), indent=2, sort_keys=True) + "\n"
    )
    rows = report.table_rows()
    with open(out_dir / "report.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def cmd_simulate(args) -> int:
    out_dir = Path(args.out)
    truth = resolve_coeffs(args.coeffs)
    if args.calibration_grid:
        dirs = generate_calibration_grid(
            out_dir, truth, seed=args.seed, n_per_condition=args.per_condition
        )
        print(f"wrote {len(dirs)} calibration conditions to {out_dir}")
        return EXIT_OK

    scene = resolve_scene(args.scene)
    mix = args.profiles or dict(DEFAULT_PROFILE_MIX)
    base = TrajectoryProfile(frame_rate=args.frame_rate, noise_std=args.noise)
    out_dir.mkdir(parents=True, exist_ok=True)

    devices = sorted(scene.devices, key=lambda d: d.id)
    endpoints: list[EndpointSample] = []
    with open(out_dir / "frames.jsonl", "w") as frames_fh:
        for trial_id in range(args.trials):
            rng = np.random.default_rng([args.seed, trial_id])
            target = devices[int(rng.integers(len(devices)))]
            profile = _choose_profile(mix, base, rng)
            trial = synth_trial(scene, target, truth, profile, rng, trial_id=trial_id)
            final = trial.samples[-1]
            endpoints.append(
                EndpointSample(
                    trial_id=trial_id,
                    target_id=target.id,
                    gaze=direction_angles(final.gaze_dir),
                    timestamp_ms=final.t * 1000.0,
                )
            )
            for s in trial.samples:
                frames_fh.write(
                    json.dumps(
                        {
                            "trial_id": trial_id,
                            "target_id": target.id,
                            "t": s.t,
                            "gaze_dir": list(s.gaze_dir.as_tuple()),
                            "head_pos": list(s.head_pos.as_tuple()),
                            "head_forward": list(s.head_forward.as_tuple()),
                            "eye_pos": list(s.eye_pos.as_tuple()),
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
    save_endpoints(out_dir / "endpoints.csv", endpoints)
    meta = {
        "scene": scene.name,
        "trials": args.trials,
        "seed": args.seed,
        "profile_mix": mix,
        "frame_rate": args.frame_rate,
        "noise_std": args.noise,
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote {args.trials} trials to {out_dir}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    scene = resolve_scene(args.scene)
    techniques = args.techniques or list(TECHNIQUE_NAMES)
    truth = resolve_coeffs(args.coeffs)
    report = run_experiment(
        scene,
        techniques,
        args.trials,
        truth=truth,
        profiles_mix=args.profiles or dict(DEFAULT_PROFILE_MIX),
        rng_seed=args.seed,
        base_profile=TrajectoryProfile(frame_rate=args.frame_rate, noise_std=args.noise),
        workers=args.workers,
    )
    _echo_report(report)
    if args.out:
        write_report(report, Path(args.out))
    return EXIT_OK


def cmd_fit(args) -> int:
    scene = resolve_scene(args.scene) if args.scene else None
    datasets = load_fit_inputs(args.data, scene)
    device_models = {}
    if len(datasets) == 1:
        device_models = fit_device_models(datasets[0][0], datasets[0][1])
    try:
        coeffs = fit_behavior_coefficients(datasets, size_norm_mode=args.size_norm_mode)
    except InsufficientData:
        if not device_models:
            raise
        # Single-scene datasets may identify only per-device models; keep
        # defaults for the global coefficients.
        coeffs = default_coefficients()
    save_coefficients(args.out, coeffs, device_models or None)
    print(f"wrote coefficients to {args.out} "
          f"({len(device_models)} device models, schema casualgaze-coeffs/1)")
    return EXIT_OK


def cmd_predict(args) -> int:
    scene = resolve_scene(args.scene)
    coeffs = resolve_coeffs(args.coeffs)
    device_models = None
    if args.coeffs and args.technique == "specific":
        device_models = load_coefficients(args.coeffs).device_models
    technique = make_technique(args.technique, coeffs=coeffs, device_models=device_models)
    for lineno, line in enumerate(sys.stdin, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
            sample = sample_from_record(doc, scene.user)
            pred = technique.step(sample, scene)
        except Exception as exc:
            print(f"warning: line {lineno} skipped: {exc}", file=sys.stderr)
            continue
        sys.stdout.write(json.dumps(prediction_to_record(sample.t, pred), sort_keys=True) + "\n")
        sys.stdout.flush()
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import run_server

    scene = resolve_scene(args.scene)
    coeffs = resolve_coeffs(args.coeffs)
    try:
        run_server(
            scene=scene,
            coeffs=coeffs,
            host=args.host,
            port=args.port,
            seed=args.seed,
            metrics_log=args.metrics_log,
        )
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_validate(args) -> int:
    scene = resolve_scene(args.scene)
    warnings = validate_scene(scene)
    for w in warnings:
        print(f"warning: {w}")
    print(f"{scene.name}: {len(scene.devices)} devices, {len(warnings)} warnings")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casualgaze",
        description="Casual gaze target recognition: simulate, fit, evaluate, demo.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scene_required=True):
        p.add_argument("--scene", required=scene_required,
                       help=f"builtin name ({', '.join(BUILTIN_NAMES)}) or scene file path")
        p.add_argument("--coeffs", help="coefficient file (casualgaze-coeffs/1)")
        p.add_argument("--seed", type=int, default=0, help="random seed")

    p_sim = sub.add_parser("simulate", help="generate synthetic trials or a calibration grid")
    add_common(p_sim, scene_required=False)
    p_sim.add_argument("--trials", type=positive_int, default=100)
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--profiles", type=profile_mix,
                       help="normal,overshoot,undershoot fractions, e.g. 0.8,0.1,0.1")
    p_sim.add_argument("--frame-rate", type=float, default=25.0)
    p_sim.add_argument("--noise", type=float, default=0.5, help="tracker noise std, degrees")
    p_sim.add_argument("--calibration-grid", action="store_true",
                       help="write the size/separation fitting grid instead of trials")
    p_sim.add_argument("--per-condition", type=int, default=5000,
                       help="endpoints per grid condition")
    p_sim.set_defaults(func=cmd_simulate, needs_scene=False)

    p_eval = sub.add_parser("evaluate", help="compare techniques on simulated trials")
    add_common(p_eval)
    p_eval.add_argument("--trials", type=positive_int, default=2000)
    p_eval.add_argument("--techniques", type=techniques_list,
                        help=f"comma list from: {', '.join(TECHNIQUE_NAMES)} (default: all)")
    p_eval.add_argument("--profiles", type=profile_mix,
                        help="normal,overshoot,undershoot fractions")
    p_eval.add_argument("--frame-rate", type=float, default=25.0)
    p_eval.add_argument("--noise", type=float, default=0.5)
    p_eval.add_argument("--out", help="directory for report.json / report.csv")
    p_eval.add_argument("--workers", type=int, default=1)
    p_eval.set_defaults(func=cmd_evaluate)

    p_fit = sub.add_parser("fit", help="fit coefficients from endpoint datasets")
    p_fit.add_argument("--data", required=True,
                       help="endpoints CSV (with --scene) or calibration grid directory")
    p_fit.add_argument("--scene", help="scene for a single CSV dataset")
    p_fit.add_argument("--out", required=True, help="coefficient file to write")
    p_fit.add_argument("--size-norm-mode", default="proportional",
                       choices=["proportional", "inverse"])
    p_fit.set_defaults(func=cmd_fit)

    p_pred = sub.add_parser("predict", help="stream recognition: JSONL stdin -> JSONL stdout")
    add_common(p_pred)
    p_pred.add_argument("--technique", default="casualgaze", choices=list(TECHNIQUE_NAMES))
    p_pred.set_defaults(func=cmd_predict)

    p_serve = sub.add_parser("serve", help="run the interactive demo websocket server")
    add_common(p_serve)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--metrics-log", help="append per-trial results to this JSONL file")
    p_serve.set_defaults(func=cmd_serve)

    p_val = sub.add_parser("validate", help="load a scene and print validation warnings")
    p_val.add_argument("--scene", required=True)
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CasualGazeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
