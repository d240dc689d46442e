"""Recover behavior-model coefficients from endpoint datasets.

Two outputs: per-device Gaussians (usable directly by the fitted-model
recognizer variant) and the global coefficient set (mean-shift lines, std
planes, isolated std) regressed across devices and scenes.  A device's
context is decided by the same nearest-interferer rule the simulator uses,
so datasets produced by the calibration grid round-trip cleanly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .behavior import (
    BehaviorCoefficients,
    BivariateGaussian,
    EndpointSample,
    MeanShift,
    StdPlanes,
    fit_gaussian,
    fit_mean_coeffs,
    fit_std_coeffs,
)
from .errors import InsufficientData, ValidationError
from .geometry import (
    AngularCoord,
    AngularOffset,
    Vec3,
    angular_offset,
    chord_at_reference,
    normalize_size,
    to_angular,
    to_direction,
    wrap_degrees,
)
from .scene_io import (
    Device,
    Scene,
    UserPose,
    load_endpoints,
    load_scene,
    save_endpoints,
    save_scene,
)
from .simulator import endpoint_model, nearest_interferer, synth_endpoint_offsets

MIN_SAMPLES_PER_DEVICE = 2

GRID_SIZES_M = (0.25, 0.50, 0.75, 1.00)
GRID_CENTER_DISTS_M = (2.0, 1.5, 1.0, 0.5)
GRID_DIRECTIONS_DEG = (0.0, 90.0, 180.0, 270.0)
GRID_EYE_DIST_M = 3.0


def device_offsets(
    scene: Scene, samples: Sequence[EndpointSample]
) -> dict[int, list[AngularOffset]]:
    """Group samples by target and express each gaze as an offset from it."""
    eye = scene.user.eye_pos
    centers = {d.id: to_angular(eye, d.position) for d in scene.devices}
    grouped: dict[int, list[AngularOffset]] = {}
    for s in samples:
        center = centers.get(s.target_id)
        if center is None:
            raise ValidationError(f"sample references unknown device id {s.target_id}")
        grouped.setdefault(s.target_id, []).append(angular_offset(s.gaze, center))
    return grouped


def fit_device_models(
    scene: Scene, samples: Sequence[EndpointSample]
) -> dict[int, BivariateGaussian]:
    """Per-device Gaussian fits; devices with fewer than 2 samples are skipped."""
    models: dict[int, BivariateGaussian] = {}
    for dev_id, offsets in sorted(device_offsets(scene, samples).items()):
        if len(offsets) >= MIN_SAMPLES_PER_DEVICE:
            models[dev_id] = fit_gaussian(offsets)
    if not models:
        raise InsufficientData("no device has enough samples to fit")
    return models


@dataclass
class _Rows:
    mean_phi: list[tuple[float, float]]
    mean_theta: list[tuple[float, float]]
    std_phi: list[tuple[float, float, float]]
    std_theta: list[tuple[float, float, float]]
    isolated_stds: list[float]


def _collect_rows(
    scene: Scene,
    samples: Sequence[EndpointSample],
    rows: _Rows,
    gate_gaze: float,
    size_norm_mode: str,
) -> None:
    eye = scene.user.eye_pos
    for dev_id, offsets in sorted(device_offsets(scene, samples).items()):
        if len(offsets) < MIN_SAMPLES_PER_DEVICE:
            continue
        device = scene.device_by_id(dev_id)
        fitted = fit_gaussian(offsets)
        disturb = nearest_interferer(scene, device, gate_gaze)
        if disturb is None:
            rows.isolated_stds.extend([fitted.std_phi, fitted.std_theta])
            continue
        t_ang = to_angular(eye, device.position)
        d_ang = to_angular(eye, disturb.position)
        sep_phi = wrap_degrees(t_ang.phi - d_ang.phi)
        sep_theta = t_ang.theta - d_ang.theta
        ns = normalize_size(
            2.0 * device.radius, (device.position - eye).norm(), size_norm_mode
        )
        rows.mean_phi.append((sep_phi, fitted.mean.dphi))
        rows.mean_theta.append((sep_theta, fitted.mean.dtheta))
        rows.std_phi.append((ns, chord_at_reference(abs(sep_phi)), fitted.std_phi))
        rows.std_theta.append((ns, chord_at_reference(abs(sep_theta)), fitted.std_theta))


def fit_behavior_coefficients(
    datasets: Sequence[tuple[Scene, Sequence[EndpointSample]]],
    gate_head: float = 96.0,
    gate_gaze: float = 17.18,
    size_norm_mode: str = "proportional",
    fallback_isolated_std: float = 8.59,
) -> BehaviorCoefficients:
    """Regress global coefficients from one or more (scene, samples) datasets."""
    rows = _Rows([], [], [], [], [])
    for scene, samples in datasets:
        _collect_rows(scene, samples, rows, gate_gaze, size_norm_mode)
    if not rows.mean_phi and not rows.isolated_stds:
        raise InsufficientData("datasets contain no fittable devices")
    if len(rows.mean_phi) < 2:
        raise InsufficientData(
            "need at least two paired-device conditions to fit shift and spread"
        )
    isolated_std = (
        float(np.mean(rows.isolated_stds)) if rows.isolated_stds else fallback_isolated_std
    )
    return BehaviorCoefficients(
        mean_shift=MeanShift(
            phi=fit_mean_coeffs(rows.mean_phi),
            theta=fit_mean_coeffs(rows.mean_theta),
        ),
        std_plane=StdPlanes(
            phi=fit_std_coeffs(rows.std_phi),
            theta=fit_std_coeffs(rows.std_theta),
        ),
        isolated_std=isolated_std,
        gate_head=gate_head,
        gate_gaze=gate_gaze,
        size_norm_mode=size_norm_mode,
    )


# --- calibration grid --------------------------------------------------------


def _condition_scene(
    index: int, size_m: float, center_dist_m: float, direction_deg: float
) -> Scene:
    """Two spheres at the reference eye distance, separated along one axis."""
    sep_deg = 2.0 * math.degrees(math.asin(center_dist_m / (2.0 * GRID_EYE_DIST_M)))
    d = math.radians(direction_deg)
    disturb_ang = AngularCoord(
        phi=sep_deg * round(math.cos(d), 12), theta=sep_deg * round(math.sin(d), 12)
    )
    user = UserPose(
        eye_pos=Vec3(0, 0, 0), head_pos=Vec3(0, 0, 0), head_forward=Vec3(0, 0, 1)
    )
    target = Device(1, "target", Vec3(0, 0, GRID_EYE_DIST_M), size_m / 2.0)
    disturb = Device(
        2,
        "interferer",
        to_direction(disturb_ang).scaled(GRID_EYE_DIST_M),
        0.25,
    )
    return Scene(
        name=f"calibration_{index:03d}", devices=(target, disturb), user=user,
        approximation=True,
    )


def generate_calibration_grid(
    out_dir: str | Path,
    truth: BehaviorCoefficients,
    seed: int,
    n_per_condition: int = 5000,
    sizes: Sequence[float] = GRID_SIZES_M,
    center_dists: Sequence[float] = GRID_CENTER_DISTS_M,
    directions: Sequence[float] = GRID_DIRECTIONS_DEG,
) -> list[Path]:
    """Write one (scene.json, endpoints.csv) pair per grid condition.

    Conditions cover target sizes x center distances x interferer directions
    at the 3 m reference distance; the widest distance level exceeds the
    pairing range on purpose, exercising the isolated-device path.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    index = 0
    for size_m in sizes:
        for dist_m in center_dists:
            for direction in directions:
                scene = _condition_scene(index, size_m, dist_m, direction)
                target = scene.devices[0]
                model = endpoint_model(scene, target, truth)
                rng = np.random.default_rng([seed, index])
                draws = synth_endpoint_offsets(model, rng, n_per_condition)
                center = to_angular(scene.user.eye_pos, target.position)
                samples = [
                    EndpointSample(
                        trial_id=i,
                        target_id=target.id,
                        gaze=AngularCoord(
                            phi=wrap_degrees(center.phi + float(row[0])),
                            theta=max(-90.0, min(90.0, center.theta + float(row[1]))),
                        ),
                        timestamp_ms=40.0 * i,
                    )
                    for i, row in enumerate(draws)
                ]
                cond_dir = out_dir / f"cond_{index:03d}"
                cond_dir.mkdir(exist_ok=True)
                save_scene(scene, cond_dir / "scene.json")
                save_endpoints(cond_dir / "endpoints.csv", samples)
                written.append(cond_dir)
                index += 1
    return written


def load_fit_inputs(
    data_path: str | Path, scene: Optional[Scene] = None
) -> list[tuple[Scene, list[EndpointSample]]]:
    """Resolve fit inputs: one CSV plus a scene, or a calibration directory."""
    data_path = Path(data_path)
    if data_path.is_dir():
        pairs = []
        for cond in sorted(data_path.iterdir()):
            scene_file = cond / "scene.json"
            endpoints_file = cond / "endpoints.csv"
            if scene_file.exists() and endpoints_file.exists():
                pairs.append((load_scene(scene_file), load_endpoints(endpoints_file)))
        if not pairs:
            raise InsufficientData(
                f"{data_path}: no condition subdirectories with scene.json + endpoints.csv"
            )
        return pairs
    if scene is None:
        raise ValidationError("fitting a single dataset file requires a scene")
    return [(scene, load_endpoints(data_path))]
