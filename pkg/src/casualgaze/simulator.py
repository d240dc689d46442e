"""Synthetic casual-gaze trials: endpoint sampling, trajectory shapes, batch runs.

Endpoints are drawn from the same context-dependent Gaussian family the
recognizer assumes (ground-truth coefficients are a parameter, so fitting
can be validated end to end).  Trajectories interpolate from a start
direction to the endpoint with three profiles: a plain settle, an overshoot
with a foldback at the end, and an early-deceleration undershoot that stops
short and holds.  Trials replay deterministically from (seed, trial_id), so
parallel and serial runs agree bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .behavior import (
    BehaviorCoefficients,
    BivariateGaussian,
    default_coefficients,
    fit_gaussian,
    isolated_model,
    pair_model,
)
from .errors import EmptyInput, InvalidProfile
from .evaluation import (
    ExperimentReport,
    TrialOutcome,
    aggregate,
    classify_device_case,
    score_trial,
)
from .geometry import (
    AngularCoord,
    AngularOffset,
    Vec3,
    angle_between,
    direction_angles,
    to_direction,
    wrap_degrees,
)
from .recognizer import (
    CasualGazeTechnique,
    GazeSample,
    KnnTechnique,
    PreciseTechnique,
    Prediction,
    PredictionWeights,
    SpecificTechnique,
)
from .scene_io import Device, Scene, UserPose

PROFILE_KINDS = ("normal", "overshoot_foldback", "undershoot_through")

DEFAULT_PROFILE_MIX = {"normal": 0.8, "overshoot_foldback": 0.1, "undershoot_through": 0.1}

# Interferers beyond this multiple of the gaze gate no longer shape the
# endpoint distribution; the target behaves as isolated.
PAIRING_RANGE_FACTOR = 2.0

_ORIGIN_USER = UserPose(
    eye_pos=Vec3(0.0, 0.0, 0.0),
    head_pos=Vec3(0.0, 0.0, 0.0),
    head_forward=Vec3(0.0, 0.0, 1.0),
)


@dataclass(frozen=True, slots=True)
class TrajectoryProfile:
    kind: str = "normal"
    duration_base_s: float = 0.30
    duration_s_per_degree: float = 0.006
    noise_std: float = 0.5
    frame_rate: float = 25.0
    # Overshoot/undershoot magnitude as a fraction of amplitude; the studies
    # do not quantify these, so the band is configurable.
    excursion_band: tuple[float, float] = (0.10, 0.25)
    # Fixation dwell appended after the movement settles, before the user
    # presses: the perceive-feedback-and-react window.
    settle_s: float = 0.2

    def __post_init__(self) -> None:
        if self.kind not in PROFILE_KINDS:
            raise InvalidProfile(f"unknown profile kind {self.kind!r}")
        if self.duration_base_s <= 0 or self.duration_s_per_degree < 0:
            raise InvalidProfile("duration model must be positive")
        if self.noise_std < 0:
            raise InvalidProfile("noise_std must be >= 0")
        if self.frame_rate <= 0:
            raise InvalidProfile("frame_rate must be > 0")
        if self.settle_s < 0:
            raise InvalidProfile("settle_s must be >= 0")
        lo, hi = self.excursion_band
        if not 0 <= lo <= hi < 1:
            raise InvalidProfile("excursion band must satisfy 0 <= lo <= hi < 1")


@dataclass(frozen=True, slots=True)
class TrialRecord:
    trial_id: int
    target_id: int
    samples: tuple[GazeSample, ...]
    confirm_t: float
    profile_kind: str = "normal"
    start_t: float = 0.0


def nearest_interferer(scene: Scene, target: Device, gate_gaze: float) -> Optional[Device]:
    """The closest other device by angle, if close enough to shape behavior."""
    eye = scene.user.eye_pos
    best: Optional[Device] = None
    best_sep = math.inf
    for other in scene.devices:
        if other.id == target.id:
            continue
        sep = angle_between(target.position - eye, other.position - eye)
        if sep < best_sep:
            best_sep = sep
            best = other
    if best is not None and best_sep <= PAIRING_RANGE_FACTOR * gate_gaze:
        return best
    return None


def endpoint_model(
    scene: Scene, target: Device, truth: BehaviorCoefficients
) -> BivariateGaussian:
    """Ground-truth endpoint distribution for a target in its scene context."""
    disturb = nearest_interferer(scene, target, truth.gate_gaze)
    if disturb is None:
        return isolated_model(target, truth)
    return pair_model(target, disturb, scene.user.eye_pos, truth)


def synth_endpoint(
    scene: Scene, target: Device, truth: BehaviorCoefficients, rng: np.random.Generator
) -> AngularCoord:
    """Draw one casual-gaze endpoint around the target."""
    model = endpoint_model(scene, target, truth)
    center = direction_angles(target.position - scene.user.eye_pos)
    dphi = model.mean.dphi + model.std_phi * rng.standard_normal()
    dtheta = model.mean.dtheta + model.std_theta * rng.standard_normal()
    return AngularCoord(
        phi=wrap_degrees(center.phi + dphi),
        theta=max(-90.0, min(90.0, center.theta + dtheta)),
    )


def synth_endpoint_offsets(
    model: BivariateGaussian, rng: np.random.Generator, n: int
) -> np.ndarray:
    """Vectorized endpoint offsets (n x 2 array of dphi, dtheta) for batch datasets."""
    draws = rng.standard_normal((n, 2))
    draws[:, 0] = model.mean.dphi + model.std_phi * draws[:, 0]
    draws[:, 1] = model.mean.dtheta + model.std_theta * draws[:, 1]
    return draws


def _smoothstep(u: float) -> float:
    return u * u * (3.0 - 2.0 * u)


def synth_trajectory(
    start: AngularCoord,
    endpoint: AngularCoord,
    profile: TrajectoryProfile,
    rng: np.random.Generator,
    user: Optional[UserPose] = None,
) -> list[GazeSample]:
    """Generate a gaze sample stream moving from *start* toward *endpoint*.

    Frame i is stamped (i+1)/frame_rate with the trial starting at t=0.
    Head pose stays fixed throughout; the eye sits at the origin unless a
    scene user pose is supplied.
    """
    user = user or _ORIGIN_USER
    dphi_total = wrap_degrees(endpoint.phi - start.phi)
    dtheta_total = endpoint.theta - start.theta
    amplitude = math.hypot(dphi_total, dtheta_total)
    duration = profile.duration_base_s + profile.duration_s_per_degree * amplitude
    n = max(2, round(duration * profile.frame_rate))
    settle_frames = round(profile.settle_s * profile.frame_rate)
    dt = 1.0 / profile.frame_rate

    # Fractional progress along the start->endpoint segment per frame;
    # values above 1 overshoot, below 1 fall short.  The movement spans n
    # frames; the settle dwell then holds the final position until the
    # simulated press.
    progress = [0.0] * n
    if profile.kind == "normal":
        for i in range(n):
            progress[i] = _smoothstep(i / (n - 1))
    elif profile.kind == "overshoot_foldback":
        over = rng.uniform(*profile.excursion_band)
        fold_frames = max(1, round(0.2 * n))
        out_frames = max(2, n - fold_frames)
        for i in range(out_frames):
            progress[i] = (1.0 + over) * _smoothstep(i / (out_frames - 1))
        for j in range(n - out_frames):
            u = (j + 1) / (n - out_frames)
            progress[out_frames + j] = (1.0 + over) - over * _smoothstep(u)
    else:  # undershoot_through
        under = rng.uniform(*profile.excursion_band)
        hold_frames = max(1, round(0.15 * n))
        move_frames = max(2, n - hold_frames)
        for i in range(move_frames):
            progress[i] = (1.0 - under) * _smoothstep(i / (move_frames - 1))
        for j in range(move_frames, n):
            progress[j] = 1.0 - under

    progress.extend([progress[-1]] * settle_frames)
    n += settle_frames

    noise = (
        rng.normal(0.0, profile.noise_std, size=(n, 2))
        if profile.noise_std > 0
        else np.zeros((n, 2))
    )

    samples = []
    for i in range(n):
        phi = wrap_degrees(start.phi + progress[i] * dphi_total + noise[i, 0])
        theta = max(-90.0, min(90.0, start.theta + progress[i] * dtheta_total + noise[i, 1]))
        samples.append(
            GazeSample(
                t=(i + 1) * dt,
                gaze_dir=to_direction(AngularCoord(phi, theta)),
                head_pos=user.head_pos,
                head_forward=user.head_forward,
                eye_pos=user.eye_pos,
            )
        )
    return samples


def synth_trial(
    scene: Scene,
    target: Device,
    truth: BehaviorCoefficients,
    profile: TrajectoryProfile,
    rng: np.random.Generator,
    trial_id: int = 0,
) -> TrialRecord:
    """One full trial: endpoint draw, trajectory, confirm at settle."""
    endpoint = synth_endpoint(scene, target, truth, rng)
    start = direction_angles(scene.user.head_forward)
    samples = synth_trajectory(start, endpoint, profile, rng, user=scene.user)
    return TrialRecord(
        trial_id=trial_id,
        target_id=target.id,
        samples=tuple(samples),
        confirm_t=samples[-1].t,
        profile_kind=profile.kind,
    )


def fit_specific_models(
    scene: Scene,
    truth: BehaviorCoefficients,
    rng: np.random.Generator,
    n_per_device: int = 250,
    tracker_noise_std: float = 0.5,
) -> dict[int, BivariateGaussian]:
    """Per-device Gaussians fitted from synthetic endpoint observations.

    Mimics learning the distribution from a recorded dataset: draws
    endpoints from the ground-truth model per device, adds tracker noise,
    and fits each device independently.
    """
    models: dict[int, BivariateGaussian] = {}
    for device in sorted(scene.devices, key=lambda d: d.id):
        model = endpoint_model(scene, device, truth)
        offsets = synth_endpoint_offsets(model, rng, n_per_device)
        if tracker_noise_std > 0:
            offsets = offsets + rng.normal(0.0, tracker_noise_std, size=offsets.shape)
        models[device.id] = fit_gaussian(
            [AngularOffset(dphi=float(o[0]), dtheta=float(o[1])) for o in offsets]
        )
    return models


def make_technique(
    name: str,
    coeffs: Optional[BehaviorCoefficients] = None,
    device_models: Optional[dict[int, BivariateGaussian]] = None,
    weights: Optional[PredictionWeights] = None,
    stability_n: int = 3,
):
    if name == "casualgaze":
        return CasualGazeTechnique(coeffs=coeffs, weights=weights, stability_n=stability_n)
    if name == "knn":
        return KnnTechnique()
    if name == "precise":
        return PreciseTechnique()
    if name == "specific":
        if device_models is None:
            raise ValueError("specific technique needs per-device models")
        return SpecificTechnique(
            device_models, coeffs=coeffs, weights=weights, stability_n=stability_n
        )
    raise ValueError(f"unknown technique {name!r}")


def replay_trial(trial: TrialRecord, technique, scene: Scene) -> list[Prediction]:
    technique.reset()
    return [technique.step(sample, scene) for sample in trial.samples]


def _choose_profile(
    mix: dict[str, float], base: TrajectoryProfile, rng: np.random.Generator
) -> TrajectoryProfile:
    kinds = list(mix.keys())
    probs = np.array([mix[k] for k in kinds], dtype=float)
    probs = probs / probs.sum()
    kind = kinds[int(rng.choice(len(kinds), p=probs))]
    return TrajectoryProfile(
        kind=kind,
        duration_base_s=base.duration_base_s,
        duration_s_per_degree=base.duration_s_per_degree,
        noise_std=base.noise_std,
        frame_rate=base.frame_rate,
        excursion_band=base.excursion_band,
    )


@dataclass(frozen=True)
class _TrialTask:
    """Everything one worker needs to run a single trial deterministically."""

    scene: Scene
    truth: BehaviorCoefficients
    recognizer_coeffs: BehaviorCoefficients
    base_profile: TrajectoryProfile
    mix: dict[str, float]
    techniques: tuple[str, ...]
    device_models: Optional[dict[int, BivariateGaussian]]
    stability_n: int
    seed: int


def _run_one_trial(task: _TrialTask, trial_id: int) -> tuple[str, list[TrialOutcome]]:
    rng = np.random.default_rng([task.seed, trial_id])
    devices = sorted(task.scene.devices, key=lambda d: d.id)
    target = devices[int(rng.integers(len(devices)))]
    profile = _choose_profile(task.mix, task.base_profile, rng)
    trial = synth_trial(task.scene, target, task.truth, profile, rng, trial_id=trial_id)

    outcomes = []
    for name in task.techniques:
        technique = make_technique(
            name,
            coeffs=task.recognizer_coeffs,
            device_models=task.device_models,
            stability_n=task.stability_n,
        )
        predictions = replay_trial(trial, technique, task.scene)
        outcomes.append(
            score_trial(
                samples_t=[s.t for s in trial.samples],
                predictions=predictions,
                target_id=trial.target_id,
                confirm_t=trial.confirm_t,
                trial_id=trial_id,
                technique=name,
                start_t=trial.start_t,
            )
        )
    return profile.kind, outcomes


def _run_trial_batch(task: _TrialTask, trial_ids: Sequence[int]):
    return [_run_one_trial(task, tid) for tid in trial_ids]


def run_experiment(
    scene: Scene,
    techniques: Sequence[str],
    n_trials: int,
    truth: Optional[BehaviorCoefficients] = None,
    profiles_mix: Optional[dict[str, float]] = None,
    rng_seed: int = 0,
    recognizer_coeffs: Optional[BehaviorCoefficients] = None,
    base_profile: Optional[TrajectoryProfile] = None,
    stability_n: int = 3,
    specific_train_n: int = 1000,
    workers: int = 1,
) -> ExperimentReport:
    """Simulate trials and replay them through every requested technique.

    Fully deterministic for a given seed: each trial derives its own random
    stream from (seed, trial_id), so the worker count cannot change results.
    """
    if n_trials <= 0:
        raise EmptyInput("n_trials must be positive")
    truth = truth or default_coefficients()
    recognizer_coeffs = recognizer_coeffs or truth
    base_profile = base_profile or TrajectoryProfile()
    mix = dict(profiles_mix or DEFAULT_PROFILE_MIX)
    unknown = set(mix) - set(PROFILE_KINDS)
    if unknown:
        raise InvalidProfile(f"unknown profile kinds in mix: {sorted(unknown)}")

    device_models = None
    if "specific" in techniques:
        fit_rng = np.random.default_rng([rng_seed, 1_000_000_007])
        device_models = fit_specific_models(
            scene, truth, fit_rng, n_per_device=specific_train_n,
            tracker_noise_std=base_profile.noise_std,
        )

    task = _TrialTask(
        scene=scene,
        truth=truth,
        recognizer_coeffs=recognizer_coeffs,
        base_profile=base_profile,
        mix=mix,
        techniques=tuple(techniques),
        device_models=device_models,
        stability_n=stability_n,
        seed=rng_seed,
    )

    profile_counts = {k: 0 for k in PROFILE_KINDS}
    outcomes: list[TrialOutcome] = []
    if workers > 1:
        chunk = max(1, n_trials // (workers * 8))
        batches = [range(i, min(i + chunk, n_trials)) for i in range(0, n_trials, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for batch_result in pool.map(_run_trial_batch, [task] * len(batches), batches):
                for kind, trial_outcomes in batch_result:
                    profile_counts[kind] += 1
                    outcomes.extend(trial_outcomes)
    else:
        for trial_id in range(n_trials):
            kind, trial_outcomes = _run_one_trial(task, trial_id)
            profile_counts[kind] += 1
            outcomes.extend(trial_outcomes)

    device_cases = {
        d.id: classify_device_case(d, scene, gate_gaze=recognizer_coeffs.gate_gaze)
        for d in scene.devices
    }
    config = {
        "scene": scene.name,
        "n_trials": n_trials,
        "techniques": list(techniques),
        "profile_mix": mix,
        "profile_counts": profile_counts,
        "frame_rate": base_profile.frame_rate,
        "noise_std": base_profile.noise_std,
        "stability_n": stability_n,
        "specific_train_n": specific_train_n if device_models is not None else None,
        "device_cases": {str(k): v for k, v in sorted(device_cases.items())},
    }
    return aggregate(outcomes, device_cases=device_cases, config=config, seed=rng_seed)
