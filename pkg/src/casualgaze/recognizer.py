"""Per-frame gaze-target recognition pipeline and baseline techniques.

The main pipeline predicts the gaze endpoint from recent motion, gates the
scene down to plausible candidates (head field and gaze cone), then runs a
pairwise Mahalanobis tournament: every unordered candidate pair contributes
one vote to whichever device explains the predicted gaze better under its
context-dependent Gaussian.  A stability filter debounces the winner before
it is reported as reliable.

Also provided: the nearest-device baseline, the precise (gaze inside the
target) baseline, and the per-device fitted-Gaussian variant used as the
accuracy ceiling in evaluations.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .behavior import (
    BehaviorCoefficients,
    BivariateGaussian,
    default_coefficients,
    gaussian_logpdf,
    isolated_model,
    mahalanobis,
    pair_model,
)
from .errors import EmptyBuffer, NonMonotonicTimestamp, ValidationError
from .geometry import (
    AngularCoord,
    Vec3,
    angle_between,
    angular_offset,
    direction_angles,
    to_direction,
    wrap_degrees,
)
from .scene_io import Scene

BUFFER_SIZE = 6  # newest sample plus five history frames -> five motion vectors
STALE_AFTER_S = 0.4

DEFAULT_WEIGHTS = (5 / 15, 4 / 15, 3 / 15, 2 / 15, 1 / 15)


@dataclass(frozen=True, slots=True)
class GazeSample:
    """One tracker frame: gaze direction plus head and eye pose."""

    t: float
    gaze_dir: Vec3
    head_pos: Vec3
    head_forward: Vec3
    eye_pos: Vec3

    def __post_init__(self) -> None:
        for name, vec in (("gaze_dir", self.gaze_dir), ("head_forward", self.head_forward)):
            if abs(vec.norm() - 1.0) > 1e-6:
                raise ValidationError(f"{name} must be unit length, |v|={vec.norm():.8f}")


@dataclass(frozen=True, slots=True)
class PredictionWeights:
    """Motion-vector weights, most recent first, plus an overall gain."""

    k: tuple[float, ...] = DEFAULT_WEIGHTS
    gain: float = 1.0

    def __post_init__(self) -> None:
        if len(self.k) != 5 or any(w < 0 for w in self.k):
            raise ValidationError("need 5 nonnegative weights")
        if abs(sum(self.k) - 1.0) > 1e-9:
            raise ValidationError(f"weights must sum to 1, got {sum(self.k)}")
        if any(self.k[i] < self.k[i + 1] for i in range(len(self.k) - 1)):
            raise ValidationError("weights must be non-increasing from most recent")


@dataclass(frozen=True, slots=True)
class Prediction:
    """Per-frame recognizer output."""

    winner: Optional[int]
    votes: dict[int, int]
    scores: dict[int, float]
    predicted_gaze: AngularCoord
    candidates: list[int]
    stable: bool


class _SceneCache:
    """Per-(scene, eye, coeffs) precomputation: device directions and models.

    Pair and isolated models depend only on the scene geometry, so they are
    built lazily once and reused every frame.
    """

    def __init__(self, scene: Scene, eye: Vec3, coeffs: BehaviorCoefficients) -> None:
        self.scene = scene
        self.eye = eye
        self.coeffs = coeffs
        self.devices = scene.devices
        self.directions: dict[int, Vec3] = {}
        self.centers: dict[int, AngularCoord] = {}
        for d in scene.devices:
            direction = (d.position - eye).normalized()
            self.directions[d.id] = direction
            self.centers[d.id] = direction_angles(direction)
        self._pair: dict[tuple[int, int], BivariateGaussian] = {}
        self._isolated: dict[int, BivariateGaussian] = {}

    def matches(self, scene: Scene, eye: Vec3, coeffs: BehaviorCoefficients) -> bool:
        return self.scene is scene and self.eye == eye and self.coeffs is coeffs

    def pair(self, target_id: int, disturb_id: int) -> BivariateGaussian:
        key = (target_id, disturb_id)
        model = self._pair.get(key)
        if model is None:
            model = pair_model(
                self.scene.device_by_id(target_id),
                self.scene.device_by_id(disturb_id),
                self.eye,
                self.coeffs,
            )
            self._pair[key] = model
        return model

    def isolated(self, target_id: int) -> BivariateGaussian:
        model = self._isolated.get(target_id)
        if model is None:
            model = isolated_model(self.scene.device_by_id(target_id), self.coeffs)
            self._isolated[target_id] = model
        return model


@dataclass
class RecognizerState:
    """Mutable per-session state: sample buffer, stability counter, config."""

    coeffs: BehaviorCoefficients = field(default_factory=default_coefficients)
    weights: PredictionWeights = field(default_factory=PredictionWeights)
    stability_n: int = 3
    buffer: deque = field(default_factory=lambda: deque(maxlen=BUFFER_SIZE))
    stable_candidate: Optional[int] = None
    stable_count: int = 0
    _cache: Optional[_SceneCache] = None

    def reset(self) -> None:
        self.buffer.clear()
        self.stable_candidate = None
        self.stable_count = 0

    def scene_cache(self, scene: Scene, eye: Vec3) -> _SceneCache:
        if self._cache is None or not self._cache.matches(scene, eye, self.coeffs):
            self._cache = _SceneCache(scene, eye, self.coeffs)
        return self._cache


def predict_gaze(state: RecognizerState) -> AngularCoord:
    """Extrapolate the gaze endpoint from buffered motion.

    Adds ``gain * sum(k_i * v_i)`` to the current gaze angles, where the
    ``v_i`` are adjacent-frame angular differences (most recent weighted
    heaviest) and the weights are renormalized over however many vectors the
    buffer holds.  With fewer than two samples this is the current gaze.
    """
    buf = state.buffer
    if not buf:
        raise EmptyBuffer("no gaze samples buffered")
    current: AngularCoord = buf[-1][1]
    if len(buf) < 2:
        return current

    angles = [entry[1] for entry in buf]
    diffs = [
        angular_offset(angles[i], angles[i - 1]) for i in range(1, len(angles))
    ]  # oldest motion first
    diffs.reverse()
    raw = state.weights.k[: len(diffs)]
    total = sum(raw)
    dphi = sum(w * d.dphi for w, d in zip(raw, diffs)) / total
    dtheta = sum(w * d.dtheta for w, d in zip(raw, diffs)) / total
    gain = state.weights.gain
    return AngularCoord(
        phi=wrap_degrees(current.phi + gain * dphi),
        theta=current.theta + gain * dtheta,
    )


def candidate_set(
    scene: Scene,
    sample: GazeSample,
    predicted: AngularCoord,
    coeffs: BehaviorCoefficients,
    cache: Optional[_SceneCache] = None,
) -> list[int]:
    """Device ids passing both gates, in ascending id order.

    A device qualifies when it lies inside the user's head field (angle from
    head_forward below ``gate_head``) and within ``gate_gaze`` degrees
    great-circle of the predicted gaze.
    """
    predicted_dir = to_direction(predicted)
    result = []
    for device in sorted(scene.devices, key=lambda d: d.id):
        head_angle = angle_between(sample.head_forward, device.position - sample.head_pos)
        if head_angle >= coeffs.gate_head:
            continue
        if cache is not None:
            device_dir = cache.directions[device.id]
        else:
            device_dir = (device.position - sample.eye_pos).normalized()
        if angle_between(predicted_dir, device_dir) >= coeffs.gate_gaze:
            continue
        result.append(device.id)
    return result


def vote(
    candidates: Sequence[int],
    predicted: AngularCoord,
    scene: Scene,
    eye: Vec3,
    coeffs: BehaviorCoefficients,
    cache: Optional[_SceneCache] = None,
) -> Prediction:
    """Pairwise Mahalanobis tournament over the candidate set.

    Each unordered pair grants one vote to the device whose pair model puts
    the predicted gaze at the smaller Mahalanobis distance (ties favor the
    lower id).  An empty candidate set yields a winner-less prediction; a
    singleton wins outright and is scored against its isolated model.

    Winner ties break by (1) smaller summed distance, (2) smaller raw angle
    to the predicted gaze, (3) lower id.
    """
    if cache is None:
        cache = _SceneCache(scene, eye, coeffs)
    ids = sorted(candidates)
    votes: dict[int, int] = {i: 0 for i in ids}
    scores: dict[int, float] = {i: 0.0 for i in ids}

    if not ids:
        return Prediction(None, votes, scores, predicted, ids, False)

    offsets = {i: angular_offset(predicted, cache.centers[i]) for i in ids}

    if len(ids) == 1:
        only = ids[0]
        scores[only] = mahalanobis(offsets[only], cache.isolated(only))
        return Prediction(only, votes, scores, predicted, ids, False)

    for a, b in itertools.combinations(ids, 2):
        d_a = mahalanobis(offsets[a], cache.pair(a, b))
        d_b = mahalanobis(offsets[b], cache.pair(b, a))
        scores[a] += d_a
        scores[b] += d_b
        if d_a <= d_b:
            votes[a] += 1
        else:
            votes[b] += 1

    predicted_dir = to_direction(predicted)
    winner = min(
        ids,
        key=lambda i: (
            -votes[i],
            scores[i],
            angle_between(predicted_dir, cache.directions[i]),
            i,
        ),
    )
    return Prediction(winner, votes, scores, predicted, ids, False)


def _push_sample(state: RecognizerState, sample: GazeSample) -> None:
    if state.buffer and sample.t <= state.buffer[-1][0].t:
        raise NonMonotonicTimestamp(
            f"sample t={sample.t} not newer than buffered t={state.buffer[-1][0].t}"
        )
    while state.buffer and sample.t - state.buffer[0][0].t > STALE_AFTER_S:
        state.buffer.popleft()
    state.buffer.append((sample, direction_angles(sample.gaze_dir)))


def _update_stability(state: RecognizerState, winner: Optional[int]) -> bool:
    if winner is not None and winner == state.stable_candidate:
        state.stable_count += 1
    elif winner is not None:
        state.stable_candidate = winner
        state.stable_count = 1
    else:
        state.stable_candidate = None
        state.stable_count = 0
    return winner is not None and state.stable_count >= state.stability_n


def recognize_frame(state: RecognizerState, sample: GazeSample, scene: Scene) -> Prediction:
    """Push a sample through the full pipeline and update stability."""
    _push_sample(state, sample)
    cache = state.scene_cache(scene, sample.eye_pos)
    predicted = predict_gaze(state)
    candidates = candidate_set(scene, sample, predicted, state.coeffs, cache)
    result = vote(candidates, predicted, scene, sample.eye_pos, state.coeffs, cache)
    stable = _update_stability(state, result.winner)
    return Prediction(
        winner=result.winner,
        votes=result.votes,
        scores=result.scores,
        predicted_gaze=result.predicted_gaze,
        candidates=result.candidates,
        stable=stable,
    )


def specific_frame(
    state: RecognizerState,
    sample: GazeSample,
    scene: Scene,
    device_models: dict[int, BivariateGaussian],
) -> Prediction:
    """Pipeline variant scoring candidates with per-device fitted Gaussians.

    Same prediction, gating, and stability filtering as the main pipeline,
    but the winner is the candidate whose fitted distribution gives the
    predicted gaze the highest likelihood.
    """
    _push_sample(state, sample)
    cache = state.scene_cache(scene, sample.eye_pos)
    predicted = predict_gaze(state)
    candidates = candidate_set(scene, sample, predicted, state.coeffs, cache)
    loglik: dict[int, float] = {}
    for dev_id in candidates:
        offset = angular_offset(predicted, cache.centers[dev_id])
        loglik[dev_id] = gaussian_logpdf(offset, device_models[dev_id])
    winner = min(candidates, key=lambda i: (-loglik[i], i)) if candidates else None
    stable = _update_stability(state, winner)
    return Prediction(
        winner=winner,
        votes={i: 0 for i in candidates},
        scores={i: -v for i, v in loglik.items()},
        predicted_gaze=predicted,
        candidates=list(candidates),
        stable=stable,
    )


def knn_baseline(scene: Scene, sample: GazeSample) -> Prediction:
    """Nearest device by great-circle angle to the raw gaze; no gating."""
    gaze_angles = direction_angles(sample.gaze_dir)
    ids = sorted(d.id for d in scene.devices)
    angles: dict[int, float] = {}
    for device in scene.devices:
        angles[device.id] = angle_between(sample.gaze_dir, device.position - sample.eye_pos)
    winner = min(ids, key=lambda i: (angles[i], i))
    return Prediction(
        winner=winner,
        votes={i: 0 for i in ids},
        scores=angles,
        predicted_gaze=gaze_angles,
        candidates=ids,
        stable=True,
    )


def precise_baseline(scene: Scene, sample: GazeSample) -> Prediction:
    """Winner only when the raw gaze falls inside a device's angular radius."""
    gaze_angles = direction_angles(sample.gaze_dir)
    containing: list[tuple[float, int]] = []
    ids = sorted(d.id for d in scene.devices)
    scores: dict[int, float] = {}
    for device in scene.devices:
        to_device = device.position - sample.eye_pos
        dist = to_device.norm()
        angle = angle_between(sample.gaze_dir, to_device)
        scores[device.id] = angle
        angular_radius = math.degrees(math.asin(min(1.0, device.radius / dist)))
        if angle < angular_radius:
            containing.append((angle, device.id))
    winner = min(containing)[1] if containing else None
    return Prediction(
        winner=winner,
        votes={i: 0 for i in ids},
        scores=scores,
        predicted_gaze=gaze_angles,
        candidates=ids,
        stable=winner is not None,
    )


# --- streaming record conversion ---------------------------------------------


def sample_from_record(doc: dict, user) -> GazeSample:
    """Build a GazeSample from one streaming record.

    ``t`` and ``gaze_dir`` are required; head and eye pose default to the
    scene's user when absent.  Direction vectors are normalized here so the
    wire format tolerates unnormalized input.
    """

    def vec(key, default: Vec3, normalize: bool = False) -> Vec3:
        raw = doc.get(key)
        if raw is None:
            return default
        v = Vec3(float(raw[0]), float(raw[1]), float(raw[2]))
        if normalize and abs(v.norm() - 1.0) > 1e-9:
            # renormalize only genuinely off-unit input: recomputing an
            # already-unit vector would perturb the last bit and break
            # bit-exact replay equivalence
            return v.normalized()
        return v

    return GazeSample(
        t=float(doc["t"]),
        gaze_dir=vec("gaze_dir", None, normalize=True),
        head_pos=vec("head_pos", user.head_pos),
        head_forward=vec("head_forward", user.head_forward, normalize=True),
        eye_pos=vec("eye_pos", user.eye_pos),
    )


def prediction_to_record(t: float, pred: Prediction) -> dict:
    """Serializable form of a Prediction, one line of the output stream."""
    return {
        "t": t,
        "winner": pred.winner,
        "stable": pred.stable,
        "votes": {str(k): v for k, v in sorted(pred.votes.items())},
        "scores": {str(k): v for k, v in sorted(pred.scores.items())},
        "candidates": list(pred.candidates),
        "predicted_gaze": {"phi": pred.predicted_gaze.phi, "theta": pred.predicted_gaze.theta},
    }


# --- stateful technique wrappers for trial replay ---------------------------

TECHNIQUE_NAMES = ("precise", "knn", "casualgaze", "specific")


class CasualGazeTechnique:
    name = "casualgaze"

    def __init__(
        self,
        coeffs: Optional[BehaviorCoefficients] = None,
        weights: Optional[PredictionWeights] = None,
        stability_n: int = 3,
    ) -> None:
        self.state = RecognizerState(
            coeffs=coeffs or default_coefficients(),
            weights=weights or PredictionWeights(),
            stability_n=stability_n,
        )

    def reset(self) -> None:
        self.state.reset()

    def step(self, sample: GazeSample, scene: Scene) -> Prediction:
        return recognize_frame(self.state, sample, scene)


class KnnTechnique:
    name = "knn"

    def reset(self) -> None:
        pass

    def step(self, sample: GazeSample, scene: Scene) -> Prediction:
        return knn_baseline(scene, sample)


class PreciseTechnique:
    name = "precise"

    def reset(self) -> None:
        pass

    def step(self, sample: GazeSample, scene: Scene) -> Prediction:
        return precise_baseline(scene, sample)


class SpecificTechnique:
    """Fitted per-device Gaussians on the shared pipeline: the accuracy ceiling."""

    name = "specific"

    def __init__(
        self,
        device_models: dict[int, BivariateGaussian],
        coeffs: Optional[BehaviorCoefficients] = None,
        weights: Optional[PredictionWeights] = None,
        stability_n: int = 3,
    ) -> None:
        self.device_models = device_models
        self.state = RecognizerState(
            coeffs=coeffs or default_coefficients(),
            weights=weights or PredictionWeights(),
            stability_n=stability_n,
        )

    def reset(self) -> None:
        self.state.reset()

    def step(self, sample: GazeSample, scene: Scene) -> Prediction:
        return specific_frame(self.state, sample, scene, self.device_models)
