"""Selection-efficiency metrics and accuracy aggregation for replayed trials.

Per-trial metrics:

* DT, intent detect time: task start until the technique's *stable* winner
  first equals the target and keeps winning through confirmation.
* CT, early capture time: from that detection until the user confirms.
* ST = DT + CT, full selection time.
* E-Num: how many times the stable winner switched to a wrong device.

Trials where the target is never detected have undefined DT/CT and are
excluded from those means, but still count toward accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import EmptyInput, LengthMismatch
from .geometry import angle_between
from .recognizer import Prediction
from .scene_io import Device, Scene

CASE_LABELS = ("N", "S", "L", "C", "D")

SMALL_DIAMETER_DEG = 7.6  # a 0.4 m device at the 3 m reference distance
NEIGHBOR_RANGE_FACTOR = 1.5  # of gate_gaze
SIZE_RATIO_BAND = (0.5, 2.0)


@dataclass(frozen=True, slots=True)
class TrialOutcome:
    trial_id: int
    target_id: int
    technique: str
    first_detect_t: Optional[float]
    confirm_t: float
    final_winner: Optional[int]
    error_count: int
    start_t: float = 0.0

    @property
    def detected(self) -> bool:
        return self.first_detect_t is not None

    @property
    def correct(self) -> bool:
        return self.final_winner == self.target_id

    @property
    def dt(self) -> Optional[float]:
        return None if self.first_detect_t is None else self.first_detect_t - self.start_t

    @property
    def ct(self) -> Optional[float]:
        return None if self.first_detect_t is None else self.confirm_t - self.first_detect_t

    @property
    def st(self) -> Optional[float]:
        return None if self.first_detect_t is None else self.confirm_t - self.start_t


def score_trial(
    samples_t: Sequence[float],
    predictions: Sequence[Prediction],
    target_id: int,
    confirm_t: float,
    trial_id: int = 0,
    technique: str = "",
    start_t: float = 0.0,
) -> TrialOutcome:
    """Score one replayed trial from its aligned prediction stream."""
    if len(samples_t) != len(predictions):
        raise LengthMismatch(
            f"{len(samples_t)} samples vs {len(predictions)} predictions"
        )

    # Detection requires the winner to hold through confirmation: find the
    # suffix of frames whose winner is the target, then the first stable
    # frame inside it.
    first_detect_t: Optional[float] = None
    suffix_start = len(predictions)
    while suffix_start > 0 and predictions[suffix_start - 1].winner == target_id:
        suffix_start -= 1
    for i in range(suffix_start, len(predictions)):
        if predictions[i].stable:
            first_detect_t = samples_t[i]
            break

    error_count = 0
    last_stable: Optional[int] = None
    for pred in predictions:
        if pred.stable and pred.winner != last_stable:
            if pred.winner != target_id:
                error_count += 1
            last_stable = pred.winner

    return TrialOutcome(
        trial_id=trial_id,
        target_id=target_id,
        technique=technique,
        first_detect_t=first_detect_t,
        confirm_t=confirm_t,
        final_winner=predictions[-1].winner if predictions else None,
        error_count=error_count,
        start_t=start_t,
    )


def classify_device_case(
    device: Device,
    scene: Scene,
    gate_gaze: float = 17.18,
    small_diameter_deg: float = SMALL_DIAMETER_DEG,
) -> str:
    """Assign one of the N/S/L/C/D layout cases to a device.

    Priority L > D > C > S > N: behind-or-above placements trump neighbor
    effects, which trump small apparent size.
    """
    eye = scene.user.eye_pos
    head_angle = angle_between(scene.user.head_forward, device.position - scene.user.head_pos)
    if head_angle > 90.0:
        return "L"

    nearest: Optional[Device] = None
    nearest_sep = math.inf
    for other in scene.devices:
        if other.id == device.id:
            continue
        sep = angle_between(device.position - eye, other.position - eye)
        if sep < nearest_sep:
            nearest_sep = sep
            nearest = other
    if nearest is not None and nearest_sep <= NEIGHBOR_RANGE_FACTOR * gate_gaze:
        ratio = nearest.radius / device.radius
        lo, hi = SIZE_RATIO_BAND
        return "C" if lo <= ratio <= hi else "D"

    dist = (device.position - eye).norm()
    angular_diameter = 2.0 * math.degrees(math.asin(min(1.0, device.radius / dist)))
    if angular_diameter < small_diameter_deg:
        return "S"
    return "N"


@dataclass(frozen=True, slots=True)
class Aggregate:
    """Means over a group of trial outcomes."""

    n: int
    accuracy: float
    detected_n: int
    mean_dt: Optional[float]
    mean_ct: Optional[float]
    mean_st: Optional[float]
    mean_enum: float

    def to_doc(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "detected_n": self.detected_n,
            "mean_dt": self.mean_dt,
            "mean_ct": self.mean_ct,
            "mean_st": self.mean_st,
            "mean_enum": self.mean_enum,
        }


def _aggregate_group(outcomes: Sequence[TrialOutcome]) -> Aggregate:
    n = len(outcomes)
    detected = [o for o in outcomes if o.detected]
    mean = lambda xs: (sum(xs) / len(xs)) if xs else None
    return Aggregate(
        n=n,
        accuracy=sum(1 for o in outcomes if o.correct) / n,
        detected_n=len(detected),
        mean_dt=mean([o.dt for o in detected]),
        mean_ct=mean([o.ct for o in detected]),
        mean_st=mean([o.st for o in detected]),
        mean_enum=sum(o.error_count for o in outcomes) / n,
    )


@dataclass(frozen=True, slots=True)
class ExperimentReport:
    """Per-technique and per-case aggregates plus the exact run configuration."""

    techniques: dict[str, Aggregate]
    cases: dict[str, dict[str, Aggregate]]
    config: dict
    seed: Optional[int]

    def to_doc(self) -> dict:
        return {
            "seed": self.seed,
            "config": self.config,
            "techniques": {t: a.to_doc() for t, a in sorted(self.techniques.items())},
            "cases": {
                t: {c: a.to_doc() for c, a in sorted(by_case.items())}
                for t, by_case in sorted(self.cases.items())
            },
        }

    def table_rows(self) -> list[dict]:
        """One row per (technique, case) plus an `all` row per technique."""
        rows = []
        for tech in sorted(self.techniques):
            agg = self.techniques[tech]
            rows.append({"technique": tech, "case": "all", **agg.to_doc()})
            for case in CASE_LABELS:
                case_agg = self.cases.get(tech, {}).get(case)
                if case_agg is not None:
                    rows.append({"technique": tech, "case": case, **case_agg.to_doc()})
        return rows


def aggregate(
    outcomes: Sequence[TrialOutcome],
    device_cases: Optional[dict[int, str]] = None,
    config: Optional[dict] = None,
    seed: Optional[int] = None,
) -> ExperimentReport:
    """Roll trial outcomes up into an experiment report."""
    if not outcomes:
        raise EmptyInput("no trial outcomes to aggregate")
    by_technique: dict[str, list[TrialOutcome]] = {}
    for o in outcomes:
        by_technique.setdefault(o.technique, []).append(o)

    techniques = {t: _aggregate_group(group) for t, group in by_technique.items()}
    cases: dict[str, dict[str, Aggregate]] = {}
    if device_cases:
        for t, group in by_technique.items():
            by_case: dict[str, list[TrialOutcome]] = {}
            for o in group:
                by_case.setdefault(device_cases.get(o.target_id, "N"), []).append(o)
            cases[t] = {c: _aggregate_group(g) for c, g in by_case.items()}

    return ExperimentReport(
        techniques=techniques, cases=cases, config=dict(config or {}), seed=seed
    )
