"""Scene, coefficient, and dataset file formats with validation.

All files are JSON or delimited text and carry a ``schema`` tag:

* scene file        ``casualgaze-scene/1``
* coefficient file  ``casualgaze-coeffs/1``
* endpoint dataset  CSV, header ``trial_id,target_id,gaze_phi,gaze_theta,timestamp_ms``

Positions are meters in the package-wide axis convention (+x right, +y up,
+z forward); angles are degrees.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .behavior import (
    BehaviorCoefficients,
    BivariateGaussian,
    EndpointSample,
    MeanShift,
    MeanShiftLine,
    StdPlane,
    StdPlanes,
)
from .errors import ParseError, SchemaVersionMismatch, ValidationError
from .geometry import AngularCoord, AngularOffset, Vec3, angle_between

log = logging.getLogger(__name__)

SCENE_SCHEMA = "casualgaze-scene/1"
COEFFS_SCHEMA = "casualgaze-coeffs/1"

ENDPOINT_FIELDS = ["trial_id", "target_id", "gaze_phi", "gaze_theta", "timestamp_ms"]

# Devices whose centers sit closer than this (degrees, from the eye) are
# separated mostly by the clamped model std and cannot be told apart.
PROXIMITY_WARN_DEG = 1.0


@dataclass(frozen=True, slots=True)
class Device:
    """A selectable device, abstracted as a bounding sphere."""

    id: int
    name: str
    position: Vec3
    radius: float


@dataclass(frozen=True, slots=True)
class UserPose:
    eye_pos: Vec3
    head_pos: Vec3
    head_forward: Vec3


@dataclass(frozen=True, slots=True)
class Scene:
    name: str
    devices: tuple[Device, ...]
    user: UserPose
    approximation: bool = False

    def device_by_id(self, device_id: int) -> Device:
        for d in self.devices:
            if d.id == device_id:
                return d
        raise KeyError(f"no device with id {device_id}")


def _vec3(value: object, what: str) -> Vec3:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ValidationError(f"{what} must be a 3-element array, got {value!r}")
    try:
        return Vec3(float(value[0]), float(value[1]), float(value[2]))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{what} has non-numeric components: {value!r}") from exc


def _build_scene(doc: dict, fallback_name: str) -> Scene:
    if doc.get("schema") != SCENE_SCHEMA:
        raise SchemaVersionMismatch(
            f"expected schema {SCENE_SCHEMA!r}, got {doc.get('schema')!r}"
        )
    raw_devices = doc.get("devices")
    if not raw_devices:
        raise ValidationError("scene must contain at least one device")

    devices = []
    seen_ids: set[int] = set()
    for entry in raw_devices:
        dev_id = int(entry["id"])
        if dev_id in seen_ids:
            raise ValidationError(f"duplicate device id {dev_id}")
        seen_ids.add(dev_id)
        radius = float(entry["radius"])
        if radius <= 0.0:
            raise ValidationError(f"device {dev_id} has nonpositive radius {radius}")
        devices.append(
            Device(
                id=dev_id,
                name=str(entry.get("name", f"device-{dev_id}")),
                position=_vec3(entry["position"], f"device {dev_id} position"),
                radius=radius,
            )
        )

    user_doc = doc.get("user", {})
    forward = _vec3(user_doc.get("head_forward", [0.0, 0.0, 1.0]), "head_forward")
    norm = forward.norm()
    if norm == 0.0:
        raise ValidationError("head_forward must be a nonzero vector")
    if abs(norm - 1.0) > 1e-3:
        log.warning("head_forward has length %.4f; renormalizing to unit", norm)
    forward = forward.normalized()

    return Scene(
        name=str(doc.get("name", fallback_name)),
        devices=tuple(devices),
        user=UserPose(
            eye_pos=_vec3(user_doc.get("eye_pos", [0.0, 1.5, 0.0]), "eye_pos"),
            head_pos=_vec3(user_doc.get("head_pos", [0.0, 1.6, 0.0]), "head_pos"),
            head_forward=forward,
        ),
        approximation=bool(doc.get("approximation", False)),
    )


def load_scene(path: str | Path) -> Scene:
    """Load and validate a scene file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    return _build_scene(doc, fallback_name=path.stem)


def scene_to_doc(scene: Scene) -> dict:
    return {
        "schema": SCENE_SCHEMA,
        "name": scene.name,
        "approximation": scene.approximation,
        "user": {
            "eye_pos": list(scene.user.eye_pos.as_tuple()),
            "head_pos": list(scene.user.head_pos.as_tuple()),
            "head_forward": list(scene.user.head_forward.as_tuple()),
        },
        "devices": [
            {
                "id": d.id,
                "name": d.name,
                "position": list(d.position.as_tuple()),
                "radius": d.radius,
            }
            for d in scene.devices
        ],
    }


def save_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scene_to_doc(scene), indent=2) + "\n")


def validate_scene(scene: Scene) -> list[str]:
    """Non-fatal quality warnings: overlapping spheres, near-coincident centers."""
    warnings: list[str] = []
    eye = scene.user.eye_pos
    for i, a in enumerate(scene.devices):
        for b in scene.devices[i + 1 :]:
            pair = f"devices {a.id} ({a.name}) and {b.id} ({b.name})"
            dist = (a.position - b.position).norm()
            if dist < a.radius + b.radius:
                warnings.append(f"{pair}: bounding spheres overlap")
            try:
                sep = angle_between(a.position - eye, b.position - eye)
            except Exception:
                sep = 0.0
            if sep < PROXIMITY_WARN_DEG:
                warnings.append(
                    f"{pair}: angular separation {sep:.2f} deg is below the "
                    f"model's usable resolution"
                )
    return warnings


# --- coefficient files -----------------------------------------------------


@dataclass(frozen=True, slots=True)
class CoefficientsFile:
    """Contents of a coefficient file: global model plus optional per-device fits."""

    coeffs: BehaviorCoefficients
    device_models: dict[int, BivariateGaussian] = field(default_factory=dict)


def coefficients_to_doc(
    coeffs: BehaviorCoefficients,
    device_models: Optional[dict[int, BivariateGaussian]] = None,
) -> dict:
    doc = {
        "schema": COEFFS_SCHEMA,
        "mean_shift": {
            "phi": {"a": coeffs.mean_shift.phi.a, "b": coeffs.mean_shift.phi.b},
            "theta": {"a": coeffs.mean_shift.theta.a, "b": coeffs.mean_shift.theta.b},
        },
        "std_plane": {
            "phi": {
                "a": coeffs.std_plane.phi.a,
                "b": coeffs.std_plane.phi.b,
                "c": coeffs.std_plane.phi.c,
            },
            "theta": {
                "a": coeffs.std_plane.theta.a,
                "b": coeffs.std_plane.theta.b,
                "c": coeffs.std_plane.theta.c,
            },
        },
        "isolated_std": coeffs.isolated_std,
        "gate_head": coeffs.gate_head,
        "gate_gaze": coeffs.gate_gaze,
        "size_norm_mode": coeffs.size_norm_mode,
    }
    if device_models:
        doc["device_models"] = {
            str(dev_id): {
                "mean_phi": m.mean.dphi,
                "mean_theta": m.mean.dtheta,
                "std_phi": m.std_phi,
                "std_theta": m.std_theta,
            }
            for dev_id, m in sorted(device_models.items())
        }
    return doc


def save_coefficients(
    path: str | Path,
    coeffs: BehaviorCoefficients,
    device_models: Optional[dict[int, BivariateGaussian]] = None,
) -> None:
    Path(path).write_text(json.dumps(coefficients_to_doc(coeffs, device_models), indent=2) + "\n")


def load_coefficients(path: str | Path) -> CoefficientsFile:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if doc.get("schema") != COEFFS_SCHEMA:
        raise SchemaVersionMismatch(
            f"expected schema {COEFFS_SCHEMA!r}, got {doc.get('schema')!r}"
        )
    try:
        ms = doc["mean_shift"]
        sp = doc["std_plane"]
        coeffs = BehaviorCoefficients(
            mean_shift=MeanShift(
                phi=MeanShiftLine(a=float(ms["phi"]["a"]), b=float(ms["phi"]["b"])),
                theta=MeanShiftLine(a=float(ms["theta"]["a"]), b=float(ms["theta"]["b"])),
            ),
            std_plane=StdPlanes(
                phi=StdPlane(
                    a=float(sp["phi"]["a"]), b=float(sp["phi"]["b"]), c=float(sp["phi"]["c"])
                ),
                theta=StdPlane(
                    a=float(sp["theta"]["a"]),
                    b=float(sp["theta"]["b"]),
                    c=float(sp["theta"]["c"]),
                ),
            ),
            isolated_std=float(doc["isolated_std"]),
            gate_head=float(doc.get("gate_head", 96.0)),
            gate_gaze=float(doc.get("gate_gaze", 17.18)),
            size_norm_mode=str(doc.get("size_norm_mode", "proportional")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed coefficient document: {exc}") from exc

    device_models: dict[int, BivariateGaussian] = {}
    for key, entry in doc.get("device_models", {}).items():
        device_models[int(key)] = BivariateGaussian(
            mean=AngularOffset(
                dphi=float(entry["mean_phi"]), dtheta=float(entry["mean_theta"])
            ),
            std_theta=float(entry["std_theta"]),
            std_phi=float(entry["std_phi"]),
        )
    return CoefficientsFile(coeffs=coeffs, device_models=device_models)


# --- endpoint datasets ------------------------------------------------------


def save_endpoints(path: str | Path, samples: Iterable[EndpointSample]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ENDPOINT_FIELDS)
        for s in samples:
            writer.writerow(
                [s.trial_id, s.target_id, f"{s.gaze.phi:.6f}", f"{s.gaze.theta:.6f}", s.timestamp_ms]
            )


def load_endpoints(path: str | Path) -> list[EndpointSample]:
    path = Path(path)
    samples: list[EndpointSample] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ENDPOINT_FIELDS:
            raise ParseError(f"{path}: expected header {ENDPOINT_FIELDS}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                samples.append(
                    EndpointSample(
                        trial_id=int(row[0]),
                        target_id=int(row[1]),
                        gaze=AngularCoord(phi=float(row[2]), theta=float(row[3])),
                        timestamp_ms=float(row[4]),
                    )
                )
            except (IndexError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: bad endpoint row {row!r}") from exc
    return samples
