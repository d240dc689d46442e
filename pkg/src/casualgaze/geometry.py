"""Angular coordinate conversions and normalization helpers.

Coordinate convention used everywhere in this package (scene files, wire
protocol, datasets):

* world space is right-handed, meters: +x right, +y up, +z forward
* ``phi``   horizontal angle (yaw), degrees, positive rightward, (-180, 180]
* ``theta`` vertical angle (pitch), degrees, positive upward, [-90, 90]
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonPositiveDistance, OutOfRange, ZeroDirection

REFERENCE_DISTANCE_M = 3.0


@dataclass(frozen=True, slots=True)
class Vec3:
    x: float
    y: float
    z: float

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def scaled(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n <= 0.0:
            raise ZeroDirection("cannot normalize a zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True, slots=True)
class AngularCoord:
    """Direction expressed as (phi, theta) in degrees."""

    phi: float
    theta: float


@dataclass(frozen=True, slots=True)
class AngularOffset:
    """Componentwise angular difference, degrees."""

    dphi: float
    dtheta: float


def wrap_degrees(angle: float) -> float:
    """Wrap an angle in degrees to (-180, 180]."""
    return ((angle - 180.0) % -360.0) + 180.0


def to_angular(origin: Vec3, target: Vec3) -> AngularCoord:
    """Angular coordinates of the direction from *origin* to *target*.

    Invariant under positive scaling of the direction vector.  Raises
    ``ZeroDirection`` when target coincides with origin.
    """
    dx = target.x - origin.x
    dy = target.y - origin.y
    dz = target.z - origin.z
    horiz = math.hypot(dx, dz)
    if horiz == 0.0 and dy == 0.0:
        raise ZeroDirection("target coincides with origin")
    phi = wrap_degrees(math.degrees(math.atan2(dx, dz)))
    theta = math.degrees(math.atan2(dy, horiz))
    return AngularCoord(phi=phi, theta=theta)


_ORIGIN = Vec3(0.0, 0.0, 0.0)


def direction_angles(direction: Vec3) -> AngularCoord:
    """Angular coordinates of a direction vector (any positive length)."""
    return to_angular(_ORIGIN, direction)


def to_direction(coord: AngularCoord) -> Vec3:
    """Unit vector pointing along an angular coordinate."""
    phi = math.radians(coord.phi)
    theta = math.radians(coord.theta)
    ct = math.cos(theta)
    return Vec3(ct * math.sin(phi), math.sin(theta), ct * math.cos(phi))


def angular_offset(gaze: AngularCoord, device: AngularCoord) -> AngularOffset:
    """Componentwise ``gaze - device`` with phi wrapped across the rear seam."""
    return AngularOffset(
        dphi=wrap_degrees(gaze.phi - device.phi),
        dtheta=gaze.theta - device.theta,
    )


def angle_between(v1: Vec3, v2: Vec3) -> float:
    """Angle in degrees between two nonzero vectors, in [0, 180]."""
    n1 = v1.norm()
    n2 = v2.norm()
    if n1 <= 0.0 or n2 <= 0.0:
        raise ZeroDirection("angle with a zero vector is undefined")
    c = v1.dot(v2) / (n1 * n2)
    c = max(-1.0, min(1.0, c))
    return math.degrees(math.acos(c))


def angular_distance(a: AngularCoord, b: AngularCoord) -> float:
    """Great-circle angle in degrees between two angular coordinates."""
    return angle_between(to_direction(a), to_direction(b))


def chord_at_reference(delta: float) -> float:
    """Chord length in meters subtended by *delta* degrees at the 3 m reference.

    Computed as ``2 * 3 * tan(delta / 2)``; valid for 0 <= delta < 180.
    """
    if not 0.0 <= delta < 180.0:
        raise OutOfRange(f"chord angle must be in [0, 180), got {delta}")
    return 2.0 * REFERENCE_DISTANCE_M * math.tan(math.radians(delta) / 2.0)


def normalize_size(size: float, eye_to_target: float, mode: str = "proportional") -> float:
    """Scale a physical size to the 3 m reference distance.

    ``proportional`` returns ``size * eye_to_target / 3`` (the shipped model
    formula).  ``inverse`` returns ``size * 3 / eye_to_target``, which shrinks
    with distance like the apparent size does; selectable via the
    ``size_norm_mode`` coefficient setting.
    """
    if eye_to_target <= 0.0:
        raise NonPositiveDistance(f"eye-to-target distance must be > 0, got {eye_to_target}")
    if mode == "proportional":
        return size * eye_to_target / REFERENCE_DISTANCE_M
    if mode == "inverse":
        return size * REFERENCE_DISTANCE_M / eye_to_target
    raise OutOfRange(f"unknown size normalization mode: {mode!r}")
