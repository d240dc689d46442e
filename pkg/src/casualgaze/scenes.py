"""Built-in demo scenes.

Layouts are hand-placed approximations of plausible rooms (an 18-device
smart home plus three living/office variants); coordinates are not measured
from any real environment, and every builtin is flagged ``approximation``.
Rear-mounted devices (shelf speaker, air conditioner, back lights) sit just
inside the recognizer's 96-degree head field so that every target remains
selectable without head-pose animation.
"""

from __future__ import annotations

from .geometry import Vec3
from .scene_io import Device, Scene, UserPose

_USER = UserPose(
    eye_pos=Vec3(0.0, 1.5, 0.0),
    head_pos=Vec3(0.0, 1.6, 0.0),
    head_forward=Vec3(0.0, 0.0, 1.0),
)


def _scene(name: str, rows: list[tuple[int, str, float, float, float, float]]) -> Scene:
    devices = tuple(
        Device(id=i, name=n, position=Vec3(x, y, z), radius=d / 2.0)
        for (i, n, x, y, z, d) in rows
    )
    return Scene(name=name, devices=devices, user=_USER, approximation=True)


# 18 devices: speaker x3, refrigerator, air conditioner, sweeping robot x2,
# laptop x2, electronic clock, electric light x6, washing machine, TV.
# Placement keeps neighborhoods pairwise: each device's context is one
# nearby partner (often size-disparate), with third devices well separated.
# (id, name, x, y, z, diameter)
_STUDY2_ROOM = [
    (1, "clock", -0.5, 2.6, 4.2, 0.30),
    (2, "tv", -1.0, 1.3, 3.3, 1.00),
    (3, "speaker_left", -2.65, 1.1, 3.0, 0.25),
    (4, "speaker_right", 0.1, 1.05, 3.4, 0.25),
    (5, "washing_machine", 1.9, 0.6, 3.2, 0.80),
    (6, "refrigerator", -3.2, 1.0, 1.8, 0.95),
    (7, "robot_front", -1.5, 0.15, 1.9, 0.35),
    (8, "robot_side", 1.7, 0.15, 1.7, 0.35),
    (9, "laptop_left", -3.1, 0.9, 0.45, 0.40),
    (10, "laptop_right", 2.6, 0.9, 1.1, 0.40),
    (11, "light_front_left", -1.6, 2.9, 3.3, 0.30),
    (12, "light_front_right", 1.6, 2.9, 3.4, 0.30),
    (13, "light_mid_left", -1.7, 2.9, 0.9, 0.30),
    (14, "light_mid_right", 1.7, 2.9, 0.9, 0.30),
    (15, "light_back_left", -1.5, 2.9, 0.5, 0.30),
    (16, "light_back_right", 1.5, 2.9, 0.5, 0.30),
    (17, "speaker_shelf", 2.7, 1.9, 0.75, 0.25),
    (18, "air_conditioner", -2.9, 2.3, 0.75, 1.00),
]

# Living room, 12 devices.
_LIVING12 = [
    (1, "tv", 0.0, 1.2, 3.4, 1.00),
    (2, "soundbar", 0.0, 0.7, 3.4, 0.60),
    (3, "speaker_left", -1.2, 1.0, 3.3, 0.25),
    (4, "speaker_right", 1.2, 1.0, 3.3, 0.25),
    (5, "lamp_corner", -2.6, 1.4, 2.4, 0.40),
    (6, "robot_vacuum", 1.5, 0.15, 1.9, 0.35),
    (7, "air_purifier", 2.4, 0.5, 2.6, 0.50),
    (8, "clock", -1.1, 2.2, 3.4, 0.30),
    (9, "light_ceiling_front", 0.3, 2.8, 2.4, 0.30),
    (10, "light_ceiling_back", -0.2, 2.8, 0.4, 0.30),
    (11, "thermostat", 2.8, 1.6, 0.9, 0.25),
    (12, "speaker_shelf", -2.8, 1.9, 0.6, 0.25),
]

# Office, 20 devices: desks with monitors/laptops, dense placements.
_OFFICE20 = [
    (1, "monitor_center", 0.0, 1.3, 2.6, 0.70),
    (2, "monitor_left", -0.8, 1.3, 2.6, 0.70),
    (3, "monitor_right", 0.8, 1.3, 2.6, 0.70),
    (4, "laptop_desk", 1.6, 1.0, 2.4, 0.40),
    (5, "desk_lamp", -1.6, 1.4, 2.5, 0.30),
    (6, "speaker_desk", -0.35, 1.0, 2.7, 0.20),
    (7, "webcam", 0.0, 1.75, 2.6, 0.15),
    (8, "printer", 2.5, 0.9, 1.9, 0.60),
    (9, "clock_wall", -0.1, 2.3, 3.1, 0.30),
    (10, "light_panel_front", 0.9, 2.9, 2.3, 0.45),
    (11, "light_panel_mid", -0.9, 2.9, 1.0, 0.45),
    (12, "air_conditioner", -2.4, 2.4, 2.2, 0.90),
    (13, "whiteboard_display", -2.7, 1.5, 1.3, 1.00),
    (14, "shredder", 2.7, 0.5, 0.9, 0.45),
    (15, "fan_floor", 2.2, 0.8, 0.0, 0.45),
    (16, "router", -2.6, 2.0, 0.1, 0.25),
    (17, "coffee_machine", 2.75, 1.1, -0.1, 0.35),
    (18, "light_panel_back", 0.8, 2.9, -0.15, 0.45),
    (19, "speaker_shelf", -1.9, 2.2, -0.3, 0.25),
    (20, "robot_vacuum", -1.0, 0.15, 0.8, 0.35),
]

# Reduced office, 10 devices (computers and some lights removed).
_OFFICE10 = [
    (1, "monitor_center", 0.0, 1.3, 2.6, 0.70),
    (2, "laptop_desk", 1.6, 1.0, 2.4, 0.40),
    (3, "desk_lamp", -1.6, 1.4, 2.5, 0.30),
    (4, "printer", 2.5, 0.9, 1.9, 0.60),
    (5, "clock_wall", -0.1, 2.3, 3.1, 0.30),
    (6, "air_conditioner", -2.4, 2.4, 2.2, 0.90),
    (7, "whiteboard_display", -2.7, 1.5, 1.3, 1.00),
    (8, "fan_floor", 2.2, 0.8, 0.0, 0.45),
    (9, "coffee_machine", 2.75, 1.1, -0.1, 0.35),
    (10, "robot_vacuum", -1.0, 0.15, 0.8, 0.35),
]

_BUILTINS = {
    "study2_room": _STUDY2_ROOM,
    "living12": _LIVING12,
    "office20": _OFFICE20,
    "office10": _OFFICE10,
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_scene(name: str) -> Scene:
    """Construct a builtin scene by name; raises KeyError for unknown names."""
    try:
        rows = _BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown builtin scene {name!r}; available: {', '.join(_BUILTINS)}")
    return _scene(name, rows)
