"""Interactive demo session server.

Bridges a browser (or scripted) client to the recognizer over a websocket:
the client streams gaze angles, the server answers each frame with a
prediction, scores each task on confirmation, and immediately issues the
next task.  One message in, at most one prediction out; per-session state
is confined to the connection's handler thread.

Wire protocol (JSON messages, all carrying ``type``):

* client -> server: ``hello{scene?, seed?}``, ``gaze{t, phi, theta,
  head_yaw?}``, ``confirm{t}``, ``set_technique{name}``, ``set_scene{name}``
* server -> client: ``scene{scene, config}``, ``task{target_id, name}``,
  ``prediction{winner, stable, votes, scores, candidates, predicted_gaze}``,
  ``result{correct, dt, ct, st, error_count}``, ``error{code, message}``

Angles are degrees, times are client-clock seconds.
"""

from __future__ import annotations

import itertools
import json
import logging
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from websockets.sync.server import Server, ServerConnection, serve

from .behavior import BehaviorCoefficients, default_coefficients
from .evaluation import score_trial
from .geometry import AngularCoord, to_direction, wrap_degrees, direction_angles
from .recognizer import GazeSample, Prediction, prediction_to_record
from .scene_io import Scene, scene_to_doc
from .scenes import BUILTIN_NAMES, builtin_scene
from .simulator import make_technique

log = logging.getLogger(__name__)

SESSION_TECHNIQUES = ("precise", "knn", "casualgaze")


@dataclass
class SessionState:
    session_id: int
    scene: Scene
    coeffs: BehaviorCoefficients
    technique_name: str = "casualgaze"
    technique: object = None
    rng: np.random.Generator = None
    task_target: Optional[int] = None
    task_start_t: Optional[float] = None
    samples_t: list = field(default_factory=list)
    predictions: list = field(default_factory=list)
    last_t: float = float("-inf")
    dropped_frames: int = 0
    results: list = field(default_factory=list)

    def reset_technique(self, name: Optional[str] = None) -> None:
        if name is not None:
            self.technique_name = name
        self.technique = make_technique(self.technique_name, coeffs=self.coeffs)
        self.last_t = float("-inf")

    def begin_task(self) -> dict:
        devices = sorted(self.scene.devices, key=lambda d: d.id)
        target = devices[int(self.rng.integers(len(devices)))]
        self.task_target = target.id
        self.task_start_t = None
        self.samples_t = []
        self.predictions = []
        return {"type": "task", "target_id": target.id, "name": target.name}


class DemoService:
    """Shared immutable configuration plus per-connection session handling."""

    def __init__(
        self,
        scene: Scene,
        coeffs: Optional[BehaviorCoefficients] = None,
        seed: int = 0,
        metrics_log: Optional[str] = None,
    ) -> None:
        self.scene = scene
        self.coeffs = coeffs or default_coefficients()
        self.seed = seed
        self.metrics_log = metrics_log
        self._session_counter = itertools.count(1)
        self._log_lock = threading.Lock()

    # -- message helpers -----------------------------------------------------

    @staticmethod
    def _send(conn: ServerConnection, doc: dict) -> None:
        conn.send(json.dumps(doc))

    @staticmethod
    def _error(conn: ServerConnection, code: str, message: str) -> None:
        conn.send(json.dumps({"type": "error", "code": code, "message": message}))

    def _scene_message(self, session: SessionState) -> dict:
        return {
            "type": "scene",
            "scene": scene_to_doc(session.scene),
            "config": {
                "technique": session.technique_name,
                "techniques": list(SESSION_TECHNIQUES),
                "gate_head": session.coeffs.gate_head,
                "gate_gaze": session.coeffs.gate_gaze,
                "seed": self.seed,
                "session_id": session.session_id,
            },
        }

    # -- handlers ------------------------------------------------------------

    def handle_connection(self, conn: ServerConnection) -> None:
        session_id = next(self._session_counter)
        try:
            raw = conn.recv()
        except Exception:
            return
        try:
            hello = json.loads(raw)
            if hello.get("type") != "hello":
                raise ValueError("first message must be hello")
        except (ValueError, json.JSONDecodeError) as exc:
            self._error(conn, "bad_hello", str(exc))
            conn.close()
            return

        scene = self.scene
        requested = hello.get("scene")
        if requested and requested in BUILTIN_NAMES:
            scene = builtin_scene(requested)
        seed = hello.get("seed")
        seed = self.seed if seed is None else int(seed)
        session = SessionState(
            session_id=session_id,
            scene=scene,
            coeffs=self.coeffs,
            rng=np.random.default_rng([seed, session_id]),
        )
        session.reset_technique()
        self._send(conn, self._scene_message(session))
        self._send(conn, session.begin_task())

        for raw in conn:
            try:
                msg = json.loads(raw)
                msg_type = msg.get("type")
            except (json.JSONDecodeError, AttributeError):
                self._error(conn, "bad_message", "not a JSON object")
                continue
            try:
                if msg_type == "gaze":
                    self.handle_gaze(conn, session, msg)
                elif msg_type == "confirm":
                    self.handle_confirm(conn, session, msg)
                elif msg_type == "set_technique":
                    self.handle_set_technique(conn, session, msg)
                elif msg_type == "set_scene":
                    self.handle_set_scene(conn, session, msg)
                else:
                    self._error(conn, "unknown_type", f"unknown message type {msg_type!r}")
            except Exception as exc:  # keep the session alive on handler bugs
                log.exception("session %d: error handling %s", session_id, msg_type)
                self._error(conn, "internal", f"{type(exc).__name__}: {exc}")

    def handle_gaze(self, conn: ServerConnection, session: SessionState, msg: dict) -> None:
        t = float(msg["t"])
        if t <= session.last_t:
            session.dropped_frames += 1
            log.warning(
                "session %d: dropped out-of-order frame t=%s (%d dropped)",
                session.session_id, t, session.dropped_frames,
            )
            return
        session.last_t = t
        user = session.scene.user
        head_forward = user.head_forward
        if "head_yaw" in msg and msg["head_yaw"] is not None:
            base = direction_angles(user.head_forward)
            head_forward = to_direction(
                AngularCoord(wrap_degrees(base.phi + float(msg["head_yaw"])), base.theta)
            )
        sample = GazeSample(
            t=t,
            gaze_dir=to_direction(
                AngularCoord(phi=float(msg["phi"]), theta=float(msg["theta"]))
            ),
            head_pos=user.head_pos,
            head_forward=head_forward,
            eye_pos=user.eye_pos,
        )
        prediction: Prediction = session.technique.step(sample, session.scene)
        if session.task_start_t is None:
            session.task_start_t = t
        session.samples_t.append(t)
        session.predictions.append(prediction)
        record = prediction_to_record(t, prediction)
        record["type"] = "prediction"
        self._send(conn, record)

    def handle_confirm(self, conn: ServerConnection, session: SessionState, msg: dict) -> None:
        if session.task_target is None:
            self._error(conn, "no_task", "confirm received with no active task")
            return
        confirm_t = float(msg["t"])
        outcome = score_trial(
            samples_t=session.samples_t,
            predictions=session.predictions,
            target_id=session.task_target,
            confirm_t=confirm_t,
            technique=session.technique_name,
            start_t=session.task_start_t if session.task_start_t is not None else confirm_t,
        )
        result = {
            "type": "result",
            "correct": outcome.correct,
            "dt": outcome.dt,
            "ct": outcome.ct,
            "st": outcome.st,
            "error_count": outcome.error_count,
            "target_id": session.task_target,
            "final_winner": outcome.final_winner,
        }
        session.results.append(result)
        if self.metrics_log:
            with self._log_lock, open(self.metrics_log, "a") as fh:
                fh.write(json.dumps({"session": session.session_id, **result}) + "\n")
        self._send(conn, result)
        self._send(conn, session.begin_task())

    def handle_set_technique(
        self, conn: ServerConnection, session: SessionState, msg: dict
    ) -> None:
        name = msg.get("name")
        if name not in SESSION_TECHNIQUES:
            self._error(
                conn, "unknown_technique",
                f"{name!r} is not one of {', '.join(SESSION_TECHNIQUES)}",
            )
            return
        session.reset_technique(name)

    def handle_set_scene(self, conn: ServerConnection, session: SessionState, msg: dict) -> None:
        name = msg.get("name")
        if name not in BUILTIN_NAMES:
            self._error(
                conn, "unknown_scene", f"{name!r} is not one of {', '.join(BUILTIN_NAMES)}"
            )
            return
        session.scene = builtin_scene(name)
        session.reset_technique()
        self._send(conn, self._scene_message(session))
        self._send(conn, session.begin_task())


def create_server(
    scene: Scene,
    coeffs: Optional[BehaviorCoefficients] = None,
    host: str = "127.0.0.1",
    port: int = 8765,
    seed: int = 0,
    metrics_log: Optional[str] = None,
) -> Server:
    service = DemoService(scene, coeffs, seed=seed, metrics_log=metrics_log)
    return serve(service.handle_connection, host, port)


def run_server(
    scene: Scene,
    coeffs: Optional[BehaviorCoefficients] = None,
    host: str = "127.0.0.1",
    port: int = 8765,
    seed: int = 0,
    metrics_log: Optional[str] = None,
) -> None:
    with create_server(scene, coeffs, host, port, seed, metrics_log) as server:
        actual_port = server.socket.getsockname()[1]
        print(f"casualgaze demo server on ws://{host}:{actual_port} "
              f"(scene {scene.name}, {len(scene.devices)} devices)", flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
