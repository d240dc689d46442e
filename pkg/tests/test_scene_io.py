import json
import logging

import pytest

from casualgaze.behavior import (
    BehaviorCoefficients,
    BivariateGaussian,
    EndpointSample,
    default_coefficients,
)
from casualgaze.errors import ParseError, SchemaVersionMismatch, ValidationError
from casualgaze.geometry import AngularCoord, AngularOffset, Vec3
from casualgaze.scene_io import (
    Device,
    Scene,
    UserPose,
    load_coefficients,
    load_endpoints,
    load_scene,
    save_coefficients,
    save_endpoints,
    save_scene,
    scene_to_doc,
    validate_scene,
)
from casualgaze.scenes import BUILTIN_NAMES, builtin_scene


def scene_doc(**overrides):
    doc = {
        "schema": "casualgaze-scene/1",
        "name": "t",
        "user": {
            "eye_pos": [0, 1.5, 0],
            "head_pos": [0, 1.6, 0],
            "head_forward": [0, 0, 1],
        },
        "devices": [
            {"id": 1, "name": "a", "position": [0, 1, 3], "radius": 0.2},
            {"id": 2, "name": "b", "position": [1, 1, 3], "radius": 0.3},
        ],
    }
    doc.update(overrides)
    return doc


class TestLoadScene:
    def test_builtin_study2_room_has_18_devices(self):
        scene = builtin_scene("study2_room")
        assert len(scene.devices) == 18

    def test_builtin_device_counts(self):
        for name, count in (("living12", 12), ("office20", 20), ("office10", 10)):
            assert len(builtin_scene(name).devices) == count

    def test_round_trip_all_builtins(self, tmp_path):
        for name in BUILTIN_NAMES:
            scene = builtin_scene(name)
            path = tmp_path / f"{name}.json"
            save_scene(scene, path)
            loaded = load_scene(path)
            assert scene_to_doc(loaded) == scene_to_doc(scene)

    def test_duplicate_id(self, tmp_path):
        doc = scene_doc()
        doc["devices"][1]["id"] = 1
        p = tmp_path / "dup.json"
        p.write_text(json.dumps(doc))
        with pytest.raises(ValidationError):
            load_scene(p)

    def test_nonpositive_radius(self, tmp_path):
        doc = scene_doc()
        doc["devices"][0]["radius"] = 0.0
        p = tmp_path / "r.json"
        p.write_text(json.dumps(doc))
        with pytest.raises(ValidationError):
            load_scene(p)

    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{nope")
        with pytest.raises(ParseError):
            load_scene(p)

    def test_wrong_schema(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text(json.dumps(scene_doc(schema="casualgaze-scene/999")))
        with pytest.raises(SchemaVersionMismatch):
            load_scene(p)

    def test_empty_devices(self, tmp_path):
        p = tmp_path / "e.json"
        p.write_text(json.dumps(scene_doc(devices=[])))
        with pytest.raises(ValidationError):
            load_scene(p)

    def test_forward_renormalized_with_warning(self, tmp_path, caplog):
        doc = scene_doc()
        doc["user"]["head_forward"] = [0, 0, 2]
        p = tmp_path / "f.json"
        p.write_text(json.dumps(doc))
        with caplog.at_level(logging.WARNING):
            scene = load_scene(p)
        assert scene.user.head_forward.z == pytest.approx(1.0)
        assert any("renormalizing" in r.message for r in caplog.records)

    def test_zero_forward_rejected(self, tmp_path):
        doc = scene_doc()
        doc["user"]["head_forward"] = [0, 0, 0]
        p = tmp_path / "z.json"
        p.write_text(json.dumps(doc))
        with pytest.raises(ValidationError):
            load_scene(p)


class TestValidateScene:
    user = UserPose(eye_pos=Vec3(0, 0, 0), head_pos=Vec3(0, 0, 0), head_forward=Vec3(0, 0, 1))

    def test_proximity_warning(self):
        scene = Scene(
            name="close",
            devices=(
                Device(1, "a", Vec3(0.0, 0.0, 3.0), 0.001),
                Device(2, "b", Vec3(0.005, 0.0, 3.0), 0.001),
            ),
            user=self.user,
        )
        warnings = validate_scene(scene)
        assert any("angular separation" in w for w in warnings)

    def test_clean_scene_no_warnings(self):
        assert validate_scene(builtin_scene("study2_room")) == []

    def test_concentric_overlap(self):
        scene = Scene(
            name="o",
            devices=(
                Device(1, "a", Vec3(0, 0, 3), 0.5),
                Device(2, "b", Vec3(0, 0, 3.1), 0.5),
            ),
            user=self.user,
        )
        warnings = validate_scene(scene)
        assert any("overlap" in w for w in warnings)


class TestCoefficientsIO:
    def test_round_trip(self, tmp_path):
        coeffs = default_coefficients()
        models = {
            3: BivariateGaussian(AngularOffset(0.5, -0.25), std_theta=2.0, std_phi=3.0),
            1: BivariateGaussian(AngularOffset(0.0, 0.0), std_theta=1.0, std_phi=1.0),
        }
        p = tmp_path / "c.json"
        save_coefficients(p, coeffs, models)
        loaded = load_coefficients(p)
        assert loaded.coeffs == coeffs
        assert loaded.device_models == models

    def test_wrong_schema(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"schema": "nope/1"}))
        with pytest.raises(SchemaVersionMismatch):
            load_coefficients(p)

    def test_size_norm_mode_persisted(self, tmp_path):
        coeffs = BehaviorCoefficients(size_norm_mode="inverse")
        p = tmp_path / "c.json"
        save_coefficients(p, coeffs)
        assert load_coefficients(p).coeffs.size_norm_mode == "inverse"


class TestEndpointsIO:
    def test_round_trip(self, tmp_path):
        samples = [
            EndpointSample(0, 3, AngularCoord(1.5, -2.25), 40.0),
            EndpointSample(1, 4, AngularCoord(-179.9, 89.0), 80.0),
        ]
        p = tmp_path / "e.csv"
        save_endpoints(p, samples)
        loaded = load_endpoints(p)
        assert len(loaded) == 2
        assert loaded[0].target_id == 3
        assert loaded[0].gaze.phi == pytest.approx(1.5)
        assert loaded[1].gaze.theta == pytest.approx(89.0)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "e.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ParseError):
            load_endpoints(p)

    def test_bad_row(self, tmp_path):
        p = tmp_path / "e.csv"
        p.write_text("trial_id,target_id,gaze_phi,gaze_theta,timestamp_ms\n1,2,x,4,5\n")
        with pytest.raises(ParseError):
            load_endpoints(p)
