import math

import numpy as np
import pytest

from haptic_cone.stm import CircleStimulus, sample_circle
from haptic_cone.wire import (DecodeError, WireMessage, assert_masked,
                              decode_frame, encode_frame)


def representative_frames():
    schedule = sample_circle(CircleStimulus(center=(0.0, 0.0), plane_z=400.0,
                                            radius=30.0))
    points = [{"slot": i, "offset": [float(p[0]), float(p[1])], "intensity": 1.0}
              for i, p in enumerate(schedule.points[:, :2])]
    return [
        WireMessage("hello", 0, {}),
        WireMessage("hello", 0, {"session": "s1", "protocol": 1, "trial_count": 14,
                                 "sets": 1, "timeout_s": 30.0, "palm_radius_mm": 40.0,
                                 "max_speed_m_s": 0.45, "n_points": 10,
                                 "render_freq": 10.0}),
        WireMessage("start_trial", 1, {"trial_index": 1, "trial_count": 14, "set": 1}),
        WireMessage("hand_move", 2, {"delta": [1.0, -2.0, 0.5], "t": 0.25}),
        WireMessage("stimulus", 3, {"t": 0.1, "points": points, "active_slot": 2}),
        WireMessage("reached", 4, {}),
        WireMessage("trial_result", 5, {"goal_id": 3, "trial_index": 1, "set": 1,
                                        "completed": True, "eps_xyz": 12.5,
                                        "eps_xy": 3.25, "duration": 6.5, "seed": 7}),
        WireMessage("abort", 6, {"reason": "client abort"}),
    ]


def test_round_trip_identity_for_every_kind():
    for msg in representative_frames():
        encoded = encode_frame(msg)
        assert "\n" not in encoded
        assert decode_frame(encoded) == msg


def test_stimulus_frame_carries_ten_offsets_on_circle():
    msg = [m for m in representative_frames() if m.kind == "stimulus"][0]
    offsets = np.array([p["offset"] for p in msg.payload["points"]])
    assert offsets.shape == (10, 2)
    assert np.allclose(np.hypot(offsets[:, 0], offsets[:, 1]), 30.0, rtol=1e-9)


def test_unknown_kind_rejected():
    with pytest.raises(DecodeError) as err:
        decode_frame('{"kind":"teleport","seq":0,"payload":{}}')
    assert err.value.field == "kind"


def test_missing_field_named():
    with pytest.raises(DecodeError) as err:
        decode_frame('{"kind":"hand_move","seq":0,"payload":{}}')
    assert err.value.field == "delta"


def test_non_finite_coordinate_rejected():
    with pytest.raises(DecodeError) as err:
        decode_frame('{"kind":"hand_move","seq":0,"payload":{"delta":[1.0,2.0,NaN]}}')
    assert "delta[2]" in err.value.field
    with pytest.raises(DecodeError):
        decode_frame('{"kind":"hand_move","seq":0,"payload":{"delta":[1.0,Infinity,0]}}')


def test_bad_sequence_numbers_rejected():
    with pytest.raises(DecodeError):
        decode_frame('{"kind":"hello","seq":-1,"payload":{}}')
    with pytest.raises(DecodeError):
        decode_frame('{"kind":"hello","seq":true,"payload":{}}')
    with pytest.raises(DecodeError):
        decode_frame('{"kind":"hello","payload":{}}')


def test_malformed_json_and_payload():
    with pytest.raises(DecodeError):
        decode_frame("not json")
    with pytest.raises(DecodeError):
        decode_frame('["kind","hello"]')
    with pytest.raises(DecodeError):
        decode_frame('{"kind":"hello","seq":0,"payload":[]}')


def test_trial_result_requires_metric_fields():
    with pytest.raises(DecodeError) as err:
        decode_frame('{"kind":"trial_result","seq":0,"payload":{"goal_id":1,"set":1,'
                     '"completed":true,"eps_xyz":1.0,"eps_xy":1.0}}')
    assert err.value.field == "duration"


def test_masking_accepts_legitimate_server_frames():
    for msg in representative_frames():
        if msg.kind in ("hello", "start_trial", "stimulus", "trial_result", "abort"):
            assert_masked(msg)


def test_masking_rejects_leaky_frames():
    with pytest.raises(ValueError):
        assert_masked(WireMessage("stimulus", 0, {"t": 0.0, "points": [],
                                                  "goal": [0, 0, 250.0]}))
    with pytest.raises(ValueError):
        assert_masked(WireMessage("stimulus", 0, {"t": 0.0, "points": [], "k": 0.5}))
    with pytest.raises(ValueError):
        assert_masked(WireMessage("trial_result", 0, {
            "goal_id": 1, "trial_index": 1, "set": 1, "completed": True,
            "eps_xyz": 1.0, "eps_xy": 1.0, "duration": 2.0, "seed": 0,
            "hand_position": [0, 0, 0]}))
    with pytest.raises(ValueError):
        assert_masked(WireMessage("stimulus", 0, {
            "t": 0.0, "points": [{"offset": [0.0, 0.0], "intensity": 1.0,
                                  "position": [0, 0, 300.0]}]}))
    with pytest.raises(ValueError):
        assert_masked(WireMessage("hand_move", 0, {"delta": [0, 0, 0]}))


def test_encode_rejects_non_finite_values():
    with pytest.raises(ValueError):
        encode_frame(WireMessage("hand_move", 0, {"delta": [1.0, float("nan"), 0.0]}))
