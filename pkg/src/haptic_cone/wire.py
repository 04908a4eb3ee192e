"""Wire format of the trial service: newline-free JSON frames.

Every frame is {"kind": ..., "seq": ..., "payload": {...}} on one line.
Sequence numbers increase strictly per direction. Stimulus payloads carry
only palm-local data (felt dot offsets relative to the palm centre plus a
relative intensity); no server frame ever exposes goal coordinates, the
absolute hand position or the guidance progress, because the whole point of
the task is that the client has to find the goal by feel.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

KINDS = ("hello", "start_trial", "hand_move", "stimulus", "reached",
         "trial_result", "abort")


class DecodeError(ValueError):
    """Malformed frame; `field` names the offending part."""

    def __init__(self, message: str, field: str = "") -> None:
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class WireMessage:
    kind: str
    seq: int
    payload: dict[str, Any] = field(default_factory=dict)


def encode_frame(msg: WireMessage) -> str:
    """Single-line JSON text for one frame (no embedded newlines)."""
    text = json.dumps({"kind": msg.kind, "seq": msg.seq, "payload": msg.payload},
                      separators=(",", ":"), sort_keys=True, allow_nan=False)
    if "\n" in text:
        raise ValueError("frame must not contain newlines")
    return text


def _require(payload: dict, key: str, kind: str) -> Any:
    if key not in payload:
        raise DecodeError(f"{kind} frame missing field '{key}'", field=key)
    return payload[key]


def _check_finite_vector(value: Any, name: str, length: int) -> None:
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise DecodeError(f"'{name}' must be a {length}-vector", field=name)
    for i, v in enumerate(value):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise DecodeError(f"'{name}[{i}]' is not a finite number", field=f"{name}[{i}]")


def _check_finite_number(value: Any, name: str) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise DecodeError(f"'{name}' is not a finite number", field=name)


def _validate_payload(kind: str, payload: dict) -> None:
    if kind == "hand_move":
        _check_finite_vector(_require(payload, "delta", kind), "delta", 3)
        if "t" in payload:
            _check_finite_number(payload["t"], "t")
    elif kind == "stimulus":
        points = _require(payload, "points", kind)
        if not isinstance(points, list):
            raise DecodeError("'points' must be a list", field="points")
        for i, p in enumerate(points):
            if not isinstance(p, dict):
                raise DecodeError(f"'points[{i}]' must be an object", field=f"points[{i}]")
            _check_finite_vector(_require(p, "offset", kind), f"points[{i}].offset", 2)
            _check_finite_number(_require(p, "intensity", kind), f"points[{i}].intensity")
    elif kind == "trial_result":
        for key in ("goal_id", "set", "completed", "eps_xyz", "eps_xy", "duration"):
            _require(payload, key, kind)
        for key in ("eps_xyz", "eps_xy", "duration"):
            _check_finite_number(payload[key], key)
    elif kind == "abort":
        reason = _require(payload, "reason", kind)
        if not isinstance(reason, str):
            raise DecodeError("'reason' must be a string", field="reason")
    # hello, start_trial and reached carry free-form (possibly empty) payloads.
    if "t" in payload and kind != "stimulus":
        _check_finite_number(payload["t"], "t")


def decode_frame(text: str) -> WireMessage:
    """Parse and validate one frame; raises DecodeError naming the bad field."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DecodeError(f"frame is not valid JSON: {exc}", field="") from exc
    if not isinstance(raw, dict):
        raise DecodeError("frame must be a JSON object", field="")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise DecodeError(f"unknown frame kind {kind!r}", field="kind")
    seq = raw.get("seq")
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
        raise DecodeError("'seq' must be a non-negative integer", field="seq")
    payload = raw.get("payload", {})
    if not isinstance(payload, dict):
        raise DecodeError("'payload' must be an object", field="payload")
    _validate_payload(kind, payload)
    return WireMessage(kind=kind, seq=seq, payload=payload)


# Whitelisted payload keys per server-emitted frame kind; the masking test
# walks every emitted frame against this schema.
SERVER_PAYLOAD_KEYS = {
    "hello": {"session", "protocol", "trial_count", "sets", "timeout_s",
              "palm_radius_mm", "max_speed_m_s", "n_points", "render_freq"},
    "start_trial": {"trial_index", "trial_count", "set"},
    "stimulus": {"t", "points", "active_slot"},
    "trial_result": {"goal_id", "trial_index", "set", "completed",
                     "eps_xyz", "eps_xy", "duration", "seed"},
    "abort": {"reason"},
}

_FORBIDDEN_KEY_PARTS = ("goal_position", "hand_position", "position", "start",
                        "progress", "center")


def assert_masked(msg: WireMessage) -> None:
    """Schema check that a server frame leaks no absolute task geometry.

    Raises ValueError when the frame carries unexpected keys or any key that
    could name goal coordinates, an absolute hand position or the progress
    value. Stimulus point objects may carry only offset/intensity/slot.
    """
    allowed = SERVER_PAYLOAD_KEYS.get(msg.kind)
    if allowed is None:
        raise ValueError(f"server must not emit frame kind {msg.kind!r}")
    for key in msg.payload:
        if key not in allowed:
            raise ValueError(f"unexpected key {key!r} in {msg.kind} payload")
        low = key.lower()
        if low == "k" or any(part in low for part in _FORBIDDEN_KEY_PARTS):
            raise ValueError(f"masked quantity {key!r} in {msg.kind} payload")
    if msg.kind == "stimulus":
        for i, p in enumerate(msg.payload["points"]):
            extra = set(p) - {"offset", "intensity", "slot"}
            if extra:
                raise ValueError(f"stimulus point {i} carries unexpected keys {extra}")
