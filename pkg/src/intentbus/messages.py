"""Typed message payloads and the canonical JSON codec.

Message kinds mirror the ROS types used on the wire (pose, path, joint
trajectory, object state) plus the internal intent lifecycle event.  The
byte-level rules live in docs/wire-format.md: keys in a fixed order, no
insignificant whitespace, floats rendered with shortest round-trip
representation (<= 17 significant digits), non-ASCII escaped.

All types are immutable values; codec functions are pure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

from .errors import DecodeError, SchemaMismatch, ValidationError

# Construction renormalizes a quaternion only when its norm deviates by more
# than this; renormalizing an already-unit quaternion must be a bitwise no-op
# so that decode(encode(m)) re-encodes byte-identically.
_QUAT_RENORM_EPS = 1e-9
_QUAT_NORM_TOL = 1e-6


class MessageKind(str, Enum):
    POSE_STAMPED = "pose_stamped"
    PATH = "path"
    JOINT_TRAJECTORY = "joint_trajectory"
    OBJECT_STATE = "object_state"
    INTENT_EVENT = "intent_event"


# ---------------------------------------------------------------------------
# Message types


@dataclass(frozen=True)
class Header:
    """Stamp in integer nanoseconds since scenario epoch, plus frame name."""

    stamp: int
    frame_id: str


@dataclass(frozen=True)
class Vector3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", float(self.z))


@dataclass(frozen=True)
class Quaternion:
    """Unit quaternion (x, y, z, w).

    Construction renormalizes when the norm is finite, non-degenerate and
    off by more than 1e-9; degenerate inputs (zero / non-finite norm) are
    stored as given so that validate() can report them.
    """

    x: float
    y: float
    z: float
    w: float

    def __post_init__(self):
        x, y, z, w = (float(v) for v in (self.x, self.y, self.z, self.w))
        norm = math.sqrt(x * x + y * y + z * z + w * w)
        if math.isfinite(norm) and norm > _QUAT_RENORM_EPS and abs(norm - 1.0) > _QUAT_RENORM_EPS:
            x, y, z, w = x / norm, y / norm, z / norm, w / norm
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "w", w)

    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2 + self.w**2)

    @classmethod
    def identity(cls) -> "Quaternion":
        return cls(0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class Pose:
    position: Vector3
    orientation: Quaternion

    @classmethod
    def identity(cls) -> "Pose":
        return cls(Vector3(0.0, 0.0, 0.0), Quaternion.identity())


@dataclass(frozen=True)
class PoseStamped:
    header: Header
    pose: Pose


@dataclass(frozen=True)
class Path:
    """Waypoint sequence; empty poses denote a cancelled/cleared plan."""

    header: Header
    poses: tuple[PoseStamped, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "poses", tuple(self.poses))


@dataclass(frozen=True)
class JointTrajectoryPoint:
    positions: tuple[float, ...]
    velocities: tuple[float, ...] = ()
    accelerations: tuple[float, ...] = ()
    time_from_start: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(float(v) for v in self.positions))
        object.__setattr__(self, "velocities", tuple(float(v) for v in self.velocities))
        object.__setattr__(self, "accelerations", tuple(float(v) for v in self.accelerations))
        object.__setattr__(self, "time_from_start", float(self.time_from_start))


@dataclass(frozen=True)
class JointTrajectory:
    header: Header
    joint_names: tuple[str, ...]
    points: tuple[JointTrajectoryPoint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "joint_names", tuple(self.joint_names))
        object.__setattr__(self, "points", tuple(self.points))


@dataclass(frozen=True)
class ObjectState:
    """Tracked-object snapshot: category string, pose, optional joint state."""

    category: str
    pose: Pose
    joint_names: tuple[str, ...] = ()
    joint_positions: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "joint_names", tuple(self.joint_names))
        object.__setattr__(
            self, "joint_positions", tuple(float(v) for v in self.joint_positions)
        )


INTENT_KINDS = ("navigation", "manipulation")
INTENT_PHASES = ("preview_started", "execution_started", "completed")


@dataclass(frozen=True)
class IntentEvent:
    """Lifecycle event published on the internal intent events topic."""

    intent_id: int
    robot_id: int
    kind: str
    phase: str
    stamp: int


Message = (
    PoseStamped | Path | JointTrajectory | ObjectState | IntentEvent
)

_KIND_BY_TYPE: dict[type, MessageKind] = {
    PoseStamped: MessageKind.POSE_STAMPED,
    Path: MessageKind.PATH,
    JointTrajectory: MessageKind.JOINT_TRAJECTORY,
    ObjectState: MessageKind.OBJECT_STATE,
    IntentEvent: MessageKind.INTENT_EVENT,
}

_CHANNEL_KINDS = {
    "pose": MessageKind.POSE_STAMPED,
    "navigation_plan": MessageKind.PATH,
    "joint_trajectory": MessageKind.JOINT_TRAJECTORY,
    "state": MessageKind.OBJECT_STATE,
    "intent_events": MessageKind.INTENT_EVENT,
}


def kind_of(message: Message) -> MessageKind:
    try:
        return _KIND_BY_TYPE[type(message)]
    except KeyError:
        raise SchemaMismatch(f"not a message type: {type(message).__name__}") from None


def kind_for_channel(channel: str) -> MessageKind:
    try:
        return _CHANNEL_KINDS[channel]
    except KeyError:
        raise SchemaMismatch(f"no message kind for channel {channel!r}") from None


# ---------------------------------------------------------------------------
# Validation

def _check_finite(out: list[str], path: str, value: float) -> None:
    if not math.isfinite(value):
        out.append(f"{path}: must be finite, got {value!r}")


def _validate_header(out: list[str], path: str, h: Header) -> None:
    if not isinstance(h.stamp, int) or isinstance(h.stamp, bool):
        out.append(f"{path}.stamp: must be an integer")
    elif h.stamp < 0:
        out.append(f"{path}.stamp: must be >= 0")
    if not h.frame_id:
        out.append(f"{path}.frame_id: must be non-empty")


def _validate_vector3(out: list[str], path: str, v: Vector3) -> None:
    for axis in ("x", "y", "z"):
        _check_finite(out, f"{path}.{axis}", getattr(v, axis))


def _validate_quaternion(out: list[str], path: str, q: Quaternion) -> None:
    n = q.norm()
    if not math.isfinite(n) or abs(n - 1.0) > _QUAT_NORM_TOL:
        out.append(f"{path}: quaternion norm is {n!r}, not unit")


def _validate_pose(out: list[str], path: str, p: Pose) -> None:
    _validate_vector3(out, f"{path}.position", p.position)
    _validate_quaternion(out, f"{path}.orientation", p.orientation)


def validate(message: Message) -> list[str]:
    """Return every violated invariant as "field.path: message"; [] when ok.

    Total function: never raises on structurally complete messages.
    """
    out: list[str] = []
    if isinstance(message, PoseStamped):
        _validate_header(out, "header", message.header)
        _validate_pose(out, "pose", message.pose)
    elif isinstance(message, Path):
        _validate_header(out, "header", message.header)
        prev = None
        for i, ps in enumerate(message.poses):
            _validate_header(out, f"poses[{i}].header", ps.header)
            _validate_pose(out, f"poses[{i}].pose", ps.pose)
            if prev is not None and ps.header.stamp < prev:
                out.append(f"poses[{i}].header.stamp: waypoint stamps must be non-decreasing")
            prev = ps.header.stamp
    elif isinstance(message, JointTrajectory):
        _validate_header(out, "header", message.header)
        n = len(message.joint_names)
        prev_t = None
        for i, pt in enumerate(message.points):
            if len(pt.positions) != n:
                out.append(
                    f"points[{i}].positions: positions length {len(pt.positions)}"
                    f" != joint_names length {n}"
                )
            if pt.velocities and len(pt.velocities) != len(pt.positions):
                out.append(f"points[{i}].velocities: length != positions length")
            if pt.accelerations and len(pt.accelerations) != len(pt.positions):
                out.append(f"points[{i}].accelerations: length != positions length")
            for j, v in enumerate(pt.positions):
                _check_finite(out, f"points[{i}].positions[{j}]", v)
            for j, v in enumerate(pt.velocities):
                _check_finite(out, f"points[{i}].velocities[{j}]", v)
            for j, v in enumerate(pt.accelerations):
                _check_finite(out, f"points[{i}].accelerations[{j}]", v)
            if not math.isfinite(pt.time_from_start) or pt.time_from_start < 0:
                out.append(f"points[{i}].time_from_start: must be finite and >= 0")
            if prev_t is not None and pt.time_from_start <= prev_t:
                out.append(
                    f"points[{i}].time_from_start: must be strictly increasing across points"
                )
            prev_t = pt.time_from_start
    elif isinstance(message, ObjectState):
        if not message.category:
            out.append("category: must be non-empty")
        _validate_pose(out, "pose", message.pose)
        if len(message.joint_names) != len(message.joint_positions):
            out.append(
                f"joint_positions: length {len(message.joint_positions)}"
                f" != joint_names length {len(message.joint_names)}"
            )
        for j, v in enumerate(message.joint_positions):
            _check_finite(out, f"joint_positions[{j}]", v)
    elif isinstance(message, IntentEvent):
        for name in ("intent_id", "robot_id", "stamp"):
            v = getattr(message, name)
            if not isinstance(v, int) or isinstance(v, bool):
                out.append(f"{name}: must be an integer")
            elif v < 0:
                out.append(f"{name}: must be >= 0")
        if message.kind not in INTENT_KINDS:
            out.append(f"kind: must be one of {INTENT_KINDS}")
        if message.phase not in INTENT_PHASES:
            out.append(f"phase: must be one of {INTENT_PHASES}")
    else:
        out.append(f"unknown message type {type(message).__name__}")
    return out


# ---------------------------------------------------------------------------
# Encoding

def _header_obj(h: Header) -> dict:
    return {"stamp": h.stamp, "frame_id": h.frame_id}


def _vector3_obj(v: Vector3) -> dict:
    return {"x": v.x, "y": v.y, "z": v.z}


def _quaternion_obj(q: Quaternion) -> dict:
    return {"x": q.x, "y": q.y, "z": q.z, "w": q.w}


def _pose_obj(p: Pose) -> dict:
    return {"position": _vector3_obj(p.position), "orientation": _quaternion_obj(p.orientation)}


def to_obj(message: Message) -> dict:
    """Plain-dict form with keys in canonical wire order."""
    if isinstance(message, PoseStamped):
        return {"header": _header_obj(message.header), "pose": _pose_obj(message.pose)}
    if isinstance(message, Path):
        return {
            "header": _header_obj(message.header),
            "poses": [to_obj(ps) for ps in message.poses],
        }
    if isinstance(message, JointTrajectory):
        return {
            "header": _header_obj(message.header),
            "joint_names": list(message.joint_names),
            "points": [
                {
                    "positions": list(pt.positions),
                    "velocities": list(pt.velocities),
                    "accelerations": list(pt.accelerations),
                    "time_from_start": pt.time_from_start,
                }
                for pt in message.points
            ],
        }
    if isinstance(message, ObjectState):
        return {
            "category": message.category,
            "pose": _pose_obj(message.pose),
            "joint_names": list(message.joint_names),
            "joint_positions": list(message.joint_positions),
        }
    if isinstance(message, IntentEvent):
        return {
            "intent_id": message.intent_id,
            "robot_id": message.robot_id,
            "kind": message.kind,
            "phase": message.phase,
            "stamp": message.stamp,
        }
    raise SchemaMismatch(f"not a message type: {type(message).__name__}")


def dumps_canonical(obj: Any) -> bytes:
    """Canonical JSON bytes for an already-ordered plain object."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=True, allow_nan=False).encode(
        "ascii"
    )


def encode(message: Message) -> bytes:
    """Canonical JSON bytes; raises ValidationError on invariant violations."""
    violations = validate(message)
    if violations:
        raise ValidationError(violations)
    return dumps_canonical(to_obj(message))


# ---------------------------------------------------------------------------
# Decoding (strict: unknown fields rejected)

def _as_dict(obj: Any, path: str) -> dict:
    if not isinstance(obj, dict):
        raise SchemaMismatch(f"{path}: expected object, got {type(obj).__name__}")
    return obj


def _take(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise SchemaMismatch(f"{path}.{key}: missing required field")
    return obj[key]


def _no_extras(obj: dict, allowed: tuple[str, ...], path: str) -> None:
    extras = [k for k in obj if k not in allowed]
    if extras:
        raise SchemaMismatch(f"{path}: unknown fields {extras}")


def _as_float(v: Any, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaMismatch(f"{path}: expected number, got {type(v).__name__}")
    return float(v)


def _as_int(v: Any, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaMismatch(f"{path}: expected integer, got {type(v).__name__}")
    return v


def _as_str(v: Any, path: str) -> str:
    if not isinstance(v, str):
        raise SchemaMismatch(f"{path}: expected string, got {type(v).__name__}")
    return v


def _as_list(v: Any, path: str) -> list:
    if not isinstance(v, list):
        raise SchemaMismatch(f"{path}: expected array, got {type(v).__name__}")
    return v


def _float_list(v: Any, path: str) -> tuple[float, ...]:
    return tuple(_as_float(x, f"{path}[{i}]") for i, x in enumerate(_as_list(v, path)))


def _str_list(v: Any, path: str) -> tuple[str, ...]:
    return tuple(_as_str(x, f"{path}[{i}]") for i, x in enumerate(_as_list(v, path)))


def _header_from(obj: Any, path: str) -> Header:
    d = _as_dict(obj, path)
    _no_extras(d, ("stamp", "frame_id"), path)
    return Header(
        stamp=_as_int(_take(d, "stamp", path), f"{path}.stamp"),
        frame_id=_as_str(_take(d, "frame_id", path), f"{path}.frame_id"),
    )


def _vector3_from(obj: Any, path: str) -> Vector3:
    d = _as_dict(obj, path)
    _no_extras(d, ("x", "y", "z"), path)
    return Vector3(*(_as_float(_take(d, k, path), f"{path}.{k}") for k in ("x", "y", "z")))


def _quaternion_from(obj: Any, path: str) -> Quaternion:
    d = _as_dict(obj, path)
    _no_extras(d, ("x", "y", "z", "w"), path)
    return Quaternion(
        *(_as_float(_take(d, k, path), f"{path}.{k}") for k in ("x", "y", "z", "w"))
    )


def _pose_from(obj: Any, path: str) -> Pose:
    d = _as_dict(obj, path)
    _no_extras(d, ("position", "orientation"), path)
    return Pose(
        position=_vector3_from(_take(d, "position", path), f"{path}.position"),
        orientation=_quaternion_from(_take(d, "orientation", path), f"{path}.orientation"),
    )


def _pose_stamped_from(obj: Any, path: str) -> PoseStamped:
    d = _as_dict(obj, path)
    _no_extras(d, ("header", "pose"), path)
    return PoseStamped(
        header=_header_from(_take(d, "header", path), f"{path}.header"),
        pose=_pose_from(_take(d, "pose", path), f"{path}.pose"),
    )


def _path_from(obj: Any, path: str) -> Path:
    d = _as_dict(obj, path)
    _no_extras(d, ("header", "poses"), path)
    poses = _as_list(_take(d, "poses", path), f"{path}.poses")
    return Path(
        header=_header_from(_take(d, "header", path), f"{path}.header"),
        poses=tuple(
            _pose_stamped_from(p, f"{path}.poses[{i}]") for i, p in enumerate(poses)
        ),
    )


def _trajectory_point_from(obj: Any, path: str) -> JointTrajectoryPoint:
    d = _as_dict(obj, path)
    _no_extras(d, ("positions", "velocities", "accelerations", "time_from_start"), path)
    return JointTrajectoryPoint(
        positions=_float_list(_take(d, "positions", path), f"{path}.positions"),
        velocities=_float_list(_take(d, "velocities", path), f"{path}.velocities"),
        accelerations=_float_list(_take(d, "accelerations", path), f"{path}.accelerations"),
        time_from_start=_as_float(
            _take(d, "time_from_start", path), f"{path}.time_from_start"
        ),
    )


def _joint_trajectory_from(obj: Any, path: str) -> JointTrajectory:
    d = _as_dict(obj, path)
    _no_extras(d, ("header", "joint_names", "points"), path)
    points = _as_list(_take(d, "points", path), f"{path}.points")
    return JointTrajectory(
        header=_header_from(_take(d, "header", path), f"{path}.header"),
        joint_names=_str_list(_take(d, "joint_names", path), f"{path}.joint_names"),
        points=tuple(
            _trajectory_point_from(p, f"{path}.points[{i}]") for i, p in enumerate(points)
        ),
    )


def _object_state_from(obj: Any, path: str) -> ObjectState:
    d = _as_dict(obj, path)
    _no_extras(d, ("category", "pose", "joint_names", "joint_positions"), path)
    return ObjectState(
        category=_as_str(_take(d, "category", path), f"{path}.category"),
        pose=_pose_from(_take(d, "pose", path), f"{path}.pose"),
        joint_names=_str_list(_take(d, "joint_names", path), f"{path}.joint_names"),
        joint_positions=_float_list(
            _take(d, "joint_positions", path), f"{path}.joint_positions"
        ),
    )


def _intent_event_from(obj: Any, path: str) -> IntentEvent:
    d = _as_dict(obj, path)
    _no_extras(d, ("intent_id", "robot_id", "kind", "phase", "stamp"), path)
    return IntentEvent(
        intent_id=_as_int(_take(d, "intent_id", path), f"{path}.intent_id"),
        robot_id=_as_int(_take(d, "robot_id", path), f"{path}.robot_id"),
        kind=_as_str(_take(d, "kind", path), f"{path}.kind"),
        phase=_as_str(_take(d, "phase", path), f"{path}.phase"),
        stamp=_as_int(_take(d, "stamp", path), f"{path}.stamp"),
    )


_FROM_OBJ = {
    MessageKind.POSE_STAMPED: _pose_stamped_from,
    MessageKind.PATH: _path_from,
    MessageKind.JOINT_TRAJECTORY: _joint_trajectory_from,
    MessageKind.OBJECT_STATE: _object_state_from,
    MessageKind.INTENT_EVENT: _intent_event_from,
}


def from_obj(kind: MessageKind | str, obj: Any) -> Message:
    try:
        kind = MessageKind(kind)
    except ValueError:
        raise SchemaMismatch(f"unknown message kind {kind!r}") from None
    return _FROM_OBJ[kind](obj, "$")


def decode(kind: MessageKind | str, payload: bytes) -> Message:
    """Parse canonical-or-equivalent JSON payload into a typed message.

    Raises DecodeError for malformed JSON, SchemaMismatch for structure that
    does not match ``kind`` (missing/unknown fields, wrong JSON types), and
    ValidationError when the structure is right but an invariant fails.
    """
    try:
        text = payload.decode("utf-8") if isinstance(payload, (bytes, bytearray)) else payload
        obj = json.loads(text)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DecodeError(f"malformed JSON payload: {exc}") from exc
    message = from_obj(kind, obj)
    violations = validate(message)
    if violations:
        raise ValidationError(violations)
    return message
