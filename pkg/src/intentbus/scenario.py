"""Declarative scenario scripts, the run report, and log export.

A scenario is a JSON file of timed steps played against a fresh System
(schema in docs/scenario.md).  Under the logical clock the run is fully
deterministic: the same script yields byte-identical reports and broker
logs on every repetition.  Under the wall clock, steps fire at real time
offsets and the report additionally carries observed preview leads, i.e.
the measured delay between a preview event and its execution event
becoming readable on the broker.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass

from .broker import Broker
from .clock import WallClock, ns_to_seconds, seconds_to_ns
from .config import SystemConfig
from .errors import IntentBusError, ScenarioError, TopicNotFound
from .intents import EVENTS_TOPIC
from .messages import (
    Header,
    JointTrajectory,
    JointTrajectoryPoint,
    Path,
    Pose,
    PoseStamped,
    Quaternion,
    Vector3,
    decode,
)
from .registry import EntityKind
from .system import System
from .transforms import Transform

STEP_OPS = (
    "register_robot",
    "register_hmd",
    "register_object",
    "observe_marker",
    "submit_navigation",
    "submit_manipulation",
    "publish_object_state",
    "configure",
    "advance_clock",
)


@dataclass(frozen=True)
class ScenarioStep:
    t: float
    op: str
    args: dict


@dataclass(frozen=True)
class ScenarioScript:
    name: str
    duration_seconds: float
    steps: tuple[ScenarioStep, ...]


def _vec3(raw, where: str) -> Vector3:
    if not isinstance(raw, list) or len(raw) != 3 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
        raise ScenarioError(f"{where}: expected [x, y, z]")
    return Vector3(float(raw[0]), float(raw[1]), float(raw[2]))


def _quat(raw, where: str) -> Quaternion:
    if not isinstance(raw, list) or len(raw) != 4 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
        raise ScenarioError(f"{where}: expected [x, y, z, w]")
    return Quaternion(float(raw[0]), float(raw[1]), float(raw[2]), float(raw[3]))


def _transform(raw, where: str) -> Transform:
    if not isinstance(raw, dict):
        raise ScenarioError(f"{where}: expected an object")
    translation = _vec3(raw["translation"], f"{where}.translation") if "translation" in raw else Vector3(0.0, 0.0, 0.0)
    rotation = _quat(raw["rotation"], f"{where}.rotation") if "rotation" in raw else Quaternion(0.0, 0.0, 0.0, 1.0)
    return Transform(translation, rotation)


def _pose(raw, where: str) -> Pose:
    if not isinstance(raw, dict):
        raise ScenarioError(f"{where}: expected an object")
    position = _vec3(raw["position"], f"{where}.position") if "position" in raw else Vector3(0.0, 0.0, 0.0)
    orientation = _quat(raw["orientation"], f"{where}.orientation") if "orientation" in raw else Quaternion(0.0, 0.0, 0.0, 1.0)
    return Pose(position, orientation)


def load_scenario(path: str) -> ScenarioScript:
    try:
        with open(path, "rb") as fh:
            obj = json.loads(fh.read().decode("utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot load scenario {path}: {exc}") from exc
    return parse_scenario(obj)


def parse_scenario(obj) -> ScenarioScript:
    if not isinstance(obj, dict):
        raise ScenarioError("scenario: top level must be an object")
    name = obj.get("name", "unnamed")
    if not isinstance(name, str):
        raise ScenarioError("scenario.name: must be a string")
    raw_steps = obj.get("steps", [])
    if not isinstance(raw_steps, list):
        raise ScenarioError("scenario.steps: must be a list")
    steps: list[ScenarioStep] = []
    for i, raw in enumerate(raw_steps):
        if not isinstance(raw, dict):
            raise ScenarioError("step must be an object", i)
        t = raw.get("t", 0.0)
        op = raw.get("op")
        if not isinstance(t, (int, float)) or isinstance(t, bool) or t < 0:
            raise ScenarioError(f"t: {t!r} must be a number >= 0", i)
        if op not in STEP_OPS:
            raise ScenarioError(f"op: {op!r} not one of {sorted(STEP_OPS)}", i)
        args = {k: v for k, v in raw.items() if k not in ("t", "op")}
        steps.append(ScenarioStep(float(t), op, args))
    last_t = steps[-1].t if steps else 0.0
    duration = obj.get("duration_seconds", last_t)
    if not isinstance(duration, (int, float)) or isinstance(duration, bool) or duration < last_t:
        raise ScenarioError(f"duration_seconds: {duration!r} must be >= last step time {last_t}")
    script = ScenarioScript(name, float(duration), tuple(steps))
    validate_script(script)
    return script


def validate_script(script: ScenarioScript) -> None:
    """Static checks: time ordering, closed op vocabulary, reference resolution."""
    counts = {"robot": 0, "hmd": 0, "object": 0}
    previous_t = 0.0
    for i, step in enumerate(script.steps):
        if step.t < previous_t:
            raise ScenarioError(f"t: {step.t} before previous step at {previous_t}", i)
        previous_t = step.t
        a = step.args

        def need(key, types, where=None):
            value = a.get(key)
            if not isinstance(value, types) or isinstance(value, bool):
                raise ScenarioError(f"{where or key}: missing or wrong type", i)
            return value

        if step.op == "register_robot":
            need("marker", str)
            counts["robot"] += 1
        elif step.op == "register_hmd":
            counts["hmd"] += 1
        elif step.op == "register_object":
            need("category", str)
            counts["object"] += 1
        elif step.op == "observe_marker":
            hmd = need("hmd", int)
            need("marker", str)
            if hmd >= counts["hmd"]:
                raise ScenarioError(f"hmd: {hmd} not registered by this step", i)
        elif step.op in ("submit_navigation", "submit_manipulation"):
            robot = need("robot", int)
            if robot >= counts["robot"]:
                raise ScenarioError(f"robot: {robot} not registered by this step", i)
        elif step.op == "publish_object_state":
            obj_id = need("object", int)
            if obj_id >= counts["object"]:
                raise ScenarioError(f"object: {obj_id} not registered by this step", i)


def _apply_step(system: System, step: ScenarioStep, index: int) -> None:
    a = step.args
    if step.op == "register_robot":
        system.register_robot(a["marker"], a.get("model"))
    elif step.op == "register_hmd":
        system.register_hmd()
    elif step.op == "register_object":
        system.register_object(a["category"])
    elif step.op == "observe_marker":
        system.observe_marker(
            a["hmd"], a["marker"], _transform(a.get("marker_in_hmd", {}), "marker_in_hmd")
        )
    elif step.op == "submit_navigation":
        waypoints = a.get("waypoints")
        if not isinstance(waypoints, list) or not waypoints:
            raise ScenarioError("waypoints: required non-empty list", index)
        frame = a.get("frame", "anchor")
        base = system.now()
        poses = []
        for w, raw in enumerate(waypoints):
            where = f"waypoints[{w}]"
            if not isinstance(raw, dict):
                raise ScenarioError(f"{where}: expected an object", index)
            offset = raw.get("t", 0.0)
            if not isinstance(offset, (int, float)) or isinstance(offset, bool) or offset < 0:
                raise ScenarioError(f"{where}.t: must be a number >= 0", index)
            poses.append(
                PoseStamped(Header(base + seconds_to_ns(float(offset)), frame), _pose(raw, where))
            )
        system.submit_navigation(a["robot"], Path(Header(base, frame), tuple(poses)))
    elif step.op == "submit_manipulation":
        raw = a.get("trajectory")
        if not isinstance(raw, dict):
            raise ScenarioError("trajectory: required object", index)
        names = raw.get("joint_names")
        raw_points = raw.get("points")
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            raise ScenarioError("trajectory.joint_names: required list of strings", index)
        if not isinstance(raw_points, list) or not raw_points:
            raise ScenarioError("trajectory.points: required non-empty list", index)
        points = []
        for p, rp in enumerate(raw_points):
            where = f"trajectory.points[{p}]"
            if not isinstance(rp, dict) or not isinstance(rp.get("positions"), list):
                raise ScenarioError(f"{where}: expected object with positions", index)
            points.append(
                JointTrajectoryPoint(
                    positions=tuple(float(v) for v in rp["positions"]),
                    velocities=tuple(float(v) for v in rp.get("velocities", ())),
                    accelerations=tuple(float(v) for v in rp.get("accelerations", ())),
                    time_from_start=float(rp.get("time_from_start", 0.0)),
                )
            )
        frame = raw.get("frame", "anchor")
        trajectory = JointTrajectory(
            Header(system.now(), frame), tuple(str(n) for n in names), tuple(points)
        )
        system.submit_manipulation(a["robot"], trajectory)
    elif step.op == "publish_object_state":
        system.publish_object_state(
            a["object"],
            _pose(a.get("pose", {}), "pose"),
            tuple(a.get("joint_names", ())),
            tuple(float(v) for v in a.get("joint_positions", ())),
        )
    elif step.op == "configure":
        system.configure(a.get("delay_seconds"), a.get("pose_rate_hz"))
    elif step.op == "advance_clock":
        pass  # the time move itself is the whole step


@dataclass(frozen=True)
class RunReport:
    scenario: str
    clock_mode: str
    duration_seconds: float
    intents: tuple[dict, ...]
    topic_counts: dict[str, int]
    topic_digests: dict[str, str]
    pose_rate: tuple[dict, ...]
    errors: tuple[str, ...]

    def to_obj(self) -> dict:
        return {
            "scenario": self.scenario,
            "clock_mode": self.clock_mode,
            "duration_seconds": self.duration_seconds,
            "intents": list(self.intents),
            "topic_counts": self.topic_counts,
            "topic_digests": self.topic_digests,
            "pose_rate": list(self.pose_rate),
            "errors": list(self.errors),
        }

    def to_json_bytes(self) -> bytes:
        return json.dumps(self.to_obj(), sort_keys=True, separators=(",", ":")).encode("ascii")


def _topic_digest(broker: Broker, topic: str) -> str:
    digest = hashlib.sha256()
    for record in broker.fetch(topic, 0):
        digest.update(f"{record.offset}|{record.publish_stamp}|".encode("ascii"))
        digest.update(record.payload)
        digest.update(b"\n")
    return digest.hexdigest()


class _EventWatcher:
    """Notes the wall time each intent-event record became readable."""

    def __init__(self, broker: Broker):
        self._broker = broker
        self._signal = broker.subscribe_signal(EVENTS_TOPIC)
        self._stop = threading.Event()
        self.seen: dict[int, int] = {}
        self._cursor = 0
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _drain(self) -> None:
        records = self._broker.fetch(EVENTS_TOPIC, self._cursor)
        stamp = time.monotonic_ns()
        for record in records:
            self.seen[record.offset] = stamp
        self._cursor += len(records)

    def _run(self) -> None:
        while not self._stop.is_set():
            self._drain()
            if self._signal.wait(timeout=0.05):
                self._signal.clear()
        self._drain()

    def stop(self) -> None:
        self._stop.set()
        self._signal.fire()
        self._thread.join(timeout=2.0)


def _build_report(
    system: System,
    script: ScenarioScript,
    clock_mode: str,
    observed: dict[int, int] | None,
) -> RunReport:
    broker = system.broker
    event_offsets: dict[tuple[int, str], int] = {}
    for record in broker.fetch(EVENTS_TOPIC, 0):
        event = decode("intent_event", record.payload)
        event_offsets[(event.intent_id, event.phase)] = record.offset

    intents = []
    for intent, status in system.scheduler.intents():
        observed_lead = None
        if observed is not None:
            started = event_offsets.get((intent.intent_id, "preview_started"))
            executed = event_offsets.get((intent.intent_id, "execution_started"))
            if started in observed and executed in observed:
                observed_lead = (observed[executed] - observed[started]) / 1e9
        intents.append(
            {
                "intent_id": intent.intent_id,
                "robot_id": intent.robot_id,
                "kind": intent.kind,
                "status": status,
                "preview_stamp": intent.preview_epoch,
                "execute_stamp": intent.execute_epoch,
                "lead_ns": intent.execute_epoch - intent.preview_epoch,
                "lead_seconds": ns_to_seconds(intent.execute_epoch - intent.preview_epoch),
                "observed_lead_seconds": observed_lead,
            }
        )

    topics = sorted(broker.topic_names())
    counts = {t: broker.length(t) for t in topics}
    digests = {t: _topic_digest(broker, t) for t in topics}

    pose_rate = []
    for record in system.registry.records(EntityKind.HMD):
        topic = record.topics[0]
        samples = broker.fetch(topic, 0)
        pose_rate.append(
            {
                "hmd_id": record.id,
                "samples": len(samples),
                "first_stamp": samples[0].publish_stamp if samples else None,
                "last_stamp": samples[-1].publish_stamp if samples else None,
                "configured_hz": system.scheduler.config.pose_rate_hz,
            }
        )

    return RunReport(
        scenario=script.name,
        clock_mode=clock_mode,
        duration_seconds=script.duration_seconds,
        intents=tuple(intents),
        topic_counts=counts,
        topic_digests=digests,
        pose_rate=tuple(pose_rate),
        errors=(),
    )


def run_scenario(
    script: ScenarioScript,
    clock_mode: str = "logical",
    config: SystemConfig | None = None,
) -> RunReport:
    """Play every step against a fresh System and summarize the run."""
    if clock_mode not in ("logical", "wall"):
        raise ScenarioError(f"clock_mode: {clock_mode!r} must be logical or wall")
    validate_script(script)
    if clock_mode == "logical":
        system = System(config)
        for i, step in enumerate(script.steps):
            system.advance_to(seconds_to_ns(step.t))
            try:
                _apply_step(system, step, i)
            except ScenarioError:
                raise
            except IntentBusError as exc:
                raise ScenarioError(f"{step.op}: {exc}", i) from exc
        system.advance_to(seconds_to_ns(script.duration_seconds))
        return _build_report(system, script, clock_mode, observed=None)

    system = System(config, clock=WallClock())
    watcher = _EventWatcher(system.broker)
    system.start()
    try:
        start = time.monotonic_ns()
        for i, step in enumerate(script.steps):
            target = start + seconds_to_ns(step.t)
            delay = (target - time.monotonic_ns()) / 1e9
            if delay > 0:
                time.sleep(delay)
            try:
                _apply_step(system, step, i)
            except ScenarioError:
                raise
            except IntentBusError as exc:
                raise ScenarioError(f"{step.op}: {exc}", i) from exc
        remaining = (start + seconds_to_ns(script.duration_seconds) - time.monotonic_ns()) / 1e9
        if remaining > 0:
            time.sleep(remaining)
        time.sleep(0.05)  # let the ticker flush events due exactly at the end
    finally:
        system.close()
        watcher.stop()
    return _build_report(system, script, clock_mode, observed=watcher.seen)


def export_log(broker: Broker, topic: str, path: str) -> int:
    """Write a topic's records as newline-delimited JSON; returns record count."""
    if not broker.has_topic(topic):
        raise TopicNotFound(f"topic {topic!r} does not exist")
    records = broker.fetch(topic, 0)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# intentbus log v1 topic={topic}\n")
        for record in records:
            fh.write(
                json.dumps(
                    {
                        "offset": record.offset,
                        "stamp": record.publish_stamp,
                        "payload": record.payload.decode("ascii"),
                    },
                    sort_keys=True,
                    separators=(",", ":"),
                )
                + "\n"
            )
    return len(records)


def import_log(path: str) -> tuple[str, list[tuple[int, bytes]]]:
    """Read an exported log back as (topic, [(stamp, payload bytes), ...])."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        prefix = "# intentbus log v1 topic="
        if not header.startswith(prefix):
            raise ValueError(f"{path}: missing log header line")
        topic = header[len(prefix):]
        out: list[tuple[int, bytes]] = []
        for n, line in enumerate(fh):
            if not line.strip():
                continue
            obj = json.loads(line)
            if obj["offset"] != n:
                raise ValueError(f"{path}: offset {obj['offset']} at line {n + 2}, expected {n}")
            out.append((obj["stamp"], obj["payload"].encode("ascii")))
    return topic, out


def replay_into(broker: Broker, topic: str, records: list[tuple[int, bytes]]) -> None:
    broker.create_topic(topic)
    for stamp, payload in records:
        broker.publish(topic, payload, stamp)
