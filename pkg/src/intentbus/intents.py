"""Preview-before-execute intent scheduling.

A submitted robot action is published to the robot's topic and previewed as
a hologram immediately; the real execution is held back by a configurable
delay so the human teammate sees the animation first.  Default delay is
3 seconds.  Epochs are integer nanoseconds, so under the logical clock the
preview lead is exact.

Timing law for previews:
  - manipulation previews play at native trajectory timing (piecewise-linear
    between points at their time_from_start values, clamped at the ends);
  - navigation previews interpolate at constant speed along the path's arc
    length, stretched to at least the delay so short paths stay readable.

Supersession: a new intent for a robot cancels that robot's not-yet-executed
predecessor; an intent that already started executing runs to completion.
Lifecycle events are published on EVENTS_TOPIC with the due epoch as stamp.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

from .broker import Broker
from .clock import seconds_to_ns
from .errors import ClockError, RobotNotFound, UnknownJoint, ValidationError
from .messages import (
    IntentEvent,
    JointTrajectory,
    Path,
    Pose,
    encode,
    validate,
)
from .registry import EntityKind, Registry, format_topic
from .transforms import slerp

EVENTS_TOPIC = "/system/intent_events"

_PHASE_RANK = {"preview_started": 0, "execution_started": 1, "completed": 2}


@dataclass(frozen=True)
class IntentConfig:
    """Scheduler settings: preview delay and HMD pose publication rate."""

    delay_seconds: float = 3.0
    pose_rate_hz: float = 30.0

    def check(self) -> None:
        if not (self.delay_seconds >= 0.0):
            raise ValidationError("delay_seconds: must be >= 0")
        if not (1.0 <= self.pose_rate_hz <= 30.0):
            raise ValidationError(
                f"pose_rate_hz: {self.pose_rate_hz} outside [1, 30]"
            )


@dataclass(frozen=True)
class ScheduledIntent:
    intent_id: int
    robot_id: int
    kind: str  # "navigation" | "manipulation"
    payload: Path | JointTrajectory
    preview_epoch: int
    execute_epoch: int


def native_duration_seconds(intent: ScheduledIntent) -> float:
    """Duration the real action takes: path stamp span or last time_from_start."""
    if intent.kind == "navigation":
        poses = intent.payload.poses
        if len(poses) < 2:
            return 0.0
        return (poses[-1].header.stamp - poses[0].header.stamp) / 1e9
    points = intent.payload.points
    return points[-1].time_from_start if points else 0.0


def preview_duration_seconds(intent: ScheduledIntent) -> float:
    native = native_duration_seconds(intent)
    if intent.kind == "navigation":
        delay = (intent.execute_epoch - intent.preview_epoch) / 1e9
        return max(delay, native)
    return native


def _lerp(a: float, b: float, u: float) -> float:
    return a + (b - a) * u


def _sample_navigation(intent: ScheduledIntent, t: float) -> Pose:
    poses = [ps.pose for ps in intent.payload.poses]
    if not poses:
        raise ValidationError("poses: cannot preview an empty path")
    if len(poses) == 1:
        return poses[0]
    duration = preview_duration_seconds(intent)
    if t <= 0.0 or duration <= 0.0:
        fraction = 0.0 if t <= 0.0 else 1.0
    else:
        fraction = min(t / duration, 1.0)
    if fraction <= 0.0:
        return poses[0]
    if fraction >= 1.0:
        return poses[-1]

    # Constant-speed: walk cumulative arc length over waypoint positions.
    seg_lengths = []
    for a, b in zip(poses, poses[1:]):
        dx = b.position.x - a.position.x
        dy = b.position.y - a.position.y
        dz = b.position.z - a.position.z
        seg_lengths.append((dx * dx + dy * dy + dz * dz) ** 0.5)
    total = sum(seg_lengths)
    if total <= 0.0:
        # Degenerate geometry: fall back to uniform progress over waypoints.
        x = fraction * (len(poses) - 1)
        i = min(int(x), len(poses) - 2)
        u = x - i
    else:
        target = fraction * total
        walked = 0.0
        i, u = len(poses) - 2, 1.0
        for j, seg in enumerate(seg_lengths):
            if seg > 0.0 and target <= walked + seg:
                i, u = j, (target - walked) / seg
                break
            walked += seg
    a, b = poses[i], poses[i + 1]
    return Pose(
        position=type(a.position)(
            _lerp(a.position.x, b.position.x, u),
            _lerp(a.position.y, b.position.y, u),
            _lerp(a.position.z, b.position.z, u),
        ),
        orientation=slerp(a.orientation, b.orientation, u),
    )


def _sample_manipulation(intent: ScheduledIntent, t: float) -> dict[str, float]:
    traj = intent.payload
    points = traj.points
    if not points:
        raise ValidationError("points: cannot preview an empty trajectory")
    names = traj.joint_names
    if t <= points[0].time_from_start:
        return dict(zip(names, points[0].positions))
    if t >= points[-1].time_from_start:
        return dict(zip(names, points[-1].positions))
    for a, b in zip(points, points[1:]):
        if t <= b.time_from_start:
            u = (t - a.time_from_start) / (b.time_from_start - a.time_from_start)
            return {
                name: _lerp(pa, pb, u)
                for name, pa, pb in zip(names, a.positions, b.positions)
            }
    return dict(zip(names, points[-1].positions))


def sample_preview(intent: ScheduledIntent, t: float) -> Pose | dict[str, float]:
    """Hologram state ``t`` seconds after preview start (clamped beyond end)."""
    if t < 0.0:
        raise ValidationError("t: must be >= 0")
    if intent.kind == "navigation":
        return _sample_navigation(intent, t)
    return _sample_manipulation(intent, t)


class IntentScheduler:
    """Serializes submissions and clock ticks; sampling stays pure."""

    def __init__(
        self,
        broker: Broker,
        registry: Registry,
        config: IntentConfig | None = None,
        robot_joints: Callable[[int], frozenset[str] | None] | None = None,
    ):
        self._broker = broker
        self._registry = registry
        self._config = config or IntentConfig()
        self._config.check()
        self._robot_joints = robot_joints or (lambda robot_id: None)
        self._lock = threading.RLock()
        self._next_intent_id = 0
        self._intents: dict[int, ScheduledIntent] = {}
        self._status: dict[int, str] = {}  # pending | executing | completed | superseded
        self._pending_by_robot: dict[int, int] = {}
        self._last_now: int | None = None
        broker.create_topic(EVENTS_TOPIC)

    @property
    def config(self) -> IntentConfig:
        return self._config

    def configure(self, config: IntentConfig) -> None:
        """Swap settings; in-flight intents keep their submitted epochs."""
        config.check()
        with self._lock:
            self._config = config

    def intents(self) -> list[tuple[ScheduledIntent, str]]:
        with self._lock:
            return [(self._intents[i], self._status[i]) for i in sorted(self._intents)]

    def get_intent(self, intent_id: int) -> ScheduledIntent:
        return self._intents[intent_id]

    def _check_monotone(self, now: int) -> None:
        if self._last_now is not None and now < self._last_now:
            raise ClockError(f"now {now} regresses below {self._last_now}")
        self._last_now = now

    def _publish_event(self, event: IntentEvent) -> None:
        self._broker.publish(EVENTS_TOPIC, encode(event), event.stamp)

    def _schedule(
        self, robot_id: int, kind: str, payload: Path | JointTrajectory, now: int, topic: str
    ) -> ScheduledIntent:
        self._check_monotone(now)
        # Flush first so event stamps on the topic stay non-decreasing: a
        # predecessor due at or before this submission must be published
        # (stamp <= now) before the preview event stamped now.  Side effect:
        # a predecessor due exactly now counts as started, not superseded.
        self._flush(now)
        delay_ns = seconds_to_ns(self._config.delay_seconds)
        intent = ScheduledIntent(
            intent_id=self._next_intent_id,
            robot_id=robot_id,
            kind=kind,
            payload=payload,
            preview_epoch=now,
            execute_epoch=now + delay_ns,
        )
        self._next_intent_id += 1
        # Supersede the robot's not-yet-executed predecessor, if any.
        previous = self._pending_by_robot.get(robot_id)
        if previous is not None:
            self._status[previous] = "superseded"
        self._intents[intent.intent_id] = intent
        self._status[intent.intent_id] = "pending"
        self._pending_by_robot[robot_id] = intent.intent_id
        self._broker.publish(topic, encode(payload), now)
        self._publish_event(
            IntentEvent(intent.intent_id, robot_id, kind, "preview_started", now)
        )
        return intent

    def submit_navigation(self, robot_id: int, plan: Path, now: int) -> ScheduledIntent:
        with self._lock:
            if self._registry.get(EntityKind.ROBOT, robot_id) is None:
                raise RobotNotFound(f"robot {robot_id} not registered")
            if not plan.poses:
                raise ValidationError("poses: navigation plan must not be empty")
            violations = validate(plan)
            if violations:
                raise ValidationError(violations)
            topic = format_topic(EntityKind.ROBOT, robot_id, "navigation_plan")
            return self._schedule(robot_id, "navigation", plan, now, topic)

    def submit_manipulation(
        self, robot_id: int, trajectory: JointTrajectory, now: int
    ) -> ScheduledIntent:
        with self._lock:
            if self._registry.get(EntityKind.ROBOT, robot_id) is None:
                raise RobotNotFound(f"robot {robot_id} not registered")
            if not trajectory.points:
                raise ValidationError("points: trajectory must not be empty")
            violations = validate(trajectory)
            if violations:
                raise ValidationError(violations)
            known = self._robot_joints(robot_id)
            unknown = [n for n in trajectory.joint_names if known is None or n not in known]
            if unknown:
                raise UnknownJoint(
                    f"joints {unknown} not in robot {robot_id}'s kinematic tree"
                )
            topic = format_topic(EntityKind.ROBOT, robot_id, "joint_trajectory")
            return self._schedule(robot_id, "manipulation", trajectory, now, topic)

    def tick(self, now: int) -> list[IntentEvent]:
        """Flush lifecycle events due at or before ``now`` (inclusive boundary).

        Tolerates arbitrary call spacing; events are stamped with their due
        epoch, ordered by epoch with ties broken by intent id then phase.
        """
        with self._lock:
            self._check_monotone(now)
            return self._flush(now)

    def _flush(self, now: int) -> list[IntentEvent]:
        due: list[IntentEvent] = []
        for intent_id in sorted(self._intents):
            intent = self._intents[intent_id]
            status = self._status[intent_id]
            completion_epoch = intent.execute_epoch + seconds_to_ns(
                native_duration_seconds(intent)
            )
            if status == "pending" and intent.execute_epoch <= now:
                self._status[intent_id] = "executing"
                if self._pending_by_robot.get(intent.robot_id) == intent_id:
                    del self._pending_by_robot[intent.robot_id]
                due.append(
                    IntentEvent(
                        intent_id,
                        intent.robot_id,
                        intent.kind,
                        "execution_started",
                        intent.execute_epoch,
                    )
                )
                status = "executing"
            if status == "executing" and completion_epoch <= now:
                self._status[intent_id] = "completed"
                due.append(
                    IntentEvent(
                        intent_id,
                        intent.robot_id,
                        intent.kind,
                        "completed",
                        completion_epoch,
                    )
                )
        due.sort(key=lambda e: (e.stamp, e.intent_id, _PHASE_RANK[e.phase]))
        for event in due:
            self._publish_event(event)
        return due
