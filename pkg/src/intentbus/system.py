"""Top-level facade wiring broker, registry, anchors, assets and scheduling.

One System owns one broker and one clock.  Every mutating entry point runs
under a single lock and reads the clock inside it, so the scheduler and the
pose pump always see time move forward even with concurrent callers.  Under
a LogicalClock the caller drives time explicitly with advance_to/advance_by;
under a WallClock, start() launches a ticker thread that flushes due work
every millisecond or so.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .anchors import AnchorService
from .assets import AssetResolver, KinematicTree, RepositoryManifest, fetch_manifest
from .broker import Broker
from .clock import LogicalClock, WallClock, seconds_to_ns
from .config import SystemConfig
from .errors import RobotNotFound, ValidationError
from .intents import IntentConfig, IntentScheduler, ScheduledIntent
from .messages import JointTrajectory, ObjectState, Path, Pose, encode
from .registry import EntityKind, EntityRecord, Registry, format_topic
from .transforms import Transform, compose, inverse


@dataclass
class _PumpSlot:
    latest: Transform
    next_epoch: int


class HmdPosePump:
    """Republishes each localized HMD's latest pose at a fixed rate.

    The first sample goes out the moment the HMD localizes (anchor
    established or rejoined); later samples land at exact period multiples.
    Rate changes apply from the next sample onward.
    """

    def __init__(self, anchors: AnchorService, rate_hz: float):
        self._anchors = anchors
        self._period_ns = self._period_for(rate_hz)
        self._slots: dict[int, _PumpSlot] = {}

    @staticmethod
    def _period_for(rate_hz: float) -> int:
        if not (1.0 <= rate_hz <= 30.0):
            raise ValidationError(f"pose_rate_hz: {rate_hz} outside [1, 30]")
        return round(1e9 / rate_hz)

    def set_rate(self, rate_hz: float) -> None:
        self._period_ns = self._period_for(rate_hz)

    def track(self, hmd_id: int, pose: Transform, now: int) -> None:
        slot = self._slots.get(hmd_id)
        if slot is None:
            self._anchors.push_hmd_pose(hmd_id, pose, now)
            self._slots[hmd_id] = _PumpSlot(latest=pose, next_epoch=now + self._period_ns)
        else:
            slot.latest = pose

    def advance_to(self, t_ns: int) -> None:
        for hmd_id in sorted(self._slots):
            slot = self._slots[hmd_id]
            while slot.next_epoch <= t_ns:
                self._anchors.push_hmd_pose(hmd_id, slot.latest, slot.next_epoch)
                slot.next_epoch += self._period_ns


class System:
    def __init__(self, config: SystemConfig | None = None, clock: LogicalClock | WallClock | None = None):
        self.config = config or SystemConfig()
        self.config.check()
        self.clock = clock if clock is not None else LogicalClock()
        self.broker = Broker()
        self.registry = Registry(self.broker)
        self.anchors = AnchorService(self.broker, self.registry)
        self.scheduler = IntentScheduler(
            self.broker,
            self.registry,
            IntentConfig(self.config.delay_seconds, self.config.pose_rate_hz),
            robot_joints=self._robot_joints,
        )
        self.pump = HmdPosePump(self.anchors, self.config.pose_rate_hz)
        self._trees: dict[int, KinematicTree] = {}
        self._hmd_in_anchor: dict[int, Transform] = {}
        self._robot_resolver: AssetResolver | None = None
        self._object_manifest: RepositoryManifest | None = None
        self._lock = threading.RLock()
        self._ticker: threading.Thread | None = None
        self._stop = threading.Event()

    # -- time ---------------------------------------------------------------

    def now(self) -> int:
        return self.clock.now_ns()

    def advance_to(self, t_ns: int) -> None:
        """Drive a logical clock forward, flushing pump samples and intents."""
        with self._lock:
            self.clock.advance_to(t_ns)
            self.pump.advance_to(t_ns)
            self.scheduler.tick(t_ns)

    def advance_by(self, dt_ns: int) -> None:
        self.advance_to(self.clock.now_ns() + dt_ns)

    def start(self, tick_interval: float = 0.001) -> None:
        """Launch the wall-clock ticker; no-op if already running."""
        with self._lock:
            if self._ticker is not None:
                return
            self._stop.clear()
            self._ticker = threading.Thread(
                target=self._tick_loop, args=(tick_interval,), daemon=True
            )
            self._ticker.start()

    def close(self) -> None:
        self._stop.set()
        ticker, self._ticker = self._ticker, None
        if ticker is not None:
            ticker.join(timeout=2.0)

    def _tick_loop(self, interval: float) -> None:
        while not self._stop.wait(interval):
            with self._lock:
                now = self.clock.now_ns()
                self.pump.advance_to(now)
                self.scheduler.tick(now)

    # -- assets ---------------------------------------------------------------

    def robot_resolver(self) -> AssetResolver:
        with self._lock:
            if self._robot_resolver is None:
                self._robot_resolver = AssetResolver(fetch_manifest(self.config.robot_repository))
            return self._robot_resolver

    def object_manifest(self) -> RepositoryManifest:
        with self._lock:
            if self._object_manifest is None:
                self._object_manifest = fetch_manifest(self.config.object_repository)
            return self._object_manifest

    def tree_for(self, robot_id: int) -> KinematicTree | None:
        return self._trees.get(robot_id)

    def _robot_joints(self, robot_id: int) -> frozenset[str] | None:
        tree = self._trees.get(robot_id)
        return tree.moving_joint_names() if tree is not None else None

    # -- registration and anchoring -------------------------------------------

    def register_robot(self, marker_label: str, model: str | None = None) -> EntityRecord:
        with self._lock:
            record = self.registry.register_robot(marker_label)
            if model is not None and record.id not in self._trees:
                self._trees[record.id] = self.robot_resolver().resolve_robot(model)
            return record

    def register_hmd(self) -> EntityRecord:
        with self._lock:
            return self.registry.register_hmd()

    def register_object(self, category: str) -> EntityRecord:
        with self._lock:
            return self.registry.register_object(category)

    def observe_marker(self, hmd_id: int, marker_label: str, marker_in_hmd: Transform):
        """One marker sighting: localizes the HMD and/or places the marker.

        Sighting a known marker re-localizes the HMD from the stored marker
        pose; sighting an unknown one places it using the HMD's current
        localization.  The very first sighting establishes the anchor, so it
        both places the marker (at identity) and localizes the observer.
        """
        with self._lock:
            if self.registry.get(EntityKind.HMD, hmd_id) is None:
                raise ValidationError(f"hmd_id: {hmd_id} not registered")
            now = self.clock.now_ns()
            known = (
                self.anchors.established
                and marker_label in self.anchors.state.marker_poses
            )
            if known or not self.anchors.established:
                event = self.anchors.observe_marker(marker_label, marker_in_hmd)
                hmd_pose = compose(event.pose_in_anchor, inverse(marker_in_hmd))
            else:
                hmd_pose = self._hmd_in_anchor.get(hmd_id)
                # New marker seen by a never-localized HMD cannot be placed;
                # anchors raises LocalizationUnavailable on the None pose.
                event = self.anchors.observe_marker(marker_label, marker_in_hmd, hmd_pose)
            self._hmd_in_anchor[hmd_id] = hmd_pose
            self.pump.track(hmd_id, hmd_pose, now)
            return event

    def hmd_pose(self, hmd_id: int) -> Transform | None:
        return self._hmd_in_anchor.get(hmd_id)

    def adjust_hologram(self, robot_id: int, delta: Transform) -> Transform:
        with self._lock:
            return self.anchors.adjust_hologram(robot_id, delta)

    # -- publishing and intents -------------------------------------------------

    def publish_object_state(
        self,
        object_id: int,
        pose: Pose,
        joint_names: tuple[str, ...] = (),
        joint_positions: tuple[float, ...] = (),
    ) -> int:
        with self._lock:
            record = self.registry.get(EntityKind.OBJECT, object_id)
            if record is None:
                raise ValidationError(f"object_id: {object_id} not registered")
            state = ObjectState(record.label, pose, tuple(joint_names), tuple(joint_positions))
            topic = format_topic(EntityKind.OBJECT, object_id, "state")
            return self.broker.publish(topic, encode(state), self.clock.now_ns())

    def submit_navigation(self, robot_id: int, plan: Path) -> ScheduledIntent:
        with self._lock:
            return self.scheduler.submit_navigation(robot_id, plan, self.clock.now_ns())

    def submit_manipulation(self, robot_id: int, trajectory: JointTrajectory) -> ScheduledIntent:
        with self._lock:
            return self.scheduler.submit_manipulation(robot_id, trajectory, self.clock.now_ns())

    def configure(self, delay_seconds: float | None = None, pose_rate_hz: float | None = None) -> IntentConfig:
        """Update timing knobs; already-submitted intents keep their epochs."""
        with self._lock:
            current = self.scheduler.config
            updated = IntentConfig(
                delay_seconds if delay_seconds is not None else current.delay_seconds,
                pose_rate_hz if pose_rate_hz is not None else current.pose_rate_hz,
            )
            self.scheduler.configure(updated)
            if pose_rate_hz is not None:
                self.pump.set_rate(pose_rate_hz)
            return updated
