"""Spatial anchoring: first marker becomes the shared reference frame.

The first observed marker is stored at identity and acts as the spatial
anchor for the whole scene; every later marker pose and every HMD pose is
expressed in that frame.  Marker observations arrive as marker-in-HMD
transforms (the detection convention is documented in docs/topics.md as an
assumption of this implementation, not a given), so locating a later marker
needs the observing HMD's own anchor-frame pose.

Mutation is guarded by one lock; transform math is pure.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from .broker import Broker
from .errors import (
    LocalizationUnavailable,
    MarkerNotFound,
    RobotNotFound,
    ValidationError,
)
from .messages import Header, PoseStamped, encode
from .registry import EntityKind, Registry, format_topic
from .transforms import Transform, compose, inverse

ANCHOR_FRAME = "anchor"


@dataclass(frozen=True)
class AnchorEvent:
    marker_label: str
    is_primary: bool
    pose_in_anchor: Transform


@dataclass
class AnchorRegistry:
    """Marker graph rooted at the primary marker, plus manual hologram offsets."""

    primary_marker: str | None = None
    marker_poses: dict[str, Transform] = field(default_factory=dict)
    hologram_offsets: dict[int, Transform] = field(default_factory=dict)


class AnchorService:
    def __init__(self, broker: Broker, registry: Registry):
        self._broker = broker
        self._registry = registry
        self._lock = threading.Lock()
        self.state = AnchorRegistry()
        self._last_hmd_stamp: dict[int, int] = {}

    @property
    def established(self) -> bool:
        return self.state.primary_marker is not None

    def observe_marker(
        self,
        marker_label: str,
        marker_in_hmd: Transform,
        hmd_in_anchor: Transform | None = None,
    ) -> AnchorEvent:
        """Record a marker sighting.

        The first marker ever observed becomes the primary anchor and is
        stored at identity regardless of where the HMD saw it; later markers
        are stored at hmd_in_anchor o marker_in_hmd.  Re-observation
        overwrites the stored pose (latest wins); re-observing the primary
        keeps it at identity.
        """
        if not marker_label:
            raise ValidationError("marker_label: must be non-empty")
        with self._lock:
            if self.state.primary_marker is None:
                self.state.primary_marker = marker_label
                self.state.marker_poses[marker_label] = Transform.identity()
                return AnchorEvent(marker_label, True, Transform.identity())
            if marker_label == self.state.primary_marker:
                return AnchorEvent(marker_label, True, Transform.identity())
            if hmd_in_anchor is None:
                raise LocalizationUnavailable(
                    "locating a non-primary marker requires the observing"
                    " HMD's pose in the anchor frame"
                )
            pose = compose(hmd_in_anchor, marker_in_hmd)
            self.state.marker_poses[marker_label] = pose
            return AnchorEvent(marker_label, False, pose)

    def marker_pose(self, marker_label: str) -> Transform:
        try:
            return self.state.marker_poses[marker_label]
        except KeyError:
            raise MarkerNotFound(f"marker {marker_label!r} not observed") from None

    def relative_transform(self, marker_a: str, marker_b: str) -> Transform:
        """Pose of marker_b expressed in marker_a's frame, at any time."""
        return compose(inverse(self.marker_pose(marker_a)), self.marker_pose(marker_b))

    def push_hmd_pose(self, hmd_id: int, pose: Transform, stamp: int) -> int:
        """Publish one anchor-frame PoseStamped sample on the HMD's topic.

        Rate pacing lives with the scheduler clock; this publishes a single
        sample and enforces strictly increasing stamps per HMD.
        """
        if self._registry.get(EntityKind.HMD, hmd_id) is None:
            raise ValidationError(f"hmd_id: {hmd_id} not registered")
        if not self.established:
            raise LocalizationUnavailable("no spatial anchor observed yet")
        last = self._last_hmd_stamp.get(hmd_id)
        if last is not None and stamp <= last:
            raise ValidationError(
                f"stamp: {stamp} not strictly after previous {last} for hmd {hmd_id}"
            )
        message = PoseStamped(Header(stamp, ANCHOR_FRAME), pose.to_pose())
        topic = format_topic(EntityKind.HMD, hmd_id, "pose")
        offset = self._broker.publish(topic, encode(message), stamp)
        self._last_hmd_stamp[hmd_id] = stamp
        return offset

    def adjust_hologram(self, robot_id: int, delta: Transform) -> Transform:
        """Compose a manual adjustment onto the robot's render offset."""
        if self._registry.get(EntityKind.ROBOT, robot_id) is None:
            raise RobotNotFound(f"robot {robot_id} not registered")
        with self._lock:
            previous = self.state.hologram_offsets.get(robot_id, Transform.identity())
            updated = compose(delta, previous)
            self.state.hologram_offsets[robot_id] = updated
            return updated

    def hologram_offset(self, robot_id: int) -> Transform:
        return self.state.hologram_offsets.get(robot_id, Transform.identity())

    def hologram_pose(self, robot_id: int) -> Transform:
        """Render pose: marker pose composed with the manual offset."""
        record = self._registry.get(EntityKind.ROBOT, robot_id)
        if record is None:
            raise RobotNotFound(f"robot {robot_id} not registered")
        marker = self.marker_pose(record.label)
        return compose(marker, self.hologram_offset(robot_id))
