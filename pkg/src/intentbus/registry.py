"""Entity registry: topic naming grammar and automatic id assignment.

Entities come in three kinds (robot, hmd, object); each registration takes
the next free integer id for its kind (0, 1, 2, ... with no reuse) and
creates the kind's topics in the broker:

    robot  -> /robot/{id}/navigation_plan, /robot/{id}/joint_trajectory
    hmd    -> /hmd/{id}/pose
    object -> /object/{id}/state

Robots are keyed idempotently by their marker label (re-registering a label
returns the original record); each object detection gets a fresh id.  The
full grammar is documented as BNF in docs/topics.md.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum

from .broker import Broker
from .errors import ParseError, ValidationError


class EntityKind(str, Enum):
    ROBOT = "robot"
    HMD = "hmd"
    OBJECT = "object"


CHANNELS: dict[EntityKind, tuple[str, ...]] = {
    EntityKind.ROBOT: ("navigation_plan", "joint_trajectory"),
    EntityKind.HMD: ("pose",),
    EntityKind.OBJECT: ("state",),
}

_KIND_BY_NAME = {k.value: k for k in EntityKind}


@dataclass(frozen=True)
class EntityRecord:
    kind: EntityKind
    id: int
    label: str
    topics: tuple[str, ...]


def format_topic(kind: EntityKind, entity_id: int, channel: str) -> str:
    if channel not in CHANNELS[kind]:
        raise ValidationError(f"channel: {channel!r} not valid for kind {kind.value}")
    if entity_id < 0:
        raise ValidationError("id: must be >= 0")
    return f"/{kind.value}/{entity_id}/{channel}"


def parse_topic(name: str) -> tuple[EntityKind, int, str]:
    """Total parse of /{kind}/{id}/{channel}; raises ParseError with position.

    The id segment must be a canonical decimal (no leading zeros, no sign) so
    that parse_topic(format_topic(...)) round-trips exactly.
    """
    if not isinstance(name, str):
        raise ParseError("topic must be a string", 0)
    if not name.startswith("/"):
        raise ParseError("topic must start with '/'", 0)
    parts = name.split("/")
    # parts[0] is the empty string before the leading slash
    if len(parts) != 4 or parts[0] != "":
        raise ParseError("expected exactly /{kind}/{id}/{channel}", len(name))
    kind_str, id_str, channel = parts[1], parts[2], parts[3]
    kind = _KIND_BY_NAME.get(kind_str)
    if kind is None:
        raise ParseError(f"unknown kind {kind_str!r}", 1)
    id_pos = 2 + len(kind_str)
    if not id_str.isascii() or not id_str.isdigit():
        raise ParseError(f"id segment {id_str!r} is not a decimal integer", id_pos)
    if len(id_str) > 1 and id_str[0] == "0":
        raise ParseError(f"id segment {id_str!r} has leading zeros", id_pos)
    channel_pos = id_pos + len(id_str) + 1
    if channel not in CHANNELS[kind]:
        raise ParseError(
            f"channel {channel!r} not valid for kind {kind.value}", channel_pos
        )
    return kind, int(id_str), channel


class Registry:
    """Single-writer registry over a broker; reads are lock-free."""

    def __init__(self, broker: Broker):
        self._broker = broker
        self._lock = threading.Lock()
        self._counters: dict[EntityKind, int] = {k: 0 for k in EntityKind}
        self._records: dict[tuple[EntityKind, int], EntityRecord] = {}
        self._robot_by_label: dict[str, EntityRecord] = {}

    def _allocate(self, kind: EntityKind, label: str) -> EntityRecord:
        entity_id = self._counters[kind]
        self._counters[kind] = entity_id + 1
        topics = tuple(format_topic(kind, entity_id, ch) for ch in CHANNELS[kind])
        for topic in topics:
            self._broker.create_topic(topic)
        record = EntityRecord(kind, entity_id, label, topics)
        self._records[(kind, entity_id)] = record
        return record

    def register_robot(self, marker_label: str) -> EntityRecord:
        """Assign the next robot id for a new marker label; idempotent per label."""
        if not marker_label:
            raise ValidationError("marker_label: must be non-empty")
        with self._lock:
            existing = self._robot_by_label.get(marker_label)
            if existing is not None:
                return existing
            record = self._allocate(EntityKind.ROBOT, marker_label)
            self._robot_by_label[marker_label] = record
            return record

    def register_hmd(self) -> EntityRecord:
        with self._lock:
            return self._allocate(EntityKind.HMD, "")

    def register_object(self, category: str) -> EntityRecord:
        """Each detection instance gets a fresh id, even within one category."""
        if not category:
            raise ValidationError("category: must be non-empty")
        with self._lock:
            return self._allocate(EntityKind.OBJECT, category)

    # -- lookups --------------------------------------------------------------

    def get(self, kind: EntityKind, entity_id: int) -> EntityRecord | None:
        return self._records.get((kind, entity_id))

    def robot_by_label(self, marker_label: str) -> EntityRecord | None:
        return self._robot_by_label.get(marker_label)

    def records(self, kind: EntityKind | None = None) -> list[EntityRecord]:
        out = [r for r in self._records.values() if kind is None or r.kind == kind]
        return sorted(out, key=lambda r: (r.kind.value, r.id))

    def entity_topics(self) -> set[str]:
        return {t for r in self._records.values() for t in r.topics}
