"""Embedded append-only-log broker with pull-based consumer offsets.

Records live in per-topic offset logs; consumers pull by offset and commit
cursors themselves.  The broker never pushes data: readiness signals only
wake a consumer so it can fetch.  "Replication" is modeled as N synchronized
in-memory copies of every log with an injectable failure switch, enough to
demonstrate that losing one replica loses no acknowledged record.

Thread safety: publish is linearizable per topic (per-topic lock); fetch is
wait-free with respect to publishers because logs are append-only and reads
snapshot the length first.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from typing import Iterable, Protocol

from .errors import OffsetOutOfRange, TopicNameError, TopicNotFound, ValidationError

# Broker-level naming grammar; the entity-topic grammar layered on top of it
# lives in registry.py (see docs/topics.md).
_TOPIC_NAME_RE = re.compile(r"^(/[a-z0-9_]+)+$")


@dataclass(frozen=True)
class Record:
    """One published message: (topic, offset) is its immutable identity."""

    topic: str
    offset: int
    publish_stamp: int
    payload: bytes


class BrokerLike(Protocol):
    """Publish/fetch/commit contract.

    The embedded broker below implements it; an external log-backed broker
    connector (e.g. a production streaming cluster) would implement the same
    surface and can be swapped in at the gateway layer.  Interface stub only;
    no external connector ships here.
    """

    def create_topic(self, name: str) -> "TopicLog": ...

    def publish(self, topic: str, payload: bytes, stamp: int) -> int: ...

    def fetch(self, topic: str, from_offset: int, max_records: int | None = None) -> list[Record]: ...

    def commit(self, consumer_id: str, topic: str, offset: int) -> None: ...

    def committed_offset(self, consumer_id: str, topic: str) -> int: ...


class ReadinessSignal:
    """Level-triggered wakeup; publish sets it, the consumer clears it.

    Coalescing is allowed: a burst of publishes may produce a single wakeup.
    Data still moves exclusively through fetch.
    """

    def __init__(self):
        self._event = threading.Event()

    def fire(self) -> None:
        self._event.set()

    def wait(self, timeout: float | None = None) -> bool:
        return self._event.wait(timeout)

    def clear(self) -> None:
        self._event.clear()

    def is_set(self) -> bool:
        return self._event.is_set()


class TopicLog:
    """Replicated append-only record log for one topic."""

    def __init__(self, name: str, replicas: int, dead_replicas: set[int]):
        if replicas < 1:
            raise ValidationError("replicas: must be >= 1")
        self.name = name
        self._copies: list[list[Record]] = [[] for _ in range(replicas)]
        self._dead = dead_replicas  # shared with the broker, mutated there
        self._lock = threading.Lock()
        self._signals: list[ReadinessSignal] = []
        self._last_stamp: int | None = None

    def _alive_indices(self) -> list[int]:
        return [i for i in range(len(self._copies)) if i not in self._dead]

    def _read_copy(self) -> list[Record]:
        alive = self._alive_indices()
        if not alive:
            raise TopicNotFound(f"all replicas of {self.name} are down")
        return self._copies[alive[0]]

    def __len__(self) -> int:
        return len(self._read_copy())

    def append(self, payload: bytes, stamp: int) -> int:
        if not isinstance(payload, (bytes, bytearray)):
            raise ValidationError("payload: must be bytes")
        with self._lock:
            if self._last_stamp is not None and stamp < self._last_stamp:
                raise ValidationError(
                    f"publish_stamp: {stamp} regresses below {self._last_stamp}"
                    f" on {self.name}"
                )
            offset = len(self._read_copy())
            record = Record(self.name, offset, stamp, bytes(payload))
            # Durable in every live replica before the offset is acknowledged.
            for i in self._alive_indices():
                self._copies[i].append(record)
            self._last_stamp = stamp
            signals = list(self._signals)
        for signal in signals:
            signal.fire()
        return offset

    def read(self, from_offset: int, max_records: int | None = None) -> list[Record]:
        if from_offset < 0:
            raise ValidationError("from_offset: must be >= 0")
        copy = self._read_copy()
        end = len(copy)  # snapshot; appended records past this are invisible
        if max_records is not None:
            end = min(end, from_offset + max_records)
        return copy[from_offset:end]

    def subscribe_signal(self) -> ReadinessSignal:
        signal = ReadinessSignal()
        with self._lock:
            self._signals.append(signal)
        return signal

    def unsubscribe(self, signal: ReadinessSignal) -> None:
        with self._lock:
            if signal in self._signals:
                self._signals.remove(signal)

    def replica_lengths(self) -> dict[int, int]:
        return {i: len(self._copies[i]) for i in self._alive_indices()}


class Broker:
    """In-process broker holding all topic logs and consumer cursors."""

    def __init__(self, replication_factor: int = 2):
        if replication_factor < 1:
            raise ValidationError("replication_factor: must be >= 1")
        self._replication_factor = replication_factor
        self._topics: dict[str, TopicLog] = {}
        self._cursors: dict[tuple[str, str], int] = {}
        self._dead_replicas: set[int] = set()
        self._lock = threading.Lock()

    # -- topics -------------------------------------------------------------

    def create_topic(self, name: str) -> TopicLog:
        if not _TOPIC_NAME_RE.match(name):
            raise TopicNameError(
                f"invalid topic name {name!r}: expected /segment(/segment)*"
                " with segments of [a-z0-9_]+"
            )
        with self._lock:
            log = self._topics.get(name)
            if log is None:
                log = TopicLog(name, self._replication_factor, self._dead_replicas)
                self._topics[name] = log
            return log

    def topic(self, name: str) -> TopicLog:
        try:
            return self._topics[name]
        except KeyError:
            raise TopicNotFound(f"unknown topic {name!r}") from None

    def has_topic(self, name: str) -> bool:
        return name in self._topics

    def topic_names(self) -> list[str]:
        return sorted(self._topics)

    # -- data plane ----------------------------------------------------------

    def publish(self, topic: str, payload: bytes, stamp: int) -> int:
        return self.topic(topic).append(payload, stamp)

    def fetch(self, topic: str, from_offset: int, max_records: int | None = None) -> list[Record]:
        return self.topic(topic).read(from_offset, max_records)

    def length(self, topic: str) -> int:
        return len(self.topic(topic))

    def subscribe_signal(self, topic: str) -> ReadinessSignal:
        return self.topic(topic).subscribe_signal()

    # -- consumer cursors ----------------------------------------------------

    def commit(self, consumer_id: str, topic: str, offset: int) -> None:
        log = self.topic(topic)
        if offset < 0 or offset > len(log):
            raise OffsetOutOfRange(
                f"offset {offset} outside [0, {len(log)}] for {topic!r}"
            )
        with self._lock:
            self._cursors[(consumer_id, topic)] = offset

    def committed_offset(self, consumer_id: str, topic: str) -> int:
        self.topic(topic)  # raise TopicNotFound for unknown topics
        return self._cursors.get((consumer_id, topic), 0)

    # -- replica failure injection --------------------------------------------

    def kill_replica(self, index: int) -> None:
        """Simulate losing one replica server; its copies become unreadable."""
        if not (0 <= index < self._replication_factor):
            raise ValidationError(f"replica index {index} outside replication factor")
        with self._lock:
            self._dead_replicas.add(index)

    def alive_replicas(self) -> list[int]:
        return [i for i in range(self._replication_factor) if i not in self._dead_replicas]


class Consumer:
    """Pull-side helper binding a consumer id to its committed cursors.

    Recreating a Consumer with the same id resumes from the committed
    offsets, which is how restart-after-commit is modeled desk-scale.
    """

    def __init__(self, broker: Broker, consumer_id: str):
        self.broker = broker
        self.consumer_id = consumer_id

    def position(self, topic: str) -> int:
        return self.broker.committed_offset(self.consumer_id, topic)

    def poll(self, topic: str, max_records: int | None = None) -> list[Record]:
        return self.broker.fetch(topic, self.position(topic), max_records)

    def commit(self, topic: str, offset: int) -> None:
        self.broker.commit(self.consumer_id, topic, offset)


def replay(broker: Broker, topic: str) -> Iterable[Record]:
    """Full replay of a topic from offset 0."""
    return iter(broker.fetch(topic, 0))
