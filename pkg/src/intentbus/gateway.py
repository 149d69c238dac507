"""Framed gateway service plus a small client.

Clients speak JSON frames over one of two transports on the same port:

  - raw TCP with a 4-byte big-endian length prefix per frame, or
  - RFC 6455 WebSocket (for browsers); the HTTP upgrade is detected by the
    first four bytes of the connection being "GET " which can never be a
    sane length prefix.

Frame grammar lives in docs/wire-format.md.  Every request frame gets
exactly one response (echo type) or ERROR carrying the same corr id.
Subscriptions push EVENT frames that carry broker records verbatim; the
gateway itself is just another pull consumer holding a cursor per
subscription, so the broker core stays pull-based.

Malformed JSON in a well-delimited frame answers with an ERROR frame and
keeps the session; transport-level garbage (oversized length, bad
handshake) closes only the offending connection.
"""

from __future__ import annotations

import base64
import hashlib
import json
import socket
import struct
import threading
from typing import Any

from .config import parse_bind
from .errors import IntentBusError, NotFound, ValidationError
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
    kind_for_channel,
)
from .registry import EntityRecord, parse_topic
from .system import System
from .transforms import Transform

MAX_FRAME = 1 << 24
FRAME_TYPES = ("SUBSCRIBE", "PUBLISH", "FETCH", "EVENT", "COMMAND", "ERROR")
_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


class TransportClosed(Exception):
    """Peer went away or the byte stream is unrecoverable."""


def _read_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise TransportClosed("connection closed")
        buf.extend(chunk)
    return bytes(buf)


class _TcpTransport:
    """Length-prefixed frames: 4-byte big-endian size, then that many bytes."""

    def __init__(self, sock: socket.socket):
        self._sock = sock

    def recv_bytes(self, first4: bytes | None = None) -> bytes:
        header = first4 if first4 is not None else _read_exact(self._sock, 4)
        (size,) = struct.unpack(">I", header)
        if size > MAX_FRAME:
            raise TransportClosed(f"frame of {size} bytes exceeds limit")
        return _read_exact(self._sock, size)

    def send_bytes(self, data: bytes) -> None:
        self._sock.sendall(struct.pack(">I", len(data)) + data)


class _WsTransport:
    """Server side of an RFC 6455 connection; text frames carry the JSON."""

    def __init__(self, sock: socket.socket):
        self._sock = sock

    @staticmethod
    def accept_key(key: str) -> str:
        digest = hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()
        return base64.b64encode(digest).decode("ascii")

    def handshake(self, already_read: bytes) -> None:
        data = bytearray(already_read)
        while b"\r\n\r\n" not in data:
            if len(data) > 16384:
                raise TransportClosed("oversized websocket handshake")
            chunk = self._sock.recv(4096)
            if not chunk:
                raise TransportClosed("connection closed during handshake")
            data.extend(chunk)
        head = bytes(data).split(b"\r\n\r\n", 1)[0].decode("latin-1")
        headers = {}
        for line in head.split("\r\n")[1:]:
            name, sep, value = line.partition(":")
            if sep:
                headers[name.strip().lower()] = value.strip()
        key = headers.get("sec-websocket-key")
        if "websocket" not in headers.get("upgrade", "").lower() or not key:
            self._sock.sendall(b"HTTP/1.1 400 Bad Request\r\nConnection: close\r\n\r\n")
            raise TransportClosed("not a websocket upgrade")
        response = (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {self.accept_key(key)}\r\n\r\n"
        )
        self._sock.sendall(response.encode("ascii"))

    def _read_frame(self) -> tuple[int, bool, bytes]:
        b0, b1 = _read_exact(self._sock, 2)
        fin = bool(b0 & 0x80)
        opcode = b0 & 0x0F
        masked = bool(b1 & 0x80)
        length = b1 & 0x7F
        if length == 126:
            (length,) = struct.unpack(">H", _read_exact(self._sock, 2))
        elif length == 127:
            (length,) = struct.unpack(">Q", _read_exact(self._sock, 8))
        if length > MAX_FRAME:
            raise TransportClosed(f"websocket frame of {length} bytes exceeds limit")
        if not masked:
            raise TransportClosed("client frames must be masked")
        mask = _read_exact(self._sock, 4)
        payload = bytearray(_read_exact(self._sock, length))
        for i in range(len(payload)):
            payload[i] ^= mask[i % 4]
        return opcode, fin, bytes(payload)

    def recv_bytes(self) -> bytes:
        message = bytearray()
        in_message = False
        while True:
            opcode, fin, payload = self._read_frame()
            if opcode == 0x8:  # close
                try:
                    self._send_raw(0x8, payload[:2])
                except OSError:
                    pass
                raise TransportClosed("websocket close")
            if opcode == 0x9:  # ping
                self._send_raw(0xA, payload)
                continue
            if opcode == 0xA:  # pong
                continue
            if opcode in (0x1, 0x2):
                if in_message:
                    raise TransportClosed("interleaved websocket messages")
                in_message = True
                message.extend(payload)
            elif opcode == 0x0:
                if not in_message:
                    raise TransportClosed("continuation without a message")
                message.extend(payload)
            else:
                raise TransportClosed(f"unsupported websocket opcode {opcode}")
            if fin and in_message:
                return bytes(message)

    def _send_raw(self, opcode: int, payload: bytes) -> None:
        header = bytearray([0x80 | opcode])
        n = len(payload)
        if n < 126:
            header.append(n)
        elif n <= 0xFFFF:
            header.append(126)
            header.extend(struct.pack(">H", n))
        else:
            header.append(127)
            header.extend(struct.pack(">Q", n))
        self._sock.sendall(bytes(header) + payload)

    def send_bytes(self, data: bytes) -> None:
        self._send_raw(0x1, data)


def _xform_to_obj(t: Transform) -> dict:
    return {
        "translation": [t.translation.x, t.translation.y, t.translation.z],
        "rotation": [t.rotation.x, t.rotation.y, t.rotation.z, t.rotation.w],
    }


def _floats_of(raw: Any, n: int, where: str) -> list[float]:
    if (
        not isinstance(raw, list)
        or len(raw) != n
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)
    ):
        raise ValidationError(f"{where}: expected a list of {n} numbers")
    return [float(v) for v in raw]


def _xform_from_obj(raw: Any, where: str) -> Transform:
    if not isinstance(raw, dict):
        raise ValidationError(f"{where}: expected an object")
    translation = Vector3(*_floats_of(raw["translation"], 3, f"{where}.translation")) if "translation" in raw else Vector3(0.0, 0.0, 0.0)
    rotation = Quaternion(*_floats_of(raw["rotation"], 4, f"{where}.rotation")) if "rotation" in raw else Quaternion(0.0, 0.0, 0.0, 1.0)
    return Transform(translation, rotation)


def _pose_from_obj(raw: Any, where: str) -> Pose:
    if not isinstance(raw, dict):
        raise ValidationError(f"{where}: expected an object")
    position = Vector3(*_floats_of(raw["position"], 3, f"{where}.position")) if "position" in raw else Vector3(0.0, 0.0, 0.0)
    orientation = Quaternion(*_floats_of(raw["orientation"], 4, f"{where}.orientation")) if "orientation" in raw else Quaternion(0.0, 0.0, 0.0, 1.0)
    return Pose(position, orientation)


def _record_obj(record) -> dict:
    return {
        "offset": record.offset,
        "stamp": record.publish_stamp,
        "payload": record.payload.decode("ascii"),
    }


def _entity_obj(record: EntityRecord) -> dict:
    return {
        "kind": record.kind.value,
        "id": record.id,
        "label": record.label,
        "topics": list(record.topics),
    }


def _tree_obj(tree) -> dict:
    return {
        "name": tree.name,
        "root": tree.root,
        "links": [{"name": l.name, "visual_mesh": l.visual_mesh} for l in tree.links],
        "joints": [
            {
                "name": j.name,
                "type": j.type,
                "parent": j.parent,
                "child": j.child,
                "origin": _xform_to_obj(j.origin),
                "axis": [j.axis.x, j.axis.y, j.axis.z] if j.axis is not None else None,
                "limits": list(j.limits) if j.limits is not None else None,
            }
            for j in tree.joints
        ],
    }


def _manifest_obj(manifest) -> dict:
    entries = []
    for e in manifest.entries:
        obj = {"name": e.name, "kind": e.kind, "uri": e.uri, "checksum": e.checksum}
        if e.bounding_box is not None:
            obj["bounding_box"] = list(e.bounding_box)
        entries.append(obj)
    return {"repository": manifest.repository, "entries": entries}


class _Session:
    def __init__(self, server: "GatewayServer", sock: socket.socket, transport):
        self._server = server
        self._sock = sock
        self._transport = transport
        self._send_lock = threading.Lock()
        self.closed = threading.Event()
        self._signals: list[tuple[str, Any]] = []

    def send(self, obj: dict) -> None:
        data = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("ascii")
        try:
            with self._send_lock:
                self._transport.send_bytes(data)
        except OSError as exc:
            raise TransportClosed(str(exc)) from exc

    def close(self) -> None:
        self.closed.set()
        for topic, signal in self._signals:
            try:
                self._server.system.broker.topic(topic).unsubscribe(signal)
            except IntentBusError:
                pass
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


class GatewayServer:
    """Accept loop + per-session reader threads around one System."""

    def __init__(self, system: System, bind: str = "127.0.0.1:0"):
        self.system = system
        self._bind = bind
        self._listener: socket.socket | None = None
        self._threads: list[threading.Thread] = []
        self._sessions: list[_Session] = []
        self._lock = threading.Lock()
        self._stopping = threading.Event()
        self.address: tuple[str, int] | None = None

    def start(self) -> tuple[str, int]:
        host, port = parse_bind(self._bind)
        self._listener = socket.create_server((host, port))
        self.address = self._listener.getsockname()[:2]
        accept = threading.Thread(target=self._accept_loop, daemon=True)
        accept.start()
        self._threads.append(accept)
        return self.address

    def close(self) -> None:
        self._stopping.set()
        if self._listener is not None:
            # shutdown first: closing alone leaves a blocked accept() sleeping
            try:
                self._listener.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                self._listener.close()
            except OSError:
                pass
        with self._lock:
            sessions = list(self._sessions)
        for session in sessions:
            session.close()
        for thread in self._threads:
            thread.join(timeout=2.0)

    def __enter__(self) -> "GatewayServer":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _accept_loop(self) -> None:
        assert self._listener is not None
        while not self._stopping.is_set():
            try:
                sock, _addr = self._listener.accept()
            except OSError:
                return
            thread = threading.Thread(target=self._serve_connection, args=(sock,), daemon=True)
            thread.start()
            self._threads.append(thread)

    def _serve_connection(self, sock: socket.socket) -> None:
        session: _Session | None = None
        try:
            first4 = _read_exact(sock, 4)
            if first4 == b"GET ":
                transport = _WsTransport(sock)
                transport.handshake(b"GET ")
                first_frame = None
            else:
                transport = _TcpTransport(sock)
                first_frame = transport.recv_bytes(first4)
            session = _Session(self, sock, transport)
            with self._lock:
                self._sessions.append(session)
            if first_frame is not None:
                self._handle_raw(session, first_frame)
            while not self._stopping.is_set() and not session.closed.is_set():
                self._handle_raw(session, transport.recv_bytes())
        except (TransportClosed, OSError):
            pass
        finally:
            if session is not None:
                session.close()
                with self._lock:
                    if session in self._sessions:
                        self._sessions.remove(session)
            else:
                sock.close()

    def _handle_raw(self, session: _Session, data: bytes) -> None:
        corr = None
        try:
            frame = json.loads(data.decode("utf-8"))
            if not isinstance(frame, dict):
                raise ValidationError("frame: must be a JSON object")
            corr = frame.get("corr")
            self._dispatch(session, frame)
        except TransportClosed:
            raise
        except IntentBusError as exc:
            session.send(
                {"type": "ERROR", "corr": corr, "error": type(exc).__name__, "message": str(exc)}
            )
        except (ValueError, KeyError, TypeError) as exc:
            session.send(
                {"type": "ERROR", "corr": corr, "error": "BadFrame", "message": str(exc)}
            )

    def _dispatch(self, session: _Session, frame: dict) -> None:
        ftype = frame.get("type")
        corr = frame.get("corr")
        if ftype not in FRAME_TYPES:
            raise ValidationError(f"type: {ftype!r} not one of {sorted(FRAME_TYPES)}")
        if not isinstance(corr, int):
            raise ValidationError("corr: required integer correlation id")
        if ftype == "SUBSCRIBE":
            topic = frame.get("topic")
            from_offset = frame.get("from_offset", 0)
            if not isinstance(topic, str):
                raise ValidationError("topic: required string")
            if not isinstance(from_offset, int) or from_offset < 0:
                raise ValidationError("from_offset: must be an integer >= 0")
            log = self.system.broker.topic(topic)  # TopicNotFound propagates
            signal = log.subscribe_signal()
            session._signals.append((topic, signal))
            session.send({"type": "SUBSCRIBE", "corr": corr, "topic": topic, "from_offset": from_offset})
            pusher = threading.Thread(
                target=self._push_loop,
                args=(session, corr, topic, from_offset, signal),
                daemon=True,
            )
            pusher.start()
            self._threads.append(pusher)
        elif ftype == "PUBLISH":
            topic = frame.get("topic")
            payload = frame.get("payload")
            if not isinstance(topic, str) or not isinstance(payload, str):
                raise ValidationError("topic and payload: required strings")
            _kind, _id, channel = parse_topic(topic)
            try:
                raw = payload.encode("ascii")
            except UnicodeEncodeError as exc:
                raise ValidationError(f"payload: must be ascii: {exc}") from exc
            decode(kind_for_channel(channel), raw)  # full validation before any write
            offset = self.system.broker.publish(topic, raw, self.system.now())
            session.send({"type": "PUBLISH", "corr": corr, "topic": topic, "offset": offset})
        elif ftype == "FETCH":
            topic = frame.get("topic")
            from_offset = frame.get("from_offset", 0)
            max_records = frame.get("max_records")
            if not isinstance(topic, str):
                raise ValidationError("topic: required string")
            if not isinstance(from_offset, int) or from_offset < 0:
                raise ValidationError("from_offset: must be an integer >= 0")
            if max_records is not None and (not isinstance(max_records, int) or max_records < 0):
                raise ValidationError("max_records: must be an integer >= 0")
            records = self.system.broker.fetch(topic, from_offset, max_records)
            session.send(
                {
                    "type": "FETCH",
                    "corr": corr,
                    "topic": topic,
                    "records": [_record_obj(r) for r in records],
                    "next_offset": from_offset + len(records),
                    "end_offset": self.system.broker.length(topic),
                }
            )
        elif ftype == "COMMAND":
            name = frame.get("name")
            args = frame.get("args", {})
            if not isinstance(name, str) or not isinstance(args, dict):
                raise ValidationError("name: required string; args: object")
            result = self._command(name, args)
            session.send({"type": "COMMAND", "corr": corr, "name": name, "result": result})
        else:  # EVENT or ERROR from a client makes no sense
            raise ValidationError(f"type: {ftype} frames are server-sent only")

    def _push_loop(self, session: _Session, corr: int, topic: str, from_offset: int, signal) -> None:
        cursor = from_offset
        broker = self.system.broker
        try:
            while not session.closed.is_set() and not self._stopping.is_set():
                records = broker.fetch(topic, cursor)
                for record in records:
                    session.send({"type": "EVENT", "sub": corr, "topic": topic, "record": _record_obj(record)})
                cursor += len(records)
                if signal.wait(timeout=0.1):
                    signal.clear()
        except (TransportClosed, OSError):
            pass
        finally:
            try:
                broker.topic(topic).unsubscribe(signal)
            except IntentBusError:
                pass

    def _build_path(self, args: dict) -> Path:
        waypoints = args.get("waypoints")
        if not isinstance(waypoints, list) or not waypoints:
            raise ValidationError("waypoints: required non-empty list")
        frame = args.get("frame", "anchor")
        base = self.system.now()
        poses = []
        for i, raw in enumerate(waypoints):
            where = f"waypoints[{i}]"
            if not isinstance(raw, dict):
                raise ValidationError(f"{where}: expected an object")
            offset = raw.get("t", 0.0)
            if not isinstance(offset, (int, float)) or isinstance(offset, bool) or offset < 0:
                raise ValidationError(f"{where}.t: must be a number >= 0")
            stamp = base + round(float(offset) * 1e9)
            poses.append(PoseStamped(Header(stamp, frame), _pose_from_obj(raw, where)))
        return Path(Header(base, frame), tuple(poses))

    def _build_trajectory(self, args: dict) -> JointTrajectory:
        raw = args.get("trajectory")
        if not isinstance(raw, dict):
            raise ValidationError("trajectory: required object")
        names = raw.get("joint_names")
        raw_points = raw.get("points")
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            raise ValidationError("trajectory.joint_names: required list of strings")
        if not isinstance(raw_points, list) or not raw_points:
            raise ValidationError("trajectory.points: required non-empty list")
        points = []
        for i, rp in enumerate(raw_points):
            where = f"trajectory.points[{i}]"
            if not isinstance(rp, dict) or not isinstance(rp.get("positions"), list):
                raise ValidationError(f"{where}: expected object with positions")
            tfs = rp.get("time_from_start", 0.0)
            if not isinstance(tfs, (int, float)) or isinstance(tfs, bool):
                raise ValidationError(f"{where}.time_from_start: must be a number")
            points.append(
                JointTrajectoryPoint(
                    positions=tuple(_floats_of(rp["positions"], len(rp["positions"]), f"{where}.positions")),
                    velocities=tuple(_floats_of(rp["velocities"], len(rp["velocities"]), f"{where}.velocities")) if "velocities" in rp else (),
                    accelerations=tuple(_floats_of(rp["accelerations"], len(rp["accelerations"]), f"{where}.accelerations")) if "accelerations" in rp else (),
                    time_from_start=float(tfs),
                )
            )
        return JointTrajectory(
            Header(self.system.now(), raw.get("frame", "anchor")),
            tuple(str(n) for n in names),
            tuple(points),
        )

    def _command(self, name: str, args: dict) -> Any:
        system = self.system
        if name == "register_robot":
            marker = args.get("marker")
            if not isinstance(marker, str) or not marker:
                raise ValidationError("marker: required non-empty string")
            model = args.get("model")
            if model is not None and not isinstance(model, str):
                raise ValidationError("model: must be a string when given")
            return _entity_obj(system.register_robot(marker, model))
        if name == "register_hmd":
            return _entity_obj(system.register_hmd())
        if name == "register_object":
            category = args.get("category")
            if not isinstance(category, str) or not category:
                raise ValidationError("category: required non-empty string")
            return _entity_obj(system.register_object(category))
        if name == "observe_marker":
            hmd = args.get("hmd")
            marker = args.get("marker")
            if not isinstance(hmd, int) or isinstance(hmd, bool):
                raise ValidationError("hmd: required integer id")
            if not isinstance(marker, str) or not marker:
                raise ValidationError("marker: required non-empty string")
            event = system.observe_marker(hmd, marker, _xform_from_obj(args.get("marker_in_hmd", {}), "marker_in_hmd"))
            return {
                "marker": event.marker_label,
                "is_primary": event.is_primary,
                "pose_in_anchor": _xform_to_obj(event.pose_in_anchor),
            }
        if name == "relative_transform":
            a, b = args.get("marker_a"), args.get("marker_b")
            if not isinstance(a, str) or not isinstance(b, str):
                raise ValidationError("marker_a and marker_b: required strings")
            return _xform_to_obj(system.anchors.relative_transform(a, b))
        if name == "adjust_hologram":
            robot = args.get("robot")
            if not isinstance(robot, int) or isinstance(robot, bool):
                raise ValidationError("robot: required integer id")
            offset = system.adjust_hologram(robot, _xform_from_obj(args.get("delta", {}), "delta"))
            return {"offset": _xform_to_obj(offset)}
        if name == "hologram_pose":
            robot = args.get("robot")
            if not isinstance(robot, int) or isinstance(robot, bool):
                raise ValidationError("robot: required integer id")
            return _xform_to_obj(system.anchors.hologram_pose(robot))
        if name == "submit_navigation":
            robot = args.get("robot")
            if not isinstance(robot, int) or isinstance(robot, bool):
                raise ValidationError("robot: required integer id")
            intent = system.submit_navigation(robot, self._build_path(args))
            return {
                "intent_id": intent.intent_id,
                "robot_id": intent.robot_id,
                "kind": intent.kind,
                "preview_epoch": intent.preview_epoch,
                "execute_epoch": intent.execute_epoch,
            }
        if name == "submit_manipulation":
            robot = args.get("robot")
            if not isinstance(robot, int) or isinstance(robot, bool):
                raise ValidationError("robot: required integer id")
            intent = system.submit_manipulation(robot, self._build_trajectory(args))
            return {
                "intent_id": intent.intent_id,
                "robot_id": intent.robot_id,
                "kind": intent.kind,
                "preview_epoch": intent.preview_epoch,
                "execute_epoch": intent.execute_epoch,
            }
        if name == "configure":
            updated = system.configure(args.get("delay_seconds"), args.get("pose_rate_hz"))
            return {"delay_seconds": updated.delay_seconds, "pose_rate_hz": updated.pose_rate_hz}
        if name == "get_settings":
            current = system.scheduler.config
            return {"delay_seconds": current.delay_seconds, "pose_rate_hz": current.pose_rate_hz}
        if name == "get_manifest":
            which = args.get("which", "robots")
            if which == "robots":
                return _manifest_obj(system.robot_resolver().manifest)
            if which == "objects":
                return _manifest_obj(system.object_manifest())
            raise ValidationError("which: must be robots or objects")
        if name == "resolve_robot":
            model = args.get("name")
            if not isinstance(model, str) or not model:
                raise ValidationError("name: required non-empty string")
            return _tree_obj(system.robot_resolver().resolve_robot(model))
        if name == "list_topics":
            return {"topics": sorted(system.broker.topic_names())}
        if name == "list_entities":
            return {"entities": [_entity_obj(r) for r in system.registry.records()]}
        raise NotFound(f"unknown command {name!r}")


class GatewayClient:
    """Minimal blocking TCP client used by the CLI and tests."""

    def __init__(self, host: str, port: int, timeout: float = 5.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._transport = _TcpTransport(self._sock)
        self._next_corr = 0
        self.events: list[dict] = []

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass

    def __enter__(self) -> "GatewayClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def read_frame(self) -> dict:
        return json.loads(self._transport.recv_bytes().decode("utf-8"))

    def send_frame(self, obj: dict) -> None:
        self._transport.send_bytes(json.dumps(obj, separators=(",", ":")).encode("ascii"))

    def request(self, ftype: str, **fields: Any) -> dict:
        """Send one frame and wait for its response, buffering EVENT pushes."""
        self._next_corr += 1
        corr = self._next_corr
        self.send_frame({"type": ftype, "corr": corr, **fields})
        while True:
            frame = self.read_frame()
            if frame.get("type") == "EVENT":
                self.events.append(frame)
                continue
            if frame.get("corr") == corr:
                return frame
            self.events.append(frame)

    def next_event(self, timeout: float = 5.0) -> dict:
        """Pop the oldest buffered EVENT, reading more frames if needed."""
        if self.events:
            return self.events.pop(0)
        self._sock.settimeout(timeout)
        try:
            while True:
                frame = self.read_frame()
                if frame.get("type") == "EVENT":
                    return frame
                self.events.append(frame)
        finally:
            self._sock.settimeout(None)

    def command(self, name: str, /, **args: Any) -> dict:
        response = self.request("COMMAND", name=name, args=args)
        if response["type"] == "ERROR":
            raise IntentBusError(f"{response['error']}: {response['message']}")
        return response["result"]
