"""System settings with file loading.

Defaults match the bundled fixture repositories and the stock timing
(3 second preview delay, 30 Hz pose stream).  A config file is JSON with
any subset of the fields; unknown fields are rejected so typos surface.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass, fields, replace

from .errors import ConfigError

_REPO_ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def bundled_robot_manifest() -> str:
    return os.path.join(_REPO_ROOT, "testdata", "repo", "robots", "manifest.json")


def bundled_object_manifest() -> str:
    return os.path.join(_REPO_ROOT, "testdata", "repo", "objects", "manifest.json")


@dataclass(frozen=True)
class SystemConfig:
    delay_seconds: float = 3.0
    pose_rate_hz: float = 30.0
    robot_repository: str = ""
    object_repository: str = ""
    bind: str = "127.0.0.1:7787"

    def __post_init__(self):
        if not self.robot_repository:
            object.__setattr__(self, "robot_repository", bundled_robot_manifest())
        if not self.object_repository:
            object.__setattr__(self, "object_repository", bundled_object_manifest())

    def check(self) -> None:
        if not isinstance(self.delay_seconds, (int, float)) or isinstance(self.delay_seconds, bool) or not (self.delay_seconds >= 0.0):
            raise ConfigError(f"delay_seconds: {self.delay_seconds!r} must be a number >= 0")
        if not isinstance(self.pose_rate_hz, (int, float)) or isinstance(self.pose_rate_hz, bool) or not (1.0 <= self.pose_rate_hz <= 30.0):
            raise ConfigError(f"pose_rate_hz: {self.pose_rate_hz!r} outside [1, 30]")
        for name in ("robot_repository", "object_repository", "bind"):
            if not isinstance(getattr(self, name), str) or not getattr(self, name):
                raise ConfigError(f"{name}: must be a non-empty string")
        parse_bind(self.bind)


def parse_bind(bind: str) -> tuple[str, int]:
    host, sep, port = bind.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"bind: {bind!r} must be HOST:PORT")
    try:
        port_num = int(port)
    except ValueError:
        raise ConfigError(f"bind: port {port!r} is not an integer") from None
    if not (0 <= port_num <= 65535):
        raise ConfigError(f"bind: port {port_num} outside [0, 65535]")
    return host, port_num


def configure_from_file(path: str) -> SystemConfig:
    """Load settings; a missing file falls back to defaults with a warning."""
    if not os.path.exists(path):
        warnings.warn(f"config file {path} not found, using defaults", stacklevel=2)
        return SystemConfig()
    try:
        with open(path, "rb") as fh:
            obj = json.loads(fh.read().decode("utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config file {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("config: top level must be an object")
    known = {f.name for f in fields(SystemConfig)}
    unknown = sorted(set(obj) - known)
    if unknown:
        raise ConfigError(f"config: unknown fields {unknown}")
    config = replace(SystemConfig(), **obj)
    config.check()
    return config
