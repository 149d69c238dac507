"""intentbus: pull-based offset-log bus with preview-before-execute scheduling.

The pieces, roughly bottom to top:

  messages    canonical JSON codec for the wire message types
  broker      append-only replicated topic logs with consumer cursors
  registry    entity registration and the /{kind}/{id}/{channel} topic scheme
  transforms  rigid-body math (quaternion + translation)
  anchors     marker-based shared reference frame and hologram offsets
  assets      manifest fetching, URDF/SDF parsing, forward kinematics
  intents     delayed-execution intent scheduling with preview sampling
  system      one facade owning a clock, broker and all services
  scenario    scripted runs, run reports, log export
  gateway     framed TCP/WebSocket service and client
  cli         `intentbus run | serve | export`
"""

from .broker import Broker, Consumer, Record, replay
from .clock import LogicalClock, WallClock, ns_to_seconds, seconds_to_ns
from .config import SystemConfig, configure_from_file
from .errors import IntentBusError, ValidationError
from .intents import EVENTS_TOPIC, IntentConfig, IntentScheduler, ScheduledIntent, sample_preview
from .messages import (
    Header,
    IntentEvent,
    JointTrajectory,
    JointTrajectoryPoint,
    MessageKind,
    ObjectState,
    Path,
    Pose,
    PoseStamped,
    Quaternion,
    Vector3,
    decode,
    encode,
)
from .registry import EntityKind, EntityRecord, Registry, format_topic, parse_topic
from .scenario import RunReport, ScenarioScript, load_scenario, run_scenario
from .system import System
from .transforms import Transform, compose, inverse

__version__ = "0.1.0"

__all__ = [
    "Broker",
    "Consumer",
    "EntityKind",
    "EntityRecord",
    "EVENTS_TOPIC",
    "Header",
    "IntentBusError",
    "IntentConfig",
    "IntentEvent",
    "IntentScheduler",
    "JointTrajectory",
    "JointTrajectoryPoint",
    "LogicalClock",
    "MessageKind",
    "ObjectState",
    "Path",
    "Pose",
    "PoseStamped",
    "Quaternion",
    "Record",
    "Registry",
    "RunReport",
    "ScenarioScript",
    "ScheduledIntent",
    "System",
    "SystemConfig",
    "Transform",
    "ValidationError",
    "Vector3",
    "WallClock",
    "compose",
    "configure_from_file",
    "decode",
    "encode",
    "format_topic",
    "inverse",
    "load_scenario",
    "ns_to_seconds",
    "parse_topic",
    "replay",
    "run_scenario",
    "sample_preview",
    "seconds_to_ns",
    "__version__",
]
