"""Exception hierarchy shared across the package.

Every error raised by intentbus derives from IntentBusError so callers can
catch the whole family at a process boundary (CLI, gateway session) without
swallowing genuine bugs like TypeError.
"""

from __future__ import annotations


class IntentBusError(Exception):
    """Base class for all intentbus errors."""


class ValidationError(IntentBusError):
    """A value violates a documented invariant.

    ``violations`` holds every violated invariant as "field.path: message".
    """

    def __init__(self, violations: list[str] | str):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = violations
        super().__init__("; ".join(violations))


class DecodeError(IntentBusError):
    """Payload is not well-formed UTF-8 JSON."""


class SchemaMismatch(IntentBusError):
    """JSON structure does not match the expected message kind."""


class TopicNameError(IntentBusError):
    """Topic name does not match the broker naming grammar."""


class TopicNotFound(IntentBusError):
    """Operation referenced a topic the broker does not know."""


class OffsetOutOfRange(IntentBusError):
    """Commit offset lies beyond the current log length."""


class ParseError(IntentBusError):
    """Input text failed to parse; ``position`` is set where known."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class StructureError(IntentBusError):
    """Parsed model violates structural rules (cycles, multiple roots...)."""


class UnsupportedJoint(IntentBusError):
    """Joint type or feature outside the supported subset."""


class LocalizationUnavailable(IntentBusError):
    """Operation requires an established spatial anchor."""


class MarkerNotFound(IntentBusError):
    """Referenced marker label is not registered."""


class RobotNotFound(IntentBusError):
    """Referenced robot id is not registered."""


class UnknownJoint(IntentBusError):
    """Trajectory names a joint absent from the robot's kinematic tree."""


class ClockError(IntentBusError):
    """Clock was driven backwards."""


class FetchError(IntentBusError):
    """Resource could not be retrieved."""


class IntegrityError(IntentBusError):
    """Fetched resource bytes do not match the declared checksum."""


class NotFound(IntentBusError):
    """Named entry absent from the manifest."""


class ConfigError(IntentBusError):
    """Configuration value is invalid; message names the field path."""


class LimitError(IntentBusError):
    """Joint position outside declared limits."""


class ScenarioError(IntentBusError):
    """Scenario script is invalid; ``step_index`` locates the bad step."""

    def __init__(self, message: str, step_index: int | None = None):
        self.step_index = step_index
        if step_index is not None:
            message = f"step {step_index}: {message}"
        super().__init__(message)
