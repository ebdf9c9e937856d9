"""Exception hierarchy shared across the package."""

from __future__ import annotations


class FormloopError(Exception):
    """Base class for all package errors."""


class FormatError(FormloopError):
    """An external file (OCR TSV, annotation JSON) is malformed."""


class GatewayError(FormloopError):
    """A remote classifier could not be reached or answered garbage."""

    def __init__(self, endpoint: str, message: str):
        super().__init__(f"{endpoint}: {message}")
        self.endpoint = endpoint


class ProtocolError(FormloopError):
    """A classifier response violates the wire protocol contract."""


class NotFoundError(FormloopError):
    """A referenced document or annotation does not exist."""


class InvalidTransitionError(FormloopError):
    """A review action is not legal for the record's current state."""


class ReplayError(FormloopError):
    """Replaying the audit log failed at a specific action."""

    def __init__(self, action_id: int, cause: Exception):
        super().__init__(f"action {action_id}: {cause}")
        self.action_id = action_id
        self.cause = cause


class StoreError(FormloopError):
    """The on-disk project store is missing or inconsistent."""


class ConfigError(FormloopError):
    """project.json or CLI flags are invalid."""


class EmptyIterationError(FormloopError):
    """No fully reviewed documents are available to export."""
