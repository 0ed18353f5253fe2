"""Error taxonomy of the bridge.

Every failure the tool can produce maps to one of these, so callers
(and the CLI) can tell configuration problems, missing models, and bad
audio apart without string matching.
"""


class BridgeError(Exception):
    """Base class for everything raised on purpose by this package."""


class InvalidConfigError(BridgeError):
    """Configuration violates a documented bound (e.g. block index)."""


class ModelUnavailableError(BridgeError):
    """The checkpoint cannot be loaded: offline, missing, or corrupt."""


class UnreadableAudioError(BridgeError):
    """The input path does not hold decodable WAV audio."""
