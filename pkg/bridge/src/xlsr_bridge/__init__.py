"""Feature bridge: wav2vec2/XLSR hidden states out, QBF1 files in return.

Couples to the detection engine only through the QBF1 byte format; no
code is shared in either direction.
"""

from .bridge import (
    DEFAULT_BLOCK,
    DEFAULT_MODEL,
    FRAME_HOP_S,
    FRAME_OFFSET_S,
    BridgeConfig,
    export_features,
)
from .errors import BridgeError, InvalidConfigError, ModelUnavailableError, UnreadableAudioError
from .qbf import write_qbf

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BLOCK",
    "DEFAULT_MODEL",
    "FRAME_HOP_S",
    "FRAME_OFFSET_S",
    "BridgeConfig",
    "BridgeError",
    "InvalidConfigError",
    "ModelUnavailableError",
    "UnreadableAudioError",
    "export_features",
    "write_qbf",
]
