"""Reference classifier adapter for the formloop wire protocol.

Wraps a small self-contained token-classification network so the
``remote`` classifier kind has a live HTTP target, and hosts the
fine-tuning entry point that consumes iteration exports.
"""

from .model import MODEL_LABELS, AdapterConfig, TokenClassifierNet, load_checkpoint, new_checkpoint
from .service import build_app
from .train import fine_tune

__all__ = [
    "MODEL_LABELS",
    "AdapterConfig",
    "TokenClassifierNet",
    "load_checkpoint",
    "new_checkpoint",
    "build_app",
    "fine_tune",
]
