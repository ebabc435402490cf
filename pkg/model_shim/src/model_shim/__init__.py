"""Reference transformer classifier server for the notice wire protocol."""

__all__ = ["create_app", "build_checkpoint"]

from .checkpoint import build_checkpoint
from .server import create_app
