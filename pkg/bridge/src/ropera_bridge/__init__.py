"""Wire-protocol bridge between a command stream and a servo arm backend."""

__version__ = "0.1.0"

from .bridge import Bridge, BridgeConfig, MockBackend, serve  # noqa: F401
