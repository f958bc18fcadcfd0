"""Reference HTTP server for the pipeline's inference endpoints."""

from .config import Providers, ShimConfig
from .server import create_app

__version__ = "0.1.0"
