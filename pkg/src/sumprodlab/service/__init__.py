"""HTTP service exposing the experiment runners."""

from .app import ENDPOINT_MODES, create_app
from .models import DEFAULT_M, RunRequest, RunResponse

__all__ = [
    "DEFAULT_M",
    "ENDPOINT_MODES",
    "RunRequest",
    "RunResponse",
    "create_app",
]
