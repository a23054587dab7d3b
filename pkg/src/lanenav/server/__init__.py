from .api import create_app
from .core import (
    AdminPatch,
    NotFoundError,
    PatchOp,
    PatchRejectedError,
    PathServer,
    ReplaceDeployment,
    Session,
    SetEdgeEnabled,
    UnauthorizedError,
)

__all__ = [
    "AdminPatch",
    "create_app",
    "NotFoundError",
    "PatchOp",
    "PatchRejectedError",
    "PathServer",
    "ReplaceDeployment",
    "Session",
    "SetEdgeEnabled",
    "UnauthorizedError",
]
