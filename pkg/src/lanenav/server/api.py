"""HTTP surface of the path server.

Routes: POST /session, GET /qr/{qr_id}, PUT /admin/patch, GET /deployment,
GET /health.  Errors map to 404 (unknown id), 401 (unknown session),
409 (no enabled route), 422 (patch rejected by validation).
"""

from __future__ import annotations

from fastapi import FastAPI, Query
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .. import pathgraph as pg
from ..protocol import guidance_to_dict
from .core import (
    NotFoundError,
    PatchRejectedError,
    PathServer,
    UnauthorizedError,
    patch_from_dict,
)


class SessionRequest(BaseModel):
    destination: int


class SessionResponse(BaseModel):
    session_id: int


class PatchOpBody(BaseModel):
    op: str
    edge: int | None = None
    enabled: bool | None = None
    deployment: dict | None = None


class PatchRequest(BaseModel):
    ops: list[PatchOpBody]


class PatchResponse(BaseModel):
    version: int


def create_app(server: PathServer) -> FastAPI:
    app = FastAPI(title="lanenav path server")
    app.state.path_server = server

    @app.exception_handler(NotFoundError)
    async def _not_found(_, exc):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(UnauthorizedError)
    async def _unauthorized(_, exc):
        return JSONResponse(status_code=401, content={"error": str(exc)})

    @app.exception_handler(pg.NoRouteError)
    async def _no_route(_, exc):
        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.exception_handler(PatchRejectedError)
    async def _rejected(_, exc):
        return JSONResponse(
            status_code=422,
            content={
                "error": "patch rejected",
                "violations": [
                    {"code": v.code, "ids": list(v.ids), "message": v.message}
                    for v in exc.report
                ],
            },
        )

    @app.post("/session", response_model=SessionResponse)
    def create_session(body: SessionRequest):
        return {"session_id": server.create_session(body.destination)}

    @app.get("/qr/{qr_id}")
    def resolve_qr(
        qr_id: int,
        session: int = Query(...),
        edge_hint: int | None = Query(default=None),  # accepted, not yet consumed
    ):
        return guidance_to_dict(server.resolve_qr(qr_id, session))

    @app.put("/admin/patch", response_model=PatchResponse)
    def admin_patch(body: PatchRequest):
        patch = patch_from_dict(body.model_dump(exclude_none=True))
        return {"version": server.apply_patch(patch)}

    @app.get("/deployment")
    def get_deployment():
        return pg.deployment_to_dict(server.get_deployment())

    @app.get("/health")
    def health():
        return {"version": server.version, "uptime": server.uptime}

    return app
