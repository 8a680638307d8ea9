"""HTTP adapter over the service core.

Every handler parses its own body/query so malformed input surfaces as the
documented `bad-request` error body instead of framework-shaped responses.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.staticfiles import StaticFiles

from .service import ApiError, SpaceService


async def _json_body(request: Request):
    raw = await request.body()
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ApiError("bad-request", f"request body is not valid JSON: {exc.msg}")


def _int_param(request: Request, name: str, default: int) -> int:
    raw = request.query_params.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ApiError("bad-request", f"query parameter {name!r} must be an integer")


def create_app(service: SpaceService, frontend_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="museumtwin", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.http_status, content=exc.to_doc())

    @app.post("/spaces", status_code=201)
    async def import_space(request: Request):
        return service.import_space(await _json_body(request))

    @app.get("/spaces/{space_id}")
    async def get_space(space_id: str):
        return service.get_space_doc(space_id)

    @app.post("/spaces/{space_id}/mutations")
    async def mutate_space(space_id: str, request: Request):
        return service.apply_space_mutation(space_id, await _json_body(request))

    @app.get("/spaces/{space_id}/navgraph")
    async def get_navgraph(space_id: str):
        return service.get_navgraph_doc(space_id)

    @app.post("/spaces/{space_id}/sessions", status_code=201)
    async def create_session(space_id: str):
        return service.create_session(space_id)

    @app.get("/spaces/{space_id}/assets/{asset_id}")
    async def asset_details(space_id: str, asset_id: str):
        return service.get_asset_details(space_id, asset_id)

    @app.put("/sessions/{session_id}/preferences")
    async def set_preferences(session_id: str, request: Request):
        body = await _json_body(request)
        if not isinstance(body, dict) or "assets" not in body:
            raise ApiError("bad-request", "body must be an object with an 'assets' list")
        return service.set_preferences(session_id, body["assets"])

    @app.post("/sessions/{session_id}/readings")
    async def ingest_readings(session_id: str, request: Request):
        body = await _json_body(request)
        if not isinstance(body, dict) or "readings" not in body:
            raise ApiError("bad-request", "body must be an object with a 'readings' list")
        return service.ingest_readings(session_id, body["readings"])

    @app.get("/sessions/{session_id}/route")
    async def get_route(session_id: str, request: Request):
        mode = request.query_params.get("mode", "optimal")
        return service.get_route_doc(session_id, mode)

    @app.get("/sessions/{session_id}/notifications")
    async def poll_notifications(session_id: str, request: Request):
        after = _int_param(request, "after", 0)
        return service.poll_notifications(session_id, after)

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(frontend_dir), html=True), name="console")

    return app
