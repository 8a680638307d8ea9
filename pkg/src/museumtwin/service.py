"""Service core: spaces, visitor sessions, telemetry ingestion and routes.

Methods speak plain JSON-able documents so the HTTP layer stays a thin
adapter and the simulator can drive the exact public contract in-process.
Mutations are serialized per space and per session; reads work on immutable
snapshots.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path

from . import locate, nav, spaceio
from .locate import (
    AssetNotifyState,
    PositionEstimate,
    RssiReading,
    rssi_to_distance,
)
from .model import (
    Mutation,
    SpaceModel,
    apply_mutation,
    entity_field_names,
    fresh_id,
    validate_space,
)

log = logging.getLogger(__name__)

# Machine-readable error codes; the full published set.
API_ERROR_CODES = frozenset(
    {
        "bad-request",
        "space-not-found",
        "session-not-found",
        "asset-not-found",
        "unknown-id",
        "validation-failed",
        "no-position",
        "unreachable-target",
        "degenerate-space",
    }
)

_HTTP_STATUS = {
    "bad-request": 400,
    "space-not-found": 404,
    "session-not-found": 404,
    "asset-not-found": 404,
    "unknown-id": 404,
    "validation-failed": 422,
    "no-position": 409,
    "unreachable-target": 409,
    "degenerate-space": 409,
}


class ApiError(Exception):
    def __init__(self, code: str, message: str, details=None):
        assert code in API_ERROR_CODES, code
        super().__init__(message)
        self.code = code
        self.message = message
        self.details = details

    @property
    def http_status(self) -> int:
        return _HTTP_STATUS[self.code]

    def to_doc(self) -> dict:
        doc = {"code": self.code, "message": self.message}
        if self.details is not None:
            doc["details"] = self.details
        return doc


@dataclass
class ServiceConfig:
    data_dir: Path | None = None  # None disables file persistence
    smoothing_alpha: float = locate.DEFAULT_SMOOTHING_ALPHA
    enter_radius_m: float = locate.DEFAULT_ENTER_RADIUS_M
    exit_radius_m: float = locate.DEFAULT_EXIT_RADIUS_M
    cell_size_m: float = nav.DEFAULT_CELL_SIZE_M
    clearance_m: float = nav.DEFAULT_CLEARANCE_M
    stale_ms: int = locate.STALE_READING_MS
    session_snapshot_every: int = 25


@dataclass
class _Session:
    id: str
    space_id: str
    preferences: list[str] = field(default_factory=list)
    last_fix: PositionEstimate | None = None
    notify_state: dict[str, AssetNotifyState] = field(default_factory=dict)
    event_log: list[dict] = field(default_factory=list)
    next_seq: int = 1
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


def _estimate_doc(fix: PositionEstimate) -> dict:
    doc = {
        "position": [fix.position[0], fix.position[1]],
        "residual_rms": fix.residual_rms,
        "beacons_used": fix.beacons_used,
        "timestamp": fix.timestamp,
    }
    if fix.nearest_asset_id is not None:
        doc["nearest_asset_id"] = fix.nearest_asset_id
        doc["nearest_asset_distance"] = fix.nearest_asset_distance
    return doc


def route_doc(route: nav.Route) -> dict:
    return {
        "cells": [[r, c] for r, c in route.cells],
        "polyline": [[x, y] for x, y in route.polyline],
        "length": route.length,
        "visit_order": [
            {"asset_id": aid, "polyline_index": idx} for aid, idx in route.visit_order
        ],
    }


# Mutation kinds map onto the document's entity group names.
_KIND_TO_GROUP = {
    "room": "rooms",
    "wall": "walls",
    "portal": "portals",
    "anchor": "anchors",
    "beacon": "beacons",
    "mapping": "mappings",
    "capture_point": "capture_points",
}


class SpaceService:
    """In-process service owning all spaces and visitor sessions."""

    def __init__(self, config: ServiceConfig | None = None):
        self.config = config or ServiceConfig()
        self._lock = threading.RLock()
        self._spaces: dict[str, SpaceModel] = {}
        self._space_locks: dict[str, threading.Lock] = {}
        self._graphs: dict[str, nav.NavGraph | None] = {}
        self._sessions: dict[str, _Session] = {}
        self._session_mutations = 0
        if self.config.data_dir is not None:
            self.config.data_dir = Path(self.config.data_dir)
            self.config.data_dir.mkdir(parents=True, exist_ok=True)
            self._load_persisted_spaces()

    # -- space admin ------------------------------------------------------

    def import_space(self, doc) -> dict:
        if not isinstance(doc, dict):
            raise ApiError("bad-request", "space document must be a JSON object")
        try:
            model, warnings = spaceio.space_from_doc(doc)
        except spaceio.SpaceFormatError as exc:
            raise ApiError("bad-request", str(exc))
        report = validate_space(model)
        if not report.ok:
            raise ApiError("validation-failed", "space document is invalid", report.errors)
        for message in warnings:
            log.warning("import %s: %s", model.id, message)
        with self._lock:
            self._spaces[model.id] = model
            self._space_locks.setdefault(model.id, threading.Lock())
            self._rebuild_graph(model)
        self._persist_space(model)
        return {"id": model.id, "version": model.version, "warnings": warnings}

    def get_space_model(self, space_id: str) -> SpaceModel:
        with self._lock:
            model = self._spaces.get(space_id)
        if model is None:
            raise ApiError("space-not-found", f"no space with id {space_id!r}")
        return model

    def get_space_doc(self, space_id: str) -> dict:
        return spaceio.space_to_doc(self.get_space_model(space_id))

    def apply_space_mutation(self, space_id: str, mutation_doc) -> dict:
        mutation = self._parse_mutation(space_id, mutation_doc)
        with self._space_lock(space_id):
            model = self.get_space_model(space_id)
            try:
                updated = apply_mutation(model, mutation)
            except Exception as exc:
                raise _mutation_api_error(exc)
            with self._lock:
                self._spaces[space_id] = updated
                if mutation.kind in ("room", "wall", "portal"):
                    self._rebuild_graph(updated)
            self._persist_space(updated)
        return {"id": updated.id, "version": updated.version}

    def get_navgraph_doc(self, space_id: str) -> dict:
        model = self.get_space_model(space_id)
        graph = self._graph_for(model)
        return {
            "space_id": space_id,
            "version": model.version,
            "origin": [graph.origin[0], graph.origin[1]],
            "cell_size": graph.cell_size,
            "width": graph.width,
            "height": graph.height,
            "raster": nav.render_grid(graph).split("\n"),
        }

    def get_asset_details(self, space_id: str, asset_id: str) -> dict:
        model = self.get_space_model(space_id)
        anchor = model.anchor_by_id(asset_id)
        if anchor is None or anchor.kind != "asset":
            raise ApiError("asset-not-found", f"no asset with id {asset_id!r}")
        doc = {
            "id": anchor.id,
            "title": anchor.title,
            "description": anchor.description,
            "position": list(anchor.position),
        }
        if anchor.room_id is not None:
            room = model.room_by_id(anchor.room_id)
            if room is not None:
                doc["room"] = {"id": room.id, "name": room.name}
        mapping = model.mapping_for_asset(asset_id)
        if mapping is not None:
            beacon = model.beacon_by_id(mapping.beacon_id)
            if beacon is not None:
                doc["beacon"] = {
                    "id": beacon.id,
                    "hardware_uid": beacon.hardware_uid,
                    "position": list(beacon.position),
                }
        return doc

    # -- visitor sessions --------------------------------------------------

    def create_session(self, space_id: str) -> dict:
        self.get_space_model(space_id)  # existence check
        with self._lock:
            session_id = fresh_id(set(self._sessions))
            self._sessions[session_id] = _Session(id=session_id, space_id=space_id)
        return {"id": session_id, "space_id": space_id, "preferences": []}

    def _session(self, session_id: str) -> _Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ApiError("session-not-found", f"no session with id {session_id!r}")
        return session

    def set_preferences(self, session_id: str, asset_ids) -> dict:
        session = self._session(session_id)
        if not isinstance(asset_ids, list) or not all(isinstance(a, str) for a in asset_ids):
            raise ApiError("bad-request", "preferences must be a list of asset ids")
        model = self.get_space_model(session.space_id)
        known = {a.id for a in model.assets()}
        deduped: list[str] = []
        for asset_id in asset_ids:
            if asset_id not in deduped:
                deduped.append(asset_id)
        offenders = [a for a in deduped if a not in known]
        if offenders:
            raise ApiError("asset-not-found", "unknown asset id(s)", offenders)
        with session.lock:
            session.preferences = deduped
        self._bump_session_mutations()
        return {"preferences": list(deduped)}

    def ingest_readings(self, session_id: str, readings_docs) -> dict:
        session = self._session(session_id)
        readings = _parse_readings(readings_docs)
        model = self.get_space_model(session.space_id)
        with session.lock:
            return self._ingest_locked(session, model, readings)

    def _ingest_locked(self, session: _Session, model: SpaceModel, readings) -> dict:
        if not readings:
            return {"status": "no-readings", "dropped": 0, "events": []}
        known = {b.id: b for b in model.beacons}
        usable = [r for r in readings if r.beacon_id in known]
        dropped = len(readings) - len(usable)
        fresh: list[RssiReading] = []
        if usable:
            newest = max(r.timestamp for r in usable)
            fresh = [r for r in usable if newest - r.timestamp <= self.config.stale_ms]
            dropped += len(usable) - len(fresh)
        merged = locate.prepare_readings(fresh, stale_ms=self.config.stale_ms)
        if len(merged) < 3:
            return {"status": "insufficient-beacons", "dropped": dropped, "events": []}
        ranges = []
        for reading in merged:
            beacon = known[reading.beacon_id]
            params = locate.PathLossParams(beacon.tx_power_dbm_at_1m, beacon.path_loss_exponent)
            ranges.append(
                ((beacon.position[0], beacon.position[1]), rssi_to_distance(reading.rssi, params))
            )
        try:
            position, residual = locate.trilaterate(ranges)
        except locate.DegenerateGeometry:
            return {"status": "degenerate-geometry", "dropped": dropped, "events": []}
        except locate.SingularSystem:
            return {"status": "degenerate-geometry", "dropped": dropped, "events": []}
        raw = PositionEstimate(
            position=position,
            residual_rms=residual,
            beacons_used=len(merged),
            timestamp=max(r.timestamp for r in merged),
        )
        fix = locate.fuse_fix(session.last_fix, raw, self.config.smoothing_alpha, model)
        events = locate.detect_proximity(
            session.notify_state,
            fix,
            model,
            enter_radius=self.config.enter_radius_m,
            exit_radius=self.config.exit_radius_m,
            session_id=session.id,
        )
        event_docs = []
        for event in events:
            doc = {
                "seq": session.next_seq,
                "session_id": session.id,
                "asset_id": event.asset_id,
                "distance": event.distance,
                "timestamp": event.timestamp,
            }
            session.next_seq += 1
            session.event_log.append(doc)
            event_docs.append(doc)
        session.last_fix = fix
        self._bump_session_mutations()
        return {
            "status": "ok",
            "dropped": dropped,
            "estimate": _estimate_doc(fix),
            "events": event_docs,
        }

    def get_route_doc(self, session_id: str, mode: str = "optimal") -> dict:
        if mode not in ("optimal", "as-given"):
            raise ApiError("bad-request", f"unknown route mode {mode!r}")
        session = self._session(session_id)
        model = self.get_space_model(session.space_id)
        with session.lock:
            fix = session.last_fix
            preferences = list(session.preferences)
        if fix is None:
            raise ApiError("no-position", "session has no position fix yet")
        graph = self._graph_for(model)
        # A noisy fix may land outside the rasterized bounds; the visitor is
        # physically inside, so clamp into the grid before snapping.
        start = _clamp_into_graph(graph, fix.position)
        try:
            route = nav.plan_route(
                model,
                start,
                preferences,
                order_mode=mode,
                graph=graph,
            )
        except nav.UnknownAsset as exc:
            raise ApiError("asset-not-found", str(exc), exc.asset_ids)
        except nav.UnreachableTarget as exc:
            raise ApiError("unreachable-target", str(exc), [str(o) for o in exc.offenders])
        except nav.OutOfBounds as exc:
            raise ApiError("unreachable-target", str(exc))
        return route_doc(route)

    def poll_notifications(self, session_id: str, after_seq: int) -> dict:
        session = self._session(session_id)
        with session.lock:
            events = [e for e in session.event_log if e["seq"] > after_seq]
        next_seq = events[-1]["seq"] if events else after_seq
        return {"events": events, "next_seq": next_seq}

    # -- internals ---------------------------------------------------------

    def _space_lock(self, space_id: str) -> threading.Lock:
        with self._lock:
            if space_id not in self._space_locks:
                self._space_locks[space_id] = threading.Lock()
            return self._space_locks[space_id]

    def _graph_for(self, model: SpaceModel) -> nav.NavGraph:
        with self._lock:
            graph = self._graphs.get(model.id)
        if graph is None:
            raise ApiError("degenerate-space", f"space {model.id!r} has no navigable rooms")
        return graph

    def _rebuild_graph(self, model: SpaceModel) -> None:
        try:
            self._graphs[model.id] = nav.build_nav_graph(
                model, self.config.cell_size_m, self.config.clearance_m
            )
        except nav.DegenerateSpace:
            self._graphs[model.id] = None

    def _parse_mutation(self, space_id: str, doc) -> Mutation:
        if not isinstance(doc, dict):
            raise ApiError("bad-request", "mutation must be a JSON object")
        action = doc.get("action")
        kind = doc.get("kind")
        if action not in ("add", "update", "remove"):
            raise ApiError("bad-request", f"unknown mutation action {action!r}")
        if kind not in _KIND_TO_GROUP:
            raise ApiError("bad-request", f"unknown entity kind {kind!r}")
        if action == "add":
            entity_doc = doc.get("entity")
            if not isinstance(entity_doc, dict):
                raise ApiError("bad-request", "add mutation requires an entity object")
            entity = self._parse_entity(kind, entity_doc)
            return Mutation(action="add", kind=kind, entity=entity)
        target_id = doc.get("id")
        if not isinstance(target_id, str):
            raise ApiError("bad-request", f"{action} mutation requires an id")
        if action == "remove":
            return Mutation(action="remove", kind=kind, target_id=target_id)
        fields_doc = doc.get("fields")
        if not isinstance(fields_doc, dict):
            raise ApiError("bad-request", "update mutation requires a fields object")
        fields = self._parse_update_fields(space_id, kind, target_id, fields_doc)
        return Mutation(action="update", kind=kind, target_id=target_id, fields=fields)

    def _parse_entity(self, kind: str, entity_doc: dict):
        group = _KIND_TO_GROUP[kind]
        wrapped = {"id": "tmp", "name": "", group: [entity_doc]}
        try:
            model, _ = spaceio.space_from_doc(wrapped)
        except spaceio.SpaceFormatError as exc:
            raise ApiError("bad-request", str(exc))
        return getattr(model, group)[0]

    def _parse_update_fields(self, space_id: str, kind: str, target_id: str, fields_doc: dict) -> dict:
        """Merge wire-format field updates over the current entity document."""
        model = self.get_space_model(space_id)
        group = _KIND_TO_GROUP[kind]
        current = None
        for entity in getattr(model, group):
            key = entity.asset_id if kind == "mapping" else entity.id
            if key == target_id:
                current = entity
                break
        if current is None:
            raise ApiError("unknown-id", f"no {kind} with id {target_id!r}")
        current_doc = None
        space_doc = spaceio.space_to_doc(model)
        for entity_doc in space_doc[group]:
            key = entity_doc.get("asset_id") if kind == "mapping" else entity_doc.get("id")
            if key == target_id:
                current_doc = dict(entity_doc)
                break
        unknown = set(fields_doc) - set(current_doc) - set(entity_field_names(kind))
        if unknown:
            raise ApiError("bad-request", f"unknown fields for {kind}: {sorted(unknown)}")
        merged = {**current_doc, **fields_doc}
        revised = self._parse_entity(kind, merged)
        return {name: getattr(revised, name) for name in entity_field_names(kind)}

    def _persist_space(self, model: SpaceModel) -> None:
        if self.config.data_dir is None:
            return
        spaceio.save_space(model, self.config.data_dir / f"{model.id}.json")

    def _load_persisted_spaces(self) -> None:
        for path in sorted(self.config.data_dir.glob("*.json")):
            if path.name == "sessions.json":
                continue
            try:
                model = spaceio.load_space(path)
            except spaceio.SpaceIoError as exc:
                log.warning("skipping %s: %s", path, exc)
                continue
            self._spaces[model.id] = model
            self._space_locks[model.id] = threading.Lock()
            self._rebuild_graph(model)

    def _bump_session_mutations(self) -> None:
        with self._lock:
            self._session_mutations += 1
            due = self._session_mutations % self.config.session_snapshot_every == 0
        if due:
            self.snapshot_sessions()

    def snapshot_sessions(self) -> None:
        """Best-effort session dump for inspection; sessions are not reloaded."""
        if self.config.data_dir is None:
            return
        with self._lock:
            sessions = list(self._sessions.values())
        payload = []
        for session in sessions:
            with session.lock:
                payload.append(
                    {
                        "id": session.id,
                        "space_id": session.space_id,
                        "preferences": list(session.preferences),
                        "last_fix": _estimate_doc(session.last_fix) if session.last_fix else None,
                        "events": len(session.event_log),
                    }
                )
        path = self.config.data_dir / "sessions.json"
        path.write_text(json.dumps(payload, indent=2) + "\n")


def _clamp_into_graph(graph: nav.NavGraph, p) -> tuple[float, float]:
    margin = graph.cell_size / 2.0
    x = min(max(p[0], graph.origin[0] + margin),
            graph.origin[0] + graph.width * graph.cell_size - margin)
    y = min(max(p[1], graph.origin[1] + margin),
            graph.origin[1] + graph.height * graph.cell_size - margin)
    return (x, y)


def _mutation_api_error(exc: Exception) -> ApiError:
    from .model import InvalidMutationError, UnknownIdError

    if isinstance(exc, UnknownIdError):
        return ApiError("unknown-id", str(exc))
    if isinstance(exc, InvalidMutationError):
        return ApiError("validation-failed", "mutation rejected", exc.errors)
    return ApiError("bad-request", str(exc))


def _parse_readings(readings_docs) -> list[RssiReading]:
    if not isinstance(readings_docs, list):
        raise ApiError("bad-request", "readings must be a list")
    readings = []
    for doc in readings_docs:
        if not isinstance(doc, dict):
            raise ApiError("bad-request", "each reading must be an object")
        try:
            rssi = float(doc["rssi"])
            timestamp = int(doc["timestamp"])
            beacon_id = str(doc["beacon_id"])
        except (KeyError, TypeError, ValueError):
            raise ApiError(
                "bad-request", "reading needs beacon_id, rssi and timestamp fields"
            )
        if not (-120.0 <= rssi <= 0.0):
            raise ApiError("bad-request", f"rssi {rssi} out of [-120, 0]")
        readings.append(RssiReading(beacon_id=beacon_id, rssi=rssi, timestamp=timestamp))
    return readings
