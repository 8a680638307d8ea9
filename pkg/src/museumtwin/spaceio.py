"""Space document serialization and atomic file persistence.

One JSON document per space. Points are `[x, y]` or `[x, y, z]` arrays of
decimal meters; headings are `{"deg": n}` or `{"rad": n}`. Unknown fields are
tolerated with a warning so newer documents stay loadable; missing required
fields are fatal.
"""

from __future__ import annotations

import json
import logging
import math
import os
import tempfile
from pathlib import Path

from .model import (
    Anchor,
    BeaconDevice,
    CapturePoint,
    PoiDeviceMapping,
    Portal,
    Room,
    SpaceModel,
    WallSegment,
    validate_space,
)

log = logging.getLogger(__name__)


class SpaceIoError(Exception):
    """Base class for load/save failures."""


class SpaceParseError(SpaceIoError):
    """Document is not valid JSON; `offset` is the failing byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class SpaceFormatError(SpaceIoError):
    """Document parsed but does not describe a space."""


class SpaceValidationError(SpaceIoError):
    def __init__(self, errors: list[str]):
        super().__init__("space document is invalid: " + "; ".join(errors))
        self.errors = errors


def _require(doc: dict, key: str, context: str):
    if key not in doc:
        raise SpaceFormatError(f"{context}: missing required field {key!r}")
    return doc[key]


def _number(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SpaceFormatError(f"{context}: expected a finite number, got {value!r}")
    return float(value)


def parse_point2(value, context: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) < 2:
        raise SpaceFormatError(f"{context}: expected [x, y]")
    return (_number(value[0], context), _number(value[1], context))


def parse_point3(value, context: str) -> tuple[float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) not in (2, 3):
        raise SpaceFormatError(f"{context}: expected [x, y] or [x, y, z]")
    z = _number(value[2], context) if len(value) == 3 else 0.0
    return (_number(value[0], context), _number(value[1], context), z)


def parse_heading(value, context: str) -> float:
    """Headings accept degrees or radians behind an explicit unit tag."""
    if isinstance(value, dict):
        if "rad" in value:
            return _number(value["rad"], context)
        if "deg" in value:
            return math.radians(_number(value["deg"], context))
        raise SpaceFormatError(f"{context}: heading object needs 'rad' or 'deg'")
    raise SpaceFormatError(f"{context}: heading must be {{'rad': n}} or {{'deg': n}}")


def heading_doc(radians: float) -> dict:
    return {"rad": radians}


def _check_unknown(doc: dict, known: set[str], context: str, warnings: list[str]):
    for key in doc:
        if key not in known:
            warnings.append(f"{context}: ignoring unknown field {key!r}")


def _parse_room(doc: dict, warnings: list[str]) -> Room:
    context = f"room {doc.get('id', '?')}"
    _check_unknown(doc, {"id", "name", "polygon"}, context, warnings)
    polygon = _require(doc, "polygon", context)
    if not isinstance(polygon, list):
        raise SpaceFormatError(f"{context}: polygon must be a list of points")
    return Room(
        id=str(_require(doc, "id", context)),
        name=str(doc.get("name", "")),
        polygon=tuple(parse_point2(p, context) for p in polygon),
    )


def _parse_segment(doc: dict, cls, label: str, warnings: list[str]):
    context = f"{label} {doc.get('id', '?')}"
    _check_unknown(doc, {"id", "p1", "p2"}, context, warnings)
    return cls(
        id=str(_require(doc, "id", context)),
        p1=parse_point2(_require(doc, "p1", context), context),
        p2=parse_point2(_require(doc, "p2", context), context),
    )


def _parse_anchor(doc: dict, warnings: list[str]) -> Anchor:
    context = f"anchor {doc.get('id', '?')}"
    known = {"id", "kind", "title", "description", "position", "room_id"}
    _check_unknown(doc, known, context, warnings)
    room_id = doc.get("room_id")
    return Anchor(
        id=str(_require(doc, "id", context)),
        kind=str(_require(doc, "kind", context)),
        title=str(doc.get("title", "")),
        description=str(doc.get("description", "")),
        position=parse_point3(_require(doc, "position", context), context),
        room_id=None if room_id is None else str(room_id),
    )


def _parse_beacon(doc: dict, warnings: list[str]) -> BeaconDevice:
    context = f"beacon {doc.get('id', '?')}"
    known = {"id", "hardware_uid", "position", "tx_power_dbm_at_1m", "path_loss_exponent"}
    _check_unknown(doc, known, context, warnings)
    return BeaconDevice(
        id=str(_require(doc, "id", context)),
        hardware_uid=str(doc.get("hardware_uid", "")),
        position=parse_point3(_require(doc, "position", context), context),
        tx_power_dbm_at_1m=_number(doc.get("tx_power_dbm_at_1m", -59.0), context),
        path_loss_exponent=_number(doc.get("path_loss_exponent", 2.0), context),
    )


def _parse_mapping(doc: dict, warnings: list[str]) -> PoiDeviceMapping:
    context = f"mapping {doc.get('asset_id', '?')}"
    _check_unknown(doc, {"asset_id", "beacon_id"}, context, warnings)
    return PoiDeviceMapping(
        asset_id=str(_require(doc, "asset_id", context)),
        beacon_id=str(_require(doc, "beacon_id", context)),
    )


def _parse_capture_point(doc: dict, warnings: list[str]) -> CapturePoint:
    context = f"capture_point {doc.get('id', '?')}"
    known = {"id", "order", "pose", "heading", "eye_height"}
    _check_unknown(doc, known, context, warnings)
    order = _require(doc, "order", context)
    if isinstance(order, bool) or not isinstance(order, int):
        raise SpaceFormatError(f"{context}: order must be an integer")
    return CapturePoint(
        id=str(_require(doc, "id", context)),
        order=order,
        pose=parse_point2(_require(doc, "pose", context), context),
        heading=parse_heading(_require(doc, "heading", context), context),
        eye_height=_number(doc.get("eye_height", 1.5), context),
    )


_ENTITY_PARSERS = {
    "rooms": _parse_room,
    "walls": lambda d, w: _parse_segment(d, WallSegment, "wall", w),
    "portals": lambda d, w: _parse_segment(d, Portal, "portal", w),
    "anchors": _parse_anchor,
    "beacons": _parse_beacon,
    "mappings": _parse_mapping,
    "capture_points": _parse_capture_point,
}

_TOP_KEYS = {"id", "name", "floor", "version"} | set(_ENTITY_PARSERS)


def space_from_doc(doc: dict) -> tuple[SpaceModel, list[str]]:
    """Build a model from a parsed document. Returns (model, warnings).

    Structural problems raise SpaceFormatError; invariant violations are the
    caller's to check via validate_space.
    """
    if not isinstance(doc, dict):
        raise SpaceFormatError("space document must be a JSON object")
    warnings: list[str] = []
    _check_unknown(doc, _TOP_KEYS, "space", warnings)

    groups: dict[str, tuple] = {}
    for key, parser in _ENTITY_PARSERS.items():
        raw = doc.get(key, [])
        if not isinstance(raw, list):
            raise SpaceFormatError(f"space: {key} must be a list")
        groups[key] = tuple(parser(item, warnings) for item in raw)

    version = doc.get("version", 0)
    if isinstance(version, bool) or not isinstance(version, int) or version < 0:
        raise SpaceFormatError("space: version must be a non-negative integer")

    model = SpaceModel(
        id=str(_require(doc, "id", "space")),
        name=str(doc.get("name", "")),
        floor=int(doc.get("floor", 0)),
        rooms=groups["rooms"],
        walls=groups["walls"],
        portals=groups["portals"],
        anchors=groups["anchors"],
        beacons=groups["beacons"],
        mappings=groups["mappings"],
        capture_points=groups["capture_points"],
        version=version,
    )
    return model, warnings


def space_to_doc(model: SpaceModel) -> dict:
    return {
        "id": model.id,
        "name": model.name,
        "floor": model.floor,
        "rooms": [
            {"id": r.id, "name": r.name, "polygon": [list(p) for p in r.polygon]}
            for r in model.rooms
        ],
        "walls": [{"id": w.id, "p1": list(w.p1), "p2": list(w.p2)} for w in model.walls],
        "portals": [{"id": p.id, "p1": list(p.p1), "p2": list(p.p2)} for p in model.portals],
        "anchors": [
            {
                "id": a.id,
                "kind": a.kind,
                "title": a.title,
                "description": a.description,
                "position": list(a.position),
                **({"room_id": a.room_id} if a.room_id is not None else {}),
            }
            for a in model.anchors
        ],
        "beacons": [
            {
                "id": b.id,
                "hardware_uid": b.hardware_uid,
                "position": list(b.position),
                "tx_power_dbm_at_1m": b.tx_power_dbm_at_1m,
                "path_loss_exponent": b.path_loss_exponent,
            }
            for b in model.beacons
        ],
        "mappings": [{"asset_id": m.asset_id, "beacon_id": m.beacon_id} for m in model.mappings],
        "capture_points": [
            {
                "id": c.id,
                "order": c.order,
                "pose": list(c.pose),
                "heading": heading_doc(c.heading),
                "eye_height": c.eye_height,
            }
            for c in model.capture_points
        ],
        "version": model.version,
    }


def parse_space_text(text: str) -> tuple[SpaceModel, list[str]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpaceParseError(exc.msg, exc.pos) from exc
    return space_from_doc(doc)


def save_space(model: SpaceModel, path: str | Path) -> None:
    """Validate then write atomically: temp file in the target directory,
    fsync, rename over the destination."""
    report = validate_space(model)
    if not report.ok:
        raise SpaceValidationError(report.errors)
    path = Path(path)
    payload = json.dumps(space_to_doc(model), indent=2) + "\n"
    fd, tmp_name = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(payload)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    finally:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)


def load_space(path: str | Path) -> SpaceModel:
    """Load and validate a space document; warnings are logged, errors fatal."""
    model, warnings = parse_space_text(Path(path).read_text())
    for message in warnings:
        log.warning("%s: %s", path, message)
    report = validate_space(model)
    if not report.ok:
        raise SpaceValidationError(report.errors)
    return model
