"""Spatial twin data model: entities, validation and versioned mutation.

A SpaceModel is an immutable snapshot of one indoor space. Mutations never
modify a snapshot in place; they return a new snapshot with version + 1, and
a mutation that would leave the model invalid is rejected whole.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field, fields as dc_fields, replace

from .geometry import (
    Point2,
    Point3,
    dist2,
    point_in_polygon,
    polygon_area,
    polygon_is_simple,
)

ANCHOR_KINDS = ("asset", "poi", "room_label", "wall_label")

# Anchor kinds that must sit inside a room polygon (x, y projection).
_ROOM_BOUND_KINDS = ("asset", "poi")


@dataclass(frozen=True)
class Room:
    id: str
    name: str
    polygon: tuple[Point2, ...]


@dataclass(frozen=True)
class WallSegment:
    id: str
    p1: Point2
    p2: Point2


@dataclass(frozen=True)
class Portal:
    """A passable gap in a wall, e.g. a doorway."""

    id: str
    p1: Point2
    p2: Point2


@dataclass(frozen=True)
class Anchor:
    """A uniquely identified tag with a description and a 3D position."""

    id: str
    kind: str
    title: str
    description: str
    position: Point3
    room_id: str | None = None


@dataclass(frozen=True)
class BeaconDevice:
    id: str
    hardware_uid: str
    position: Point3
    tx_power_dbm_at_1m: float = -59.0
    path_loss_exponent: float = 2.0


@dataclass(frozen=True)
class PoiDeviceMapping:
    asset_id: str
    beacon_id: str


@dataclass(frozen=True)
class CapturePoint:
    id: str
    order: int
    pose: Point2
    heading: float
    eye_height: float = 1.5


@dataclass(frozen=True)
class SpaceModel:
    id: str
    name: str
    floor: int = 0
    rooms: tuple[Room, ...] = ()
    walls: tuple[WallSegment, ...] = ()
    portals: tuple[Portal, ...] = ()
    anchors: tuple[Anchor, ...] = ()
    beacons: tuple[BeaconDevice, ...] = ()
    mappings: tuple[PoiDeviceMapping, ...] = ()
    capture_points: tuple[CapturePoint, ...] = ()
    version: int = 0

    def room_by_id(self, room_id: str) -> Room | None:
        for room in self.rooms:
            if room.id == room_id:
                return room
        return None

    def anchor_by_id(self, anchor_id: str) -> Anchor | None:
        for anchor in self.anchors:
            if anchor.id == anchor_id:
                return anchor
        return None

    def beacon_by_id(self, beacon_id: str) -> BeaconDevice | None:
        for beacon in self.beacons:
            if beacon.id == beacon_id:
                return beacon
        return None

    def assets(self) -> tuple[Anchor, ...]:
        return tuple(a for a in self.anchors if a.kind == "asset")

    def mapping_for_asset(self, asset_id: str) -> PoiDeviceMapping | None:
        for m in self.mappings:
            if m.asset_id == asset_id:
                return m
        return None


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


class ModelError(Exception):
    """Base class for model mutation failures."""


class UnknownIdError(ModelError):
    def __init__(self, target_id: str):
        super().__init__(f"unknown id {target_id!r}")
        self.target_id = target_id


class InvalidMutationError(ModelError):
    def __init__(self, errors: list[str]):
        super().__init__("mutation rejected: " + "; ".join(errors))
        self.errors = errors


def random_id() -> str:
    """Lowercase 8-hex-digit identifier for server-generated entities."""
    return secrets.token_hex(4)


def fresh_id(taken: set[str]) -> str:
    """Random id retried until it misses every identifier in `taken`."""
    candidate = random_id()
    while candidate in taken:
        candidate = random_id()
    return candidate


def all_ids(model: SpaceModel) -> list[str]:
    """Identifiers of every entity, in declaration order (mappings excluded:
    they are keyed by the asset they map)."""
    ids: list[str] = []
    for group in (model.rooms, model.walls, model.portals, model.anchors,
                  model.beacons, model.capture_points):
        ids.extend(e.id for e in group)
    return ids


def anchor_inside_some_room(model: SpaceModel, anchor: Anchor) -> bool:
    p = (anchor.position[0], anchor.position[1])
    return any(point_in_polygon(p, room.polygon) for room in model.rooms)


def validate_space(model: SpaceModel) -> ValidationReport:
    """Check every model invariant; returns all violations, raises nothing."""
    report = ValidationReport()
    err = report.errors.append
    warn = report.warnings.append

    seen: set[str] = set()
    for entity_id in all_ids(model):
        if entity_id in seen:
            err(f"duplicate identifier {entity_id}")
        seen.add(entity_id)

    for room in model.rooms:
        if len(room.polygon) < 3:
            err(f"room {room.id}: polygon needs at least 3 vertices")
            continue
        if not polygon_is_simple(room.polygon):
            err(f"room {room.id}: polygon self-intersects or is degenerate")
        elif polygon_area(room.polygon) <= 0.0:
            err(f"room {room.id}: polygon has zero area")

    for wall in model.walls:
        if wall.p1 == wall.p2:
            err(f"wall {wall.id}: endpoints coincide")
    for portal in model.portals:
        if portal.p1 == portal.p2:
            err(f"portal {portal.id}: endpoints coincide")

    room_ids = {r.id for r in model.rooms}
    for anchor in model.anchors:
        if anchor.kind not in ANCHOR_KINDS:
            err(f"anchor {anchor.id}: unknown kind {anchor.kind!r}")
            continue
        if anchor.position[2] < 0:
            err(f"anchor {anchor.id}: z must be >= 0")
        if anchor.room_id is not None and anchor.room_id not in room_ids:
            err(f"anchor {anchor.id}: dangling reference {anchor.room_id}")
        inside = anchor_inside_some_room(model, anchor)
        if anchor.kind in _ROOM_BOUND_KINDS and not inside:
            err(f"anchor {anchor.id}: {anchor.kind} anchor lies outside all rooms")
        elif anchor.kind not in _ROOM_BOUND_KINDS and not inside:
            warn(f"anchor {anchor.id}: lies outside all rooms")

    for beacon in model.beacons:
        if not (0.5 < beacon.path_loss_exponent <= 6.0):
            err(f"beacon {beacon.id}: path_loss_exponent out of (0.5, 6.0]")
        if not (-100.0 <= beacon.tx_power_dbm_at_1m <= 0.0):
            err(f"beacon {beacon.id}: tx_power_dbm_at_1m out of [-100, 0]")

    asset_ids = {a.id for a in model.anchors if a.kind == "asset"}
    beacon_ids = {b.id for b in model.beacons}
    mapped_assets: set[str] = set()
    mapped_beacons: set[str] = set()
    for m in model.mappings:
        if m.asset_id not in asset_ids:
            err(f"mapping: dangling reference {m.asset_id}")
        if m.beacon_id not in beacon_ids:
            err(f"mapping: dangling reference {m.beacon_id}")
        if m.asset_id in mapped_assets:
            err(f"mapping: asset {m.asset_id} mapped twice")
        if m.beacon_id in mapped_beacons:
            err(f"mapping: beacon {m.beacon_id} mapped twice")
        mapped_assets.add(m.asset_id)
        mapped_beacons.add(m.beacon_id)
    for asset_id in sorted(asset_ids - mapped_assets):
        warn(f"asset {asset_id} has no beacon mapping")

    orders = sorted(cp.order for cp in model.capture_points)
    if orders and orders != list(range(len(orders))):
        err("capture point orders must be unique and contiguous from 0")
    for cp in model.capture_points:
        if cp.order == 0 and (cp.pose != (0.0, 0.0) or cp.heading != 0.0):
            err(f"capture point {cp.id}: order 0 must sit at the origin with heading 0")

    if model.version < 0:
        err("version must be >= 0")
    return report


# Mutation plumbing: one entity collection per mutable kind.

_KIND_FIELDS = {
    "room": "rooms",
    "wall": "walls",
    "portal": "portals",
    "anchor": "anchors",
    "beacon": "beacons",
    "mapping": "mappings",
    "capture_point": "capture_points",
}

_KIND_TYPES = {
    "room": Room,
    "wall": WallSegment,
    "portal": Portal,
    "anchor": Anchor,
    "beacon": BeaconDevice,
    "mapping": PoiDeviceMapping,
    "capture_point": CapturePoint,
}


@dataclass(frozen=True)
class Mutation:
    """One add/update/remove of a single entity.

    add:    `entity` holds the new entity.
    update: `target_id` names the entity, `fields` holds the changed attrs.
    remove: `target_id` names the entity.

    Mappings are keyed by their asset_id.
    """

    action: str
    kind: str
    entity: object | None = None
    target_id: str | None = None
    fields: dict | None = None


def _entity_key(kind: str, entity) -> str:
    return entity.asset_id if kind == "mapping" else entity.id


def apply_mutation(model: SpaceModel, mutation: Mutation) -> SpaceModel:
    """Apply one mutation, returning a validated snapshot at version + 1.

    Raises instead of returning a model that validate_space would reject;
    the input snapshot is never modified.
    """
    if mutation.kind not in _KIND_FIELDS:
        raise ModelError(f"unknown entity kind {mutation.kind!r}")
    attr = _KIND_FIELDS[mutation.kind]
    current: tuple = getattr(model, attr)

    if mutation.action == "add":
        entity = mutation.entity
        if not isinstance(entity, _KIND_TYPES[mutation.kind]):
            raise ModelError(f"add of kind {mutation.kind} expects a {_KIND_TYPES[mutation.kind].__name__}")
        updated = current + (entity,)
    elif mutation.action in ("update", "remove"):
        if mutation.target_id is None:
            raise ModelError(f"{mutation.action} requires a target id")
        index = next(
            (i for i, e in enumerate(current) if _entity_key(mutation.kind, e) == mutation.target_id),
            None,
        )
        if index is None:
            raise UnknownIdError(mutation.target_id)
        if mutation.action == "remove":
            updated = current[:index] + current[index + 1:]
        else:
            try:
                revised = replace(current[index], **(mutation.fields or {}))
            except TypeError as exc:
                raise ModelError(f"bad update fields: {exc}") from exc
            updated = current[:index] + (revised,) + current[index + 1:]
    else:
        raise ModelError(f"unknown mutation action {mutation.action!r}")

    result = replace(model, **{attr: updated, "version": model.version + 1})
    report = validate_space(result)
    if not report.ok:
        raise InvalidMutationError(report.errors)
    return result


def entity_field_names(kind: str) -> list[str]:
    return [f.name for f in dc_fields(_KIND_TYPES[kind])]
