"""Capture-point registration and tag placement.

A scan walk is an ordered list of steps; the first capture point is the
world origin with heading 0, and each later pose is the running sum of the
step deltas. A tag observed from a capture point is a spherical ray
(yaw offset from the capture heading, pitch up from horizontal, depth along
the ray) and lands at a world (x, y, z) anchor position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .geometry import Point2, polygon_area, point_in_polygon
from .model import (
    Anchor,
    CapturePoint,
    Mutation,
    SpaceModel,
    apply_mutation,
)

DEFAULT_EYE_HEIGHT = 1.5


class ScanError(ValueError):
    pass


@dataclass(frozen=True)
class ScanStep:
    capture_id: str
    delta: Point2
    heading: float
    eye_height: float = DEFAULT_EYE_HEIGHT


@dataclass(frozen=True)
class TagObservation:
    capture_id: str
    yaw: float
    pitch: float
    depth: float
    kind: str
    title: str = ""
    description: str = ""
    anchor_id: str | None = None


def register_capture_points(steps: list[ScanStep]) -> list[CapturePoint]:
    """Turn a scan walk into capture points with cumulative poses."""
    if not steps:
        raise ScanError("scan walk is empty")
    first = steps[0]
    if first.delta != (0.0, 0.0) or first.heading != 0.0:
        raise ScanError("first capture must be origin (delta (0,0), heading 0)")
    seen: set[str] = set()
    points: list[CapturePoint] = []
    x, y = 0.0, 0.0
    for order, step in enumerate(steps):
        if step.capture_id in seen:
            raise ScanError(f"duplicate capture_id {step.capture_id}")
        seen.add(step.capture_id)
        x += step.delta[0]
        y += step.delta[1]
        points.append(
            CapturePoint(
                id=step.capture_id,
                order=order,
                pose=(x, y),
                heading=step.heading,
                eye_height=step.eye_height,
            )
        )
    return points


def place_anchor(obs: TagObservation, capture: CapturePoint) -> Anchor:
    """Convert one tag observation into a world-frame anchor.

    The ray leaves the capture eye point at absolute angle
    heading + yaw in the floor plane, climbs by pitch, and the anchor sits
    `depth` meters along it, so the anchor is always exactly `depth` from
    the eye point.
    """
    if obs.capture_id != capture.id:
        raise ScanError(f"observation is for capture {obs.capture_id}, got {capture.id}")
    if obs.depth <= 0:
        raise ScanError("observation depth must be > 0")
    if not (-math.pi / 2 <= obs.pitch <= math.pi / 2):
        raise ScanError("observation pitch must lie in [-pi/2, pi/2]")
    theta = capture.heading + obs.yaw
    horizontal = obs.depth * math.cos(obs.pitch)
    position = (
        capture.pose[0] + horizontal * math.cos(theta),
        capture.pose[1] + horizontal * math.sin(theta),
        capture.eye_height + obs.depth * math.sin(obs.pitch),
    )
    anchor_id = obs.anchor_id if obs.anchor_id is not None else f"tag-{obs.capture_id}"
    return Anchor(
        id=anchor_id,
        kind=obs.kind,
        title=obs.title,
        description=obs.description,
        position=position,
    )


def room_of_point(model: SpaceModel, p: Point2) -> str | None:
    """Room whose polygon contains p (boundary-inclusive).

    Overlapping rooms resolve to the smallest area; remaining ties to the
    lexicographically smallest room id.
    """
    best: tuple[float, str] | None = None
    for room in model.rooms:
        if point_in_polygon(p, room.polygon):
            key = (polygon_area(room.polygon), room.id)
            if best is None or key < best:
                best = key
    return best[1] if best else None


def tag_poi(model: SpaceModel, anchor: Anchor) -> SpaceModel:
    """Add an anchor to the model, auto-assigning its room by containment.

    Asset and poi anchors must land inside a room; label kinds may sit
    anywhere (they just get no room_id).
    """
    room_id = room_of_point(model, (anchor.position[0], anchor.position[1]))
    placed = replace(anchor, room_id=room_id)
    return apply_mutation(model, Mutation(action="add", kind="anchor", entity=placed))
