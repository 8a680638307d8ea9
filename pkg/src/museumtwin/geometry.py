"""Planar geometry helpers shared by the spatial model, tagging and navigation.

All coordinates are meters in the floor plane. Polygons are ordered vertex
lists (either winding); containment is boundary-inclusive.
"""

from __future__ import annotations

import math

Point2 = tuple[float, float]
Point3 = tuple[float, float, float]

_EPS = 1e-12


def dist2(a: Point2, b: Point2) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def dist3(a: Point3, b: Point3) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


def polygon_area(vertices: list[Point2] | tuple[Point2, ...]) -> float:
    """Unsigned area by the shoelace formula."""
    n = len(vertices)
    acc = 0.0
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        acc += x1 * y2 - x2 * y1
    return abs(acc) / 2.0


def _orient(a: Point2, b: Point2, c: Point2) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(p: Point2, a: Point2, b: Point2) -> bool:
    """True when p lies on segment ab (collinearity already established)."""
    return (
        min(a[0], b[0]) - _EPS <= p[0] <= max(a[0], b[0]) + _EPS
        and min(a[1], b[1]) - _EPS <= p[1] <= max(a[1], b[1]) + _EPS
    )


def segments_intersect(a1: Point2, a2: Point2, b1: Point2, b2: Point2) -> bool:
    """Segment intersection test, touching endpoints included."""
    d1 = _orient(b1, b2, a1)
    d2 = _orient(b1, b2, a2)
    d3 = _orient(a1, a2, b1)
    d4 = _orient(a1, a2, b2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if abs(d1) <= _EPS and _on_segment(a1, b1, b2):
        return True
    if abs(d2) <= _EPS and _on_segment(a2, b1, b2):
        return True
    if abs(d3) <= _EPS and _on_segment(b1, a1, a2):
        return True
    if abs(d4) <= _EPS and _on_segment(b2, a1, a2):
        return True
    return False


def polygon_is_simple(vertices: list[Point2] | tuple[Point2, ...]) -> bool:
    """True for a non-self-intersecting polygon with no degenerate edges.

    Non-adjacent edges may not touch at all; adjacent edges share exactly
    their common vertex.
    """
    n = len(vertices)
    if n < 3:
        return False
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for a, b in edges:
        if dist2(a, b) <= _EPS:
            return False
    for i in range(n):
        for j in range(i + 1, n):
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            if adjacent:
                continue
            if segments_intersect(*edges[i], *edges[j]):
                return False
    return True


def point_in_polygon(p: Point2, vertices: list[Point2] | tuple[Point2, ...]) -> bool:
    """Boundary-inclusive containment via crossing number.

    Points on an edge or vertex count as inside.
    """
    n = len(vertices)
    for i in range(n):
        a = vertices[i]
        b = vertices[(i + 1) % n]
        if abs(_orient(a, b, p)) <= _EPS and _on_segment(p, a, b):
            return True
    inside = False
    x, y = p
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_cross:
                inside = not inside
    return inside


def point_segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    """Distance from p to the closed segment ab."""
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    seg_len_sq = dx * dx + dy * dy
    if seg_len_sq <= _EPS:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / seg_len_sq
    t = max(0.0, min(1.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def point_line_distance(p: Point2, a: Point2, b: Point2) -> float:
    """Distance from p to the infinite line through a and b (a != b)."""
    ax, ay = a
    bx, by = b
    length = math.hypot(bx - ax, by - ay)
    if length <= _EPS:
        return math.hypot(p[0] - ax, p[1] - ay)
    return abs(_orient(a, b, p)) / length
