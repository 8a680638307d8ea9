"""Navigation: free-space grid, shortest paths and waypoint ordering.

The space is rasterized into square cells. A cell is passable when its
center lies inside a room and keeps more than `clearance` from every wall,
except that cells hugging a portal segment are forced open so doorways in
walls stay crossable. Paths are 8-connected with orthogonal cost cell_size
and diagonal cost cell_size*sqrt(2); a diagonal step is banned when both of
its orthogonal neighbor cells are blocked.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Point2, dist2, point_in_polygon, point_segment_distance, polygon_area
from .model import SpaceModel

DEFAULT_CELL_SIZE_M = 0.5
DEFAULT_CLEARANCE_M = 0.25

SQRT2 = math.sqrt(2.0)

Cell = tuple[int, int]  # (row, col); row grows with y, col with x

# Fixed neighbor expansion order: N, NE, E, SE, S, SW, W, NW.
NEIGHBOR_STEPS: tuple[tuple[int, int], ...] = (
    (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1),
)


class NavError(Exception):
    pass


class DegenerateSpace(NavError):
    pass


class OutOfBounds(NavError):
    pass


class NoPassableCells(NavError):
    pass


class NoPath(NavError):
    pass


class UnknownAsset(NavError):
    def __init__(self, asset_ids: list[str]):
        super().__init__("unknown asset(s): " + ", ".join(asset_ids))
        self.asset_ids = asset_ids


class UnreachableTarget(NavError):
    def __init__(self, offenders: list):
        super().__init__("unreachable target(s): " + ", ".join(str(t) for t in offenders))
        self.offenders = offenders


@dataclass(frozen=True)
class NavGraph:
    origin: Point2  # lower-left corner of cell (0, 0)
    cell_size: float
    width: int
    height: int
    passable: np.ndarray  # bool, shape (height, width)
    portal_forced: np.ndarray  # bool, cells opened by a portal

    def cell_center(self, cell: Cell) -> Point2:
        row, col = cell
        return (
            self.origin[0] + (col + 0.5) * self.cell_size,
            self.origin[1] + (row + 0.5) * self.cell_size,
        )

    def contains_point(self, p: Point2) -> bool:
        return (
            self.origin[0] <= p[0] < self.origin[0] + self.width * self.cell_size
            and self.origin[1] <= p[1] < self.origin[1] + self.height * self.cell_size
        )

    def cell_of_point(self, p: Point2) -> Cell:
        col = int(math.floor((p[0] - self.origin[0]) / self.cell_size))
        row = int(math.floor((p[1] - self.origin[1]) / self.cell_size))
        return (row, col)

    def is_passable(self, cell: Cell) -> bool:
        row, col = cell
        return 0 <= row < self.height and 0 <= col < self.width and bool(self.passable[row, col])


@dataclass(frozen=True)
class Route:
    cells: tuple[Cell, ...]
    polyline: tuple[Point2, ...]
    length: float
    visit_order: tuple[tuple[str, int], ...] = ()  # (asset_id, polyline index)


def build_nav_graph(
    model: SpaceModel,
    cell_size: float = DEFAULT_CELL_SIZE_M,
    clearance: float = DEFAULT_CLEARANCE_M,
) -> NavGraph:
    """Rasterize rooms/walls/portals into a passability grid.

    Grid bounds are the bounding box of all rooms padded by one cell on
    every side.
    """
    if cell_size <= 0:
        raise ValueError("cell_size must be > 0")
    rooms = [r for r in model.rooms if len(r.polygon) >= 3 and polygon_area(r.polygon) > 0]
    if not rooms:
        raise DegenerateSpace("no rooms with nonzero area")
    for portal in model.portals:
        if dist2(portal.p1, portal.p2) < cell_size:
            raise DegenerateSpace(
                f"portal {portal.id} is narrower than one grid cell ({cell_size} m)"
            )

    xs = [v[0] for r in rooms for v in r.polygon]
    ys = [v[1] for r in rooms for v in r.polygon]
    origin = (min(xs) - cell_size, min(ys) - cell_size)
    width = int(math.ceil((max(xs) - min(xs)) / cell_size)) + 2
    height = int(math.ceil((max(ys) - min(ys)) / cell_size)) + 2

    passable = np.zeros((height, width), dtype=bool)
    portal_forced = np.zeros((height, width), dtype=bool)
    for row in range(height):
        cy = origin[1] + (row + 0.5) * cell_size
        for col in range(width):
            cx = origin[0] + (col + 0.5) * cell_size
            center = (cx, cy)
            if not any(point_in_polygon(center, r.polygon) for r in rooms):
                continue
            forced = any(
                point_segment_distance(center, p.p1, p.p2) <= clearance for p in model.portals
            )
            if forced:
                passable[row, col] = True
                portal_forced[row, col] = True
                continue
            clear = all(
                point_segment_distance(center, w.p1, w.p2) > clearance for w in model.walls
            )
            passable[row, col] = clear
    passable.flags.writeable = False
    portal_forced.flags.writeable = False
    return NavGraph(
        origin=origin,
        cell_size=cell_size,
        width=width,
        height=height,
        passable=passable,
        portal_forced=portal_forced,
    )


def render_grid(graph: NavGraph) -> str:
    """Text raster for golden tests: '#' blocked, '.' passable, 'P' forced.

    Rows print north-up (highest row first).
    """
    lines = []
    for row in range(graph.height - 1, -1, -1):
        chars = []
        for col in range(graph.width):
            if graph.portal_forced[row, col]:
                chars.append("P")
            elif graph.passable[row, col]:
                chars.append(".")
            else:
                chars.append("#")
        lines.append("".join(chars))
    return "\n".join(lines)


def snap_to_graph(graph: NavGraph, p: Point2) -> Cell:
    """Cell containing p if passable, else the nearest passable cell.

    Nearest is by expanding Chebyshev rings around the containing cell;
    ties inside a ring break to the smaller (row, col).
    """
    if not graph.contains_point(p):
        raise OutOfBounds(f"point {p} lies outside the padded grid bounds")
    start = graph.cell_of_point(p)
    if graph.is_passable(start):
        return start
    row0, col0 = start
    max_radius = max(graph.width, graph.height)
    for radius in range(1, max_radius + 1):
        ring: list[Cell] = []
        for row in range(row0 - radius, row0 + radius + 1):
            for col in range(col0 - radius, col0 + radius + 1):
                if max(abs(row - row0), abs(col - col0)) != radius:
                    continue
                if graph.is_passable((row, col)):
                    ring.append((row, col))
        if ring:
            return min(ring)
    raise NoPassableCells("grid has no passable cells")


def _neighbors(graph: NavGraph, cell: Cell):
    """Yield (neighbor, step_cost) honoring the corner-cutting ban."""
    row, col = cell
    for dr, dc in NEIGHBOR_STEPS:
        nxt = (row + dr, col + dc)
        if not graph.is_passable(nxt):
            continue
        if dr != 0 and dc != 0:
            side_a = graph.is_passable((row + dr, col))
            side_b = graph.is_passable((row, col + dc))
            if not side_a and not side_b:
                continue
            cost = graph.cell_size * SQRT2
        else:
            cost = graph.cell_size
        yield nxt, cost


def dijkstra(graph: NavGraph, source: Cell, goal: Cell | None = None):
    """Dijkstra over the grid; returns (dist, prev) dicts.

    Deterministic: the priority queue orders by (cost, row, col) and
    neighbors expand in the fixed N..NW order with strict relaxation.
    """
    if not graph.is_passable(source):
        raise NavError(f"source cell {source} is not passable")
    dist: dict[Cell, float] = {source: 0.0}
    prev: dict[Cell, Cell] = {}
    heap: list[tuple[float, int, int]] = [(0.0, source[0], source[1])]
    done: set[Cell] = set()
    while heap:
        cost, row, col = heapq.heappop(heap)
        cell = (row, col)
        if cell in done:
            continue
        done.add(cell)
        if goal is not None and cell == goal:
            break
        for nxt, step in _neighbors(graph, cell):
            candidate = cost + step
            if candidate < dist.get(nxt, math.inf):
                dist[nxt] = candidate
                prev[nxt] = cell
                heapq.heappush(heap, (candidate, nxt[0], nxt[1]))
    return dist, prev


def _walk_back(prev: dict[Cell, Cell], source: Cell, goal: Cell) -> list[Cell]:
    cells = [goal]
    while cells[-1] != source:
        cells.append(prev[cells[-1]])
    cells.reverse()
    return cells


def _route_from_cells(graph: NavGraph, cells: list[Cell]) -> Route:
    length = 0.0
    for a, b in zip(cells, cells[1:]):
        step = graph.cell_size * (SQRT2 if a[0] != b[0] and a[1] != b[1] else 1.0)
        length += step
    return Route(
        cells=tuple(cells),
        polyline=tuple(graph.cell_center(c) for c in cells),
        length=length,
    )


def shortest_path(graph: NavGraph, a: Cell, b: Cell) -> Route:
    """Minimal-cost 8-connected path from a to b."""
    for cell in (a, b):
        if not graph.is_passable(cell):
            raise NavError(f"cell {cell} is not passable")
    if a == b:
        return _route_from_cells(graph, [a])
    dist, prev = dijkstra(graph, a, goal=b)
    if b not in dist:
        raise NoPath(f"no path from {a} to {b}")
    return _route_from_cells(graph, _walk_back(prev, a, b))


def _held_karp_order(table: np.ndarray, k: int) -> list[int]:
    """Exact minimum open tour: start fixed at index 0, targets 1..k, end free."""
    full = (1 << k) - 1
    # dp[mask][j]: best cost visiting `mask` (bit j-1 set) ending at target j.
    dp = [[math.inf] * (k + 1) for _ in range(full + 1)]
    parent = [[0] * (k + 1) for _ in range(full + 1)]
    for j in range(1, k + 1):
        dp[1 << (j - 1)][j] = table[0][j]
    for mask in range(1, full + 1):
        for j in range(1, k + 1):
            bit = 1 << (j - 1)
            if not mask & bit or dp[mask][j] == math.inf:
                continue
            for nxt in range(1, k + 1):
                nbit = 1 << (nxt - 1)
                if mask & nbit:
                    continue
                cand = dp[mask][j] + table[j][nxt]
                if cand < dp[mask | nbit][nxt]:
                    dp[mask | nbit][nxt] = cand
                    parent[mask | nbit][nxt] = j
    end = min(range(1, k + 1), key=lambda j: (dp[full][j], j))
    order = [end]
    mask = full
    while len(order) < k:
        j = order[-1]
        p = parent[mask][j]
        mask ^= 1 << (j - 1)
        order.append(p)
    order.reverse()
    return order


def _tour_cost(table: np.ndarray, order: list[int]) -> float:
    cost = table[0][order[0]]
    for a, b in zip(order, order[1:]):
        cost += table[a][b]
    return float(cost)


def _nearest_neighbor_order(table: np.ndarray, k: int) -> list[int]:
    remaining = list(range(1, k + 1))
    order: list[int] = []
    at = 0
    while remaining:
        nxt = min(remaining, key=lambda j: (table[at][j], j))
        order.append(nxt)
        remaining.remove(nxt)
        at = nxt
    return order


def _two_opt(table: np.ndarray, order: list[int]) -> list[int]:
    """Segment-reversal descent on the open tour until no improving swap."""
    improved = True
    while improved:
        improved = False
        for i in range(len(order)):
            for j in range(i + 1, len(order)):
                candidate = order[:i] + order[i:j + 1][::-1] + order[j + 1:]
                if _tour_cost(table, candidate) < _tour_cost(table, order) - 1e-12:
                    order = candidate
                    improved = True
                    break
            if improved:
                break
    return order


EXACT_ORDER_LIMIT = 8


def order_waypoints(
    graph: NavGraph, start: Cell, targets: list[Cell]
) -> tuple[list[Cell], np.ndarray]:
    """Visit order minimizing total path length from a fixed start.

    Returns (targets in visit order, pairwise distance table) where table
    index 0 is the start and 1..k follow the input target order. Exact
    subset-DP for k <= 8, nearest-neighbor + 2-opt beyond.
    """
    k = len(targets)
    nodes = [start] + list(targets)
    table = np.zeros((k + 1, k + 1))
    dists_from: list[dict[Cell, float]] = []
    for node in nodes:
        if not graph.is_passable(node):
            raise NavError(f"cell {node} is not passable")
        dists_from.append(dijkstra(graph, node)[0])
    unreachable = [targets[j] for j in range(k) if nodes[j + 1] not in dists_from[0]]
    if unreachable:
        raise UnreachableTarget(unreachable)
    for i in range(k + 1):
        for j in range(k + 1):
            table[i][j] = 0.0 if i == j else dists_from[i].get(nodes[j], math.inf)
    if k == 0:
        return [], table
    if k <= EXACT_ORDER_LIMIT:
        order = _held_karp_order(table, k)
    else:
        order = _two_opt(table, _nearest_neighbor_order(table, k))
    return [targets[j - 1] for j in order], table


def plan_route(
    model: SpaceModel,
    start: Point2,
    preferred_asset_ids: list[str],
    cell_size: float = DEFAULT_CELL_SIZE_M,
    clearance: float = DEFAULT_CLEARANCE_M,
    order_mode: str = "optimal",
    graph: NavGraph | None = None,
) -> Route:
    """Route from the visitor position through every preferred asset.

    order_mode "optimal" picks the minimum-length visit order; "as-given"
    keeps the caller's order. The returned visit_order pairs each asset id
    with the polyline index where the route reaches it.
    """
    known = {a.id for a in model.assets()}
    missing = [aid for aid in preferred_asset_ids if aid not in known]
    if missing:
        raise UnknownAsset(missing)
    if graph is None:
        graph = build_nav_graph(model, cell_size, clearance)
    start_cell = snap_to_graph(graph, start)
    if not preferred_asset_ids:
        single = _route_from_cells(graph, [start_cell])
        return single

    asset_cells: dict[str, Cell] = {}
    for asset_id in preferred_asset_ids:
        anchor = model.anchor_by_id(asset_id)
        asset_cells[asset_id] = snap_to_graph(graph, (anchor.position[0], anchor.position[1]))

    ordered_ids = list(preferred_asset_ids)
    if order_mode == "optimal":
        target_cells = [asset_cells[aid] for aid in preferred_asset_ids]
        try:
            ordered_cells, _ = order_waypoints(graph, start_cell, target_cells)
        except UnreachableTarget as exc:
            offenders = [
                aid for aid in preferred_asset_ids if asset_cells[aid] in exc.offenders
            ]
            raise UnreachableTarget(offenders) from exc
        # Map cells back to ids, consuming duplicates in input order.
        pool = list(preferred_asset_ids)
        ordered_ids = []
        for cell in ordered_cells:
            aid = next(a for a in pool if asset_cells[a] == cell)
            pool.remove(aid)
            ordered_ids.append(aid)
    elif order_mode != "as-given":
        raise ValueError(f"unknown order mode {order_mode!r}")

    cells: list[Cell] = [start_cell]
    visit_order: list[tuple[str, int]] = []
    at = start_cell
    for asset_id in ordered_ids:
        goal = asset_cells[asset_id]
        try:
            leg = shortest_path(graph, at, goal)
        except NoPath as exc:
            raise UnreachableTarget([asset_id]) from exc
        cells.extend(leg.cells[1:])
        visit_order.append((asset_id, len(cells) - 1))
        at = goal
    route = _route_from_cells(graph, cells)
    return Route(
        cells=route.cells,
        polyline=route.polyline,
        length=route.length,
        visit_order=tuple(visit_order),
    )
