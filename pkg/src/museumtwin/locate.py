"""Visitor localization: RSSI ranging, trilateration, smoothing, proximity.

Ranging uses the log-distance path loss model per beacon; positions are
solved in the floor plane (beacon z is ignored at desk scale). The solver
linearizes the circle equations against the first beacon, solves by least
squares, then polishes with a few Gauss-Newton steps on the true range
residuals.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Point2, dist2, point_line_distance
from .model import SpaceModel

DISTANCE_CLAMP_M = (0.1, 100.0)
DEFAULT_TX_POWER_DBM = -59.0
DEFAULT_PATH_LOSS_EXPONENT = 2.0
DEFAULT_SMOOTHING_ALPHA = 0.5
DEFAULT_ENTER_RADIUS_M = 2.0
DEFAULT_EXIT_RADIUS_M = 3.0
STALE_READING_MS = 3000


class LocalizationError(Exception):
    pass


class InsufficientBeacons(LocalizationError):
    pass


class DegenerateGeometry(LocalizationError):
    pass


class SingularSystem(LocalizationError):
    pass


class NoAssets(LocalizationError):
    pass


@dataclass(frozen=True)
class RssiReading:
    beacon_id: str
    rssi: float
    timestamp: int  # ms since epoch


@dataclass(frozen=True)
class PathLossParams:
    tx_power_dbm_at_1m: float = DEFAULT_TX_POWER_DBM
    path_loss_exponent: float = DEFAULT_PATH_LOSS_EXPONENT


@dataclass(frozen=True)
class PositionEstimate:
    position: Point2
    residual_rms: float
    beacons_used: int
    timestamp: int
    nearest_asset_id: str | None = None
    nearest_asset_distance: float | None = None


@dataclass(frozen=True)
class ProximityEvent:
    session_id: str
    asset_id: str
    distance: float
    timestamp: int


@dataclass
class AssetNotifyState:
    """Hysteresis state for one (session, asset) pair."""

    fired: bool = False
    last_distance: float | None = None


def rssi_to_distance(rssi: float, params: PathLossParams) -> float:
    """Invert the log-distance path loss model; clamped to [0.1, 100] m."""
    d = 10.0 ** ((params.tx_power_dbm_at_1m - rssi) / (10.0 * params.path_loss_exponent))
    return min(max(d, DISTANCE_CLAMP_M[0]), DISTANCE_CLAMP_M[1])


def _check_collinear(points: list[Point2]) -> None:
    """All points within 1e-6 m of one line means no unique 2D solution."""
    p0 = points[0]
    anchor = max(points[1:], key=lambda p: dist2(p0, p))
    if dist2(p0, anchor) <= 1e-6:
        raise DegenerateGeometry("beacon positions coincide")
    spread = max(point_line_distance(p, p0, anchor) for p in points)
    if spread <= 1e-6:
        raise DegenerateGeometry("beacon positions are collinear")


def trilaterate(ranges: list[tuple[Point2, float]]) -> tuple[Point2, float]:
    """Solve for the 2D position matching the given (beacon, distance) set.

    Returns (position, rms of final range residuals). Raises
    InsufficientBeacons (< 3 ranges), DegenerateGeometry (collinear beacons)
    or SingularSystem (normal-matrix condition beyond 1e12).
    """
    if len(ranges) < 3:
        raise InsufficientBeacons(f"need >= 3 ranges, got {len(ranges)}")
    points = [p for p, _ in ranges]
    _check_collinear(points)

    pts = np.asarray(points, dtype=float)
    ds = np.asarray([d for _, d in ranges], dtype=float)

    # Linearize by subtracting the first circle equation from the rest.
    a = 2.0 * (pts[1:] - pts[0])
    b = (ds[0] ** 2 - ds[1:] ** 2) + (pts[1:] ** 2).sum(axis=1) - (pts[0] ** 2).sum()
    normal = a.T @ a
    if np.linalg.cond(normal) > 1e12:
        raise SingularSystem("normal matrix is numerically singular")
    x = np.linalg.lstsq(a, b, rcond=None)[0]

    # Gauss-Newton polish on the nonlinear range residuals.
    for _ in range(20):
        offsets = x - pts
        dists = np.linalg.norm(offsets, axis=1)
        residuals = dists - ds
        safe = np.where(dists > 1e-12, dists, 1.0)
        jac = offsets / safe[:, None]
        jac[dists <= 1e-12] = 0.0
        jtj = jac.T @ jac
        if np.linalg.cond(jtj) > 1e12:
            break
        step = np.linalg.lstsq(jac, -residuals, rcond=None)[0]
        x = x + step
        if float(np.linalg.norm(step)) < 1e-12:
            break

    final = np.linalg.norm(x - pts, axis=1) - ds
    rms = float(math.sqrt(float(np.mean(final**2))))
    return (float(x[0]), float(x[1])), rms


def nearest_asset(position: Point2, model: SpaceModel) -> tuple[str, float]:
    """Closest asset anchor in the floor plane; ties go to the smaller id."""
    assets = model.assets()
    if not assets:
        raise NoAssets("model has no asset anchors")
    best = min(assets, key=lambda a: (dist2(position, (a.position[0], a.position[1])), a.id))
    return best.id, dist2(position, (best.position[0], best.position[1]))


def fuse_fix(
    previous: PositionEstimate | None,
    raw: PositionEstimate,
    alpha: float,
    model: SpaceModel | None = None,
) -> PositionEstimate:
    """Exponential smoothing of the position track.

    out = alpha * raw + (1 - alpha) * previous; everything but the position
    comes from the raw estimate. When a model is supplied the nearest-asset
    fields are recomputed from the smoothed position.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must be in (0, 1]")
    if previous is None or alpha == 1.0:
        fused = raw
    else:
        position = (
            alpha * raw.position[0] + (1.0 - alpha) * previous.position[0],
            alpha * raw.position[1] + (1.0 - alpha) * previous.position[1],
        )
        fused = replace(raw, position=position)
    if model is not None and model.assets():
        asset_id, distance = nearest_asset(fused.position, model)
        fused = replace(fused, nearest_asset_id=asset_id, nearest_asset_distance=distance)
    return fused


def detect_proximity(
    notify_state: dict[str, AssetNotifyState],
    fix: PositionEstimate,
    model: SpaceModel,
    enter_radius: float = DEFAULT_ENTER_RADIUS_M,
    exit_radius: float = DEFAULT_EXIT_RADIUS_M,
    session_id: str = "",
) -> list[ProximityEvent]:
    """Hysteresis proximity detection over every asset in the model.

    An asset fires once when the fix comes within enter_radius, then stays
    quiet until the visitor has moved beyond exit_radius.
    """
    if exit_radius <= enter_radius:
        raise ValueError("exit_radius must exceed enter_radius")
    events: list[ProximityEvent] = []
    for asset in sorted(model.assets(), key=lambda a: a.id):
        state = notify_state.setdefault(asset.id, AssetNotifyState())
        distance = dist2(fix.position, (asset.position[0], asset.position[1]))
        if state.fired:
            if distance > exit_radius:
                state.fired = False
        elif distance <= enter_radius:
            state.fired = True
            events.append(
                ProximityEvent(
                    session_id=session_id,
                    asset_id=asset.id,
                    distance=distance,
                    timestamp=fix.timestamp,
                )
            )
        state.last_distance = distance
    return events


def prepare_readings(
    readings: list[RssiReading], stale_ms: int = STALE_READING_MS
) -> list[RssiReading]:
    """Batch cleanup before ranging.

    Readings more than `stale_ms` older than the newest in the batch are
    dropped; multiple readings from one beacon are median-aggregated on rssi
    (keeping the newest timestamp). Output is ordered by beacon id.
    """
    if not readings:
        return []
    newest = max(r.timestamp for r in readings)
    fresh = [r for r in readings if newest - r.timestamp <= stale_ms]
    by_beacon: dict[str, list[RssiReading]] = {}
    for reading in fresh:
        by_beacon.setdefault(reading.beacon_id, []).append(reading)
    merged = [
        RssiReading(
            beacon_id=beacon_id,
            rssi=float(statistics.median(r.rssi for r in group)),
            timestamp=max(r.timestamp for r in group),
        )
        for beacon_id, group in by_beacon.items()
    ]
    merged.sort(key=lambda r: r.beacon_id)
    return merged
