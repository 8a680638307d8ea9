"""Deterministic visitor/beacon simulator.

Walks a virtual visitor along a route at constant speed, synthesizes beacon
readings with the inverse path-loss model plus seeded Gaussian noise, feeds
them through the public service operations and scores the resulting fixes.
Two runs with the same model, script and config produce identical traces.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .geometry import Point2, dist2
from .model import SpaceModel
from .locate import RssiReading
from .rng import Xoshiro256
from .service import ServiceConfig, SpaceService
from . import spaceio

DEFAULT_RANGE_LIMIT_M = 15.0


class SimError(Exception):
    pass


@dataclass(frozen=True)
class SimConfig:
    seed: int = 1
    dt: float = 0.5  # seconds between readings batches
    speed: float = 1.0  # visitor walking speed, m/s
    noise_sigma_db: float = 0.0
    tx_power_dbm_at_1m: float = -59.0
    path_loss_exponent: float = 2.0
    range_limit_m: float = DEFAULT_RANGE_LIMIT_M
    smoothing_alpha: float | None = None  # None keeps the service default

    def __post_init__(self):
        if self.dt <= 0:
            raise SimError("dt must be > 0")
        if self.speed <= 0:
            raise SimError("speed must be > 0")
        if self.noise_sigma_db < 0:
            raise SimError("noise_sigma_db must be >= 0")


@dataclass(frozen=True)
class Scenario:
    """A scripted visit: preferences plus either a target list or a fixed path."""

    preferences: tuple[str, ...] = ()
    walk_to: tuple[str, ...] | None = None
    walk_polyline: tuple[Point2, ...] | None = None
    start: Point2 | None = None
    route_mode: str = "optimal"


@dataclass(frozen=True)
class SimStep:
    t: float
    true_position: Point2
    readings: int
    estimate: Point2 | None
    error: float | None
    events: tuple[str, ...]


@dataclass
class SimTrace:
    steps: list[SimStep] = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def simulate_walk(polyline, config: SimConfig) -> list[tuple[float, Point2]]:
    """Constant-speed traversal: one pose per dt, endpoints always included."""
    points = [tuple(p) for p in polyline]
    if not points:
        raise SimError("route is empty")
    segments = list(zip(points, points[1:]))
    total = sum(dist2(a, b) for a, b in segments)
    duration = total / config.speed
    count = int(math.floor(duration / config.dt + 1e-9))
    times = [i * config.dt for i in range(count + 1)]
    if times[-1] < duration - 1e-9:
        times.append(duration)
    return [(t, _point_at(points, segments, config.speed * t)) for t in times]


def _point_at(points, segments, distance: float) -> Point2:
    remaining = distance
    for a, b in segments:
        seg_len = dist2(a, b)
        if remaining <= seg_len or seg_len == 0.0:
            if seg_len == 0.0:
                continue
            frac = remaining / seg_len
            return (a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1]))
        remaining -= seg_len
    return points[-1]


def synth_readings(
    pose: Point2,
    beacons,
    config: SimConfig,
    rng: Xoshiro256,
    timestamp_ms: int = 0,
) -> list[RssiReading]:
    """Inverse path-loss readings for every beacon within the range limit.

    Noise is drawn per emitted reading in beacon list order, so the stream
    is reproducible from the seed. rssi is clamped into [-120, 0].
    """
    readings = []
    for beacon in beacons:
        d = dist2(pose, (beacon.position[0], beacon.position[1]))
        if d > config.range_limit_m:
            continue
        rssi = (
            beacon.tx_power_dbm_at_1m
            - 10.0 * beacon.path_loss_exponent * math.log10(max(d, 0.1))
            + rng.gauss(0.0, config.noise_sigma_db)
        )
        rssi = min(0.0, max(-120.0, rssi))
        readings.append(RssiReading(beacon_id=beacon.id, rssi=rssi, timestamp=timestamp_ms))
    return readings


def _reading_docs(readings) -> list[dict]:
    return [
        {"beacon_id": r.beacon_id, "rssi": r.rssi, "timestamp": r.timestamp} for r in readings
    ]


def run_scenario(model: SpaceModel, scenario: Scenario, config: SimConfig) -> SimTrace:
    """End-to-end scripted visit against an in-process service instance."""
    service_config = ServiceConfig(data_dir=None)
    if config.smoothing_alpha is not None:
        service_config.smoothing_alpha = config.smoothing_alpha
    service = SpaceService(service_config)
    service.import_space(spaceio.space_to_doc(model))
    session = service.create_session(model.id)
    session_id = session["id"]
    if scenario.preferences:
        service.set_preferences(session_id, list(scenario.preferences))

    rng = Xoshiro256(config.seed)

    if scenario.walk_polyline is not None:
        polyline = list(scenario.walk_polyline)
    elif scenario.walk_to is not None:
        start = scenario.start
        if start is None:
            origin_cp = next((c for c in model.capture_points if c.order == 0), None)
            if origin_cp is None:
                raise SimError("walk plan needs a start (no order-0 capture point)")
            start = origin_cp.pose
        # Bootstrap one batch from the start pose so the service has a fix,
        # then walk the route the service plans.
        boot = synth_readings(start, model.beacons, config, rng, timestamp_ms=0)
        result = service.ingest_readings(session_id, _reading_docs(boot))
        if result["status"] != "ok":
            raise SimError(f"could not establish a starting fix: {result['status']}")
        targets = list(scenario.walk_to)
        if targets != list(scenario.preferences):
            service.set_preferences(session_id, targets)
        route = service.get_route_doc(session_id, scenario.route_mode)
        service.set_preferences(session_id, list(scenario.preferences))
        polyline = [tuple(p) for p in route["polyline"]]
    else:
        raise SimError("scenario needs walk_to or walk_polyline")

    trace = SimTrace()
    for t, pose in simulate_walk(polyline, config):
        timestamp = int(round(t * 1000.0))
        readings = synth_readings(pose, model.beacons, config, rng, timestamp)
        result = service.ingest_readings(session_id, _reading_docs(readings))
        estimate = None
        error = None
        if result["status"] == "ok":
            position = result["estimate"]["position"]
            estimate = (position[0], position[1])
            error = dist2(pose, estimate)
        events = tuple(e["asset_id"] for e in result.get("events", []))
        trace.steps.append(
            SimStep(
                t=t,
                true_position=pose,
                readings=len(readings),
                estimate=estimate,
                error=error,
                events=events,
            )
        )
    trace.summary = evaluate(trace)
    return trace


def evaluate(trace: SimTrace | list[SimStep]) -> dict:
    """Order statistics over a trace: lower median, p95, availability."""
    steps = trace.steps if isinstance(trace, SimTrace) else trace
    if not steps:
        raise SimError("trace is empty")
    errors = sorted(s.error for s in steps if s.error is not None)
    events_count = sum(len(s.events) for s in steps)
    summary = {
        "steps": len(steps),
        "fix_availability_ratio": len(errors) / len(steps),
        "events_count": events_count,
    }
    if errors:
        n = len(errors)
        summary["median_error"] = errors[(n - 1) // 2]
        summary["p95_error"] = errors[max(0, math.ceil(0.95 * n) - 1)]
    else:
        summary["median_error"] = None
        summary["p95_error"] = None
    return summary


# -- scenario & trace documents (CLI surface) -------------------------------


def config_from_doc(doc: dict) -> SimConfig:
    known = {
        "seed", "dt", "speed", "noise_sigma_db", "tx_power_dbm_at_1m",
        "path_loss_exponent", "range_limit_m", "smoothing_alpha",
    }
    unknown = set(doc) - known
    if unknown:
        raise SimError(f"unknown config fields: {sorted(unknown)}")
    return SimConfig(**doc)


def scenario_from_doc(doc: dict) -> tuple[str, Scenario, SimConfig]:
    """Parse a scenario document; returns (space path, scenario, config)."""
    if not isinstance(doc, dict) or "space" not in doc:
        raise SimError("scenario document needs a 'space' path")
    walk = doc.get("walk", {})
    if not isinstance(walk, dict):
        raise SimError("'walk' must be an object")
    walk_to = walk.get("to")
    polyline = walk.get("polyline")
    if (walk_to is None) == (polyline is None):
        raise SimError("walk needs exactly one of 'to' or 'polyline'")
    start = walk.get("start")
    scenario = Scenario(
        preferences=tuple(doc.get("preferences", [])),
        walk_to=None if walk_to is None else tuple(walk_to),
        walk_polyline=None if polyline is None else tuple(tuple(p) for p in polyline),
        start=None if start is None else (float(start[0]), float(start[1])),
        route_mode=walk.get("mode", "optimal"),
    )
    return str(doc["space"]), scenario, config_from_doc(doc.get("config", {}))


def trace_to_lines(trace: SimTrace) -> list[str]:
    """Line-delimited step records plus one summary line, stable bytes."""
    lines = []
    for step in trace.steps:
        record = {
            "t": step.t,
            "true": [step.true_position[0], step.true_position[1]],
            "readings": step.readings,
            "estimate": None if step.estimate is None else [step.estimate[0], step.estimate[1]],
            "error": step.error,
            "events": list(step.events),
        }
        lines.append(json.dumps(record, separators=(",", ":")))
    lines.append(json.dumps({"summary": trace.summary}, separators=(",", ":")))
    return lines


def trace_from_lines(lines) -> SimTrace:
    trace = SimTrace()
    summary = None
    for line in lines:
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        if "summary" in record:
            summary = record["summary"]
            continue
        estimate = record.get("estimate")
        trace.steps.append(
            SimStep(
                t=record["t"],
                true_position=tuple(record["true"]),
                readings=record.get("readings", 0),
                estimate=None if estimate is None else tuple(estimate),
                error=record.get("error"),
                events=tuple(record.get("events", [])),
            )
        )
    trace.summary = summary if summary is not None else (evaluate(trace) if trace.steps else {})
    return trace
