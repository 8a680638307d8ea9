// Client-side visitor drive: poses along a path at constant speed and
// noiseless inverse path-loss readings for the beacons in range. The
// console never talks to module internals; it just posts these readings
// through the documented ingest endpoint.

import { BeaconDoc, Point2, ReadingDoc } from './types';

export const WALK_SPEED_MPS = 1.0;
export const WALK_DT_S = 0.5;
export const BEACON_RANGE_M = 15.0;

export function posesAlong(path: Point2[], speed = WALK_SPEED_MPS, dt = WALK_DT_S): Point2[] {
  if (path.length === 0) {
    return [];
  }
  const segments: { a: Point2; b: Point2; length: number }[] = [];
  let total = 0;
  for (let i = 0; i + 1 < path.length; i += 1) {
    const length = Math.hypot(path[i + 1][0] - path[i][0], path[i + 1][1] - path[i][1]);
    segments.push({ a: path[i], b: path[i + 1], length });
    total += length;
  }
  const duration = total / speed;
  const count = Math.floor(duration / dt + 1e-9);
  const times: number[] = [];
  for (let i = 0; i <= count; i += 1) {
    times.push(i * dt);
  }
  if (times[times.length - 1] < duration - 1e-9) {
    times.push(duration);
  }
  return times.map((t) => pointAt(segments, path, speed * t));
}

function pointAt(
  segments: { a: Point2; b: Point2; length: number }[],
  path: Point2[],
  distance: number,
): Point2 {
  let remaining = distance;
  for (const { a, b, length } of segments) {
    if (length === 0) {
      continue;
    }
    if (remaining <= length) {
      const f = remaining / length;
      return [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])];
    }
    remaining -= length;
  }
  return path[path.length - 1];
}

export function readingsAt(pose: Point2, beacons: BeaconDoc[], timestamp: number): ReadingDoc[] {
  const readings: ReadingDoc[] = [];
  for (const beacon of beacons) {
    const d = Math.hypot(pose[0] - beacon.position[0], pose[1] - beacon.position[1]);
    if (d > BEACON_RANGE_M) {
      continue;
    }
    const rssi =
      beacon.tx_power_dbm_at_1m -
      10 * beacon.path_loss_exponent * Math.log10(Math.max(d, 0.1));
    readings.push({
      beacon_id: beacon.id,
      rssi: Math.min(0, Math.max(-120, rssi)),
      timestamp,
    });
  }
  return readings;
}
