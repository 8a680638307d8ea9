// Scene description: a pure projection of the view state into drawable
// layers. The DOM renderer consumes this; tests assert on it directly.

import { EstimateDoc, Point2, RouteDoc, SpaceDoc } from './types';

export interface RoomShape {
  id: string;
  name: string;
  polygon: Point2[];
}

export interface SegmentShape {
  id: string;
  p1: Point2;
  p2: Point2;
}

export interface MarkerShape {
  id: string;
  title: string;
  position: Point2;
  z: number;
  preferred?: boolean;
  kind: string;
}

export interface Scene {
  rooms: RoomShape[];
  walls: SegmentShape[];
  portals: SegmentShape[];
  assets: MarkerShape[];
  pois: MarkerShape[];
  beacons: MarkerShape[];
  visitor: Point2 | null;
  route: Point2[];
  bounds: { minX: number; minY: number; maxX: number; maxY: number };
}

export interface SceneInput {
  space: SpaceDoc | null;
  estimate: EstimateDoc | null;
  route: RouteDoc | null;
  preferences: string[];
}

export function renderMap(input: SceneInput): Scene {
  const empty: Scene = {
    rooms: [],
    walls: [],
    portals: [],
    assets: [],
    pois: [],
    beacons: [],
    visitor: null,
    route: [],
    bounds: { minX: 0, minY: 0, maxX: 1, maxY: 1 },
  };
  const space = input.space;
  if (!space) {
    return empty;
  }
  const preferred = new Set(input.preferences);
  const assets = space.anchors
    .filter((a) => a.kind === 'asset')
    .map((a) => ({
      id: a.id,
      title: a.title,
      position: [a.position[0], a.position[1]] as Point2,
      z: a.position[2],
      preferred: preferred.has(a.id),
      kind: a.kind,
    }));
  const pois = space.anchors
    .filter((a) => a.kind !== 'asset')
    .map((a) => ({
      id: a.id,
      title: a.title,
      position: [a.position[0], a.position[1]] as Point2,
      z: a.position[2],
      kind: a.kind,
    }));
  const beacons = space.beacons.map((b) => ({
    id: b.id,
    title: b.hardware_uid,
    position: [b.position[0], b.position[1]] as Point2,
    z: b.position[2],
    kind: 'beacon',
  }));
  const xs = space.rooms.flatMap((r) => r.polygon.map((p) => p[0]));
  const ys = space.rooms.flatMap((r) => r.polygon.map((p) => p[1]));
  const bounds = xs.length
    ? {
        minX: Math.min(...xs) - 1,
        minY: Math.min(...ys) - 1,
        maxX: Math.max(...xs) + 1,
        maxY: Math.max(...ys) + 1,
      }
    : empty.bounds;
  return {
    rooms: space.rooms.map((r) => ({ id: r.id, name: r.name, polygon: r.polygon })),
    walls: space.walls.map((w) => ({ id: w.id, p1: w.p1, p2: w.p2 })),
    portals: space.portals.map((p) => ({ id: p.id, p1: p.p1, p2: p.p2 })),
    assets,
    pois,
    beacons,
    visitor: input.estimate ? input.estimate.position : null,
    route: input.route ? input.route.polyline.slice() : [],
    bounds,
  };
}
