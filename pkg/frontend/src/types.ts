// Wire documents exchanged with the service. Points are [x, y] or
// [x, y, z] meter arrays; headings are {rad} or {deg} tagged objects.

export type Point2 = [number, number];
export type Point3 = [number, number, number];

export interface RoomDoc {
  id: string;
  name: string;
  polygon: Point2[];
}

export interface SegmentDoc {
  id: string;
  p1: Point2;
  p2: Point2;
}

export type AnchorKind = 'asset' | 'poi' | 'room_label' | 'wall_label';

export interface AnchorDoc {
  id: string;
  kind: AnchorKind;
  title: string;
  description: string;
  position: Point3;
  room_id?: string;
}

export interface BeaconDoc {
  id: string;
  hardware_uid: string;
  position: Point3;
  tx_power_dbm_at_1m: number;
  path_loss_exponent: number;
}

export interface MappingDoc {
  asset_id: string;
  beacon_id: string;
}

export interface SpaceDoc {
  id: string;
  name: string;
  floor: number;
  rooms: RoomDoc[];
  walls: SegmentDoc[];
  portals: SegmentDoc[];
  anchors: AnchorDoc[];
  beacons: BeaconDoc[];
  mappings: MappingDoc[];
  capture_points: unknown[];
  version: number;
}

export interface SessionDoc {
  id: string;
  space_id: string;
  preferences: string[];
}

export interface ReadingDoc {
  beacon_id: string;
  rssi: number;
  timestamp: number;
}

export interface EstimateDoc {
  position: Point2;
  residual_rms: number;
  beacons_used: number;
  timestamp: number;
  nearest_asset_id?: string;
  nearest_asset_distance?: number;
}

export interface EventDoc {
  seq: number;
  session_id: string;
  asset_id: string;
  distance: number;
  timestamp: number;
}

export interface IngestResultDoc {
  status: 'ok' | 'insufficient-beacons' | 'no-readings' | 'degenerate-geometry';
  dropped: number;
  estimate?: EstimateDoc;
  events: EventDoc[];
}

export interface VisitStopDoc {
  asset_id: string;
  polyline_index: number;
}

export interface RouteDoc {
  cells: [number, number][];
  polyline: Point2[];
  length: number;
  visit_order: VisitStopDoc[];
}

export interface NotificationsDoc {
  events: EventDoc[];
  next_seq: number;
}

export interface AssetDetailsDoc {
  id: string;
  title: string;
  description: string;
  position: Point3;
  room?: { id: string; name: string };
  beacon?: { id: string; hardware_uid: string; position: Point3 };
}

export interface ApiErrorDoc {
  code: string;
  message: string;
  details?: unknown;
}

export class ApiError extends Error {
  readonly code: string;
  readonly details?: unknown;

  constructor(doc: ApiErrorDoc, readonly status: number) {
    super(doc.message);
    this.code = doc.code;
    this.details = doc.details;
  }
}
