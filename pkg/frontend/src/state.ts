// Console store: owns the view state and sequences every service call.
// All I/O goes through the injected ServiceClient; timing goes through an
// injectable sleeper so tests can run drives instantly.

import { ServiceClient } from './client';
import {
  ApiError,
  AssetDetailsDoc,
  EstimateDoc,
  EventDoc,
  Point2,
  RouteDoc,
  SpaceDoc,
} from './types';
import { posesAlong, readingsAt, WALK_DT_S } from './walk';

export interface Toast {
  seq: number;
  assetId: string;
  title: string;
  distance: number;
}

export interface ViewState {
  space: SpaceDoc | null;
  sessionId: string | null;
  preferences: string[];
  estimate: EstimateDoc | null;
  route: RouteDoc | null;
  toasts: Toast[];
  cursor: number; // highest notification seq already rendered
  detail: AssetDetailsDoc | null;
  banner: string | null;
  driving: boolean;
}

export type Sleeper = (ms: number) => Promise<void>;

const realSleeper: Sleeper = (ms) => new Promise((resolve) => setTimeout(resolve, ms));

export class ConsoleStore {
  state: ViewState = {
    space: null,
    sessionId: null,
    preferences: [],
    estimate: null,
    route: null,
    toasts: [],
    cursor: 0,
    detail: null,
    banner: null,
    driving: false,
  };

  private listeners: (() => void)[] = [];
  private driveToken = 0;
  private clock = 0;

  constructor(
    private readonly client: ServiceClient,
    private readonly sleeper: Sleeper = realSleeper,
  ) {}

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  private setBanner(message: string | null): void {
    this.state.banner = message;
    this.emit();
  }

  async loadSpace(spaceId: string): Promise<void> {
    this.state.space = await this.client.getSpace(spaceId);
    this.state.sessionId = null;
    this.state.preferences = [];
    this.state.estimate = null;
    this.state.route = null;
    this.state.toasts = [];
    this.state.cursor = 0;
    this.state.detail = null;
    this.setBanner(null);
  }

  async createSession(): Promise<void> {
    if (!this.state.space) {
      throw new Error('no space loaded');
    }
    const session = await this.client.createSession(this.state.space.id);
    this.state.sessionId = session.id;
    this.state.preferences = session.preferences;
    this.state.estimate = null;
    this.state.route = null;
    this.state.toasts = [];
    this.state.cursor = 0;
    this.setBanner(null);
  }

  /** Toggle an asset in the preference list; server state wins on failure. */
  async togglePreference(assetId: string): Promise<void> {
    const { space, sessionId, preferences } = this.state;
    if (!space || !sessionId) {
      return;
    }
    const previous = preferences.slice();
    const next = previous.includes(assetId)
      ? previous.filter((a) => a !== assetId)
      : [...previous, assetId];
    this.state.preferences = next;
    this.emit();
    try {
      const stored = await this.client.setPreferences(sessionId, next);
      this.state.preferences = stored.preferences;
      this.setBanner(null);
    } catch (error) {
      this.state.preferences = previous;
      this.setBanner(errorText(error));
    }
  }

  async requestRoute(mode: 'optimal' | 'as-given' = 'optimal'): Promise<void> {
    const { sessionId } = this.state;
    if (!sessionId) {
      return;
    }
    try {
      this.state.route = await this.client.getRoute(sessionId, mode);
      this.setBanner(null);
    } catch (error) {
      this.setBanner(errorText(error));
    }
  }

  /** Walk the visitor along a path, posting one readings batch per tick.
   *  A newer drive cancels the rest of an in-flight one (latest wins). */
  async drivePath(path: Point2[]): Promise<void> {
    const { space, sessionId } = this.state;
    if (!space || !sessionId || path.length === 0) {
      return;
    }
    const token = ++this.driveToken;
    this.state.driving = true;
    this.emit();
    try {
      for (const pose of posesAlong(path)) {
        if (token !== this.driveToken) {
          return; // cancelled by a newer drive
        }
        this.clock += Math.round(WALK_DT_S * 1000);
        const readings = readingsAt(pose, space.beacons, this.clock);
        const result = await this.client.postReadings(sessionId, readings);
        if (token !== this.driveToken) {
          return;
        }
        if (result.estimate) {
          this.state.estimate = result.estimate;
        }
        this.emit();
        await this.sleeper(WALK_DT_S * 1000);
      }
    } catch (error) {
      this.setBanner(errorText(error));
    } finally {
      if (token === this.driveToken) {
        this.state.driving = false;
        this.emit();
      }
    }
  }

  /** Map-click drive: straight line from the current fix (or the click
   *  itself when there is no fix yet, bootstrapping a first position). */
  async driveTo(target: Point2): Promise<void> {
    const from = this.state.estimate ? this.state.estimate.position : target;
    await this.drivePath([from, target]);
  }

  async playRoute(): Promise<void> {
    const route = this.state.route;
    if (!route || route.polyline.length === 0) {
      this.setBanner('no route to play — request one first');
      return;
    }
    await this.drivePath(route.polyline);
  }

  /** One notification poll: renders every event newer than the cursor,
   *  exactly once per sequence number even when redelivered. */
  async pollOnce(): Promise<Toast[]> {
    const { space, sessionId } = this.state;
    if (!space || !sessionId) {
      return [];
    }
    const result = await this.client.pollNotifications(sessionId, this.state.cursor);
    const fresh: Toast[] = [];
    for (const event of result.events) {
      if (event.seq <= this.state.cursor) {
        continue;
      }
      fresh.push(this.toToast(event));
      this.state.cursor = event.seq;
    }
    if (fresh.length) {
      this.state.toasts = [...this.state.toasts, ...fresh];
      this.emit();
    }
    return fresh;
  }

  private toToast(event: EventDoc): Toast {
    const anchor = this.state.space?.anchors.find((a) => a.id === event.asset_id);
    return {
      seq: event.seq,
      assetId: event.asset_id,
      title: anchor ? anchor.title : event.asset_id,
      distance: event.distance,
    };
  }

  async openDetail(assetId: string): Promise<void> {
    if (!this.state.space) {
      return;
    }
    try {
      this.state.detail = await this.client.getAssetDetails(this.state.space.id, assetId);
      this.setBanner(null);
    } catch (error) {
      this.setBanner(errorText(error));
    }
  }

  closeDetail(): void {
    this.state.detail = null;
    this.emit();
  }
}

function errorText(error: unknown): string {
  if (error instanceof ApiError) {
    return `${error.code}: ${error.message}`;
  }
  return error instanceof Error ? error.message : String(error);
}
