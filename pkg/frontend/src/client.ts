// Service access behind a narrow interface so the console core can be
// driven by the HTTP client in the browser and by a fake in tests.

import {
  ApiError,
  ApiErrorDoc,
  AssetDetailsDoc,
  IngestResultDoc,
  NotificationsDoc,
  ReadingDoc,
  RouteDoc,
  SessionDoc,
  SpaceDoc,
} from './types';

export interface ServiceClient {
  getSpace(spaceId: string): Promise<SpaceDoc>;
  createSession(spaceId: string): Promise<SessionDoc>;
  setPreferences(sessionId: string, assets: string[]): Promise<{ preferences: string[] }>;
  postReadings(sessionId: string, readings: ReadingDoc[]): Promise<IngestResultDoc>;
  getRoute(sessionId: string, mode: 'optimal' | 'as-given'): Promise<RouteDoc>;
  pollNotifications(sessionId: string, after: number): Promise<NotificationsDoc>;
  getAssetDetails(spaceId: string, assetId: string): Promise<AssetDetailsDoc>;
}

export class HttpServiceClient implements ServiceClient {
  constructor(private readonly baseUrl: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(body as ApiErrorDoc, response.status);
    }
    return body as T;
  }

  private post<T>(path: string, payload?: unknown, method = 'POST'): Promise<T> {
    return this.request<T>(path, {
      method,
      headers: { 'Content-Type': 'application/json' },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    });
  }

  getSpace(spaceId: string): Promise<SpaceDoc> {
    return this.request(`/spaces/${spaceId}`);
  }

  createSession(spaceId: string): Promise<SessionDoc> {
    return this.post(`/spaces/${spaceId}/sessions`);
  }

  setPreferences(sessionId: string, assets: string[]): Promise<{ preferences: string[] }> {
    return this.post(`/sessions/${sessionId}/preferences`, { assets }, 'PUT');
  }

  postReadings(sessionId: string, readings: ReadingDoc[]): Promise<IngestResultDoc> {
    return this.post(`/sessions/${sessionId}/readings`, { readings });
  }

  getRoute(sessionId: string, mode: 'optimal' | 'as-given'): Promise<RouteDoc> {
    return this.request(`/sessions/${sessionId}/route?mode=${mode}`);
  }

  pollNotifications(sessionId: string, after: number): Promise<NotificationsDoc> {
    return this.request(`/sessions/${sessionId}/notifications?after=${after}`);
  }

  getAssetDetails(spaceId: string, assetId: string): Promise<AssetDetailsDoc> {
    return this.request(`/spaces/${spaceId}/assets/${assetId}`);
  }
}
