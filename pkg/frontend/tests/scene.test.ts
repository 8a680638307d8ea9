import { readFileSync } from 'node:fs';
import { fileURLToPath } from 'node:url';
import { describe, expect, it } from 'vitest';

import { renderMap } from '../src/scene';
import { RouteDoc, SpaceDoc } from '../src/types';

const demoSpace: SpaceDoc = JSON.parse(
  readFileSync(fileURLToPath(new URL('../../fixtures/demo_space.json', import.meta.url)), 'utf8'),
);

describe('renderMap', () => {
  it('renders the demo fixture counts: 2 rooms, 3 assets, 4 beacons', () => {
    const scene = renderMap({ space: demoSpace, estimate: null, route: null, preferences: [] });
    expect(scene.rooms).toHaveLength(2);
    expect(scene.assets).toHaveLength(3);
    expect(scene.beacons).toHaveLength(4);
  });

  it('renders every entity exactly once', () => {
    const scene = renderMap({ space: demoSpace, estimate: null, route: null, preferences: [] });
    const ids = [
      ...scene.rooms.map((r) => r.id),
      ...scene.walls.map((w) => w.id),
      ...scene.portals.map((p) => p.id),
      ...scene.assets.map((a) => a.id),
      ...scene.pois.map((p) => p.id),
      ...scene.beacons.map((b) => b.id),
    ];
    expect(new Set(ids).size).toBe(ids.length);
    expect(scene.walls).toHaveLength(demoSpace.walls.length);
    expect(scene.portals).toHaveLength(demoSpace.portals.length);
    expect(scene.assets.length + scene.pois.length).toBe(demoSpace.anchors.length);
  });

  it('route layer has one vertex per polyline point', () => {
    const route: RouteDoc = {
      cells: [],
      polyline: [[0, 0], [1, 0], [2, 1], [3, 1]],
      length: 3.41,
      visit_order: [],
    };
    const scene = renderMap({ space: demoSpace, estimate: null, route, preferences: [] });
    expect(scene.route).toHaveLength(4);
  });

  it('visitor marker appears only with a fix', () => {
    const without = renderMap({ space: demoSpace, estimate: null, route: null, preferences: [] });
    expect(without.visitor).toBeNull();
    const withFix = renderMap({
      space: demoSpace,
      estimate: { position: [2, 3], residual_rms: 0, beacons_used: 3, timestamp: 0 },
      route: null,
      preferences: [],
    });
    expect(withFix.visitor).toEqual([2, 3]);
  });

  it('marks preferred assets', () => {
    const scene = renderMap({
      space: demoSpace,
      estimate: null,
      route: null,
      preferences: ['asset-venus'],
    });
    const venus = scene.assets.find((a) => a.id === 'asset-venus');
    const david = scene.assets.find((a) => a.id === 'asset-david');
    expect(venus?.preferred).toBe(true);
    expect(david?.preferred).toBe(false);
  });

  it('empty input yields empty layers', () => {
    const scene = renderMap({ space: null, estimate: null, route: null, preferences: [] });
    expect(scene.rooms).toHaveLength(0);
    expect(scene.assets).toHaveLength(0);
    expect(scene.visitor).toBeNull();
    expect(scene.route).toHaveLength(0);
  });

  it('asset markers carry z as label data', () => {
    const scene = renderMap({ space: demoSpace, estimate: null, route: null, preferences: [] });
    const david = scene.assets.find((a) => a.id === 'asset-david');
    expect(david?.z).toBeCloseTo(1.5);
  });
});
