// DOM wiring: renders the scene as SVG and binds the controls to the store.

import { HttpServiceClient } from './client';
import { renderMap, Scene } from './scene';
import { ConsoleStore } from './state';
import { Point2 } from './types';

const SVG_NS = 'http://www.w3.org/2000/svg';
const POLL_INTERVAL_MS = 500;

const store = new ConsoleStore(new HttpServiceClient(''));

const app = document.getElementById('app')!;
app.innerHTML = `
  <header>
    <h1>museumtwin console</h1>
    <div class="controls">
      <input id="space-id" value="demo-museum" />
      <button id="load">Load space</button>
      <button id="session" disabled>Start visit</button>
      <select id="route-mode">
        <option value="optimal">optimal order</option>
        <option value="as-given">as given</option>
      </select>
      <button id="route" disabled>Route my assets</button>
      <button id="play" disabled>Play route</button>
    </div>
    <div id="banner" class="banner" hidden></div>
  </header>
  <main>
    <svg id="map" viewBox="0 0 100 100" preserveAspectRatio="xMidYMid meet"></svg>
    <aside>
      <h2>Assets</h2>
      <ul id="assets"></ul>
      <h2>Notifications</h2>
      <ul id="toasts"></ul>
      <div id="detail" class="detail" hidden></div>
    </aside>
  </main>
`;

const el = {
  spaceId: document.getElementById('space-id') as HTMLInputElement,
  load: document.getElementById('load') as HTMLButtonElement,
  session: document.getElementById('session') as HTMLButtonElement,
  route: document.getElementById('route') as HTMLButtonElement,
  routeMode: document.getElementById('route-mode') as HTMLSelectElement,
  play: document.getElementById('play') as HTMLButtonElement,
  map: document.getElementById('map') as unknown as SVGSVGElement,
  assets: document.getElementById('assets') as HTMLUListElement,
  toasts: document.getElementById('toasts') as HTMLUListElement,
  detail: document.getElementById('detail') as HTMLDivElement,
  banner: document.getElementById('banner') as HTMLDivElement,
};

el.load.addEventListener('click', () => {
  store.loadSpace(el.spaceId.value.trim()).catch((e) => showBanner(String(e)));
});
el.session.addEventListener('click', () => {
  store.createSession().catch((e) => showBanner(String(e)));
});
el.route.addEventListener('click', () => {
  void store.requestRoute(el.routeMode.value as 'optimal' | 'as-given');
});
el.play.addEventListener('click', () => {
  void store.playRoute();
});

el.map.addEventListener('click', (event) => {
  if (!store.state.sessionId) {
    return;
  }
  const point = el.map.createSVGPoint();
  point.x = event.clientX;
  point.y = event.clientY;
  const ctm = el.map.getScreenCTM();
  if (!ctm) {
    return;
  }
  const mapped = point.matrixTransform(ctm.inverse());
  void store.driveTo([mapped.x, -mapped.y] as Point2);
});

setInterval(() => {
  void store.pollOnce();
}, POLL_INTERVAL_MS);

function showBanner(message: string | null): void {
  el.banner.hidden = !message;
  el.banner.textContent = message ?? '';
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

// Map y grows north; SVG y grows down. Render at y = -worldY.
function pts(polygon: Point2[]): string {
  return polygon.map(([x, y]) => `${x},${-y}`).join(' ');
}

function drawScene(scene: Scene): void {
  const { minX, minY, maxX, maxY } = scene.bounds;
  el.map.setAttribute('viewBox', `${minX} ${-maxY} ${maxX - minX} ${maxY - minY}`);
  el.map.innerHTML = '';
  for (const room of scene.rooms) {
    el.map.appendChild(svgEl('polygon', { points: pts(room.polygon), class: 'room' }));
    const cx = room.polygon.reduce((s, p) => s + p[0], 0) / room.polygon.length;
    const cy = room.polygon.reduce((s, p) => s + p[1], 0) / room.polygon.length;
    const label = svgEl('text', { x: String(cx), y: String(-cy), class: 'room-label' });
    label.textContent = room.name;
    el.map.appendChild(label);
  }
  for (const wall of scene.walls) {
    el.map.appendChild(svgEl('line', {
      x1: String(wall.p1[0]), y1: String(-wall.p1[1]),
      x2: String(wall.p2[0]), y2: String(-wall.p2[1]),
      class: 'wall',
    }));
  }
  for (const portal of scene.portals) {
    el.map.appendChild(svgEl('line', {
      x1: String(portal.p1[0]), y1: String(-portal.p1[1]),
      x2: String(portal.p2[0]), y2: String(-portal.p2[1]),
      class: 'portal',
    }));
  }
  if (scene.route.length > 1) {
    el.map.appendChild(svgEl('polyline', { points: pts(scene.route), class: 'route' }));
  }
  for (const beacon of scene.beacons) {
    el.map.appendChild(svgEl('rect', {
      x: String(beacon.position[0] - 0.15), y: String(-beacon.position[1] - 0.15),
      width: '0.3', height: '0.3', class: 'beacon',
    }));
  }
  for (const asset of scene.assets) {
    const marker = svgEl('circle', {
      cx: String(asset.position[0]), cy: String(-asset.position[1]), r: '0.35',
      class: asset.preferred ? 'asset preferred' : 'asset',
    });
    marker.addEventListener('click', (event) => {
      event.stopPropagation();
      void store.openDetail(asset.id);
    });
    el.map.appendChild(marker);
    const label = svgEl('text', {
      x: String(asset.position[0] + 0.45), y: String(-asset.position[1] + 0.15),
      class: 'asset-label',
    });
    label.textContent = `${asset.title} (z ${asset.z.toFixed(1)})`;
    el.map.appendChild(label);
  }
  for (const poi of scene.pois) {
    el.map.appendChild(svgEl('circle', {
      cx: String(poi.position[0]), cy: String(-poi.position[1]), r: '0.2', class: 'poi',
    }));
  }
  if (scene.visitor) {
    el.map.appendChild(svgEl('circle', {
      cx: String(scene.visitor[0]), cy: String(-scene.visitor[1]), r: '0.3', class: 'visitor',
    }));
  }
}

function drawSidebar(): void {
  const { space, preferences, toasts, detail, sessionId } = store.state;
  el.session.disabled = !space;
  el.route.disabled = !sessionId;
  el.play.disabled = !store.state.route;
  el.assets.innerHTML = '';
  if (space) {
    for (const anchor of space.anchors.filter((a) => a.kind === 'asset')) {
      const item = document.createElement('li');
      const checkbox = document.createElement('input');
      checkbox.type = 'checkbox';
      checkbox.checked = preferences.includes(anchor.id);
      checkbox.disabled = !sessionId;
      checkbox.addEventListener('change', () => void store.togglePreference(anchor.id));
      item.appendChild(checkbox);
      item.append(` ${anchor.title}`);
      el.assets.appendChild(item);
    }
  }
  el.toasts.innerHTML = '';
  for (const toast of toasts.slice(-8).reverse()) {
    const item = document.createElement('li');
    item.textContent = `near ${toast.title} (${toast.distance.toFixed(1)} m)`;
    item.addEventListener('click', () => void store.openDetail(toast.assetId));
    el.toasts.appendChild(item);
  }
  el.detail.hidden = !detail;
  if (detail) {
    el.detail.innerHTML = '';
    const title = document.createElement('h3');
    title.textContent = detail.title;
    const text = document.createElement('p');
    text.textContent = detail.description;
    const close = document.createElement('button');
    close.textContent = 'close';
    close.addEventListener('click', () => store.closeDetail());
    el.detail.append(title, text, close);
  }
  showBanner(store.state.banner);
}

store.subscribe(() => {
  drawScene(renderMap({
    space: store.state.space,
    estimate: store.state.estimate,
    route: store.state.route,
    preferences: store.state.preferences,
  }));
  drawSidebar();
});
