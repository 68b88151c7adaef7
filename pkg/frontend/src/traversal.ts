import { ApiError, createTracker } from './api.js';
import type { AppContext } from './app.js';
import type { SlotPick } from './slots.js';
import type { EndpointSpec, TraverseRequest, TraversalKind } from './types.js';

export type EndpointSetter = (which: 'start' | 'end', pick: SlotPick) => void;

export interface TraversalPanel {
  setEndpoint: EndpointSetter;
}

const PANEL = `
<h2>traversal</h2>
<fieldset>
  <legend>endpoints</legend>
  <div class="row">
    <label><input type="radio" name="endpoint-source" value="gallery" checked> gallery clicks</label>
    <label><input type="radio" name="endpoint-source" value="seeds"> seeds</label>
  </div>
  <div class="row" id="gallery-endpoints">
    <span class="endpoint" id="endpoint-start">start <img alt="traversal start" hidden> <code>none</code></span>
    <span class="endpoint" id="endpoint-end">end <img alt="traversal end" hidden> <code>none</code></span>
  </div>
  <div class="row" id="seed-endpoints" hidden>
    <label>start seed <input id="seed-start" type="number" value="0"></label>
    <label>end seed <input id="seed-end" type="number" value="1"></label>
  </div>
</fieldset>
<div class="row">
  <label>kind
    <select id="kind-select">
      <option value="linear">linear</option>
      <option value="extrapolate">extrapolate</option>
      <option value="circular">circular</option>
      <option value="slerp">slerp</option>
    </select>
  </label>
  <label>n <input id="n-slider" type="range" min="2" max="64" value="16"> <span id="n-value">16</span></label>
  <label>radius <input id="radius-input" type="number" step="0.1" value="1"></label>
  <label>columns <input id="cols-input" type="number" min="1" value="4"></label>
</div>
<p id="traversal-hint" class="hint" role="status"></p>
<img id="traversal-grid" alt="traversal grid" hidden>
<div id="traversal-strip" class="tile-grid"></div>
`;

export function initTraversal(panel: HTMLElement, ctx: AppContext): TraversalPanel {
  panel.innerHTML = PANEL;

  const kindSelect = panel.querySelector<HTMLSelectElement>('#kind-select')!;
  const nSlider = panel.querySelector<HTMLInputElement>('#n-slider')!;
  const nValue = panel.querySelector<HTMLElement>('#n-value')!;
  const radiusInput = panel.querySelector<HTMLInputElement>('#radius-input')!;
  const colsInput = panel.querySelector<HTMLInputElement>('#cols-input')!;
  const seedStart = panel.querySelector<HTMLInputElement>('#seed-start')!;
  const seedEnd = panel.querySelector<HTMLInputElement>('#seed-end')!;
  const galleryRow = panel.querySelector<HTMLElement>('#gallery-endpoints')!;
  const seedRow = panel.querySelector<HTMLElement>('#seed-endpoints')!;
  const hintLine = panel.querySelector<HTMLElement>('#traversal-hint')!;
  const gridImage = panel.querySelector<HTMLImageElement>('#traversal-grid')!;
  const strip = panel.querySelector<HTMLElement>('#traversal-strip')!;

  const tracker = createTracker();
  const picks: { start: SlotPick | null; end: SlotPick | null } = { start: null, end: null };

  function hint(text: string): void {
    hintLine.textContent = text;
  }

  function sourceValue(): 'gallery' | 'seeds' {
    const checked = panel.querySelector<HTMLInputElement>('input[name="endpoint-source"]:checked');
    return checked?.value === 'seeds' ? 'seeds' : 'gallery';
  }

  function intOf(input: HTMLInputElement, fallback: number): number {
    const v = parseInt(input.value, 10);
    return Number.isFinite(v) ? v : fallback;
  }

  function currentEndpoints(): EndpointSpec | null {
    if (sourceValue() === 'seeds') {
      return { seeds: [intOf(seedStart, 0), intOf(seedEnd, 1)] };
    }
    if (picks.start && picks.end) {
      return { latent_ids: [picks.start.latentId, picks.end.latentId] };
    }
    return null;
  }

  function render(urls: string[], gridUrl: string): void {
    gridImage.src = gridUrl;
    gridImage.hidden = false;
    strip.replaceChildren();
    urls.forEach((url, i) => {
      const img = document.createElement('img');
      img.src = url;
      img.alt = `tile ${i + 1}`;
      strip.appendChild(img);
    });
  }

  function dispatch(): void {
    const modelId = ctx.modelId();
    if (!modelId) {
      hint('no model selected');
      return;
    }
    const endpoints = currentEndpoints();
    if (!endpoints) {
      hint('pick both endpoints from the gallery, or switch to seeds');
      return;
    }
    const kind = kindSelect.value as TraversalKind;
    const body: TraverseRequest = {
      model_id: modelId,
      kind,
      endpoints,
      n: intOf(nSlider, 16),
      grid_cols: intOf(colsInput, 4),
    };
    if (kind === 'circular') {
      const radius = parseFloat(radiusInput.value);
      body.radius = Number.isFinite(radius) ? radius : 1;
    }
    const requestId = tracker.issue();
    void ctx.tasks.track(
      (async () => {
        try {
          const res = await ctx.api.traverse(body);
          if (!tracker.isCurrent(requestId)) return; // superseded while in flight
          render(res.image_urls, res.grid_url);
          hint('');
        } catch (err) {
          if (!tracker.isCurrent(requestId)) return;
          hint(err instanceof ApiError ? err.envelope.message : String(err));
        }
      })(),
    );
  }

  function setEndpoint(which: 'start' | 'end', pick: SlotPick): void {
    picks[which] = pick;
    const holder = panel.querySelector<HTMLElement>(`#endpoint-${which}`)!;
    const img = holder.querySelector('img')!;
    const label = holder.querySelector('code')!;
    img.src = pick.imageUrl;
    img.hidden = false;
    label.textContent = pick.latentId.slice(0, 9);
    // Picking from the gallery implies gallery-sourced endpoints.
    panel.querySelector<HTMLInputElement>('input[name="endpoint-source"][value="gallery"]')!.checked =
      true;
    galleryRow.hidden = false;
    seedRow.hidden = true;
    dispatch();
  }

  for (const radio of panel.querySelectorAll<HTMLInputElement>('input[name="endpoint-source"]')) {
    radio.addEventListener('change', () => {
      const seeds = sourceValue() === 'seeds';
      galleryRow.hidden = seeds;
      seedRow.hidden = !seeds;
      dispatch();
    });
  }

  kindSelect.addEventListener('change', dispatch);
  nSlider.addEventListener('input', () => {
    nValue.textContent = nSlider.value;
    dispatch();
  });
  radiusInput.addEventListener('change', dispatch);
  colsInput.addEventListener('change', dispatch);
  seedStart.addEventListener('change', dispatch);
  seedEnd.addEventListener('change', dispatch);

  return { setEndpoint };
}
