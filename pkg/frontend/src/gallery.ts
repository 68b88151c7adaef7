import { ApiError } from './api.js';
import type { AppContext } from './app.js';
import {
  SLOT_NAMES,
  addToSlot,
  createSelection,
  previewReady,
  removeFromSlot,
  setCapacity,
} from './slots.js';
import type { SlotName, SlotPick } from './slots.js';
import type { EndpointSetter } from './traversal.js';

const PANEL = `
<h2>sample gallery</h2>
<form id="sample-form">
  <label>seed <input id="sample-seed" type="number" value="0"></label>
  <label>count <input id="sample-count" type="number" min="1" max="256" value="12"></label>
  <button type="submit">load samples</button>
</form>
<div class="row" id="click-routing">
  <span>clicks add to</span>
  <label><input type="radio" name="click-target" value="A" checked> A</label>
  <label><input type="radio" name="click-target" value="B"> B</label>
  <label><input type="radio" name="click-target" value="C"> C</label>
  <label><input type="radio" name="click-target" value="start"> traversal start</label>
  <label><input type="radio" name="click-target" value="end"> traversal end</label>
</div>
<div id="sample-grid" class="tile-grid"></div>
<p id="gallery-hint" class="hint" role="status"></p>
<div class="row">
  <label>slot capacity <input id="slot-capacity" type="number" min="1" max="9" value="3"></label>
</div>
<div id="slot-cards"></div>
<div id="anchor-list">
  <h3>saved sets</h3>
  <table>
    <tbody id="anchor-rows"></tbody>
  </table>
</div>
`;

export function initGallery(
  panel: HTMLElement,
  ctx: AppContext,
  setEndpoint: EndpointSetter,
): void {
  panel.innerHTML = PANEL;

  const form = panel.querySelector<HTMLFormElement>('#sample-form')!;
  const seedInput = panel.querySelector<HTMLInputElement>('#sample-seed')!;
  const countInput = panel.querySelector<HTMLInputElement>('#sample-count')!;
  const grid = panel.querySelector<HTMLElement>('#sample-grid')!;
  const hintLine = panel.querySelector<HTMLElement>('#gallery-hint')!;
  const capacityInput = panel.querySelector<HTMLInputElement>('#slot-capacity')!;
  const slotCards = panel.querySelector<HTMLElement>('#slot-cards')!;
  const anchorRows = panel.querySelector<HTMLElement>('#anchor-rows')!;

  const selection = createSelection();

  function hint(text: string): void {
    hintLine.textContent = text;
  }

  function showError(err: unknown): void {
    hint(err instanceof ApiError ? err.envelope.message : String(err));
  }

  function intOf(input: HTMLInputElement, fallback: number): number {
    const v = parseInt(input.value, 10);
    return Number.isFinite(v) ? v : fallback;
  }

  // -- slot cards, built once so typed-in names survive re-renders --

  interface SlotCard {
    countLabel: HTMLElement;
    members: HTMLElement;
    previewButton: HTMLButtonElement;
    previewImage: HTMLImageElement;
    nameInput: HTMLInputElement;
    tagsInput: HTMLInputElement;
    overwriteBox: HTMLInputElement;
  }

  const cards = {} as Record<SlotName, SlotCard>;

  function buildSlotCard(slot: SlotName): void {
    const card = document.createElement('div');
    card.className = 'slot-card';
    card.dataset.slot = slot;
    card.innerHTML = `
      <h3>slot ${slot} <span class="slot-count"></span></h3>
      <div class="slot-members tile-grid"></div>
      <div class="row">
        <button class="preview-mean" type="button" disabled>preview mean</button>
        <img class="mean-preview" alt="mean of slot ${slot}" hidden>
      </div>
      <div class="row">
        <input class="anchor-name" type="text" placeholder="set name">
        <input class="anchor-tags" type="text" placeholder="tags, comma separated">
        <label><input class="anchor-overwrite" type="checkbox"> overwrite</label>
        <button class="save-anchor" type="button">save</button>
      </div>
    `;
    slotCards.appendChild(card);
    cards[slot] = {
      countLabel: card.querySelector<HTMLElement>('.slot-count')!,
      members: card.querySelector<HTMLElement>('.slot-members')!,
      previewButton: card.querySelector<HTMLButtonElement>('.preview-mean')!,
      previewImage: card.querySelector<HTMLImageElement>('.mean-preview')!,
      nameInput: card.querySelector<HTMLInputElement>('.anchor-name')!,
      tagsInput: card.querySelector<HTMLInputElement>('.anchor-tags')!,
      overwriteBox: card.querySelector<HTMLInputElement>('.anchor-overwrite')!,
    };
    cards[slot].previewButton.addEventListener('click', () => {
      void ctx.tasks.track(previewMean(slot));
    });
    card.querySelector<HTMLButtonElement>('.save-anchor')!.addEventListener('click', () => {
      void ctx.tasks.track(saveSlot(slot));
    });
  }

  function updateSlotCard(slot: SlotName): void {
    const card = cards[slot];
    const members = selection.slots[slot];
    card.countLabel.textContent = `${members.length}/${selection.capacity}`;
    card.members.replaceChildren();
    for (const member of members) {
      const img = document.createElement('img');
      img.src = member.imageUrl;
      img.alt = `member ${member.latentId}`;
      img.title = 'click to remove';
      img.addEventListener('click', () => {
        removeFromSlot(selection, slot, member.latentId);
        updateSlotCard(slot);
      });
      card.members.appendChild(img);
    }
    card.previewButton.disabled = !previewReady(selection, slot);
  }

  async function previewMean(slot: SlotName): Promise<void> {
    const modelId = ctx.modelId();
    if (!modelId) {
      hint('no model selected');
      return;
    }
    // The mean is rendered server-side through a throwaway anchor set, so
    // the preview never computes anything client-side.
    const scratch = `preview-${slot.toLowerCase()}-scratch`;
    const ids = selection.slots[slot].map((m) => m.latentId);
    try {
      await ctx.api.createAnchor({ name: scratch, latent_ids: ids, overwrite: true });
      const res = await ctx.api.arithmetic({
        model_id: modelId,
        terms: [{ sign: '+', anchor_set: scratch }],
      });
      cards[slot].previewImage.src = res.result_image_url;
      cards[slot].previewImage.hidden = false;
      hint('');
    } catch (err) {
      showError(err);
    } finally {
      await ctx.api.deleteAnchor(scratch).catch(() => undefined);
    }
  }

  async function saveSlot(slot: SlotName): Promise<void> {
    const card = cards[slot];
    const name = card.nameInput.value.trim();
    if (!name) {
      hint(`slot ${slot}: a set name is required`);
      return;
    }
    const members = selection.slots[slot];
    if (members.length === 0) {
      hint(`slot ${slot} is empty`);
      return;
    }
    const tags = card.tagsInput.value
      .split(',')
      .map((t) => t.trim())
      .filter((t) => t.length > 0);
    try {
      const created = await ctx.api.createAnchor({
        name,
        tags,
        latent_ids: members.map((m) => m.latentId),
        overwrite: card.overwriteBox.checked,
      });
      hint(`saved '${created.name}' (${created.size} members)`);
      await ctx.refreshAnchors();
    } catch (err) {
      showError(err);
    }
  }

  // -- saved set listing --

  function renderAnchorRows(): void {
    anchorRows.replaceChildren();
    for (const set of ctx.anchorSets()) {
      const row = document.createElement('tr');
      const name = document.createElement('td');
      name.textContent = set.name;
      const tags = document.createElement('td');
      tags.textContent = set.tags.join(', ');
      const size = document.createElement('td');
      size.textContent = `${set.size}`;
      const actions = document.createElement('td');
      const remove = document.createElement('button');
      remove.type = 'button';
      remove.textContent = 'delete';
      remove.addEventListener('click', () => {
        void ctx.tasks.track(
          (async () => {
            try {
              await ctx.api.deleteAnchor(set.name);
              await ctx.refreshAnchors();
            } catch (err) {
              showError(err);
            }
          })(),
        );
      });
      actions.appendChild(remove);
      row.append(name, tags, size, actions);
      anchorRows.appendChild(row);
    }
  }

  ctx.onAnchorsChanged(renderAnchorRows);

  // -- sample grid --

  function clickTarget(): SlotName | 'start' | 'end' {
    const checked = panel.querySelector<HTMLInputElement>('input[name="click-target"]:checked');
    return (checked?.value ?? 'A') as SlotName | 'start' | 'end';
  }

  function onTileClick(pick: SlotPick): void {
    const target = clickTarget();
    if (target === 'start' || target === 'end') {
      setEndpoint(target, pick);
      hint('');
      return;
    }
    const result = addToSlot(selection, target, pick);
    if (!result.ok) {
      hint(result.reason);
      return;
    }
    hint('');
    updateSlotCard(target);
  }

  async function loadSamples(): Promise<void> {
    const modelId = ctx.modelId();
    if (!modelId) {
      hint('no model selected');
      return;
    }
    try {
      const res = await ctx.api.sample({
        model_id: modelId,
        count: intOf(countInput, 12),
        seed: intOf(seedInput, 0),
      });
      grid.replaceChildren();
      res.latent_ids.forEach((latentId, i) => {
        const url = res.image_urls[i];
        if (url === undefined) return;
        const img = document.createElement('img');
        img.src = url;
        img.alt = `sample ${latentId}`;
        img.title = latentId;
        img.dataset.latentId = latentId;
        img.addEventListener('click', () => onTileClick({ latentId, imageUrl: url }));
        grid.appendChild(img);
      });
      hint('');
    } catch (err) {
      showError(err);
    }
  }

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    void ctx.tasks.track(loadSamples());
  });

  capacityInput.addEventListener('change', () => {
    capacityInput.value = `${setCapacity(selection, intOf(capacityInput, 3))}`;
    for (const slot of SLOT_NAMES) updateSlotCard(slot);
  });

  for (const slot of SLOT_NAMES) {
    buildSlotCard(slot);
    updateSlotCard(slot);
  }
  renderAnchorRows();
}
