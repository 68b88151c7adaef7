// Shared jsdom plumbing: mount the app against the stub (or any transport),
// drive controls the way a browser would (events included), and wait for
// quiescence.

import { createClient } from '../src/api.js';
import { createApp } from '../src/app.js';
import type { App } from '../src/app.js';
import type { ApiClient, FetchLike } from '../src/api.js';
import type { Sign } from '../src/types.js';
import { createStub } from './stub.js';
import type { Stub } from './stub.js';

export interface MountedUi {
  client: ApiClient;
  app: App;
  root: HTMLElement;
}

export interface Mounted extends MountedUi {
  stub: Stub;
}

export async function mountWith(fetchFn: FetchLike): Promise<MountedUi> {
  document.body.innerHTML = '';
  const root = document.createElement('div');
  document.body.appendChild(root);
  const client = createClient(fetchFn);
  const app = await createApp(root, client);
  return { client, app, root };
}

export async function mountApp(stub: Stub = createStub()): Promise<Mounted> {
  return { stub, ...(await mountWith(stub.fetch)) };
}

export function q<T extends Element>(root: ParentNode, selector: string): T {
  const el = root.querySelector(selector);
  if (!el) throw new Error(`missing element: ${selector}`);
  return el as T;
}

export function qa<T extends Element>(root: ParentNode, selector: string): T[] {
  return [...root.querySelectorAll(selector)] as T[];
}

export function setValue(
  input: HTMLInputElement | HTMLSelectElement,
  value: string,
  eventType: 'change' | 'input' = 'change',
): void {
  input.value = value;
  input.dispatchEvent(new Event(eventType, { bubbles: true }));
}

export function choose(radio: HTMLInputElement): void {
  radio.checked = true;
  radio.dispatchEvent(new Event('change', { bubbles: true }));
}

export async function loadSamples(m: MountedUi, seed: number, count: number): Promise<void> {
  setValue(q(m.root, '#sample-seed'), `${seed}`);
  setValue(q(m.root, '#sample-count'), `${count}`);
  q<HTMLFormElement>(m.root, '#sample-form').dispatchEvent(
    new Event('submit', { bubbles: true, cancelable: true }),
  );
  await m.app.idle();
}

export function tiles(root: ParentNode): HTMLImageElement[] {
  return qa(root, '#sample-grid img');
}

export function clickTile(root: ParentNode, index: number): void {
  const tile = tiles(root)[index];
  if (!tile) throw new Error(`no tile at index ${index}`);
  tile.click();
}

export function setClickTarget(root: ParentNode, value: string): void {
  choose(q(root, `input[name="click-target"][value="${value}"]`));
}

export function slotCard(root: ParentNode, slot: string): HTMLElement {
  return q(root, `.slot-card[data-slot="${slot}"]`);
}

export function galleryHint(root: ParentNode): string {
  return q(root, '#gallery-hint').textContent ?? '';
}

export async function saveSlot(
  m: MountedUi,
  slot: string,
  name: string,
  tags = '',
): Promise<void> {
  const card = slotCard(m.root, slot);
  q<HTMLInputElement>(card, '.anchor-name').value = name;
  q<HTMLInputElement>(card, '.anchor-tags').value = tags;
  q<HTMLButtonElement>(card, '.save-anchor').click();
  await m.app.idle();
}

export async function fillSlot(
  m: MountedUi,
  slot: 'A' | 'B' | 'C',
  tileIndexes: number[],
): Promise<void> {
  setClickTarget(m.root, slot);
  for (const i of tileIndexes) {
    clickTile(m.root, i);
  }
  await m.app.idle();
}

export function setTerms(m: MountedUi, terms: Array<{ sign: Sign; set: string }>): void {
  const addButton = q<HTMLButtonElement>(m.root, '#add-term');
  while (qa(m.root, '.term-row').length < terms.length) {
    addButton.click();
  }
  const rows = qa<HTMLElement>(m.root, '.term-row');
  terms.forEach((term, i) => {
    setValue(q(rows[i]!, '.term-sign'), term.sign);
    setValue(q(rows[i]!, '.term-set'), term.set);
  });
}

export async function compose(m: MountedUi): Promise<void> {
  q<HTMLButtonElement>(m.root, '#compose').click();
  await m.app.idle();
}
