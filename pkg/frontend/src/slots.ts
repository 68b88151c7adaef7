// Anchor slot bookkeeping, kept free of DOM so the rules are unit-testable.

export type SlotName = 'A' | 'B' | 'C';

export const SLOT_NAMES: readonly SlotName[] = ['A', 'B', 'C'];

export interface SlotPick {
  latentId: string;
  imageUrl: string;
}

export interface SelectionState {
  capacity: number;
  slots: Record<SlotName, SlotPick[]>;
}

export type AddResult = { ok: true } | { ok: false; reason: string };

export function createSelection(capacity = 3): SelectionState {
  return { capacity, slots: { A: [], B: [], C: [] } };
}

export function addToSlot(state: SelectionState, slot: SlotName, pick: SlotPick): AddResult {
  const members = state.slots[slot];
  if (members.some((m) => m.latentId === pick.latentId)) {
    return { ok: false, reason: `that sample is already in slot ${slot}` };
  }
  if (members.length >= state.capacity) {
    return { ok: false, reason: `slot ${slot} is full (capacity ${state.capacity})` };
  }
  members.push(pick);
  return { ok: true };
}

export function removeFromSlot(state: SelectionState, slot: SlotName, latentId: string): void {
  state.slots[slot] = state.slots[slot].filter((m) => m.latentId !== latentId);
}

export function setCapacity(state: SelectionState, capacity: number): number {
  // Existing members are kept even if they now exceed the capacity; the
  // limit applies to further additions.
  state.capacity = Math.min(9, Math.max(1, Math.floor(capacity)));
  return state.capacity;
}

/** The mean preview unlocks once a slot holds a full complement. */
export function previewReady(state: SelectionState, slot: SlotName): boolean {
  return state.slots[slot].length === state.capacity;
}
