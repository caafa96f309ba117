/** Pure state transitions for the triage screen.
 *
 * The rendered queue is always exactly what the API last returned, minus
 * optimistic removals that are rolled back on failure. Nothing here
 * re-sorts or recomputes server values.
 */

import type { QueueView, TriageItem } from "./api.js";

export interface AppState {
  items: TriageItem[];
  modelVersion: number;
  pendingLabels: number;
  inFlight: Set<string>;
  sessionLabels: { relevant: number; irrelevant: number };
  banner: { kind: "error" | "info"; text: string } | null;
  retraining: boolean;
}

export function initialState(): AppState {
  return {
    items: [],
    modelVersion: 0,
    pendingLabels: 0,
    inFlight: new Set(),
    sessionLabels: { relevant: 0, irrelevant: 0 },
    banner: null,
    retraining: false,
  };
}

export function applyQueue(state: AppState, view: QueueView): AppState {
  return {
    ...state,
    items: view.items,
    modelVersion: view.model_version,
    pendingLabels: view.pending_labels,
    banner: null,
  };
}

export interface Removal {
  items: TriageItem[];
  removed: TriageItem;
  index: number;
}

export function removeItem(items: TriageItem[], docId: string): Removal | null {
  const index = items.findIndex((item) => item.doc_id === docId);
  if (index < 0) return null;
  const removed = items[index];
  return { items: items.slice(0, index).concat(items.slice(index + 1)), removed, index };
}

export function restoreItem(items: TriageItem[], removed: TriageItem, index: number): TriageItem[] {
  const at = Math.min(index, items.length);
  return items.slice(0, at).concat([removed], items.slice(at));
}

/** Retrain needs one label of each class. A previously trained model
 * proves the store has both; labels predating this session may too, in
 * which case the API is the judge (a 409 still gets a hint banner). */
export function canRetrain(state: AppState): boolean {
  if (state.retraining) return false;
  if (state.modelVersion >= 1) return true;
  if (state.sessionLabels.relevant >= 1 && state.sessionLabels.irrelevant >= 1) return true;
  const sessionTotal = state.sessionLabels.relevant + state.sessionLabels.irrelevant;
  return state.pendingLabels > sessionTotal;
}

export function noteSessionLabel(state: AppState, label: "relevant" | "irrelevant"): AppState {
  const sessionLabels = { ...state.sessionLabels };
  sessionLabels[label] += 1;
  return { ...state, sessionLabels };
}
