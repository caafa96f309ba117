/** DOM builders. Every value shown comes verbatim from an API payload. */

import type { TriageItem } from "./api.js";
import type { AppState } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Stable theme class per lexicon class; colors live in theme.css. */
export function tagClass(name: string): string {
  const known = ["iot-exploit", "hacking-services", "ideology", "market"];
  if (known.includes(name)) return `tag-${name}`;
  let hash = 0;
  for (const ch of name) hash = (hash * 31 + ch.charCodeAt(0)) >>> 0;
  return `tag-extra${hash % 4}`;
}

export function tagChips(tags: Record<string, number>): string {
  return Object.keys(tags)
    .sort()
    .map((name) => `<span class="tag ${tagClass(name)}">${escapeHtml(name)} ×${tags[name]}</span>`)
    .join(" ");
}

function rowHtml(item: TriageItem): string {
  return `
  <tr class="queue-row" data-doc-id="${escapeHtml(item.doc_id)}">
    <td class="score">${item.score.toFixed(4)}</td>
    <td class="doc">
      <div class="url">${escapeHtml(item.url)}</div>
      <div class="excerpt">${escapeHtml(item.excerpt)}</div>
      <div class="tags">${tagChips(item.keyword_tags)}</div>
    </td>
    <td class="actions">
      <button class="label-btn relevant" data-action="label" data-label="relevant"
              data-doc-id="${escapeHtml(item.doc_id)}">relevant</button>
      <button class="label-btn irrelevant" data-action="label" data-label="irrelevant"
              data-doc-id="${escapeHtml(item.doc_id)}">irrelevant</button>
    </td>
  </tr>`;
}

export function renderQueue(container: HTMLElement, state: AppState): void {
  if (state.items.length === 0) {
    container.innerHTML = `<p class="empty-state">Queue empty — nothing awaiting review.</p>`;
    return;
  }
  const rows = state.items.map(rowHtml).join("");
  container.innerHTML = `
  <table class="queue">
    <thead><tr><th>score</th><th>document</th><th>label</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}

export function renderHeader(container: HTMLElement, state: AppState): void {
  const retrainDisabled = state.retraining ? "disabled" : "";
  container.innerHTML = `
  <span class="badge" id="version-badge">model v${state.modelVersion}</span>
  <span class="badge" id="pending-badge">${state.pendingLabels} pending label(s)</span>
  <button id="retrain-btn" ${retrainDisabled}>retrain</button>`;
}

export function renderBanner(container: HTMLElement, state: AppState): void {
  if (!state.banner) {
    container.innerHTML = "";
    return;
  }
  const retry =
    state.banner.kind === "error"
      ? `<button id="retry-btn" data-action="retry">retry</button>`
      : "";
  container.innerHTML = `<div class="banner ${state.banner.kind}">
    <span>${escapeHtml(state.banner.text)}</span> ${retry}</div>`;
}

export function queueOrder(container: HTMLElement): string[] {
  return Array.from(container.querySelectorAll<HTMLElement>("[data-doc-id].queue-row")).map(
    (row) => row.dataset.docId ?? "",
  );
}
