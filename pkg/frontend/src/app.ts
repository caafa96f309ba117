/** The triage screen: queue review, labeling, retrain, report charts. */

import { ApiError, type TriageApi } from "./api.js";
import { renderReports } from "./charts.js";
import { renderBanner, renderHeader, renderQueue } from "./render.js";
import {
  applyQueue,
  canRetrain,
  initialState,
  noteSessionLabel,
  removeItem,
  restoreItem,
  type AppState,
} from "./state.js";

export class App {
  state: AppState = initialState();

  constructor(
    private readonly doc: Document,
    readonly client: TriageApi,
  ) {}

  private el(id: string): HTMLElement {
    const node = this.doc.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node;
  }

  private render(): void {
    renderHeader(this.el("header-status"), this.state);
    renderBanner(this.el("banner"), this.state);
    renderQueue(this.el("queue"), this.state);
    const retrain = this.doc.getElementById("retrain-btn") as HTMLButtonElement | null;
    if (retrain) {
      retrain.disabled = !canRetrain(this.state);
      if (!canRetrain(this.state) && !this.state.retraining) {
        retrain.title = "label at least one relevant and one irrelevant document first";
      }
    }
  }

  async init(): Promise<void> {
    this.el("app-root").addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      if (target.dataset.action === "label") {
        void this.labelAndAdvance(
          target.dataset.docId ?? "",
          target.dataset.label as "relevant" | "irrelevant",
        );
      } else if (target.id === "retrain-btn") {
        void this.retrainAndRefresh();
      } else if (target.dataset.action === "retry") {
        void this.loadQueue();
      }
    });
    await this.loadQueue();
    await this.loadReports();
  }

  async loadQueue(): Promise<void> {
    try {
      const view = await this.client.loadQueue();
      this.state = applyQueue(this.state, view);
    } catch (err) {
      this.state = {
        ...this.state,
        banner: { kind: "error", text: `cannot reach service: ${String(err)}` },
      };
    }
    this.render();
  }

  async loadReports(): Promise<void> {
    const container = this.doc.getElementById("reports");
    if (!container) return;
    try {
      renderReports(container, await this.client.reports());
    } catch (err) {
      if (err instanceof ApiError && err.code === "not-computed") {
        container.innerHTML = `<p class="not-computed">no reports computed yet</p>`;
      } else {
        container.innerHTML = `<p class="not-computed">reports unavailable</p>`;
      }
    }
  }

  /** Optimistic label: the row leaves immediately, returns on failure. */
  async labelAndAdvance(docId: string, label: "relevant" | "irrelevant"): Promise<void> {
    if (this.state.inFlight.has(docId)) return; // double-click guard
    const removal = removeItem(this.state.items, docId);
    if (!removal) return;
    this.state.inFlight.add(docId);
    this.state = { ...this.state, items: removal.items };
    this.render();
    try {
      await this.client.submitLabel(docId, label);
      this.state = noteSessionLabel(this.state, label);
      this.state = { ...this.state, pendingLabels: this.state.pendingLabels + 1 };
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        // Stale row: the document vanished server-side; resync first,
        // then explain (loadQueue clears any banner).
        await this.loadQueue();
        this.state = {
          ...this.state,
          banner: { kind: "info", text: `document ${docId.slice(0, 12)}… is stale; refreshed` },
        };
        this.render();
        return;
      }
      this.state = {
        ...this.state,
        items: restoreItem(this.state.items, removal.removed, removal.index),
        banner: { kind: "error", text: `label failed: ${String(err)}` },
      };
    } finally {
      this.state.inFlight.delete(docId);
    }
    this.render();
  }

  async retrainAndRefresh(): Promise<void> {
    if (!canRetrain(this.state)) return;
    this.state = { ...this.state, retraining: true };
    this.render();
    try {
      await this.client.retrain();
      await this.loadQueue();
      await this.loadReports();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.state = {
          ...this.state,
          banner: {
            kind: "info",
            text: "retrain needs at least one relevant and one irrelevant label",
          },
        };
      } else {
        this.state = {
          ...this.state,
          banner: { kind: "error", text: `retrain failed: ${String(err)}` },
        };
      }
    } finally {
      this.state = { ...this.state, retraining: false };
    }
    this.render();
  }
}
