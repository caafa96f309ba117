import { JSDOM } from "jsdom";

import type { QueueView, ReportBundle, TriageApi, TriageItem } from "../src/api.js";

export const PAGE_HTML = `<!doctype html><html><body>
  <div id="app-root">
    <header><div id="header-status"></div></header>
    <div id="banner"></div>
    <div id="queue"></div>
    <div id="reports"></div>
  </div>
</body></html>`;

export function makeDom(): JSDOM {
  return new JSDOM(PAGE_HTML);
}

export function item(id: string, score = 0.5, tags: Record<string, number> = {}): TriageItem {
  return {
    doc_id: id,
    url: `http://h.test/${id}`,
    score,
    score_model_version: null,
    excerpt: `excerpt for ${id}`,
    keyword_tags: tags,
  };
}

export function view(items: TriageItem[], version = 0, pending = 0): QueueView {
  return { items, model_version: version, pending_labels: pending };
}

export const EMPTY_REPORTS: ReportBundle = {
  forum_stats: { error: "not-computed" },
  cluster_report: { error: "not-computed" },
  exposure_summary: { error: "not-computed" },
  risk_reports: { error: "not-computed" },
};

/** In-memory service stub; failures are injected per test. */
export class StubApi implements TriageApi {
  queue: QueueView = view([]);
  reportsPayload: ReportBundle = EMPTY_REPORTS;
  labelCalls: { docId: string; label: string }[] = [];
  retrainCalls = 0;
  failLabelWith: Error | null = null;
  labelDelayMs = 0;

  async loadQueue(): Promise<QueueView> {
    return structuredClone(this.queue);
  }

  async submitLabel(docId: string, label: "relevant" | "irrelevant") {
    if (this.labelDelayMs) {
      await new Promise((resolve) => setTimeout(resolve, this.labelDelayMs));
    }
    if (this.failLabelWith) throw this.failLabelWith;
    this.labelCalls.push({ docId, label });
    this.queue.items = this.queue.items.filter((i) => i.doc_id !== docId);
    return { doc_id: docId };
  }

  async retrain() {
    this.retrainCalls += 1;
    this.queue.model_version += 1;
    return { model_version: this.queue.model_version, train_size: 2 };
  }

  async reports(): Promise<ReportBundle> {
    return structuredClone(this.reportsPayload);
  }

  async document(): Promise<Record<string, unknown>> {
    return {};
  }
}
