import { describe, expect, it } from "vitest";

import { renderQueue, queueOrder, tagChips, tagClass, escapeHtml } from "../../src/render.js";
import { renderReports, shareBars } from "../../src/charts.js";
import { applyQueue, initialState } from "../../src/state.js";
import type { ReportBundle } from "../../src/api.js";
import { EMPTY_REPORTS, item, makeDom, view } from "../helpers.js";

describe("queue rendering", () => {
  it("renders one row per item in API order, no client-side sorting", () => {
    const dom = makeDom();
    const container = dom.window.document.getElementById("queue")!;
    // Deliberately not sorted by score: the API order must win.
    const state = applyQueue(initialState(),
      view([item("low", 0.1), item("high", 0.9), item("mid", 0.5)]));
    renderQueue(container, state);
    expect(queueOrder(container)).toEqual(["low", "high", "mid"]);
  });

  it("shows the empty state", () => {
    const dom = makeDom();
    const container = dom.window.document.getElementById("queue")!;
    renderQueue(container, applyQueue(initialState(), view([])));
    expect(container.textContent).toContain("Queue empty");
  });

  it("escapes untrusted text", () => {
    const dom = makeDom();
    const container = dom.window.document.getElementById("queue")!;
    const nasty = item("x");
    nasty.excerpt = `<img src=x onerror="alert(1)">`;
    renderQueue(container, applyQueue(initialState(), view([nasty])));
    expect(container.querySelector("img")).toBeNull();
    expect(container.textContent).toContain("<img");
  });
});

describe("tag chips", () => {
  it("known classes get their theme class", () => {
    expect(tagClass("iot-exploit")).toBe("tag-iot-exploit");
    expect(tagClass("market")).toBe("tag-market");
  });

  it("unknown classes get a stable fallback", () => {
    expect(tagClass("novel-class")).toBe(tagClass("novel-class"));
    expect(tagClass("novel-class")).toMatch(/^tag-extra[0-3]$/);
  });

  it("chips show class and count", () => {
    const html = tagChips({ "iot-exploit": 2, market: 1 });
    expect(html).toContain("iot-exploit ×2");
    expect(html).toContain("market ×1");
  });
});

describe("report rendering", () => {
  const bundle: ReportBundle = {
    forum_stats: {
      "iot-exploit": [
        { forum: "HackerWeb", total_posts: 1000, matching_posts: 33, share: "0.033000" },
        { forum: "TorChan", total_posts: 30, matching_posts: 9, share: "0.300000" },
      ],
    },
    cluster_report: {
      k: 2,
      clusters: [
        { cluster: 0, size: 3, top_terms: ["market", "escrow", "vendor"] },
        { cluster: 1, size: 5, top_terms: ["forum", "thread", "post"] },
      ],
    },
    exposure_summary: { counts: { "iot-exploit": 582 }, summary: { port: { "8080": 5, "80": 4 } } },
    risk_reports: [
      { class: "iot-exploit", mention_share: "0.073930", exposure_share: "1.000000", risk: 0.271901 },
    ],
  };

  it("bar chart shows the share strings verbatim", () => {
    const html = shareBars([{ forum: "HackerWeb", share: "0.033000" }]);
    expect(html).toContain(`data-share="0.033000"`);
    expect(html).toContain(">0.033000<");
  });

  it("renders every section from the payload values", () => {
    const dom = makeDom();
    const container = dom.window.document.getElementById("reports")!;
    renderReports(container, bundle);
    const text = container.textContent ?? "";
    expect(text).toContain("0.033000");
    expect(text).toContain("HackerWeb");
    expect(text).toContain("0.073930");
    expect(text).toContain("0.271901");
    expect(text).toContain("cluster 0");
    const bars = container.querySelectorAll(".bar");
    expect(bars.length).toBe(2);
  });

  it("marks missing sections as not computed", () => {
    const dom = makeDom();
    const container = dom.window.document.getElementById("reports")!;
    renderReports(container, EMPTY_REPORTS);
    const matches = (container.textContent ?? "").match(/not computed yet/g) ?? [];
    expect(matches.length).toBe(4);
  });

  it("escape helper", () => {
    expect(escapeHtml(`<a b="c">`)).toBe("&lt;a b=&quot;c&quot;&gt;");
  });
});
