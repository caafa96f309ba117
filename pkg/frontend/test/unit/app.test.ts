import { describe, expect, it } from "vitest";

import { ApiError } from "../../src/api.js";
import { App } from "../../src/app.js";
import { queueOrder } from "../../src/render.js";
import { StubApi, item, makeDom, view } from "../helpers.js";

async function bootApp(stub: StubApi) {
  const dom = makeDom();
  const app = new App(dom.window.document, stub);
  await app.init();
  return { dom, app };
}

function queueContainer(dom: ReturnType<typeof makeDom>) {
  return dom.window.document.getElementById("queue")!;
}

describe("label and advance", () => {
  it("removes the row optimistically and posts once", async () => {
    const stub = new StubApi();
    stub.queue = view([item("a"), item("b"), item("c")]);
    const { dom, app } = await bootApp(stub);
    await app.labelAndAdvance("a", "irrelevant");
    expect(stub.labelCalls).toEqual([{ docId: "a", label: "irrelevant" }]);
    expect(queueOrder(queueContainer(dom))).toEqual(["b", "c"]);
  });

  it("double invocation sends a single request", async () => {
    const stub = new StubApi();
    stub.queue = view([item("a"), item("b")]);
    stub.labelDelayMs = 20;
    const { app } = await bootApp(stub);
    await Promise.all([
      app.labelAndAdvance("a", "relevant"),
      app.labelAndAdvance("a", "relevant"),
    ]);
    expect(stub.labelCalls.length).toBe(1);
  });

  it("restores the row and shows an error on server failure", async () => {
    const stub = new StubApi();
    stub.queue = view([item("a"), item("b")]);
    stub.failLabelWith = new ApiError(500, "storage-io", "disk full");
    const { dom, app } = await bootApp(stub);
    await app.labelAndAdvance("a", "relevant");
    expect(queueOrder(queueContainer(dom))).toEqual(["a", "b"]);
    expect(dom.window.document.getElementById("banner")!.textContent).toContain("label failed");
  });

  it("stale row (404) triggers a queue refresh", async () => {
    const stub = new StubApi();
    stub.queue = view([item("a"), item("b")]);
    const { dom, app } = await bootApp(stub);
    stub.failLabelWith = new ApiError(404, "unknown-doc", "gone");
    stub.queue = view([item("b")]); // what the server now has
    await app.labelAndAdvance("a", "relevant");
    expect(queueOrder(queueContainer(dom))).toEqual(["b"]);
    expect(dom.window.document.getElementById("banner")!.textContent).toContain("stale");
  });

  it("label buttons in the DOM drive the flow", async () => {
    const stub = new StubApi();
    stub.queue = view([item("a"), item("b")]);
    const { dom } = await bootApp(stub);
    const button = dom.window.document.querySelector<HTMLElement>(
      `button[data-doc-id="a"][data-label="relevant"]`)!;
    button.dispatchEvent(new dom.window.MouseEvent("click", { bubbles: true }));
    await new Promise((resolve) => setTimeout(resolve, 10));
    expect(stub.labelCalls).toEqual([{ docId: "a", label: "relevant" }]);
  });
});

describe("retrain and refresh", () => {
  it("bumps the version badge and reloads the queue", async () => {
    const stub = new StubApi();
    stub.queue = view([item("a")], 1, 2);
    const { dom, app } = await bootApp(stub);
    await app.retrainAndRefresh();
    expect(stub.retrainCalls).toBe(1);
    const badge = dom.window.document.getElementById("version-badge")!;
    expect(badge.textContent).toBe("model v2");
  });

  it("blocked before both classes are labeled", async () => {
    const stub = new StubApi();
    stub.queue = view([item("a"), item("b")], 0, 0);
    const { dom, app } = await bootApp(stub);
    const retrainBtn = () =>
      dom.window.document.getElementById("retrain-btn") as HTMLButtonElement;
    expect(retrainBtn().disabled).toBe(true);
    await app.retrainAndRefresh();
    expect(stub.retrainCalls).toBe(0);
    await app.labelAndAdvance("a", "relevant");
    expect(retrainBtn().disabled).toBe(true);
    await app.labelAndAdvance("b", "irrelevant");
    expect(retrainBtn().disabled).toBe(false);
  });

  it("explains a 409 from the service", async () => {
    const stub = new StubApi();
    stub.queue = view([], 1, 0);
    stub.retrain = async () => {
      throw new ApiError(409, "degenerate-labels", "one class only");
    };
    const { dom, app } = await bootApp(stub);
    await app.retrainAndRefresh();
    expect(dom.window.document.getElementById("banner")!.textContent)
      .toContain("one relevant and one irrelevant");
  });
});

describe("network failures", () => {
  it("queue load failure shows a retry banner", async () => {
    const stub = new StubApi();
    stub.loadQueue = async () => {
      throw new TypeError("fetch failed");
    };
    const { dom } = await bootApp(stub);
    const banner = dom.window.document.getElementById("banner")!;
    expect(banner.textContent).toContain("cannot reach service");
    expect(banner.querySelector("#retry-btn")).not.toBeNull();
  });
});
