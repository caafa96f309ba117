/** Report views: share bar chart, risk table, exposure and cluster summary.
 *
 * Values render verbatim from the reports payload; bar heights scale the
 * share for display but the printed numbers are the API strings.
 */

import { notComputed, type ReportBundle } from "./api.js";
import { escapeHtml } from "./render.js";

function section(title: string, body: string): string {
  return `<section class="report"><h3>${escapeHtml(title)}</h3>${body}</section>`;
}

const NOT_COMPUTED = `<p class="not-computed">not computed yet</p>`;

export function shareBars(stats: { forum: string; share: string }[]): string {
  const bars = stats
    .map((row) => {
      const height = Math.max(1, Math.round(parseFloat(row.share) * 100));
      return `<div class="bar-cell">
        <div class="bar" style="height:${height}px" data-share="${escapeHtml(row.share)}"></div>
        <div class="bar-value">${escapeHtml(row.share)}</div>
        <div class="bar-label">${escapeHtml(row.forum)}</div>
      </div>`;
    })
    .join("");
  return `<div class="bar-chart">${bars}</div>`;
}

export function renderReports(container: HTMLElement, bundle: ReportBundle): void {
  const parts: string[] = [];

  if (notComputed(bundle.forum_stats)) {
    parts.push(section("Forum discussion shares", NOT_COMPUTED));
  } else {
    const classes = Object.keys(bundle.forum_stats).sort();
    const chosen = classes.includes("iot-exploit") ? "iot-exploit" : classes[0];
    parts.push(
      section(`Forum discussion shares — ${chosen}`, shareBars(bundle.forum_stats[chosen])),
    );
  }

  if (notComputed(bundle.risk_reports)) {
    parts.push(section("Risk", NOT_COMPUTED));
  } else {
    const rows = bundle.risk_reports
      .map(
        (r) => `<tr data-class="${escapeHtml(r.class)}">
          <td>${escapeHtml(r.class)}</td><td>${escapeHtml(r.mention_share)}</td>
          <td>${escapeHtml(r.exposure_share)}</td><td>${r.risk}</td></tr>`,
      )
      .join("");
    parts.push(
      section(
        "Risk",
        `<table class="risk"><thead>
         <tr><th>class</th><th>mention</th><th>exposure</th><th>risk</th></tr>
         </thead><tbody>${rows}</tbody></table>`,
      ),
    );
  }

  if (notComputed(bundle.exposure_summary)) {
    parts.push(section("Device exposure", NOT_COMPUTED));
  } else {
    const ports = bundle.exposure_summary.summary["port"] ?? {};
    const rows = Object.entries(ports)
      .map(([port, count]) => `<tr><td>${escapeHtml(port)}</td><td>${count}</td></tr>`)
      .join("");
    parts.push(
      section(
        "Device exposure by port",
        `<table class="exposure"><thead><tr><th>port</th><th>devices</th></tr></thead>
         <tbody>${rows}</tbody></table>`,
      ),
    );
  }

  if (notComputed(bundle.cluster_report)) {
    parts.push(section("Clusters", NOT_COMPUTED));
  } else {
    const rows = bundle.cluster_report.clusters
      .map(
        (c) => `<li>cluster ${c.cluster} — ${c.size} site(s): ` +
          `${c.top_terms.slice(0, 5).map(escapeHtml).join(", ")}</li>`,
      )
      .join("");
    parts.push(section("Clusters", `<ul class="clusters">${rows}</ul>`));
  }

  container.innerHTML = parts.join("\n");
}
