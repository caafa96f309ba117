/** Typed client for the triage service endpoints. */

export interface TriageItem {
  doc_id: string;
  url: string;
  score: number;
  score_model_version: number | null;
  excerpt: string;
  keyword_tags: Record<string, number>;
}

export interface QueueView {
  items: TriageItem[];
  model_version: number;
  pending_labels: number;
}

export interface ForumStatsRow {
  forum: string;
  total_posts: number;
  matching_posts: number;
  share: string;
}

export interface RiskRow {
  class: string;
  mention_share: string;
  exposure_share: string;
  risk: number;
}

export type NotComputed = { error: string };

export interface ReportBundle {
  forum_stats: Record<string, ForumStatsRow[]> | NotComputed;
  cluster_report:
    | { k: number; clusters: { cluster: number; size: number; top_terms: string[] }[] }
    | NotComputed;
  exposure_summary:
    | { counts: Record<string, number>; summary: Record<string, Record<string, number>> }
    | NotComputed;
  risk_reports: RiskRow[] | NotComputed;
}

export function notComputed(section: unknown): section is NotComputed {
  return (
    typeof section === "object" &&
    section !== null &&
    !Array.isArray(section) &&
    "error" in (section as Record<string, unknown>)
  );
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

/** What the app needs from the service; ApiClient is the HTTP implementation. */
export interface TriageApi {
  loadQueue(limit?: number): Promise<QueueView>;
  submitLabel(docId: string, label: "relevant" | "irrelevant"): Promise<{ doc_id: string }>;
  retrain(): Promise<{ model_version: number; train_size: number }>;
  reports(): Promise<ReportBundle>;
  document(docId: string): Promise<Record<string, unknown>>;
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = "error";
  let message = `HTTP ${resp.status}`;
  try {
    const body = (await resp.json()) as { error?: string; message?: string };
    if (body.error) code = body.error;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(resp.status, code, message);
}

export class ApiClient implements TriageApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly analyst: string = "analyst",
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  private async post<T>(path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        "X-Analyst": this.analyst,
      },
      body: body === undefined ? null : JSON.stringify(body),
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  loadQueue(limit = 50): Promise<QueueView> {
    return this.get(`/api/queue?limit=${limit}`);
  }

  submitLabel(docId: string, label: "relevant" | "irrelevant"): Promise<{ doc_id: string }> {
    return this.post("/api/label", { doc_id: docId, label });
  }

  retrain(): Promise<{ model_version: number; train_size: number }> {
    return this.post("/api/retrain");
  }

  reports(): Promise<ReportBundle> {
    return this.get("/api/reports");
  }

  document(docId: string): Promise<Record<string, unknown>> {
    return this.get(`/api/doc/${docId}`);
  }
}
