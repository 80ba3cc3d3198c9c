/**
 * HTTP client for the catalog service: the only place the UI touches the
 * network. Carries the bearer token, surfaces structured errors, and
 * threads entity tags through for optimistic concurrency.
 */

import type { ModelDoc } from "./display.js";

export interface AppConfig {
  baseUrl: string; // e.g. http://localhost:8080
  catalog: string;
  token?: string;
}

export type Row = Record<string, unknown>;

export interface ApiError {
  status: number;
  error: string;
  message: string;
  rowIndex?: number;
}

export class RequestFailed extends Error {
  constructor(public info: ApiError) {
    super(info.message);
  }
}

export interface RowsResult {
  rows: Row[];
  etag: string | null;
}

export interface SaveResult {
  ok: boolean;
  conflict: boolean; // stale If-Match
  etag: string | null;
  error: ApiError | null;
  rows: Row[];
}

async function errorInfo(resp: Response): Promise<ApiError> {
  let doc: Record<string, unknown> = {};
  try {
    doc = (await resp.json()) as Record<string, unknown>;
  } catch {
    // non-JSON error body; keep defaults
  }
  return {
    status: resp.status,
    error: String(doc["error"] ?? "Error"),
    message: String(doc["message"] ?? resp.statusText),
    rowIndex: typeof doc["row_index"] === "number" ? (doc["row_index"] as number) : undefined,
  };
}

export class Api {
  constructor(private cfg: AppConfig) {}

  private headers(extra?: Record<string, string>): Record<string, string> {
    const h: Record<string, string> = { ...extra };
    if (this.cfg.token) h["Authorization"] = `Bearer ${this.cfg.token}`;
    return h;
  }

  private url(path: string): string {
    return this.cfg.baseUrl.replace(/\/$/, "") + path;
  }

  async introspect(): Promise<ModelDoc> {
    const resp = await fetch(this.url(`/ermrest/catalog/${this.cfg.catalog}/schema`), {
      headers: this.headers(),
    });
    if (!resp.ok) throw new RequestFailed(await errorInfo(resp));
    return (await resp.json()) as ModelDoc;
  }

  /** GET a data URL built by DataUrl.build(). */
  async rows(dataUrl: string): Promise<RowsResult> {
    const resp = await fetch(this.url(dataUrl), { headers: this.headers() });
    if (!resp.ok) throw new RequestFailed(await errorInfo(resp));
    return { rows: (await resp.json()) as Row[], etag: resp.headers.get("ETag") };
  }

  async count(dataUrl: string): Promise<number> {
    const result = await this.rows(dataUrl);
    const first = result.rows[0];
    return first ? Number(first["cnt"] ?? 0) : 0;
  }

  /** Entity upsert with optimistic concurrency; 412 becomes conflict=true. */
  async saveEntity(entityUrl: string, rows: Row[], ifMatch: string | null): Promise<SaveResult> {
    const headers = this.headers({ "Content-Type": "application/json" });
    if (ifMatch) headers["If-Match"] = ifMatch;
    const resp = await fetch(this.url(entityUrl), {
      method: "PUT",
      headers,
      body: JSON.stringify(rows),
    });
    if (resp.status === 412) {
      return { ok: false, conflict: true, etag: null, error: await errorInfo(resp), rows: [] };
    }
    if (!resp.ok) {
      return { ok: false, conflict: false, etag: null, error: await errorInfo(resp), rows: [] };
    }
    return {
      ok: true,
      conflict: false,
      etag: resp.headers.get("ETag"),
      error: null,
      rows: (await resp.json()) as Row[],
    };
  }
}
