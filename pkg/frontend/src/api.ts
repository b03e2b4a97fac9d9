/** Typed client for the editing service; the studio's only data source. */

import type {
  EditBody,
  HealthWire,
  HistoryEntryWire,
  SessionSummaryWire,
  SessionWire,
} from "./types.js";

/** Service-side failure, rebuilt from the {"error": {type, detail}} body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly type: string,
    readonly detail: string,
  ) {
    super(`${type} (${status}): ${detail}`);
    this.name = "ApiError";
  }
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) {
    return;
  }
  let type = "HttpError";
  let detail = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as {
      error?: { type?: string; detail?: string };
      detail?: unknown;
    };
    if (body.error?.type) {
      type = body.error.type;
      detail = body.error.detail ?? detail;
    } else if (body.detail !== undefined) {
      // FastAPI request-validation errors use a bare "detail" list
      type = "RequestValidationError";
      detail = JSON.stringify(body.detail);
    }
  } catch {
    // non-JSON body; keep the generic detail
  }
  throw new ApiError(response.status, type, detail);
}

export class StudioApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    await raiseForStatus(response);
    return response.json();
  }

  private async post(path: string, body: unknown): Promise<unknown> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async health(): Promise<HealthWire> {
    return (await this.request("/api/health")) as HealthWire;
  }

  /** Create a session from base64 PNG images; response carries no images. */
  async createSession(
    sourceImage: string,
    referenceImage: string | null = null,
  ): Promise<SessionSummaryWire> {
    const body = (await this.post("/api/sessions", {
      source_image: sourceImage,
      reference_image: referenceImage,
    })) as { session: SessionSummaryWire };
    return body.session;
  }

  async appendEdit(
    sessionId: string,
    edit: EditBody,
  ): Promise<HistoryEntryWire> {
    const body = (await this.post(`/api/sessions/${sessionId}/edits`, edit)) as {
      entry: HistoryEntryWire;
    };
    return body.entry;
  }

  /** The single source of truth the studio projects its state from. */
  async getSession(sessionId: string): Promise<SessionWire> {
    const body = (await this.request(`/api/sessions/${sessionId}`)) as {
      session: SessionWire;
    };
    return body.session;
  }
}
