/**
 * Thin typed client for the patchmotion HTTP service.
 *
 * The UI talks to the service exclusively through this module; `fetch`
 * is injectable so tests can stub the network or point at a live server.
 */

import type {
  BindingJson,
  FramesFeed,
  MetricsReport,
  Proposal,
  SessionSummary,
  TransferConfigJson,
  TransferJob,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public error: string,
    message: string,
  ) {
    super(message);
  }
}

type Fetch = typeof fetch;

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchImpl: Fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const res = await this.fetchImpl(this.base + path, init);
    if (!res.ok) {
      let error = "HttpError";
      let message = `${res.status} ${res.statusText}`;
      try {
        const body = await res.json();
        if (body && typeof body.error === "string") error = body.error;
        if (body && typeof body.message === "string") message = body.message;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(res.status, error, message);
    }
    return res;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.request(path, init);
    return (await res.json()) as T;
  }

  async createSession(): Promise<string> {
    const body = await this.json<{ id: string }>("/sessions", { method: "POST" });
    return body.id;
  }

  summary(sid: string): Promise<SessionSummary> {
    return this.json(`/sessions/${sid}`);
  }

  uploadSource(sid: string, name: string, data: string | Blob): Promise<SessionSummary> {
    const form = new FormData();
    form.append("file", new Blob([data]), name);
    return this.json(`/sessions/${sid}/source`, { method: "POST", body: form });
  }

  uploadTargets(
    sid: string,
    files: Array<{ name: string; data: string | Blob }>,
  ): Promise<SessionSummary> {
    const form = new FormData();
    for (const f of files) form.append("files", new Blob([f.data]), f.name);
    return this.json(`/sessions/${sid}/targets`, { method: "POST", body: form });
  }

  autobind(sid: string, length = 4, topK = 5): Promise<Proposal[]> {
    return this.json(`/sessions/${sid}/autobind?L=${length}&top_k=${topK}`);
  }

  putBindings(sid: string, bindings: BindingJson): Promise<SessionSummary> {
    return this.json(`/sessions/${sid}/bindings`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(bindings),
    });
  }

  putConfig(sid: string, patch: Partial<TransferConfigJson>): Promise<SessionSummary> {
    return this.json(`/sessions/${sid}/config`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(patch),
    });
  }

  transfer(sid: string): Promise<TransferJob> {
    return this.json(`/sessions/${sid}/transfer`, { method: "POST" });
  }

  frames(sid: string, from: number, to: number): Promise<FramesFeed> {
    return this.json(`/sessions/${sid}/result/frames?from=${from}&to=${to}`);
  }

  /** Raw response text, for byte-faithful comparison of playback feeds. */
  async framesRaw(sid: string, from: number, to: number): Promise<string> {
    const res = await this.request(`/sessions/${sid}/result/frames?from=${from}&to=${to}`);
    return res.text();
  }

  metrics(sid: string): Promise<MetricsReport> {
    return this.json(`/sessions/${sid}/metrics`);
  }

  resultBvhUrl(sid: string): string {
    return `${this.base}/sessions/${sid}/result/bvh`;
  }
}
