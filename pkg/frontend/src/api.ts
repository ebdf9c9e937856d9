// Typed client for the review service. All mutations in the app flow
// through postAction; the client itself holds no state.

import type {
  ActionRequest,
  ActionResponse,
  DocPayload,
  IterationManifest,
  ProjectSummary,
  QueueEntry,
  SchemaLabel,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<never> {
  let message = response.statusText || `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") message = body.error;
  } catch {
    // leave the status text
  }
  throw new ApiError(response.status, message);
}

export class ReviewApi {
  constructor(private readonly baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  project(): Promise<ProjectSummary> {
    return this.getJson("/api/project");
  }

  async queue(k?: number, strategy?: string): Promise<QueueEntry[]> {
    const params = new URLSearchParams();
    if (k !== undefined) params.set("k", String(k));
    if (strategy !== undefined) params.set("strategy", strategy);
    const suffix = params.size > 0 ? `?${params}` : "";
    const body = await this.getJson<{ queue: QueueEntry[] }>(`/api/queue${suffix}`);
    return body.queue;
  }

  doc(docId: string): Promise<DocPayload> {
    return this.getJson(`/api/docs/${encodeURIComponent(docId)}`);
  }

  async labels(): Promise<SchemaLabel[]> {
    const body = await this.getJson<{ labels: SchemaLabel[] }>("/api/labels");
    return body.labels;
  }

  async postAction(docId: string, action: ActionRequest): Promise<ActionResponse> {
    const response = await fetch(
      `${this.baseUrl}/api/docs/${encodeURIComponent(docId)}/actions`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(action),
      },
    );
    if (!response.ok) await parseError(response);
    return (await response.json()) as ActionResponse;
  }

  async createIteration(): Promise<IterationManifest> {
    const response = await fetch(`${this.baseUrl}/api/iterations`, { method: "POST" });
    if (!response.ok) await parseError(response);
    return (await response.json()) as IterationManifest;
  }

  imageUrl(doc: DocPayload): string | null {
    return doc.image_url === null ? null : this.baseUrl + doc.image_url;
  }
}
