import type {
  CreateResponse,
  DrawResponse,
  InterpretationRequest,
  InterpretationResponse,
  SessionView,
  TrajectoryResponse,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
    readonly decision?: unknown,
  ) {
    super(detail);
    this.name = "ApiError";
  }

  // acting on a session whose server-side state moved on (another tab
  // drew, the verdict landed); the console recovers by refreshing
  get isConflict(): boolean {
    return this.status === 409;
  }
}

async function unwrap<T>(resp: Response): Promise<T> {
  const text = await resp.text();
  let body: any = null;
  try {
    body = text ? JSON.parse(text) : null;
  } catch {
    // non-JSON body; fall through to the generic error below
  }
  if (!resp.ok) {
    const code = typeof body?.error === "string" ? body.error : `HTTP ${resp.status}`;
    const detail = typeof body?.detail === "string" ? body.detail : text || resp.statusText;
    throw new ApiError(resp.status, code, detail, body?.decision);
  }
  return body as T;
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  private async get<T>(path: string): Promise<T> {
    return unwrap<T>(await fetch(this.base + path));
  }

  private async post<T>(path: string, payload?: unknown): Promise<T> {
    return unwrap<T>(
      await fetch(this.base + path, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: payload === undefined ? "{}" : JSON.stringify(payload),
      }),
    );
  }

  createSession(payload: unknown): Promise<CreateResponse> {
    return this.post<CreateResponse>("/sessions", payload);
  }

  getSession(id: string): Promise<SessionView> {
    return this.get<SessionView>(`/sessions/${encodeURIComponent(id)}`);
  }

  nextDraw(id: string): Promise<DrawResponse> {
    return this.post<DrawResponse>(`/sessions/${encodeURIComponent(id)}/draws`);
  }

  submitInterpretation(id: string, body: InterpretationRequest): Promise<InterpretationResponse> {
    return this.post<InterpretationResponse>(
      `/sessions/${encodeURIComponent(id)}/interpretations`,
      body,
    );
  }

  trajectory(id: string): Promise<TrajectoryResponse> {
    return this.get<TrajectoryResponse>(`/sessions/${encodeURIComponent(id)}/trajectory`);
  }

  logUrl(id: string): string {
    return `${this.base}/sessions/${encodeURIComponent(id)}/log`;
  }
}
