// Typed client for the storytelling service's JSON API. The shapes mirror
// the documented endpoint schemas one to one; nothing here interprets the
// fiction, it only moves JSON.

export interface RejectedChange {
  line: string;
  reason: string;
  detail: string;
}

export interface TurnReport {
  schema_version: number;
  turn: number;
  input: string;
  raw_output: string;
  parsed: string[];
  applied: string[];
  rejected: RejectedChange[];
  narration: string;
  digest_before: string;
  digest_after: string;
}

export interface ItemView {
  name: string;
  descriptions: string[];
  gettable: boolean;
}

export interface ExitView {
  name: string;
  blocked: boolean;
}

export interface CharacterView {
  name: string;
  descriptions: string[];
  is_player: boolean;
  inventory: ItemView[];
}

export interface ScopeView {
  location: { name: string; descriptions: string[] };
  exits: ExitView[];
  items: ItemView[];
  characters: CharacterView[];
}

export interface StateView {
  rendering: string;
  scope: ScopeView;
}

export interface WorldSummary {
  id: string;
  player: string;
  locations: number;
  items: number;
  characters: number;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }

  get isBusy(): boolean {
    return this.status === 409;
  }
}

async function errorFrom(response: Response): Promise<ApiError> {
  let code = "http-error";
  let detail = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body && typeof body === "object" && body.error) {
      code = body.error.code ?? code;
      detail = body.error.detail ?? detail;
    } else if (body && body.detail) {
      code = "bad-request";
      detail = JSON.stringify(body.detail);
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, code, detail);
}

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw await errorFrom(response);
    }
    if (response.status === 204) {
      return undefined as T;
    }
    return (await response.json()) as T;
  }

  async uploadWorld(doc: unknown): Promise<string> {
    const result = await this.request<{ world_id: string }>("POST", "/worlds", doc);
    return result.world_id;
  }

  async listWorlds(): Promise<WorldSummary[]> {
    const result = await this.request<{ worlds: WorldSummary[] }>("GET", "/worlds");
    return result.worlds;
  }

  async createSession(
    worldId: string,
    backend: Record<string, unknown>,
    script?: Record<string, string[]>,
  ): Promise<string> {
    const result = await this.request<{ session_id: string }>("POST", "/sessions", {
      world_id: worldId,
      backend,
      script: script ?? null,
    });
    return result.session_id;
  }

  runTurn(sessionId: string, input: string): Promise<TurnReport> {
    return this.request<TurnReport>("POST", `/sessions/${sessionId}/turn`, { input });
  }

  getState(sessionId: string): Promise<StateView> {
    return this.request<StateView>("GET", `/sessions/${sessionId}/state`);
  }

  generateItem(sessionId: string, location: string, brief: string): Promise<ItemView> {
    return this.request<ItemView>("POST", `/sessions/${sessionId}/generate-item`, {
      location,
      brief,
    });
  }

  deleteSession(sessionId: string): Promise<void> {
    return this.request<void>("DELETE", `/sessions/${sessionId}`);
  }
}
