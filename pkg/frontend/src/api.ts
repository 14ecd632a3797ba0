// Typed client for the configuration service. All constraint knowledge
// lives server-side; this module only moves JSON back and forth.

export type Value = string | number;

export interface AttributeView {
  id: string;
  name: string;
  type: string;
  kind: "discrete" | "integer";
  shown: boolean;
  selectedValue: Value | null;
  inferredValue: Value | null;
  validValues: Value[] | null;
  invalidValues: Value[] | null;
  range: { lo: number; hi: number } | null;
}

export interface PartView {
  id: string;
  name: string;
  type: string;
  shown: boolean;
  forced: boolean;
  addable: boolean;
  removable: boolean;
}

export interface AssumptionView {
  id: number;
  action: "include" | "exclude" | "fix" | "excludeValue";
  target: string;
  value?: Value;
}

export interface MusView {
  assumptionIds: number[];
  constraintIds: string[];
  messages: string[];
}

export interface SessionView {
  satisfiable: boolean;
  attributes: AttributeView[];
  parts: PartView[];
  assumptions: AssumptionView[];
  mus: MusView | null;
}

export interface CreateSessionResponse {
  sessionId: string;
  warnings: string[];
  view: SessionView;
}

export interface BrowseResponse {
  exhausted: boolean;
  model: { included: string[]; values: Record<string, Value> } | null;
  view: SessionView;
}

export type AssumptionAction =
  | { action: "fix"; target: string; value: Value }
  | { action: "unfix"; target: string }
  | { action: "include"; target: string }
  | { action: "exclude"; target: string };

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let code = "HttpError";
    let message = `${response.status} ${response.statusText}`;
    try {
      const body = await response.json();
      if (typeof body.code === "string") code = body.code;
      if (typeof body.message === "string") message = body.message;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ServiceError(response.status, code, message);
  }
  return response.json() as Promise<T>;
}

export class ServiceClient {
  constructor(private readonly baseUrl: string = "") {}

  private post(path: string, body?: unknown): Promise<Response> {
    return fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
  }

  async createSession(
    body: { model?: string; userInput?: string } = {},
  ): Promise<CreateSessionResponse> {
    return unwrap(await this.post("/sessions", body));
  }

  async getView(sessionId: string): Promise<SessionView> {
    return unwrap(await fetch(`${this.baseUrl}/sessions/${sessionId}/view`));
  }

  async postAssumption(
    sessionId: string,
    action: AssumptionAction,
  ): Promise<SessionView> {
    return unwrap(
      await this.post(`/sessions/${sessionId}/assumptions`, action),
    );
  }

  async removeAssumption(
    sessionId: string,
    assumptionId: number,
  ): Promise<SessionView> {
    return unwrap(
      await fetch(
        `${this.baseUrl}/sessions/${sessionId}/assumptions/${assumptionId}`,
        { method: "DELETE" },
      ),
    );
  }

  async browse(
    sessionId: string,
    direction: "next" | "reset",
  ): Promise<BrowseResponse> {
    return unwrap(
      await this.post(`/sessions/${sessionId}/browse`, { direction }),
    );
  }

  /** Returns the solution document verbatim (text/plain body). */
  async fetchSolution(sessionId: string): Promise<string> {
    const response = await fetch(
      `${this.baseUrl}/sessions/${sessionId}/solution`,
    );
    if (!response.ok) {
      throw new ServiceError(response.status, "Unsatisfiable", "no solution");
    }
    return response.text();
  }
}
