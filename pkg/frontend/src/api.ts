/** Chat API client. Every user action goes through these documented
 * endpoints and nothing else. */

import { SseParser } from "./sse.js";
import type { OutgoingMessage, SessionInfo, StreamEvent } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function expectOk(response: Response): Promise<Response> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      detail = body.detail ?? body.error ?? detail;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return response;
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async post(path: string, body: unknown): Promise<Response> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return expectOk(response);
  }

  async createSession(user: string, productAreas?: string[]): Promise<SessionInfo> {
    const body: Record<string, unknown> = { user };
    if (productAreas !== undefined) body.product_areas = productAreas;
    const response = await this.post("/v1/sessions", body);
    return (await response.json()) as SessionInfo;
  }

  /** POST a message and invoke onEvent for every SSE frame, in order. */
  async streamMessage(
    sessionId: string,
    message: OutgoingMessage,
    onEvent: (event: StreamEvent) => void,
  ): Promise<void> {
    const response = await this.post(
      `/v1/sessions/${sessionId}/messages`, message,
    );
    const parser = new SseParser();
    const body = response.body;
    if (body && typeof body.getReader === "function") {
      const reader = body.getReader();
      const decoder = new TextDecoder();
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        for (const event of parser.push(decoder.decode(value, { stream: true }))) {
          onEvent(event);
        }
      }
      for (const event of parser.push("\n\n")) onEvent(event);
    } else {
      // test environments deliver the whole body at once
      for (const event of parser.push((await response.text()) + "\n\n")) {
        onEvent(event);
      }
    }
  }

  async addKnowledge(body: {
    text: string;
    product_areas?: string[];
    tables?: string[];
    columns?: string[];
    author?: string;
  }): Promise<{ id: string }> {
    const response = await this.post("/v1/knowledge", body);
    return (await response.json()) as { id: string };
  }

  async certifyExample(body: {
    sql: string;
    description: string;
    author: string;
  }): Promise<{ id: string; tables: string[]; is_certified: boolean }> {
    const response = await this.post("/v1/examples/certify", body);
    return (await response.json()) as {
      id: string; tables: string[]; is_certified: boolean;
    };
  }

  async searchTables(q: string, k = 10): Promise<unknown> {
    const response = await expectOk(
      await this.fetchFn(
        `${this.baseUrl}/v1/tables/search?q=${encodeURIComponent(q)}&k=${k}`,
      ),
    );
    return response.json();
  }
}

/** Client-side validation for the knowledge form: text is required and at
 * least one scope dimension must be set. */
export function validateKnowledgeForm(body: {
  text: string;
  product_areas?: string[];
  tables?: string[];
  author?: string;
}): string | null {
  if (!body.text.trim()) return "Knowledge text is required.";
  const scoped =
    (body.product_areas?.length ?? 0) > 0 ||
    (body.tables?.length ?? 0) > 0 ||
    Boolean(body.author);
  if (!scoped) return "Set at least one scope: product area, table, or author.";
  return null;
}

/** Parse a fix-with-AI deep link: ``#fix?sql=...&error=...``. */
export function parseFixDeepLink(hash: string): { sql: string; error: string } | null {
  if (!hash.startsWith("#fix?")) return null;
  const params = new URLSearchParams(hash.slice(5));
  const sql = params.get("sql") ?? "";
  if (!sql) return null;
  return { sql, error: params.get("error") ?? "" };
}
