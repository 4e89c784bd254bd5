import { describe, expect, it, vi } from "vitest";

import {
  ApiClient,
  ApiError,
  parseFixDeepLink,
  validateKnowledgeForm,
} from "../src/api.js";
import type { StreamEvent } from "../src/types.js";
import recorded from "./fixtures/recorded.json";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function streamResponse(raw: string): Response {
  return new Response(raw, {
    status: 200,
    headers: { "Content-Type": "text/event-stream" },
  });
}

describe("ApiClient", () => {
  it("creates a session", async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse({ session_id: "s-0001", user: "erin", product_areas: ["platform"] }),
    );
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    const session = await client.createSession("erin");
    expect(session.session_id).toBe("s-0001");
    const [url, init] = fetchFn.mock.calls[0];
    expect(url).toBe("/v1/sessions");
    expect(JSON.parse((init as RequestInit).body as string)).toEqual({ user: "erin" });
  });

  it("streams a recorded fix-with-AI turn end to end", async () => {
    const turn = recorded.turns[2];
    const fetchFn = vi.fn(async () => streamResponse(turn.raw));
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    const events: StreamEvent[] = [];
    await client.streamMessage("s-0001", turn.request, (e) => events.push(e));

    const [, init] = fetchFn.mock.calls[0];
    const sent = JSON.parse((init as RequestInit).body as string);
    expect(sent.attachments.sql).toContain("WHERE");
    expect(sent.attachments.error).toContain("syntax error");

    const last = events[events.length - 1];
    expect(last.type).toBe("response");
    if (last.type === "response") {
      expect(last.data.kind).toBe("fix_output");
      const payload = last.data.payload as { validation: { is_valid: boolean } };
      expect(payload.validation.is_valid).toBe(true);
    }
  });

  it("selected tables ride the next message body", async () => {
    const turn = recorded.turns[1];
    const fetchFn = vi.fn(async () => streamResponse(turn.raw));
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    await client.streamMessage("s-0001", turn.request, () => {});
    const [, init] = fetchFn.mock.calls[0];
    const sent = JSON.parse((init as RequestInit).body as string);
    expect(sent.selected_tables).toEqual(["metrics.notification_ctr"]);
  });

  it("submits knowledge through the documented endpoint", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ id: "kn-0004" }));
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    const result = await client.addKnowledge({
      text: "Week starts Monday.", product_areas: ["platform"], author: "erin",
    });
    expect(result.id).toBe("kn-0004");
    expect(fetchFn.mock.calls[0][0]).toBe("/v1/knowledge");
  });

  it("raises ApiError with the server detail", async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse({ detail: "field 'user': required string" }, 400),
    );
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    await expect(client.createSession("")).rejects.toThrowError(ApiError);
  });
});

describe("knowledge form validation", () => {
  it("blocks empty text", () => {
    expect(validateKnowledgeForm({ text: "  " })).toMatch(/required/);
  });

  it("blocks missing scope", () => {
    expect(validateKnowledgeForm({ text: "note" })).toMatch(/scope/);
  });

  it("accepts a scoped record", () => {
    expect(
      validateKnowledgeForm({ text: "note", product_areas: ["growth"] }),
    ).toBeNull();
  });

  it("author counts as a scope", () => {
    expect(validateKnowledgeForm({ text: "note", author: "erin" })).toBeNull();
  });
});

describe("fix-with-AI deep link", () => {
  it("prefills sql and error from the hash", () => {
    const hash = "#fix?" + new URLSearchParams({
      sql: "SELECT 1 FROM t WHERE",
      error: "line 1: syntax error",
    }).toString();
    expect(parseFixDeepLink(hash)).toEqual({
      sql: "SELECT 1 FROM t WHERE",
      error: "line 1: syntax error",
    });
  });

  it("rejects links without sql", () => {
    expect(parseFixDeepLink("#fix?error=x")).toBeNull();
    expect(parseFixDeepLink("#other")).toBeNull();
  });
});
