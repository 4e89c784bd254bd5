import { describe, expect, it } from "vitest";

import { SseParser, parseStream } from "../src/sse.js";
import recorded from "./fixtures/recorded.json";

describe("SSE parser", () => {
  it("parses a simple frame", () => {
    const events = new SseParser().push(
      'event: progress\ndata: {"seq": 1, "stage": "retrieve", "text": "hi"}\n\n',
    );
    expect(events).toEqual([
      { type: "progress", data: { seq: 1, stage: "retrieve", text: "hi" } },
    ]);
  });

  it("handles frames split across arbitrary chunk boundaries", () => {
    const raw = recorded.turns[0].raw;
    const whole = parseStream(raw);
    for (const size of [1, 7, 64]) {
      const parser = new SseParser();
      const events = [];
      for (let i = 0; i < raw.length; i += size) {
        events.push(...parser.push(raw.slice(i, i + size)));
      }
      events.push(...parser.push("\n\n"));
      expect(events).toEqual(whole);
    }
  });

  it("recorded streams end with exactly one response", () => {
    for (const turn of recorded.turns) {
      const events = parseStream(turn.raw);
      const kinds = events.map((e) => e.type);
      expect(kinds.filter((k) => k === "response")).toHaveLength(1);
      expect(kinds[kinds.length - 1]).toBe("response");
      const sequence = events.map((e) => (e.data as { seq: number }).seq);
      const sorted = [...sequence].sort((a, b) => a - b);
      expect(sequence).toEqual(sorted);
    }
  });

  it("ignores unknown event types", () => {
    const events = new SseParser().push('event: mystery\ndata: {"x": 1}\n\n');
    expect(events).toEqual([]);
  });
});
