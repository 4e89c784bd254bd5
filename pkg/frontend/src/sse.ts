/** Incremental server-sent-events parser for the message stream. */

import type { StreamEvent } from "./types.js";

export class SseParser {
  private buffer = "";

  /** Feed a chunk; returns every complete event it closed. */
  push(chunk: string): StreamEvent[] {
    this.buffer += chunk;
    const events: StreamEvent[] = [];
    let boundary = this.buffer.indexOf("\n\n");
    while (boundary >= 0) {
      const frame = this.buffer.slice(0, boundary);
      this.buffer = this.buffer.slice(boundary + 2);
      const parsed = parseFrame(frame);
      if (parsed) events.push(parsed);
      boundary = this.buffer.indexOf("\n\n");
    }
    return events;
  }
}

function parseFrame(frame: string): StreamEvent | null {
  let eventType = "";
  const dataLines: string[] = [];
  for (const line of frame.split("\n")) {
    if (line.startsWith("event: ")) eventType = line.slice(7).trim();
    else if (line.startsWith("data: ")) dataLines.push(line.slice(6));
    else if (line.startsWith("data:")) dataLines.push(line.slice(5));
  }
  if (!eventType || dataLines.length === 0) return null;
  const data = JSON.parse(dataLines.join("\n"));
  if (eventType === "progress" || eventType === "response" || eventType === "error") {
    return { type: eventType, data } as StreamEvent;
  }
  return null;
}

/** Parse a fully buffered stream body (used by replay tooling). */
export function parseStream(raw: string): StreamEvent[] {
  return new SseParser().push(raw.endsWith("\n\n") ? raw : raw + "\n\n");
}
