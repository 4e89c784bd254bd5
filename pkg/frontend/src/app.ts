/** Chat application: wires the API client, stream rendering, table
 * selection, quick replies, fix-with-AI, and the settings/knowledge forms.
 */

import {
  ApiClient,
  parseFixDeepLink,
  validateKnowledgeForm,
} from "./api.js";
import {
  collectSelectedTables,
  renderProgress,
  renderResponse,
} from "./cards.js";
import type { Attachment, OutgoingMessage, StreamEvent } from "./types.js";

interface AppElements {
  transcript: HTMLElement;
  input: HTMLTextAreaElement;
  sendButton: HTMLButtonElement;
  form: HTMLFormElement;
  fixSql: HTMLTextAreaElement;
  fixError: HTMLTextAreaElement;
  fixSend: HTMLButtonElement;
  areasInput: HTMLInputElement;
  knowledgeText: HTMLTextAreaElement;
  knowledgeAreas: HTMLInputElement;
  knowledgeSubmit: HTMLButtonElement;
  certifySql: HTMLTextAreaElement;
  certifyDescription: HTMLInputElement;
  certifySubmit: HTMLButtonElement;
  status: HTMLElement;
}

export class ChatApp {
  private sessionId: string | null = null;
  private inFlight = false;
  private pendingAttachment: Attachment | null = null;
  private areasDirty = false;

  constructor(
    private api: ApiClient,
    private elements: AppElements,
    private user: string,
  ) {}

  async start(): Promise<void> {
    const session = await this.api.createSession(this.user);
    this.sessionId = session.session_id;
    this.elements.areasInput.value = session.product_areas.join(", ");
    this.elements.status.textContent =
      `session ${session.session_id} as ${session.user}`;
    this.bind();
    const prefill = parseFixDeepLink(window.location.hash);
    if (prefill) {
      this.elements.fixSql.value = prefill.sql;
      this.elements.fixError.value = prefill.error;
    }
  }

  private bind(): void {
    this.elements.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.sendCurrent();
    });
    this.elements.fixSend.addEventListener("click", () => {
      const sql = this.elements.fixSql.value.trim();
      const error = this.elements.fixError.value.trim();
      if (!sql) {
        this.setStatus("Paste the failing SQL first.");
        return;
      }
      this.pendingAttachment = { sql, error };
      this.elements.input.value ||= "This query fails, fix it";
      void this.sendCurrent();
    });
    this.elements.areasInput.addEventListener("change", () => {
      this.areasDirty = true;
    });
    this.elements.knowledgeSubmit.addEventListener("click", () => {
      void this.submitKnowledge();
    });
    this.elements.certifySubmit.addEventListener("click", () => {
      void this.submitCertification();
    });
  }

  private setStatus(text: string): void {
    this.elements.status.textContent = text;
  }

  private appendUserTurn(text: string): void {
    const turn = document.createElement("p");
    turn.className = "user-turn";
    turn.textContent = text;
    this.elements.transcript.append(turn);
  }

  async sendCurrent(): Promise<void> {
    if (this.inFlight || !this.sessionId) return;
    const text = this.elements.input.value.trim();
    const selected = collectSelectedTables(this.elements.transcript);
    if (!text && !selected.length && !this.pendingAttachment) return;

    const message: OutgoingMessage = { text };
    if (selected.length) message.selected_tables = selected;
    if (this.pendingAttachment) {
      message.attachments = this.pendingAttachment;
      this.pendingAttachment = null;
    }
    if (this.areasDirty) {
      message.product_areas = this.elements.areasInput.value
        .split(",").map((s) => s.trim()).filter(Boolean);
      this.areasDirty = false;
    }

    this.appendUserTurn(text || `(selected: ${selected.join(", ")})`);
    this.elements.input.value = "";
    this.inFlight = true;
    this.elements.sendButton.disabled = true;  // one turn in flight per session
    const progressHost = document.createElement("div");
    progressHost.className = "progress-host";
    this.elements.transcript.append(progressHost);
    try {
      await this.api.streamMessage(this.sessionId, message, (event) => {
        this.renderEvent(event, progressHost);
      });
    } catch (error) {
      const note = document.createElement("p");
      note.className = "stream-error";
      note.textContent = `Connection lost: ${String(error)}. Retry the message.`;
      this.elements.transcript.append(note);
    } finally {
      this.inFlight = false;
      this.elements.sendButton.disabled = false;
    }
  }

  renderEvent(event: StreamEvent, progressHost: HTMLElement): void {
    if (event.type === "progress") {
      progressHost.append(renderProgress(event.data.stage, event.data.text));
      return;
    }
    progressHost.classList.add("done");
    if (event.type === "error") {
      const note = document.createElement("p");
      note.className = "stream-error";
      note.textContent = event.data.text;
      this.elements.transcript.append(note);
      return;
    }
    this.elements.transcript.append(renderResponse(event.data, {
      onQuickReply: (reply) => {
        this.elements.input.value = reply;
        void this.sendCurrent();
      },
      onCopySql: (sql) => {
        void navigator.clipboard?.writeText(sql);
      },
    }));
  }

  async submitKnowledge(): Promise<void> {
    const body = {
      text: this.elements.knowledgeText.value,
      product_areas: this.elements.knowledgeAreas.value
        .split(",").map((s) => s.trim()).filter(Boolean),
      author: this.user,
    };
    const problem = validateKnowledgeForm(body);
    if (problem) {
      this.setStatus(problem);
      return;
    }
    const result = await this.api.addKnowledge(body);
    this.setStatus(`knowledge saved (${result.id})`);
    this.elements.knowledgeText.value = "";
  }

  async submitCertification(): Promise<void> {
    const sql = this.elements.certifySql.value.trim();
    const description = this.elements.certifyDescription.value.trim();
    if (!sql || !description) {
      this.setStatus("Certification needs both SQL and a description.");
      return;
    }
    try {
      const result = await this.api.certifyExample({
        sql, description, author: this.user,
      });
      this.setStatus(`certified ${result.id} (${result.tables.join(", ")})`);
      this.elements.certifySql.value = "";
      this.elements.certifyDescription.value = "";
    } catch (error) {
      this.setStatus(String(error));
    }
  }
}

export function boot(): void {
  const byId = <T extends HTMLElement>(id: string): T => {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
  };
  const app = new ChatApp(new ApiClient(), {
    transcript: byId("transcript"),
    input: byId("message-input"),
    sendButton: byId("send-button"),
    form: byId("message-form"),
    fixSql: byId("fix-sql"),
    fixError: byId("fix-error"),
    fixSend: byId("fix-send"),
    areasInput: byId("areas-input"),
    knowledgeText: byId("knowledge-text"),
    knowledgeAreas: byId("knowledge-areas"),
    knowledgeSubmit: byId("knowledge-submit"),
    certifySql: byId("certify-sql"),
    certifyDescription: byId("certify-description"),
    certifySubmit: byId("certify-submit"),
    status: byId("status"),
  }, new URLSearchParams(window.location.search).get("user") ?? "guest");
  void app.start();
}

if (typeof document !== "undefined" && document.getElementById("transcript")) {
  boot();
}
