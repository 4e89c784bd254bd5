/** DOM renderers for every bot response kind.
 *
 * Rendering is a pure function of the response payload, so replaying a
 * recorded event log yields identical DOM.
 */

import { highlightSql } from "./highlight.js";
import type {
  AnswerPayload,
  BotResponse,
  FixPayload,
  QueryPayload,
  TablesPayload,
  ValidationInfo,
} from "./types.js";

export interface CardHandlers {
  onQuickReply?: (text: string) => void;
  onCopySql?: (sql: string) => void;
  onUseFixPrefill?: (sql: string, error: string) => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function sqlBlock(sql: string, handlers: CardHandlers): HTMLElement {
  const wrapper = el("div", "sql-block");
  const pre = el("pre", "sql");
  pre.innerHTML = highlightSql(sql);
  const copy = el("button", "copy-button", "Copy");
  copy.type = "button";
  copy.addEventListener("click", () => {
    handlers.onCopySql?.(sql);
    copy.textContent = "Copied";
  });
  wrapper.append(copy, pre);
  return wrapper;
}

function validationBadges(validation: ValidationInfo): HTMLElement {
  const row = el("div", "validation");
  const badge = el(
    "span",
    validation.is_valid ? "badge badge-ok" : "badge badge-fail",
    validation.is_valid ? "validation passed" : "validation failed",
  );
  row.append(badge);
  const issues = [
    ...validation.syntax_errors.map((m) => `syntax: ${m}`),
    ...validation.unknown_tables.map((t) => `unknown table: ${t}`),
    ...validation.unknown_columns.map((c) => `unknown column: ${c}`),
    ...validation.unknown_functions.map((f) => `unknown function: ${f}`),
  ];
  for (const issue of issues) {
    row.append(el("span", "badge badge-issue", issue));
  }
  return row;
}

function listSection(title: string, items: string[]): HTMLElement | null {
  if (!items.length) return null;
  const section = el("div", "card-section");
  section.append(el("h4", undefined, title));
  const list = el("ul");
  for (const item of items) list.append(el("li", undefined, item));
  section.append(list);
  return section;
}

export function renderQueryCard(
  payload: QueryPayload,
  handlers: CardHandlers = {},
): HTMLElement {
  const card = el("article", "card query-card");
  card.append(sqlBlock(payload.sql, handlers));
  card.append(validationBadges(payload.validation));
  if (payload.explanation) {
    const section = el("div", "card-section");
    section.append(el("h4", undefined, "Explanation"));
    section.append(el("p", undefined, payload.explanation));
    card.append(section);
  }
  const tables = listSection("Tables", payload.tables);
  if (tables) card.append(tables);
  const assumptions = listSection("Assumptions to verify", payload.assumptions);
  if (assumptions) card.append(assumptions);
  if (payload.references.length) {
    const section = el("div", "card-section references");
    section.append(el("h4", undefined, "Reference queries"));
    const list = el("ul");
    for (const ref of payload.references) {
      const item = el("li");
      const link = el("a", undefined, ref.description);
      link.href = `#example-${ref.id}`;
      item.append(link);
      list.append(item);
    }
    section.append(list);
    card.append(section);
  }
  return card;
}

export function renderTableCard(
  payload: TablesPayload,
  handlers: CardHandlers = {},
): HTMLElement {
  const card = el("article", "card table-card");
  const list = el("ul", "table-list");
  for (const row of payload.tables) {
    const item = el("li", "table-row");
    const label = el("label");
    const checkbox = el("input") as HTMLInputElement;
    checkbox.type = "checkbox";
    checkbox.dataset.table = row.table;
    checkbox.disabled = !row.selectable;
    const name = el("span", "table-name", row.table);
    label.append(checkbox, name);
    if (row.is_certified) label.append(el("span", "badge badge-ok", "certified"));
    if (row.is_deprecated) label.append(el("span", "badge badge-fail", "deprecated"));
    item.append(label);
    if (row.description) item.append(el("p", "table-desc", row.description));
    const meta = el("p", "table-meta",
      `popularity ${row.popularity}` +
      (row.commonly_joined.length
        ? ` | commonly joined: ${row.commonly_joined.join(", ")}`
        : ""));
    item.append(meta);
    list.append(item);
  }
  card.append(list);
  return card;
}

/** Checkbox contract: ticked boxes become `selected_tables` on the next message. */
export function collectSelectedTables(root: ParentNode): string[] {
  const selected: string[] = [];
  root.querySelectorAll<HTMLInputElement>("input[type=checkbox][data-table]")
    .forEach((box) => {
      if (box.checked && box.dataset.table) selected.push(box.dataset.table);
    });
  return selected;
}

export function renderFixCard(
  payload: FixPayload,
  handlers: CardHandlers = {},
): HTMLElement {
  const card = el("article", "card fix-card");
  card.append(el("h4", undefined, "Fixed query"));
  card.append(sqlBlock(payload.sql, handlers));
  card.append(validationBadges(payload.validation));
  if (payload.recommendation) {
    card.append(el("p", "recommendation", payload.recommendation));
  }
  const details = el("details");
  details.append(el("summary", undefined, "Original query"));
  const original = el("pre", "sql sql-original");
  original.innerHTML = highlightSql(payload.original_sql);
  details.append(original);
  card.append(details);
  return card;
}

export function renderAnswerCard(payload: AnswerPayload): HTMLElement {
  const card = el("article", "card answer-card");
  card.append(el("p", undefined, payload.text));
  if (payload.low_confidence) {
    card.append(el("span", "badge badge-issue", "low confidence"));
  }
  return card;
}

export function renderQuickReplies(
  replies: string[],
  handlers: CardHandlers = {},
): HTMLElement {
  const row = el("div", "quick-replies");
  for (const reply of replies) {
    const button = el("button", "quick-reply", reply);
    button.type = "button";
    button.addEventListener("click", () => handlers.onQuickReply?.(reply));
    row.append(button);
  }
  return row;
}

export function renderResponse(
  response: BotResponse,
  handlers: CardHandlers = {},
): HTMLElement {
  const container = el("div", `bot-response kind-${response.kind}`);
  container.append(el("p", "bot-text", response.text));
  switch (response.kind) {
    case "query_output":
      container.append(
        renderQueryCard(response.payload as unknown as QueryPayload, handlers),
      );
      break;
    case "table_output":
      container.append(
        renderTableCard(response.payload as unknown as TablesPayload, handlers),
      );
      break;
    case "fix_output":
      container.append(
        renderFixCard(response.payload as unknown as FixPayload, handlers),
      );
      break;
    case "answer":
      container.append(
        renderAnswerCard(response.payload as unknown as AnswerPayload),
      );
      break;
    case "clarification":
    case "error":
      container.classList.add(
        response.kind === "error" ? "is-error" : "is-clarification",
      );
      break;
  }
  if (response.quick_replies.length) {
    container.append(renderQuickReplies(response.quick_replies, handlers));
  }
  return container;
}

export function renderProgress(stage: string, text: string): HTMLElement {
  const line = el("p", "progress-line");
  line.dataset.stage = stage;
  line.textContent = text;
  return line;
}
