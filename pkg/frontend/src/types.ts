/** Mirrors of the chat API's wire types. */

export type ResponseKind =
  | "query_output"
  | "table_output"
  | "fix_output"
  | "answer"
  | "clarification"
  | "error";

export interface ValidationInfo {
  is_valid: boolean;
  syntax_errors: string[];
  unknown_tables: string[];
  unknown_columns: string[];
  unknown_functions: string[];
}

export interface QueryPayload {
  sql: string;
  explanation: string;
  assumptions: string[];
  tables: string[];
  columns: string[];
  validation: ValidationInfo;
  references: { id: string; description: string; sql: string }[];
  fix_iterations: number;
  ranked_tables?: { table: string; score: number | null; explanation: string }[];
}

export interface TableRow {
  table: string;
  description: string;
  popularity: number;
  commonly_joined: string[];
  is_certified: boolean;
  is_deprecated: boolean;
  score: number | null;
  explanation?: string;
  selectable: boolean;
}

export interface TablesPayload {
  tables: TableRow[];
}

export interface FixPayload {
  original_sql: string;
  sql: string;
  explanation: string;
  validation: ValidationInfo;
  recommendation: string;
  fix_iterations: number;
}

export interface AnswerPayload {
  text: string;
  difficulty: string;
  low_confidence: boolean;
  tool_calls: string[];
}

export interface BotResponse {
  kind: ResponseKind;
  text: string;
  payload: Record<string, unknown>;
  quick_replies: string[];
}

export interface ProgressData {
  seq: number;
  stage: string;
  text: string;
}

export type StreamEvent =
  | { type: "progress"; data: ProgressData }
  | { type: "response"; data: BotResponse & { seq: number } }
  | { type: "error"; data: { seq: number; text: string } };

export interface Attachment {
  sql: string;
  error: string;
}

export interface OutgoingMessage {
  text: string;
  selected_tables?: string[];
  attachments?: Attachment;
  product_areas?: string[];
}

export interface SessionInfo {
  session_id: string;
  user: string;
  product_areas: string[];
}
