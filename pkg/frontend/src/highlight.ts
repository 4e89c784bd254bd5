/** Tiny SQL syntax highlighter producing sanitized HTML. */

const KEYWORDS = new Set([
  "SELECT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "ORDER", "LIMIT",
  "WITH", "AS", "JOIN", "INNER", "LEFT", "RIGHT", "FULL", "OUTER", "CROSS",
  "ON", "UNION", "ALL", "DISTINCT", "CASE", "WHEN", "THEN", "ELSE", "END",
  "CAST", "AND", "OR", "NOT", "IN", "IS", "NULL", "LIKE", "BETWEEN",
  "TRUE", "FALSE", "ASC", "DESC", "INTERVAL", "DATE", "TIMESTAMP",
]);

const TOKEN_RE =
  /(--[^\n]*)|(\/\*[\s\S]*?\*\/)|('(?:[^']|'')*')|(\b\d+(?:\.\d+)?\b)|([A-Za-z_][A-Za-z0-9_$]*)|(\n)|(.)/g;

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function highlightSql(sql: string): string {
  let html = "";
  for (const match of sql.matchAll(TOKEN_RE)) {
    const [, lineComment, blockComment, str, num, word, newline, other] = match;
    if (lineComment !== undefined || blockComment !== undefined) {
      html += `<span class="sql-comment">${escapeHtml(match[0])}</span>`;
    } else if (str !== undefined) {
      html += `<span class="sql-string">${escapeHtml(str)}</span>`;
    } else if (num !== undefined) {
      html += `<span class="sql-number">${num}</span>`;
    } else if (word !== undefined) {
      html += KEYWORDS.has(word.toUpperCase())
        ? `<span class="sql-keyword">${escapeHtml(word)}</span>`
        : escapeHtml(word);
    } else if (newline !== undefined) {
      html += "\n";
    } else if (other !== undefined) {
      html += escapeHtml(other);
    }
  }
  return html;
}
