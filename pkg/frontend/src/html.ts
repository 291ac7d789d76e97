/** String templating helpers for the render functions. Rendering is pure
 * string assembly so the same code runs in tests (snapshots) and the
 * browser (innerHTML), with identical output. */

const REPLACEMENTS: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function esc(value: string | number | null | undefined): string {
  if (value === null || value === undefined) return "";
  return String(value).replace(/[&<>"']/g, (ch) => REPLACEMENTS[ch] ?? ch);
}

/** Deterministic number formatting: up to two decimals, no trailing zeros. */
export function fmt(value: number): string {
  return String(Number(value.toFixed(2)));
}
