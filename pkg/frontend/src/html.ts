/** String-based rendering helpers. Views build plain HTML/SVG strings so
 * they stay pure functions of the API payloads and snapshot-testable
 * without a DOM. */

const REPLACEMENTS: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function esc(value: unknown): string {
  return String(value ?? "").replace(/[&<>"']/g, (ch) => REPLACEMENTS[ch]);
}

/** Template literal tag escaping every interpolation; arrays join unescaped
 * (use for pre-rendered child fragments). */
export function html(strings: TemplateStringsArray, ...values: unknown[]): string {
  let out = "";
  strings.forEach((chunk, i) => {
    out += chunk;
    if (i < values.length) {
      const value = values[i];
      out += Array.isArray(value) ? value.join("") : esc(value);
    }
  });
  return out;
}

/** Marks a fragment as already rendered so `html` will not re-escape it. */
export function raw(fragment: string): string[] {
  return [fragment];
}
