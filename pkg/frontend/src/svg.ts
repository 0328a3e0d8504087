/** Minimal string-based SVG assembly; no DOM dependency. */

const ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
};

export function esc(textContent: string): string {
  return textContent.replace(/[&<>"]/g, (ch) => ESCAPES[ch]!);
}

export function unesc(escaped: string): string {
  return escaped
    .replace(/&quot;/g, '"')
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&amp;/g, "&");
}

export type Attrs = Record<string, string | number | undefined>;

/**
 * Build one element. Attribute values are escaped; children are assumed to be
 * already-serialized SVG (or escaped text via `esc`).
 */
export function el(name: string, attrs: Attrs = {}, children: string | string[] = []): string {
  const parts: string[] = [`<${name}`];
  for (const [key, value] of Object.entries(attrs)) {
    if (value === undefined) continue;
    parts.push(` ${key}="${esc(String(value))}"`);
  }
  const body = Array.isArray(children) ? children.join("") : children;
  if (body === "") {
    parts.push("/>");
  } else {
    parts.push(">", body, `</${name}>`);
  }
  return parts.join("");
}

/** Round drawing coordinates to 1/100 px so output stays readable. */
export function px(value: number): number {
  return Math.round(value * 100) / 100;
}
