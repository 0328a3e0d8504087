import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

export const FIXTURE_DIR = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixturePath(name: string): string {
  return join(FIXTURE_DIR, name);
}

/** Desk-scale Study A table produced by the simulator CLI (see README). */
export function fixtureText(name = "study_a_desk.csv"): string {
  try {
    return readFileSync(fixturePath(name), "utf8");
  } catch {
    throw new Error(`fixture ${name} is missing; regenerate it with the simulator CLI`);
  }
}

/** Pull every <circle> carrying the given class out of an SVG string. */
export function svgPoints(svg: string, cls: string): Record<string, string>[] {
  const found: Record<string, string>[] = [];
  for (const m of svg.matchAll(/<circle([^>]*)\/>/g)) {
    const attrs: Record<string, string> = {};
    for (const a of m[1]!.matchAll(/([a-zA-Z0-9-]+)="([^"]*)"/g)) {
      attrs[a[1]!] = a[2]!;
    }
    if ((attrs["class"] ?? "").split(" ").includes(cls)) found.push(attrs);
  }
  return found;
}

export function countMatches(svg: string, pattern: RegExp): number {
  return [...svg.matchAll(pattern)].length;
}
