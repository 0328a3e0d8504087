/**
 * Result-table schema shared with the simulator.
 *
 * The simulator emits one CSV row per (study, method, c, n) cell. This module
 * is the only place that knows the column layout; everything downstream works
 * from the validated rows. Figures are drawn from these numbers verbatim, so
 * parsing is strict: a malformed table fails loudly instead of producing a
 * plausible-looking plot.
 */

import Papa from "papaparse";
import { z } from "zod";
import { sha256Hex } from "./digest.js";

export const RESULT_COLUMNS = [
  "study",
  "method",
  "d",
  "c",
  "n",
  "N",
  "coverage",
  "cp_lower",
  "cp_upper",
  "mean_width",
  "width_p2_5",
  "width_p97_5",
  "n_effective",
  "seed",
] as const;

export type ResultColumn = (typeof RESULT_COLUMNS)[number];

const proportion = z.number().min(0).max(1);

const rowSchema = z.object({
  study: z.enum(["A", "B", "C"]),
  method: z.enum(["asymptotic", "bootstrap"]),
  d: z.number().int().min(1),
  // compound-symmetry correlation; c = 1 would make the design singular
  c: z.number().gt(-1).lt(1),
  n: z.number().int().min(2),
  N: z.number().int().positive(),
  coverage: proportion,
  cp_lower: proportion,
  cp_upper: proportion,
  mean_width: z.number().nonnegative(),
  width_p2_5: z.number().nonnegative(),
  width_p97_5: z.number().nonnegative(),
  n_effective: z.number().int().nonnegative(),
  seed: z.number().int(),
});

export type ResultRow = z.infer<typeof rowSchema>;

/** Parsed table plus the digest of the exact text it came from. */
export interface ResultFrame {
  rows: ResultRow[];
  sourceDigest: string;
}

export class MissingColumnsError extends Error {
  readonly missing: readonly string[];

  constructor(missing: readonly string[]) {
    super(`results table is missing required columns: ${missing.join(", ")}`);
    this.name = "MissingColumnsError";
    this.missing = missing;
  }
}

export class SchemaError extends Error {
  /** 1-based CSV line number (header is line 1). */
  readonly line: number;

  constructor(line: number, detail: string) {
    super(`line ${line}: ${detail}`);
    this.name = "SchemaError";
    this.line = line;
  }
}

export class EmptyFrameError extends Error {
  constructor() {
    super("results table contains no data rows");
    this.name = "EmptyFrameError";
  }
}

function issueText(issue: z.ZodIssue): string {
  const where = issue.path.join(".");
  return where === "" ? issue.message : `${where}: ${issue.message}`;
}

/**
 * Parse a simulator results CSV into a validated frame.
 *
 * Unknown extra columns are ignored; missing required columns, non-numeric
 * cells, and out-of-range values are errors. The digest recorded on the frame
 * is the SHA-256 of `csvText` exactly as given, so every figure rendered from
 * the frame can be traced back to its input.
 */
export function parseResults(csvText: string): ResultFrame {
  const parsed = Papa.parse<Record<string, unknown>>(csvText, {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: "greedy",
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0]!;
    const line = first.row === undefined ? 1 : first.row + 2;
    throw new SchemaError(line, first.message);
  }

  const fields = parsed.meta.fields ?? [];
  const missing = RESULT_COLUMNS.filter((name) => !fields.includes(name));
  if (missing.length > 0) {
    throw new MissingColumnsError(missing);
  }
  if (parsed.data.length === 0) {
    throw new EmptyFrameError();
  }

  const rows: ResultRow[] = [];
  parsed.data.forEach((raw, index) => {
    const check = rowSchema.safeParse(raw);
    if (!check.success) {
      throw new SchemaError(index + 2, issueText(check.error.issues[0]!));
    }
    rows.push(check.data);
  });
  return { rows, sourceDigest: sha256Hex(csvText) };
}
