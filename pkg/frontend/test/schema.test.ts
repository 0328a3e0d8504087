import { describe, expect, it } from "vitest";
import {
  EmptyFrameError,
  MissingColumnsError,
  RESULT_COLUMNS,
  SchemaError,
  parseResults,
  type ResultColumn,
} from "../src/schema.js";
import { sha256Hex } from "../src/digest.js";
import { fixtureText } from "./util.js";

const HEADER = RESULT_COLUMNS.join(",");

const BASE: Record<ResultColumn, string | number> = {
  study: "A",
  method: "asymptotic",
  d: 3,
  c: 0.3,
  n: 50,
  N: 200,
  coverage: 0.95,
  cp_lower: 0.9119,
  cp_upper: 0.9762,
  mean_width: 0.11,
  width_p2_5: 0.05,
  width_p97_5: 0.2,
  n_effective: 200,
  seed: 4,
};

function row(overrides: Partial<Record<ResultColumn, string | number>> = {}): string {
  const merged = { ...BASE, ...overrides };
  return RESULT_COLUMNS.map((name) => String(merged[name])).join(",");
}

function csv(...rows: string[]): string {
  return [HEADER, ...rows].join("\n") + "\n";
}

describe("parseResults on simulator output", () => {
  const text = fixtureText();

  it("reads the desk-scale table", () => {
    const frame = parseResults(text);
    expect(frame.rows).toHaveLength(24);
    expect(new Set(frame.rows.map((r) => r.study))).toEqual(new Set(["A"]));
    expect(new Set(frame.rows.map((r) => r.method))).toEqual(
      new Set(["asymptotic", "bootstrap"]),
    );
    expect(new Set(frame.rows.map((r) => r.n))).toEqual(new Set([10, 50, 500]));
    expect(new Set(frame.rows.map((r) => r.c))).toEqual(new Set([0, 0.1, 0.3, 0.9]));
  });

  it("records the digest of the exact input text", () => {
    const frame = parseResults(text);
    expect(frame.sourceDigest).toBe(sha256Hex(text));
    expect(frame.sourceDigest).toMatch(/^[0-9a-f]{64}$/);
  });

  it("preserves cell values bit for bit", () => {
    const frame = parseResults(text);
    const firstLine = text.split("\n")[1]!.split(",");
    const coverageIdx = RESULT_COLUMNS.indexOf("coverage");
    const cpLowerIdx = RESULT_COLUMNS.indexOf("cp_lower");
    expect(Object.is(frame.rows[0]!.coverage, Number(firstLine[coverageIdx]))).toBe(true);
    expect(Object.is(frame.rows[0]!.cp_lower, Number(firstLine[cpLowerIdx]))).toBe(true);
  });
});

describe("parseResults validation", () => {
  it("accepts a minimal hand-written table", () => {
    const frame = parseResults(csv(row(), row({ method: "bootstrap", coverage: 0.1 })));
    expect(frame.rows).toHaveLength(2);
    expect(frame.rows[1]!.method).toBe("bootstrap");
  });

  it("ignores extra columns", () => {
    const text = HEADER + ",note\n" + row() + ",hello\n";
    expect(parseResults(text).rows).toHaveLength(1);
  });

  it("skips blank lines", () => {
    const text = [HEADER, row(), "", row({ c: 0.1 }), ""].join("\n");
    expect(parseResults(text).rows).toHaveLength(2);
  });

  it("reports all missing columns at once", () => {
    const kept = RESULT_COLUMNS.filter((c) => c !== "coverage" && c !== "seed");
    const text =
      kept.join(",") + "\n" + kept.map((c) => String(BASE[c])).join(",") + "\n";
    try {
      parseResults(text);
      expect.unreachable("should have thrown");
    } catch (exc) {
      expect(exc).toBeInstanceOf(MissingColumnsError);
      expect((exc as MissingColumnsError).missing).toEqual(["coverage", "seed"]);
    }
  });

  it("rejects a header-only table", () => {
    expect(() => parseResults(HEADER + "\n")).toThrow(EmptyFrameError);
  });

  it("rejects an unknown study label with the offending line", () => {
    try {
      parseResults(csv(row(), row({ study: "X" })));
      expect.unreachable("should have thrown");
    } catch (exc) {
      expect(exc).toBeInstanceOf(SchemaError);
      expect((exc as SchemaError).line).toBe(3);
      expect((exc as SchemaError).message).toContain("study");
    }
  });

  it("rejects an unknown method", () => {
    expect(() => parseResults(csv(row({ method: "jackknife" })))).toThrow(SchemaError);
  });

  it("rejects non-numeric cells", () => {
    expect(() => parseResults(csv(row({ coverage: "high" })))).toThrow(SchemaError);
    expect(() => parseResults(csv(row({ coverage: "NaN" })))).toThrow(SchemaError);
  });

  it("rejects out-of-range proportions", () => {
    expect(() => parseResults(csv(row({ coverage: 1.5 })))).toThrow(SchemaError);
    expect(() => parseResults(csv(row({ cp_lower: -0.1 })))).toThrow(SchemaError);
  });

  it("rejects fractional counts", () => {
    expect(() => parseResults(csv(row({ n: 10.5 })))).toThrow(SchemaError);
    expect(() => parseResults(csv(row({ N: 0 })))).toThrow(SchemaError);
  });

  it("rejects c at the singular boundary", () => {
    expect(() => parseResults(csv(row({ c: 1 })))).toThrow(SchemaError);
    expect(parseResults(csv(row({ c: 0.99 }))).rows[0]!.c).toBe(0.99);
  });

  it("rejects negative widths", () => {
    expect(() => parseResults(csv(row({ mean_width: -0.2 })))).toThrow(SchemaError);
  });
});
