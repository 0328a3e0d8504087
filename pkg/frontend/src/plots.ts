/**
 * Figure builders for simulator result tables.
 *
 * Both plots draw the numbers exactly as they appear in the parsed frame.
 * Nothing is re-estimated, smoothed, or aggregated here; every marker carries
 * the source values in data attributes so a rendered figure can be checked
 * against its input row by row, and the frame's input digest is embedded in
 * the SVG metadata.
 */

import { area as d3area, line as d3line } from "d3-shape";
import { scaleLinear, scaleLog } from "d3-scale";
import type { ResultFrame, ResultRow } from "./schema.js";
import { el, esc, px, unesc, type Attrs } from "./svg.js";
import { VERSION } from "./version.js";

export class EmptySelectionError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "EmptySelectionError";
  }
}

export type PlotName = "coverage-width" | "cov-vs-c";

export interface PlotMeta {
  tool: "plotfig";
  version: string;
  plot: PlotName;
  studies: string[];
  sourceDigest: string;
  rows: number;
  nRange: [number, number];
}

export interface RenderedPlot {
  /** Deterministic basename without extension, e.g. "A_coverage-width_n10-500". */
  stem: string;
  svg: string;
  meta: PlotMeta;
}

export const METHOD_COLORS: Record<string, string> = {
  asymptotic: "#2166ac",
  bootstrap: "#b2182b",
};
const FALLBACK_COLOR = "#555555";
const FONT = "Helvetica, Arial, sans-serif";
const DASHES = ["", "6 3", "2 2", "9 3 2 3", "1 3"];

function methodColor(method: string): string {
  return METHOD_COLORS[method] ?? FALLBACK_COLOR;
}

function uniqueSorted(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

/** At most `target` ticks, always taken from the values actually present. */
function pickTicks(sorted: number[], target = 5): number[] {
  if (sorted.length <= target + 1) return sorted;
  const picked: number[] = [];
  for (let i = 0; i < target; i += 1) {
    const value = sorted[Math.round((i * (sorted.length - 1)) / (target - 1))]!;
    if (picked[picked.length - 1] !== value) picked.push(value);
  }
  return picked;
}

function logScale(values: number[], range: [number, number]) {
  let [lo, hi] = [Math.min(...values), Math.max(...values)];
  if (lo === hi) {
    // a single n still needs a usable axis
    lo /= 2;
    hi *= 2;
  }
  return scaleLog().domain([lo, hi]).range(range);
}

interface Series {
  method: string;
  points: ResultRow[];
}

function seriesByMethod(rows: ResultRow[]): Series[] {
  const methods = [...new Set(rows.map((r) => r.method))].sort();
  return methods.map((method) => ({
    method,
    points: rows
      .filter((r) => r.method === method)
      .slice()
      .sort((a, b) => a.n - b.n),
  }));
}

interface MetricSpec {
  axisLabel: string;
  pointClass: string;
  value: (r: ResultRow) => number;
  lo: (r: ResultRow) => number;
  hi: (r: ResultRow) => number;
  pointData: (r: ResultRow) => Attrs;
}

const COVERAGE_METRIC: MetricSpec = {
  axisLabel: "coverage",
  pointClass: "pf-point pf-coverage",
  value: (r) => r.coverage,
  lo: (r) => r.cp_lower,
  hi: (r) => r.cp_upper,
  pointData: (r) => ({
    "data-study": r.study,
    "data-method": r.method,
    "data-c": r.c,
    "data-n": r.n,
    "data-coverage": r.coverage,
    "data-cp-lower": r.cp_lower,
    "data-cp-upper": r.cp_upper,
  }),
};

const WIDTH_METRIC: MetricSpec = {
  axisLabel: "mean CI width",
  pointClass: "pf-point pf-width",
  value: (r) => r.mean_width,
  lo: (r) => r.width_p2_5,
  hi: (r) => r.width_p97_5,
  pointData: (r) => ({
    "data-study": r.study,
    "data-method": r.method,
    "data-c": r.c,
    "data-n": r.n,
    "data-mean-width": r.mean_width,
    "data-width-p2-5": r.width_p2_5,
    "data-width-p97-5": r.width_p97_5,
  }),
};

type Scale = (value: number) => number;

function renderSeries(
  series: Series,
  xs: Scale,
  ys: Scale,
  spec: MetricSpec,
  dash = "",
): string {
  const color = methodColor(series.method);
  const parts: string[] = [];
  if (series.points.length >= 2) {
    const band = d3area<ResultRow>()
      .x((r) => px(xs(r.n)))
      .y0((r) => px(ys(spec.lo(r))))
      .y1((r) => px(ys(spec.hi(r))));
    parts.push(
      el("path", {
        class: "pf-band",
        d: band(series.points) ?? "",
        fill: color,
        "fill-opacity": 0.16,
        stroke: "none",
      }),
    );
    const lineGen = d3line<ResultRow>()
      .x((r) => px(xs(r.n)))
      .y((r) => px(ys(spec.value(r))));
    parts.push(
      el("path", {
        class: "pf-series",
        d: lineGen(series.points) ?? "",
        fill: "none",
        stroke: color,
        "stroke-width": 1.6,
        "stroke-dasharray": dash === "" ? undefined : dash,
      }),
    );
  } else if (series.points.length === 1) {
    // one support point: draw the interval as a vertical bar
    const r = series.points[0]!;
    parts.push(
      el("line", {
        class: "pf-band",
        x1: px(xs(r.n)),
        x2: px(xs(r.n)),
        y1: px(ys(spec.lo(r))),
        y2: px(ys(spec.hi(r))),
        stroke: color,
        "stroke-opacity": 0.45,
        "stroke-width": 2,
      }),
    );
  }
  for (const r of series.points) {
    parts.push(
      el("circle", {
        class: spec.pointClass,
        cx: px(xs(r.n)),
        cy: px(ys(spec.value(r))),
        r: 2.6,
        fill: color,
        ...spec.pointData(r),
      }),
    );
  }
  return parts.join("");
}

function xAxisTicks(xs: Scale, ticks: number[], height: number): string {
  const parts: string[] = [];
  for (const t of ticks) {
    const x = px(xs(t));
    parts.push(
      el("line", { x1: x, x2: x, y1: height, y2: height + 4, stroke: "#333" }),
      el(
        "text",
        { x, y: height + 15, "text-anchor": "middle", "font-size": 9.5, fill: "#333" },
        esc(String(t)),
      ),
    );
  }
  return parts.join("");
}

function yAxisTicks(ys: Scale, ticks: number[], width: number, labels = true): string {
  const parts: string[] = [];
  for (const t of ticks) {
    const y = px(ys(t));
    parts.push(
      el("line", { x1: 0, x2: width, y1: y, y2: y, stroke: "#e4e4e4" }),
      el("line", { x1: -4, x2: 0, y1: y, y2: y, stroke: "#333" }),
    );
    if (labels) {
      parts.push(
        el(
          "text",
          {
            x: -7,
            y: y + 3,
            "text-anchor": "end",
            "font-size": 9.5,
            fill: "#333",
          },
          esc(String(t)),
        ),
      );
    }
  }
  return parts.join("");
}

function legendEntries(
  entries: { label: string; color: string; dash?: string }[],
  x: number,
  y: number,
): string {
  const parts: string[] = [];
  entries.forEach((entry, i) => {
    const cy = y + i * 15;
    parts.push(
      el("line", {
        x1: x,
        x2: x + 20,
        y1: cy,
        y2: cy,
        stroke: entry.color,
        "stroke-width": 2,
        "stroke-dasharray": entry.dash === "" || entry.dash === undefined ? undefined : entry.dash,
      }),
      el(
        "text",
        { x: x + 25, y: cy + 3.5, "font-size": 10, fill: "#333" },
        esc(entry.label),
      ),
    );
  });
  return parts.join("");
}

function svgRoot(width: number, height: number, meta: PlotMeta, body: string[]): string {
  return el(
    "svg",
    {
      xmlns: "http://www.w3.org/2000/svg",
      width,
      height,
      viewBox: `0 0 ${width} ${height}`,
      "font-family": FONT,
    },
    [
      el("metadata", { id: "plotfig-meta" }, esc(JSON.stringify(meta))),
      el("rect", { x: 0, y: 0, width, height, fill: "#ffffff" }),
      ...body,
    ],
  );
}

/** Read back the metadata block embedded by the renderers. */
export function extractMeta(svg: string): PlotMeta {
  const match = svg.match(/<metadata id="plotfig-meta">([\s\S]*?)<\/metadata>/);
  if (!match) throw new Error("SVG has no plotfig metadata element");
  return JSON.parse(unesc(match[1]!)) as PlotMeta;
}

function rangeStem(studies: string[], plot: PlotName, nMin: number, nMax: number): string {
  return `${studies.join("")}_${plot}_n${nMin}-${nMax}`;
}

/**
 * Coverage and CI-width panel grid for one study.
 *
 * Columns are the correlation levels c present in the table; the top row
 * shows empirical coverage with its confidence band, the bottom row mean CI
 * width with the 2.5/97.5 percentile band. One series per method, n on a log
 * axis.
 */
export function plotCoverageWidth(frame: ResultFrame, study: string): RenderedPlot {
  const rows = frame.rows.filter((r) => r.study === study);
  if (rows.length === 0) {
    const present = [...new Set(frame.rows.map((r) => r.study))].sort().join(", ");
    throw new EmptySelectionError(
      `no rows for study ${study}; studies present: ${present === "" ? "(none)" : present}`,
    );
  }

  const cValues = uniqueSorted(rows.map((r) => r.c));
  const ns = uniqueSorted(rows.map((r) => r.n));
  const nMin = ns[0]!;
  const nMax = ns[ns.length - 1]!;
  const methods = [...new Set(rows.map((r) => r.method))].sort();

  const PANEL_W = 220;
  const PANEL_H = 160;
  const GAP_X = 18;
  const GAP_Y = 42;
  const LEFT = 64;
  const TOP = 50;
  const RIGHT = 14;
  const BOTTOM = 42;
  const width = LEFT + cValues.length * PANEL_W + (cValues.length - 1) * GAP_X + RIGHT;
  const height = TOP + 2 * PANEL_H + GAP_Y + BOTTOM;

  const xs = logScale(ns, [12, PANEL_W - 12]);
  const xTicks = pickTicks(ns);
  const ysCov = scaleLinear().domain([0, 1]).range([PANEL_H - 6, 6]);
  const covTicks = [0, 0.25, 0.5, 0.75, 1];

  let widthMax = 0;
  for (const r of rows) {
    widthMax = Math.max(widthMax, r.width_p97_5, r.mean_width);
  }
  if (widthMax === 0) widthMax = 1;
  const ysWidth = scaleLinear()
    .domain([0, widthMax * 1.05])
    .nice(4)
    .range([PANEL_H - 6, 6]);
  const widthTicks = ysWidth.ticks(4);

  const meta: PlotMeta = {
    tool: "plotfig",
    version: VERSION,
    plot: "coverage-width",
    studies: [study],
    sourceDigest: frame.sourceDigest,
    rows: rows.length,
    nRange: [nMin, nMax],
  };

  const body: string[] = [
    el(
      "text",
      { x: LEFT, y: 22, "font-size": 13, "font-weight": "bold", fill: "#111" },
      esc(`Study ${study}: CI coverage and width by method`),
    ),
    legendEntries(
      methods.map((m) => ({ label: m, color: methodColor(m) })),
      width - RIGHT - 110,
      16,
    ),
  ];

  const metrics: [MetricSpec, (v: number) => number, number[]][] = [
    [COVERAGE_METRIC, ysCov, covTicks],
    [WIDTH_METRIC, ysWidth, widthTicks],
  ];

  cValues.forEach((c, col) => {
    const colRows = rows.filter((r) => r.c === c);
    const ox = LEFT + col * (PANEL_W + GAP_X);
    metrics.forEach(([spec, ys, yTicks], metricRow) => {
      const oy = TOP + metricRow * (PANEL_H + GAP_Y);
      const inner: string[] = [
        yAxisTicks((v) => ys(v), yTicks, PANEL_W, col === 0),
        el("rect", {
          x: 0,
          y: 0,
          width: PANEL_W,
          height: PANEL_H,
          fill: "none",
          stroke: "#bbbbbb",
        }),
      ];
      if (metricRow === 0) {
        inner.push(
          el(
            "text",
            {
              x: PANEL_W / 2,
              y: -9,
              "text-anchor": "middle",
              "font-size": 11,
              fill: "#333",
            },
            esc(`c = ${c}`),
          ),
        );
      }
      inner.push(xAxisTicks((v) => xs(v), xTicks, PANEL_H));
      if (metricRow === 1) {
        inner.push(
          el(
            "text",
            {
              x: PANEL_W / 2,
              y: PANEL_H + 30,
              "text-anchor": "middle",
              "font-size": 10.5,
              fill: "#333",
            },
            esc("n (log scale)"),
          ),
        );
      }
      if (col === 0) {
        inner.push(
          el(
            "text",
            {
              x: -46,
              y: PANEL_H / 2,
              "text-anchor": "middle",
              "font-size": 10.5,
              fill: "#333",
              transform: `rotate(-90 -46 ${PANEL_H / 2})`,
            },
            esc(spec.axisLabel),
          ),
        );
      }
      for (const series of seriesByMethod(colRows)) {
        inner.push(renderSeries(series, (v) => xs(v), (v) => ys(v), spec));
      }
      body.push(el("g", { transform: `translate(${ox},${oy})` }, inner));
    });
  });

  return {
    stem: rangeStem([study], "coverage-width", nMin, nMax),
    svg: svgRoot(width, height, meta, body),
    meta,
  };
}

/**
 * Coverage against the correlation level c, one line per (study, method, n).
 *
 * `nValues` restricts which sample sizes are drawn; omit it (or pass an empty
 * list) to draw all of them. Requesting only sample sizes that do not occur
 * in the frame is an error rather than an empty figure.
 */
export function plotCoverageVsC(frame: ResultFrame, nValues?: number[]): RenderedPlot {
  const available = uniqueSorted(frame.rows.map((r) => r.n));
  let selected = available;
  if (nValues !== undefined && nValues.length > 0) {
    const requested = uniqueSorted(nValues);
    const have = new Set(available);
    selected = requested.filter((n) => have.has(n));
    if (selected.length === 0) {
      throw new EmptySelectionError(
        `no rows with n in {${requested.join(", ")}}; available n: {${available.join(", ")}}`,
      );
    }
  }
  const keep = new Set(selected);
  const rows = frame.rows.filter((r) => keep.has(r.n));
  if (rows.length === 0) {
    throw new EmptySelectionError("frame has no rows");
  }

  const studies = [...new Set(rows.map((r) => r.study))].sort();
  const cValues = uniqueSorted(rows.map((r) => r.c));
  const nMin = selected[0]!;
  const nMax = selected[selected.length - 1]!;

  const PANEL_W = 430;
  const PANEL_H = 280;
  const LEFT = 64;
  const TOP = 44;
  const BOTTOM = 46;
  const LEGEND_W = 150;
  const width = LEFT + PANEL_W + 16 + LEGEND_W;
  const height = TOP + PANEL_H + BOTTOM;

  let cLo = cValues[0]!;
  let cHi = cValues[cValues.length - 1]!;
  if (cLo === cHi) {
    cLo -= 0.05;
    cHi += 0.05;
  }
  const xs = scaleLinear().domain([cLo, cHi]).range([14, PANEL_W - 14]);
  const cTicks = cValues.length <= 8 ? cValues : xs.ticks(5);
  const ys = scaleLinear().domain([0, 1]).range([PANEL_H - 6, 6]);

  const meta: PlotMeta = {
    tool: "plotfig",
    version: VERSION,
    plot: "cov-vs-c",
    studies,
    sourceDigest: frame.sourceDigest,
    rows: rows.length,
    nRange: [nMin, nMax],
  };

  interface CovSeries {
    study: string;
    method: string;
    n: number;
    points: ResultRow[];
  }
  const seriesList: CovSeries[] = [];
  for (const study of studies) {
    const methods = [...new Set(rows.filter((r) => r.study === study).map((r) => r.method))].sort();
    for (const method of methods) {
      for (const n of selected) {
        const points = rows
          .filter((r) => r.study === study && r.method === method && r.n === n)
          .slice()
          .sort((a, b) => a.c - b.c);
        if (points.length > 0) seriesList.push({ study, method, n, points });
      }
    }
  }

  const inner: string[] = [
    yAxisTicks((v) => ys(v), [0, 0.25, 0.5, 0.75, 1], PANEL_W),
    el("rect", { x: 0, y: 0, width: PANEL_W, height: PANEL_H, fill: "none", stroke: "#bbbbbb" }),
  ];
  for (const t of cTicks) {
    const x = px(xs(t));
    inner.push(
      el("line", { x1: x, x2: x, y1: PANEL_H, y2: PANEL_H + 4, stroke: "#333" }),
      el(
        "text",
        { x, y: PANEL_H + 15, "text-anchor": "middle", "font-size": 9.5, fill: "#333" },
        esc(String(t)),
      ),
    );
  }
  inner.push(
    el(
      "text",
      { x: PANEL_W / 2, y: PANEL_H + 32, "text-anchor": "middle", "font-size": 10.5, fill: "#333" },
      esc("compound-symmetry correlation c"),
    ),
    el(
      "text",
      {
        x: -46,
        y: PANEL_H / 2,
        "text-anchor": "middle",
        "font-size": 10.5,
        fill: "#333",
        transform: `rotate(-90 -46 ${PANEL_H / 2})`,
      },
      esc("coverage"),
    ),
  );

  const legend: { label: string; color: string; dash: string }[] = [];
  for (const s of seriesList) {
    const dash = DASHES[selected.indexOf(s.n) % DASHES.length]!;
    const color = methodColor(s.method);
    const lineGen = d3line<ResultRow>()
      .x((r) => px(xs(r.c)))
      .y((r) => px(ys(r.coverage)));
    if (s.points.length >= 2) {
      inner.push(
        el("path", {
          class: "pf-series",
          d: lineGen(s.points) ?? "",
          fill: "none",
          stroke: color,
          "stroke-width": 1.6,
          "stroke-dasharray": dash === "" ? undefined : dash,
        }),
      );
    }
    for (const r of s.points) {
      inner.push(
        el("circle", {
          class: "pf-point pf-cov",
          cx: px(xs(r.c)),
          cy: px(ys(r.coverage)),
          r: 2.6,
          fill: color,
          "data-study": r.study,
          "data-method": r.method,
          "data-n": r.n,
          "data-c": r.c,
          "data-coverage": r.coverage,
          "data-cp-lower": r.cp_lower,
          "data-cp-upper": r.cp_upper,
        }),
      );
    }
    const prefix = studies.length > 1 ? `${s.study} ` : "";
    legend.push({ label: `${prefix}${s.method}, n=${s.n}`, color, dash });
  }

  const body: string[] = [
    el(
      "text",
      { x: LEFT, y: 22, "font-size": 13, "font-weight": "bold", fill: "#111" },
      esc(`Stud${studies.length > 1 ? "ies" : "y"} ${studies.join(", ")}: coverage vs correlation`),
    ),
    el("g", { transform: `translate(${LEFT},${TOP})` }, inner),
    legendEntries(legend, LEFT + PANEL_W + 16, TOP + 10),
  ];

  return {
    stem: rangeStem(studies, "cov-vs-c", nMin, nMax),
    svg: svgRoot(width, height, meta, body),
    meta,
  };
}
