/**
 * plotfig: render figures from a simulator results CSV.
 *
 *   plotfig results.csv --study A --plots coverage-width,cov-vs-c --out figs
 *
 * Exit codes: 0 ok, 2 bad input (file, schema, selection, usage), 1 anything
 * else. Runs single-process; plots are rendered one after another.
 */

import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { join } from "node:path";
import { pathToFileURL } from "node:url";
import yargs from "yargs";
import {
  EmptyFrameError,
  MissingColumnsError,
  SchemaError,
  parseResults,
  type ResultFrame,
} from "./schema.js";
import {
  EmptySelectionError,
  plotCoverageWidth,
  plotCoverageVsC,
  type PlotName,
  type RenderedPlot,
} from "./plots.js";
import { svgToPng } from "./png.js";
import { VERSION } from "./version.js";

export interface CliIO {
  out: (line: string) => void;
  err: (line: string) => void;
}

const PLOT_NAMES: readonly PlotName[] = ["coverage-width", "cov-vs-c"];

class UsageError extends Error {}

function parsePlotList(raw: string): PlotName[] {
  const names = raw
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s !== "");
  if (names.length === 0) {
    throw new UsageError("--plots must name at least one plot");
  }
  for (const name of names) {
    if (!PLOT_NAMES.includes(name as PlotName)) {
      throw new UsageError(`unknown plot '${name}' (valid: ${PLOT_NAMES.join(", ")})`);
    }
  }
  return [...new Set(names)] as PlotName[];
}

function parseNList(raw: string | undefined): number[] | undefined {
  if (raw === undefined) return undefined;
  const values = raw
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s !== "")
    .map((s) => {
      const n = Number(s);
      if (!Number.isInteger(n) || n < 2) {
        throw new UsageError(`--n expects integers >= 2, got '${s}'`);
      }
      return n;
    });
  if (values.length === 0) throw new UsageError("--n must list at least one sample size");
  return values;
}

function pickStudy(frame: ResultFrame, requested: string | undefined): string {
  const present: string[] = [...new Set(frame.rows.map((r) => r.study))].sort();
  if (requested !== undefined) {
    if (!present.includes(requested)) {
      throw new EmptySelectionError(
        `no rows for study ${requested}; studies present: ${present.join(", ")}`,
      );
    }
    return requested;
  }
  if (present.length === 1) return present[0]!;
  throw new UsageError(
    `table contains studies ${present.join(", ")}; pick one with --study`,
  );
}

async function writePlot(
  rendered: RenderedPlot,
  outDir: string,
  sourcePath: string,
  io: CliIO,
  pngWanted: boolean,
): Promise<void> {
  const svgPath = join(outDir, `${rendered.stem}.svg`);
  writeFileSync(svgPath, rendered.svg);
  const files = [`${rendered.stem}.svg`];

  if (pngWanted) {
    const png = await svgToPng(rendered.svg);
    if (png === null) {
      io.err("note: sharp is unavailable, skipping PNG output");
    } else {
      writeFileSync(join(outDir, `${rendered.stem}.png`), png);
      files.push(`${rendered.stem}.png`);
    }
  }

  const sidecar = {
    ...rendered.meta,
    source: sourcePath,
    files,
  };
  writeFileSync(join(outDir, `${rendered.stem}.json`), JSON.stringify(sidecar, null, 2) + "\n");
  for (const f of files) io.out(join(outDir, f));
}

export async function runCli(
  argv: string[],
  io: CliIO = { out: console.log, err: console.error },
): Promise<number> {
  try {
    const args = await yargs(argv)
      .scriptName("plotfig")
      .usage("usage: $0 <results.csv> [options]")
      .option("study", {
        type: "string",
        describe: "study label to render (required when the table has several)",
      })
      .option("plots", {
        type: "string",
        default: PLOT_NAMES.join(","),
        describe: "comma-separated plots to render",
      })
      .option("n", {
        type: "string",
        describe: "comma-separated n filter for cov-vs-c",
      })
      .option("out", {
        type: "string",
        default: ".",
        describe: "output directory",
      })
      .option("png", {
        type: "boolean",
        default: true,
        describe: "also write PNG via sharp; --no-png for SVG only",
      })
      .version(VERSION)
      .help()
      .strictOptions()
      .exitProcess(false)
      .fail((msg, err) => {
        throw err ?? new UsageError(msg ?? "bad arguments");
      })
      .parseAsync();

    const positional = args._.map(String);
    if (positional.length !== 1) {
      throw new UsageError("expected exactly one results CSV path");
    }
    const sourcePath = positional[0]!;
    const plots = parsePlotList(args.plots);
    const nFilter = parseNList(args.n);

    let csvText: string;
    try {
      csvText = readFileSync(sourcePath, "utf8");
    } catch (exc) {
      io.err(`error: cannot read ${sourcePath}: ${(exc as Error).message}`);
      return 2;
    }

    const frame = parseResults(csvText);
    const study = pickStudy(frame, args.study);
    const selected: ResultFrame = {
      rows: frame.rows.filter((r) => r.study === study),
      sourceDigest: frame.sourceDigest,
    };

    mkdirSync(args.out, { recursive: true });
    for (const plot of plots) {
      const rendered =
        plot === "coverage-width"
          ? plotCoverageWidth(selected, study)
          : plotCoverageVsC(selected, nFilter);
      await writePlot(rendered, args.out, sourcePath, io, args.png);
    }
    return 0;
  } catch (exc) {
    if (
      exc instanceof UsageError ||
      exc instanceof SchemaError ||
      exc instanceof MissingColumnsError ||
      exc instanceof EmptyFrameError ||
      exc instanceof EmptySelectionError
    ) {
      io.err(`error: ${exc.message}`);
      return 2;
    }
    io.err(`error: ${(exc as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;

if (invokedDirectly) {
  runCli(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
