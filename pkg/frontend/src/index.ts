export { VERSION } from "./version.js";
export { sha256Hex } from "./digest.js";
export {
  RESULT_COLUMNS,
  parseResults,
  MissingColumnsError,
  SchemaError,
  EmptyFrameError,
  type ResultColumn,
  type ResultRow,
  type ResultFrame,
} from "./schema.js";
export {
  plotCoverageWidth,
  plotCoverageVsC,
  extractMeta,
  EmptySelectionError,
  METHOD_COLORS,
  type PlotName,
  type PlotMeta,
  type RenderedPlot,
} from "./plots.js";
export { svgToPng, loadSharp } from "./png.js";
export { runCli, type CliIO } from "./cli.js";
