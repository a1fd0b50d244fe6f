/** Public entry: a PlotSpec names the input CSVs, the figure kind, and the
 *  output image; render() writes the PNG. */
import { writeFileSync } from "node:fs";

import { CsvTable, readCsv } from "./csv.js";
import {
  Frame,
  HEIGHT,
  RegionKind,
  WIDTH,
  renderBoundaryProfile,
  renderConvergence,
  renderEigen,
  renderProfile1d,
  renderTvSeries,
} from "./plots.js";

export type PlotKind =
  | "convergence"
  | "eigen"
  | "profile1d"
  | "tv_series"
  | "boundary_profile";

export interface PlotSpec {
  kind: PlotKind;
  inputs: string[];
  out: string;
  region?: RegionKind;
}

export interface RenderInfo {
  width: number;
  height: number;
  series: number;
}

const RENDERERS: Record<PlotKind, (tables: CsvTable[], region: RegionKind) => Frame> = {
  convergence: (t) => renderConvergence(t),
  eigen: (t, region) => renderEigen(t, region),
  profile1d: (t) => renderProfile1d(t),
  tv_series: (t) => renderTvSeries(t),
  boundary_profile: (t) => renderBoundaryProfile(t),
};

export function render(spec: PlotSpec): RenderInfo {
  if (!(spec.kind in RENDERERS)) {
    throw new Error(
      `unknown plot kind '${spec.kind}'; expected one of ${Object.keys(RENDERERS).join(", ")}`,
    );
  }
  if (spec.inputs.length === 0) {
    throw new Error("at least one input CSV is required");
  }
  const tables = spec.inputs.map(readCsv);
  const frame = RENDERERS[spec.kind](tables, spec.region ?? "rk2");
  writeFileSync(spec.out, frame.raster.png());
  return { width: WIDTH, height: HEIGHT, series: tables.length };
}

export { readCsv, parseCsv, requireColumns } from "./csv.js";
export { encodePng, crc32 } from "./png.js";
export { Raster } from "./canvas.js";
