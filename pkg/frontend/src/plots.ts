/** The five figure kinds rendered from the experiment CSVs. */
import { basename } from "node:path";

import {
  BLACK,
  Color,
  GREY,
  LIGHT_BLUE,
  Raster,
  SERIES_COLORS,
  WHITE,
} from "./canvas.js";
import { CsvTable, requireColumns } from "./csv.js";
import { Scale, extent, formatTick, linearScale, logScale, padded } from "./scale.js";

export const WIDTH = 720;
export const HEIGHT = 540;
const MARGIN = { left: 72, right: 16, top: 26, bottom: 46 };

export type RegionKind = "rk2" | "euler";

export interface Frame {
  raster: Raster;
  x: Scale;
  y: Scale;
}

function plotArea(): [number, number, number, number] {
  return [
    MARGIN.left,
    MARGIN.top,
    WIDTH - MARGIN.right,
    HEIGHT - MARGIN.bottom,
  ];
}

export function makeFrame(
  xDomain: [number, number],
  yDomain: [number, number],
  opts: { logx?: boolean; logy?: boolean; title: string; xlabel: string; ylabel: string },
): Frame {
  const raster = new Raster(WIDTH, HEIGHT, WHITE);
  const [x0, y0, x1, y1] = plotArea();
  const x = (opts.logx ? logScale : linearScale)(xDomain, [x0, x1]);
  const y = (opts.logy ? logScale : linearScale)(yDomain, [y1, y0]);
  decorate(raster, x, y, opts);
  return { raster, x, y };
}

function decorate(
  raster: Raster,
  x: Scale,
  y: Scale,
  opts: { title: string; xlabel: string; ylabel: string },
) {
  const [x0, y0, x1, y1] = plotArea();
  // frame
  raster.line(x0, y0, x1, y0, BLACK);
  raster.line(x0, y1, x1, y1, BLACK);
  raster.line(x0, y0, x0, y1, BLACK);
  raster.line(x1, y0, x1, y1, BLACK);
  raster.text(x0, y0 - 16, opts.title, BLACK);
  for (const t of x.ticks()) {
    const px = Math.round(x(t));
    if (px < x0 - 1 || px > x1 + 1) continue;
    raster.line(px, y1, px, y1 + 4, BLACK);
    raster.line(px, y0, px, y1, GREY);
    const label = formatTick(t);
    raster.text(px - raster.textWidth(label) / 2, y1 + 8, label, BLACK);
  }
  for (const t of y.ticks()) {
    const py = Math.round(y(t));
    if (py < y0 - 1 || py > y1 + 1) continue;
    raster.line(x0 - 4, py, x0, py, BLACK);
    raster.line(x0, py, x1, py, GREY);
    const label = formatTick(t);
    raster.text(x0 - 8 - raster.textWidth(label), py - 3, label, BLACK);
  }
  raster.text(
    (x0 + x1) / 2 - raster.textWidth(opts.xlabel) / 2,
    HEIGHT - 14,
    opts.xlabel,
    BLACK,
  );
  raster.text(4, y0 - 16, opts.ylabel, BLACK);
}

function polyline(
  frame: Frame,
  xs: number[],
  ys: number[],
  color: Color,
  markers = true,
): void {
  for (let i = 0; i + 1 < xs.length; i++) {
    frame.raster.line(
      frame.x(xs[i]),
      frame.y(ys[i]),
      frame.x(xs[i + 1]),
      frame.y(ys[i + 1]),
      color,
    );
  }
  if (markers) {
    for (let i = 0; i < xs.length; i++) {
      frame.raster.marker(frame.x(xs[i]), frame.y(ys[i]), 3, color);
    }
  }
}

function legend(frame: Frame, entries: [string, Color][]): void {
  const [x0, y0] = plotArea();
  let y = y0 + 8;
  for (const [name, color] of entries) {
    frame.raster.fillRect(x0 + 8, y, 10, 8, color);
    frame.raster.text(x0 + 24, y, name, BLACK);
    y += 12;
  }
}

function seriesName(table: CsvTable, suffix = ""): string {
  const base = basename(table.path).replace(/\.csv$/i, "");
  return suffix ? `${base} ${suffix}` : base;
}

// ---------------------------------------------------------------------------

export function renderConvergence(tables: CsvTable[]): Frame {
  const hs: number[] = [];
  const errs: number[] = [];
  for (const t of tables) {
    const c = requireColumns(t, ["N", "h", "l1", "linf"]);
    for (const r of t.rows) {
      hs.push(r[c.h]);
      errs.push(r[c.l1], r[c.linf]);
    }
  }
  const frame = makeFrame(extent(hs), extent(errs.filter((e) => e > 0)), {
    logx: true,
    logy: true,
    title: "CONVERGENCE",
    xlabel: "H",
    ylabel: "ERROR",
  });
  const entries: [string, Color][] = [];
  tables.forEach((t, i) => {
    const c = requireColumns(t, ["h", "l1", "linf"]);
    const h = t.rows.map((r) => r[c.h]);
    for (const [j, norm] of (["l1", "linf"] as const).entries()) {
      const color = SERIES_COLORS[(2 * i + j) % SERIES_COLORS.length];
      polyline(frame, h, t.rows.map((r) => r[c[norm]]), color);
      entries.push([seriesName(t, norm.toUpperCase()), color]);
    }
  });
  legend(frame, entries);
  return frame;
}

function inRegion(re: number, im: number, kind: RegionKind): boolean {
  if (kind === "euler") {
    return Math.hypot(1 + re, im) <= 1;
  }
  // |1 + z + z^2/2| with z = re + i*im
  const zr = 1 + re + 0.5 * (re * re - im * im);
  const zi = im + re * im;
  return Math.hypot(zr, zi) <= 1;
}

export function renderEigen(tables: CsvTable[], region: RegionKind): Frame {
  const res: number[] = [-2.2, 0.4];
  const ims: number[] = [-1.8, 1.8];
  for (const t of tables) {
    const c = requireColumns(t, ["alpha", "rho", "re", "im", "in_region"]);
    for (const r of t.rows) {
      res.push(r[c.re]);
      ims.push(r[c.im]);
    }
  }
  const frame = makeFrame(padded(extent(res)), padded(extent(ims)), {
    title: `EIGENVALUES (${region.toUpperCase()} REGION)`,
    xlabel: "RE",
    ylabel: "IM",
  });
  // shade the stability region pixel by pixel (under the data)
  const [x0, y0, x1, y1] = plotArea();
  const [d0, d1] = frame.x.domain;
  const [e0, e1] = frame.y.domain;
  for (let py = y0 + 1; py < y1; py++) {
    const im = e0 + ((y1 - py) / (y1 - y0)) * (e1 - e0);
    for (let px = x0 + 1; px < x1; px++) {
      const re = d0 + ((px - x0) / (x1 - x0)) * (d1 - d0);
      if (inRegion(re, im, region)) frame.raster.set(px, py, LIGHT_BLUE);
    }
  }
  const entries: [string, Color][] = [];
  tables.forEach((t, i) => {
    const c = requireColumns(t, ["re", "im"]);
    const color = SERIES_COLORS[i % SERIES_COLORS.length];
    for (const r of t.rows) {
      frame.raster.marker(frame.x(r[c.re]), frame.y(r[c.im]), 3, color);
    }
    entries.push([seriesName(t), color]);
  });
  legend(frame, entries);
  return frame;
}

function renderXY(
  tables: CsvTable[],
  xcol: string,
  ycol: string,
  title: string,
  markers: boolean,
): Frame {
  const xs: number[] = [];
  const ys: number[] = [];
  for (const t of tables) {
    const c = requireColumns(t, [xcol, ycol]);
    for (const r of t.rows) {
      xs.push(r[c[xcol]]);
      ys.push(r[c[ycol]]);
    }
  }
  const frame = makeFrame(padded(extent(xs), 0.02), padded(extent(ys)), {
    title,
    xlabel: xcol.toUpperCase(),
    ylabel: ycol.toUpperCase(),
  });
  const entries: [string, Color][] = [];
  tables.forEach((t, i) => {
    const c = requireColumns(t, [xcol, ycol]);
    const color = SERIES_COLORS[i % SERIES_COLORS.length];
    polyline(
      frame,
      t.rows.map((r) => r[c[xcol]]),
      t.rows.map((r) => r[c[ycol]]),
      color,
      markers,
    );
    entries.push([seriesName(t), color]);
  });
  if (tables.length > 1) legend(frame, entries);
  return frame;
}

export function renderProfile1d(tables: CsvTable[]): Frame {
  return renderXY(tables, "x", "u", "SOLUTION PROFILE", false);
}

export function renderTvSeries(tables: CsvTable[]): Frame {
  return renderXY(tables, "time", "tv_means", "TOTAL VARIATION", false);
}

export function renderBoundaryProfile(tables: CsvTable[]): Frame {
  return renderXY(tables, "s", "u", "BOUNDARY PROFILE", true);
}
