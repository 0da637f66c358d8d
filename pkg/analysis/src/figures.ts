/** Figure rendering: consumes the simulator's CSV tables, emits a PNG plus
 * a machine-readable fit sidecar. No physics happens here — only fits,
 * medians, and error bars over what the primary component wrote. */

import * as fs from "node:fs";
import * as path from "node:path";

import { Table, DigestMismatchError, SchemaError, column, numericColumn, parseCsv, requireColumns, sharedDigest } from "./csv.js";
import { Canvas, COLORS, Rgba } from "./png.js";
import { bootstrapMedianCi, fitWithBootstrap, median, normalQuantile } from "./stats.js";

export type FigureKind = "divergence-fit" | "stabilization" | "trend" | "qq" | "trace";

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
  /** refuse inputs whose digest differs from this one, when provided */
  expectedDigest?: string;
  title?: string;
}

export interface FitRecord {
  kind: FigureKind;
  configDigest: string;
  [key: string]: unknown;
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { left: 70, right: 20, top: 30, bottom: 60 };

interface Frame {
  canvas: Canvas;
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  toX(v: number): number;
  toY(v: number): number;
}

function frame(canvas: Canvas, xMin: number, xMax: number, yMin: number, yMax: number): Frame {
  const x0 = MARGIN.left;
  const y0 = MARGIN.top;
  const x1 = WIDTH - MARGIN.right;
  const y1 = HEIGHT - MARGIN.bottom;
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  const f: Frame = {
    canvas,
    x0,
    y0,
    x1,
    y1,
    toX: (v) => x0 + ((v - xMin) / xSpan) * (x1 - x0),
    toY: (v) => y1 - ((v - yMin) / ySpan) * (y1 - y0),
  };
  canvas.line(x0, y1, x1, y1, COLORS.axis);
  canvas.line(x0, y0, x0, y1, COLORS.axis);
  return f;
}

function caption(canvas: Canvas, text: string): void {
  canvas.text(MARGIN.left, HEIGHT - 28, text.slice(0, 90), COLORS.text);
}

function axisLabels(f: Frame, xMin: number, xMax: number, yMin: number, yMax: number): void {
  f.canvas.text(f.x0 - 4, f.y1 + 6, fmt(xMin), COLORS.text);
  f.canvas.text(f.x1 - 30, f.y1 + 6, fmt(xMax), COLORS.text);
  f.canvas.text(4, f.y1 - 8, fmt(yMin), COLORS.text);
  f.canvas.text(4, f.y0, fmt(yMax), COLORS.text);
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) return v.toPrecision(3);
  return v.toExponential(2);
}

function loadTables(spec: FigureSpec): Table[] {
  if (spec.inputs.length === 0) throw new SchemaError("figure has no inputs");
  return spec.inputs.map((p) => parseCsv(fs.readFileSync(p, "utf8")));
}

// ---------------------------------------------------------------------------
// figure kinds

function renderDivergenceFit(tables: Table[], digest: string, canvas: Canvas): FitRecord {
  const t = tables[0];
  requireColumns(t, ["kind", "eps", "value"]);
  const eps = numericColumn(t, "eps");
  const value = numericColumn(t, "value");
  const kindName = column(t, "kind")[0];
  // power-law divergence: log value against log 1/eps
  const x = eps.map((e) => Math.log(1 / e));
  const y = value.map((v) => Math.log(v));
  const fit = fitWithBootstrap(x, y, 500);
  const f = frame(canvas, Math.min(...x), Math.max(...x), Math.min(...y), Math.max(...y));
  for (let i = 0; i < x.length; i++) canvas.disc(f.toX(x[i]), f.toY(y[i]), 3, COLORS.series0);
  canvas.line(f.toX(Math.min(...x)), f.toY(fit.intercept + fit.slope * Math.min(...x)),
    f.toX(Math.max(...x)), f.toY(fit.intercept + fit.slope * Math.max(...x)), COLORS.fit);
  axisLabels(f, Math.min(...x), Math.max(...x), Math.min(...y), Math.max(...y));
  caption(canvas, `${kindName}: slope=${fit.slope.toFixed(3)} ci=[${fit.slopeCi[0].toFixed(3)},${fit.slopeCi[1].toFixed(3)}]`);
  return {
    kind: "divergence-fit",
    configDigest: digest,
    fitKind: kindName,
    slope: fit.slope,
    slopeCi: fit.slopeCi,
    r2: fit.r2,
    points: x.length,
  };
}

function renderStabilization(tables: Table[], digest: string, canvas: Canvas): FitRecord {
  const t = tables[0];
  requireColumns(t, ["N", "norm_name", "value"]);
  const ns = numericColumn(t, "N");
  const names = column(t, "norm_name");
  const values = numericColumn(t, "value");
  const byName = new Map<string, Map<number, number[]>>();
  for (let i = 0; i < ns.length; i++) {
    if (!byName.has(names[i])) byName.set(names[i], new Map());
    const m = byName.get(names[i])!;
    if (!m.has(ns[i])) m.set(ns[i], []);
    m.get(ns[i])!.push(values[i]);
  }
  const sizes = [...new Set(ns)].sort((a, b) => a - b);
  const medians: Record<string, Record<string, number>> = {};
  let yMax = 0;
  for (const [name, m] of byName) {
    medians[name] = {};
    for (const n of sizes) {
      if (m.has(n)) {
        const med = median(m.get(n)!);
        medians[name][String(n)] = med;
        yMax = Math.max(yMax, med);
      }
    }
  }
  const f = frame(canvas, 0, sizes.length, 0, yMax * 1.05);
  const entries = [...byName.keys()].sort();
  entries.forEach((name, idx) => {
    const color = [COLORS.series0, COLORS.series1, COLORS.series2, COLORS.series3, COLORS.fit,
      COLORS.axis, COLORS.text, COLORS.grid, COLORS.series0, COLORS.series1][idx % 10] as Rgba;
    let prev: [number, number] | null = null;
    sizes.forEach((n, si) => {
      const v = medians[name][String(n)];
      if (v === undefined) return;
      const px = f.toX(si + 0.5);
      const py = f.toY(v);
      canvas.disc(px, py, 3, color);
      if (prev) canvas.line(prev[0], prev[1], px, py, color);
      prev = [px, py];
    });
  });
  axisLabels(f, sizes[0], sizes[sizes.length - 1], 0, yMax);
  caption(canvas, `stabilization medians over n=[${sizes.join(",")}], ${entries.length} entries`);
  return { kind: "stabilization", configDigest: digest, sizes, medians, entries };
}

function renderTrend(tables: Table[], digest: string, canvas: Canvas): FitRecord {
  const t = tables[0];
  requireColumns(t, ["n_coarse", "n_fine", "pair", "distance"]);
  const nc = numericColumn(t, "n_coarse");
  const nf = numericColumn(t, "n_fine");
  const pair = numericColumn(t, "pair");
  const dist = numericColumn(t, "distance");
  // per-pair supremum over times, then medians per refinement level
  const perPair = new Map<string, number>();
  for (let i = 0; i < nc.length; i++) {
    const key = `${nc[i]}->${nf[i]}#${pair[i]}`;
    perPair.set(key, Math.max(perPair.get(key) ?? 0, dist[i]));
  }
  const byLevel = new Map<string, number[]>();
  for (const [key, v] of perPair) {
    const level = key.split("#")[0];
    if (!byLevel.has(level)) byLevel.set(level, []);
    byLevel.get(level)!.push(v);
  }
  const levels = [...byLevel.keys()].sort((a, b) => Number(a.split("->")[0]) - Number(b.split("->")[0]));
  const meds = levels.map((l) => median(byLevel.get(l)!));
  const cis = levels.map((l) => bootstrapMedianCi(byLevel.get(l)!));
  const yMax = Math.max(...cis.map((c) => c[1]));
  const f = frame(canvas, 0, levels.length, 0, yMax * 1.1);
  levels.forEach((l, i) => {
    const x = f.toX(i + 0.5);
    canvas.line(x, f.toY(cis[i][0]), x, f.toY(cis[i][1]), COLORS.series1);
    canvas.disc(x, f.toY(meds[i]), 4, COLORS.series0);
  });
  axisLabels(f, 0, levels.length, 0, yMax);
  caption(canvas, `refinement medians: ${levels.map((l, i) => `${l}:${fmt(meds[i])}`).join("  ")}`);
  const decreasing = meds.every((m, i) => i === 0 || m < meds[i - 1]);
  return { kind: "trend", configDigest: digest, levels, medians: meds, medianCis: cis, decreasing };
}

function renderQq(tables: Table[], digest: string, canvas: Canvas): FitRecord {
  const t = tables[0];
  requireColumns(t, ["time", "phi_id", "M"]);
  const phi = column(t, "phi_id");
  const m = numericColumn(t, "M");
  const first = phi[0];
  const series = m.filter((_, i) => phi[i] === first);
  const incr: number[] = [];
  for (let i = 1; i < series.length; i++) incr.push(series[i] - series[i - 1]);
  if (incr.length < 8) throw new SchemaError("too few increments for a quantile plot");
  const mean = incr.reduce((a, b) => a + b, 0) / incr.length;
  const sd = Math.sqrt(incr.reduce((a, b) => a + (b - mean) ** 2, 0) / (incr.length - 1));
  const standardized = incr.map((v) => (v - mean) / sd).sort((a, b) => a - b);
  const theo = standardized.map((_, i) => normalQuantile((i + 0.5) / standardized.length));
  const lo = Math.min(theo[0], standardized[0]);
  const hi = Math.max(theo[theo.length - 1], standardized[standardized.length - 1]);
  const f = frame(canvas, lo, hi, lo, hi);
  canvas.line(f.toX(lo), f.toY(lo), f.toX(hi), f.toY(hi), COLORS.grid);
  for (let i = 0; i < theo.length; i++) canvas.disc(f.toX(theo[i]), f.toY(standardized[i]), 2, COLORS.series0);
  axisLabels(f, lo, hi, lo, hi);
  // agreement summary: worst absolute quantile gap in the central 90 percent
  let worst = 0;
  for (let i = 0; i < theo.length; i++) {
    const p = (i + 0.5) / theo.length;
    if (p > 0.05 && p < 0.95) worst = Math.max(worst, Math.abs(theo[i] - standardized[i]));
  }
  caption(canvas, `qq of ${first} increments, n=${incr.length}, worst central gap=${worst.toFixed(3)}`);
  return { kind: "qq", configDigest: digest, phiId: first, n: incr.length, worstCentralGap: worst };
}

function renderTrace(tables: Table[], digest: string, canvas: Canvas): FitRecord {
  const t = tables[0];
  requireColumns(t, ["time", "phi_id", "H", "M"]);
  const phi = column(t, "phi_id");
  const time = numericColumn(t, "time");
  const hcol = numericColumn(t, "H");
  const mcol = numericColumn(t, "M");
  const ids = [...new Set(phi)].sort();
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const v of [...hcol, ...mcol]) {
    yMin = Math.min(yMin, v);
    yMax = Math.max(yMax, v);
  }
  const f = frame(canvas, Math.min(...time), Math.max(...time), yMin, yMax);
  ids.forEach((id, idx) => {
    const pts = time.map((tv, i) => [tv, hcol[i], mcol[i], phi[i]] as const).filter((r) => r[3] === id);
    const colH = [COLORS.series0, COLORS.series2][idx % 2] as Rgba;
    const colM = [COLORS.series1, COLORS.series3][idx % 2] as Rgba;
    for (let i = 1; i < pts.length; i++) {
      canvas.line(f.toX(pts[i - 1][0]), f.toY(pts[i - 1][1]), f.toX(pts[i][0]), f.toY(pts[i][1]), colH);
      canvas.line(f.toX(pts[i - 1][0]), f.toY(pts[i - 1][2]), f.toX(pts[i][0]), f.toY(pts[i][2]), colM);
    }
  });
  axisLabels(f, Math.min(...time), Math.max(...time), yMin, yMax);
  caption(canvas, `drift (h) and noise (m) functionals, ${ids.length} test functions`);
  return { kind: "trace", configDigest: digest, phiIds: ids, rows: time.length };
}

const RENDERERS: Record<FigureKind, (t: Table[], d: string, c: Canvas) => FitRecord> = {
  "divergence-fit": renderDivergenceFit,
  stabilization: renderStabilization,
  trend: renderTrend,
  qq: renderQq,
  trace: renderTrace,
};

/** Render one figure; writes PNG + sidecar JSON only after everything
 * validated, so failures leave no partial outputs. */
export function render(spec: FigureSpec): FitRecord {
  if (!(spec.kind in RENDERERS)) throw new SchemaError(`unknown figure kind ${spec.kind}`);
  const tables = loadTables(spec);
  const digest = sharedDigest(tables, spec.expectedDigest);
  const canvas = new Canvas(WIDTH, HEIGHT);
  if (spec.title) canvas.text(MARGIN.left, 10, spec.title, COLORS.text);
  const record = RENDERERS[spec.kind](tables, digest, canvas);
  fs.mkdirSync(path.dirname(path.resolve(spec.output)), { recursive: true });
  fs.writeFileSync(spec.output, canvas.encode());
  fs.writeFileSync(sidecarPath(spec.output), JSON.stringify(record, null, 2) + "\n");
  return record;
}

export function sidecarPath(pngPath: string): string {
  return pngPath.replace(/\.png$/, "") + ".fit.json";
}

export { DigestMismatchError, SchemaError };
