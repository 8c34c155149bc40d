/**
 * Deterministic SVG charts over harness result rows.
 *
 * Line charts plot mean harvested current against the swept parameter, one
 * series per algorithm. The two-user weight sweep instead plots the
 * achievable (user 1, user 2) current pairs as a boundary. Only aggregate
 * rows are drawn by default; per-trial rows can be overlaid as scatter.
 * Output is pure markup: fixed canvas, fixed palette, fixed number
 * formatting, no timestamps, so identical input gives identical bytes.
 */
import * as fs from "node:fs";

import {
  AGGREGATE,
  groupKey,
  parseResults,
  type ResultRow,
} from "./csv.js";

export interface PlotSpec {
  csvPath: string;
  scenario: string;
  outPath: string;
  yScale?: "linear" | "log";
  groupBy?: string;
  includeTrials?: boolean;
}

export interface RenderOptions {
  scenario: string;
  yScale?: "linear" | "log";
  groupBy?: string;
  includeTrials?: boolean;
}

export class DataError extends Error {}

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { top: 44, right: 24, bottom: 58, left: 78 } as const;
const PALETTE = [
  "#4361ee",
  "#e63946",
  "#2d6a4f",
  "#f4a261",
  "#7b2cbf",
  "#287271",
  "#b5179e",
  "#6c757d",
];
const FONT = "DejaVu Sans, Helvetica, Arial, sans-serif";

const AXIS_LABELS: Record<string, string> = {
  n_subcarriers: "subcarriers",
  n_elements: "surface elements",
  bits: "phase resolution (bits)",
  iteration: "iteration",
  weight_fraction: "user 1 weight fraction",
  bandwidth_hz: "bandwidth (Hz)",
  d_d: "transmitter-user distance (m)",
};

const MICRO = "µA";

function px(v: number): string {
  return v.toFixed(2);
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(1).replace("e+", "e");
  }
  return String(Number(v.toPrecision(4)));
}

interface Scale {
  toPx(v: number): number;
  ticks: number[];
}

function niceStep(span: number, targetCount: number): number {
  const raw = span / targetCount;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

function linearScale(
  lo: number,
  hi: number,
  pxLo: number,
  pxHi: number,
): Scale {
  const span = hi - lo;
  const step = niceStep(span, 6);
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step) {
    ticks.push(Math.abs(t) < 1e-12 * span ? 0 : t);
  }
  return {
    toPx: (v) => pxLo + ((v - lo) / span) * (pxHi - pxLo),
    ticks,
  };
}

function logScale(lo: number, hi: number, pxLo: number, pxHi: number): Scale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const ticks: number[] = [];
  for (let d = Math.ceil(llo); d <= Math.floor(lhi) + 1e-9; d += 1) {
    ticks.push(Math.pow(10, d));
  }
  if (ticks.length < 2) {
    ticks.length = 0;
    ticks.push(lo, hi);
  }
  return {
    toPx: (v) => pxLo + ((Math.log10(v) - llo) / (lhi - llo)) * (pxHi - pxLo),
    ticks,
  };
}

function padRange(lo: number, hi: number, log: boolean): [number, number] {
  if (log) {
    return [lo / 1.15, hi * 1.15];
  }
  let span = hi - lo;
  if (span <= 0) {
    const pad = Math.max(Math.abs(hi) * 0.05, 1e-3);
    return [lo - pad, hi + pad];
  }
  return [lo - 0.04 * span, hi + 0.04 * span];
}

interface Point {
  x: number;
  y: number;
}

interface Series {
  name: string;
  points: Point[]; // data units, x ascending
  scatter: Point[]; // per-trial overlay, data units
}

/** Collect (sweep value, current) per series for the plain sweep chart. */
function sweepSeries(
  rows: ResultRow[],
  groupBy: string,
  includeTrials: boolean,
): Series[] {
  const order: string[] = [];
  const byKey = new Map<string, Series>();
  for (const row of rows) {
    const key = groupKey(row, groupBy);
    if (!byKey.has(key)) {
      order.push(key);
      byKey.set(key, { name: key, points: [], scatter: [] });
    }
    if (!Number.isFinite(row.current_amps)) continue; // failed-run rows
    const pt = { x: row.sweep_value, y: row.current_amps * 1e6 };
    if (row.trial === AGGREGATE) {
      byKey.get(key)!.points.push(pt);
    } else if (includeTrials) {
      byKey.get(key)!.scatter.push(pt);
    }
  }
  const out: Series[] = [];
  for (const key of order) {
    const s = byKey.get(key)!;
    s.points.sort((a, b) => a.x - b.x);
    if (s.points.length > 0 || s.scatter.length > 0) out.push(s);
  }
  return out;
}

/**
 * Pair the per-user rows of the two-user weight sweep into
 * (user 1 current, user 2 current) points, one per weight, so the series
 * traces the boundary of the achievable region.
 */
function regionSeries(rows: ResultRow[], includeTrials: boolean): Series[] {
  const order: string[] = [];
  const agg = new Map<string, Map<number, { x?: number; y?: number }>>();
  const sc = new Map<string, Map<string, { x?: number; y?: number }>>();
  for (const row of rows) {
    const m = row.algorithm.match(/^(.*):u([01])$/);
    if (m === null) {
      throw new DataError(
        `current_region rows need per-user algorithm labels like "fs:u0" ` +
          `(got "${row.algorithm}")`,
      );
    }
    const base = m[1];
    const axis = m[2] === "0" ? "x" : "y";
    if (!agg.has(base)) {
      order.push(base);
      agg.set(base, new Map());
      sc.set(base, new Map());
    }
    if (!Number.isFinite(row.current_amps)) continue;
    const value = row.current_amps * 1e6;
    if (row.trial === AGGREGATE) {
      const slot = agg.get(base)!;
      if (!slot.has(row.sweep_value)) slot.set(row.sweep_value, {});
      slot.get(row.sweep_value)![axis] = value;
    } else if (includeTrials) {
      const slot = sc.get(base)!;
      const key = `${row.sweep_value}|${row.trial}`;
      if (!slot.has(key)) slot.set(key, {});
      slot.get(key)![axis] = value;
    }
  }
  const out: Series[] = [];
  for (const base of order) {
    const points: Point[] = [];
    const weights = [...agg.get(base)!.keys()].sort((a, b) => a - b);
    for (const w of weights) {
      const pair = agg.get(base)!.get(w)!;
      if (pair.x !== undefined && pair.y !== undefined) {
        points.push({ x: pair.x, y: pair.y });
      }
    }
    const scatter: Point[] = [];
    for (const pair of sc.get(base)!.values()) {
      if (pair.x !== undefined && pair.y !== undefined) {
        scatter.push({ x: pair.x, y: pair.y });
      }
    }
    if (points.length > 0 || scatter.length > 0) {
      out.push({ name: base, points, scatter });
    }
  }
  return out;
}

function dataExtent(series: Series[]): {
  xLo: number;
  xHi: number;
  yLo: number;
  yHi: number;
} {
  let xLo = Infinity;
  let xHi = -Infinity;
  let yLo = Infinity;
  let yHi = -Infinity;
  for (const s of series) {
    for (const p of [...s.points, ...s.scatter]) {
      if (p.x < xLo) xLo = p.x;
      if (p.x > xHi) xHi = p.x;
      if (p.y < yLo) yLo = p.y;
      if (p.y > yHi) yHi = p.y;
    }
  }
  return { xLo, xHi, yLo, yHi };
}

function drawChart(
  series: Series[],
  opts: {
    title: string;
    xLabel: string;
    yLabel: string;
    logY: boolean;
    logX: boolean;
    markers: boolean;
  },
): string {
  const plotL = MARGIN.left;
  const plotR = WIDTH - MARGIN.right;
  const plotT = MARGIN.top;
  const plotB = HEIGHT - MARGIN.bottom;

  const ext = dataExtent(series);
  if (opts.logY && ext.yLo <= 0) {
    throw new DataError("log scale requires strictly positive currents");
  }
  const [xLo, xHi] = padRange(ext.xLo, ext.xHi, opts.logX);
  const [yLo, yHi] = padRange(ext.yLo, ext.yHi, opts.logY);
  const xScale = opts.logX
    ? logScale(xLo, xHi, plotL, plotR)
    : linearScale(xLo, xHi, plotL, plotR);
  const yScale = opts.logY
    ? logScale(yLo, yHi, plotB, plotT)
    : linearScale(yLo, yHi, plotB, plotT);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
      `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
      `font-family="${FONT}">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);

  // gridlines and y ticks
  for (const t of yScale.ticks) {
    const y = px(yScale.toPx(t));
    parts.push(
      `<line x1="${plotL}" y1="${y}" x2="${plotR}" y2="${y}" ` +
        `stroke="#e5e5e5" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${plotL - 8}" y="${y}" dy="0.32em" text-anchor="end" ` +
        `font-size="11" fill="#333333">${escapeXml(fmtTick(t))}</text>`,
    );
  }
  // x ticks
  for (const t of xScale.ticks) {
    const x = px(xScale.toPx(t));
    parts.push(
      `<line x1="${x}" y1="${plotB}" x2="${x}" y2="${plotB + 5}" ` +
        `stroke="#333333" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${x}" y="${plotB + 20}" text-anchor="middle" ` +
        `font-size="11" fill="#333333">${escapeXml(fmtTick(t))}</text>`,
    );
  }
  // axes
  parts.push(
    `<line x1="${plotL}" y1="${plotT}" x2="${plotL}" y2="${plotB}" ` +
      `stroke="#333333" stroke-width="1"/>`,
  );
  parts.push(
    `<line x1="${plotL}" y1="${plotB}" x2="${plotR}" y2="${plotB}" ` +
      `stroke="#333333" stroke-width="1"/>`,
  );
  // labels and title
  parts.push(
    `<text x="${(plotL + plotR) / 2}" y="${HEIGHT - 14}" ` +
      `text-anchor="middle" font-size="13" fill="#111111">` +
      `${escapeXml(opts.xLabel)}</text>`,
  );
  parts.push(
    `<text x="20" y="${(plotT + plotB) / 2}" text-anchor="middle" ` +
      `font-size="13" fill="#111111" ` +
      `transform="rotate(-90 20 ${(plotT + plotB) / 2})">` +
      `${escapeXml(opts.yLabel)}</text>`,
  );
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="15" ` +
      `font-weight="bold" fill="#111111">${escapeXml(opts.title)}</text>`,
  );

  // series
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const name = escapeXml(s.name);
    for (const p of s.scatter) {
      parts.push(
        `<circle cx="${px(xScale.toPx(p.x))}" cy="${px(yScale.toPx(p.y))}" ` +
          `r="2.5" fill="${color}" fill-opacity="0.35" ` +
          `data-series="${name}" data-kind="trial"/>`,
      );
    }
    if (s.points.length > 1) {
      const pts = s.points
        .map((p) => `${px(xScale.toPx(p.x))},${px(yScale.toPx(p.y))}`)
        .join(" ");
      parts.push(
        `<polyline points="${pts}" fill="none" stroke="${color}" ` +
          `stroke-width="2" data-series="${name}"/>`,
      );
    }
    if (opts.markers || s.points.length === 1) {
      for (const p of s.points) {
        parts.push(
          `<circle cx="${px(xScale.toPx(p.x))}" ` +
            `cy="${px(yScale.toPx(p.y))}" r="3.5" fill="${color}" ` +
            `data-series="${name}" data-kind="mean"/>`,
        );
      }
    }
  });

  // legend, top-left inside the plot area
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const y = plotT + 16 + i * 17;
    parts.push(
      `<line x1="${plotL + 12}" y1="${y}" x2="${plotL + 34}" y2="${y}" ` +
        `stroke="${color}" stroke-width="2"/>`,
    );
    parts.push(
      `<text x="${plotL + 40}" y="${y}" dy="0.32em" font-size="12" ` +
        `fill="#111111">${escapeXml(s.name)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

/** Render rows already in memory; pure, file-system free. */
export function renderSvg(rows: ResultRow[], opts: RenderOptions): string {
  const scenario = opts.scenario;
  const filtered = rows.filter((r) => r.scenario === scenario);
  if (filtered.length === 0) {
    throw new DataError(`no rows match scenario "${scenario}"`);
  }
  const logY = opts.yScale === "log";
  const includeTrials = opts.includeTrials ?? false;
  const groupBy = opts.groupBy ?? "algorithm";

  let series: Series[];
  let xLabel: string;
  let yLabel: string;
  let markers: boolean;
  if (scenario === "current_region") {
    series = regionSeries(filtered, includeTrials);
    xLabel = `user 1 DC current (${MICRO})`;
    yLabel = `user 2 DC current (${MICRO})`;
    markers = true;
  } else {
    series = sweepSeries(filtered, groupBy, includeTrials);
    const sweepName = filtered[0].sweep_name;
    xLabel = AXIS_LABELS[sweepName] ?? sweepName;
    yLabel = `mean DC current (${MICRO})`;
    markers = scenario !== "convergence";
  }
  if (series.every((s) => s.points.length === 0 && s.scatter.length === 0)) {
    throw new DataError(`no aggregate rows for scenario "${scenario}"`);
  }
  return drawChart(series, {
    title: scenario,
    xLabel,
    yLabel,
    logY,
    logX: false,
    markers,
  });
}

/** Read, filter, render, write. The output file is only created on success. */
export function render(spec: PlotSpec): void {
  const text = fs.readFileSync(spec.csvPath, "utf-8");
  const rows = parseResults(text);
  const svg = renderSvg(rows, spec);
  fs.writeFileSync(spec.outPath, svg);
}
