/**
 * Hand-rolled SVG renderer for the figure scene model.
 *
 * Everything is computed from the figure alone, so the same input always
 * yields byte-identical output.
 */

import { Figure, HeatCell, Series } from "./figures.js";

export interface RenderOptions {
  width: number;
  height: number;
}

const DEFAULTS: RenderOptions = { width: 720, height: 480 };
const MARGIN = { top: 44, right: 28, bottom: 52, left: 76 };
const RAMP_GUTTER = 76;

const MAIN_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b"];
const OVERLAY_COLORS = ["#d62728", "#e377c2", "#17becf"];
const FAINT_COLOR = "#b8b8b8";
const RAMP_LOW = [247, 251, 255];
const RAMP_HIGH = [8, 48, 107];
const FLAG_COLOR = "#d62728";

export type ScaleFn = (value: number) => number;

export function makeScale(
  kind: "linear" | "log",
  domain: [number, number],
  range: [number, number],
): ScaleFn {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  if (kind === "log") {
    if (!(d0 > 0) || !(d1 > 0)) {
      throw new Error(`log scale needs a positive domain, got [${d0}, ${d1}]`);
    }
    const l0 = Math.log10(d0);
    const span = Math.log10(d1) - l0 || 1;
    return (v) => r0 + ((Math.log10(v) - l0) / span) * (r1 - r0);
  }
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

/** 1-2-5 ticks covering [lo, hi] with about `count` steps. */
export function linearTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const raw = (hi - lo) / count;
  const mag = 10 ** Math.floor(Math.log10(raw));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => s >= raw) ??
    10 * mag;
  const first = Math.ceil(lo / step - 1e-9);
  const last = Math.floor(hi / step + 1e-9);
  const ticks: number[] = [];
  for (let i = first; i <= last; i += 1) {
    ticks.push(i === 0 ? 0 : Number((i * step).toPrecision(12)));
  }
  return ticks;
}

/** Decade ticks inside [lo, hi], thinned to at most `count`. */
export function logTicks(lo: number, hi: number, count = 8): number[] {
  const e0 = Math.ceil(Math.log10(lo) - 1e-12);
  const e1 = Math.floor(Math.log10(hi) + 1e-12);
  if (e1 < e0 + 1) {
    return linearTicks(lo, hi, 4);
  }
  const stride = Math.max(1, Math.ceil((e1 - e0 + 1) / count));
  const ticks: number[] = [];
  for (let e = e0; e <= e1; e += stride) {
    ticks.push(10 ** e);
  }
  return ticks;
}

export function fmtTick(value: number): string {
  if (value === 0) {
    return "0";
  }
  const mag = Math.abs(value);
  if (mag >= 1e4 || mag < 1e-3) {
    return value.toExponential(0).replace("e+", "e");
  }
  return String(Number(value.toPrecision(6)));
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function px(value: number): string {
  return Number(value.toFixed(2)).toString();
}

interface Extent {
  min: number;
  max: number;
}

function growExtent(ext: Extent | null, value: number, log: boolean): Extent | null {
  if (!Number.isFinite(value) || (log && !(value > 0))) {
    return ext;
  }
  if (ext === null) {
    return { min: value, max: value };
  }
  return { min: Math.min(ext.min, value), max: Math.max(ext.max, value) };
}

function padDomain(ext: Extent, log: boolean): [number, number] {
  let { min, max } = ext;
  if (log) {
    const pad = (Math.log10(max) - Math.log10(min) || 1) * 0.04;
    return [10 ** (Math.log10(min) - pad), 10 ** (Math.log10(max) + pad)];
  }
  if (min === max) {
    min -= 1;
    max += 1;
  }
  const pad = (max - min) * 0.05;
  return [min - pad, max + pad];
}

function figureExtents(fig: Figure): { x: [number, number]; y: [number, number] } {
  const logX = fig.xScale === "log";
  const logY = fig.yScale === "log";
  let xExt: Extent | null = null;
  let yExt: Extent | null = null;
  for (const s of fig.series) {
    for (const [i, xv] of s.x.entries()) {
      const yv = s.y[i] as number;
      xExt = growExtent(xExt, xv, logX);
      yExt = growExtent(yExt, yv, logY);
      if (s.yErr) {
        const err = s.yErr[i] as number;
        yExt = growExtent(yExt, yv + err, logY);
        yExt = growExtent(yExt, yv - err, logY);
      }
    }
  }
  for (const c of fig.cells ?? []) {
    xExt = growExtent(growExtent(xExt, c.x0, logX), c.x1, logX);
    yExt = growExtent(growExtent(yExt, c.y0, logY), c.y1, logY);
  }
  if (xExt === null || yExt === null) {
    throw new Error("figure has no drawable data");
  }
  return {
    x: fig.cells?.length ? [xExt.min, xExt.max] : padDomain(xExt, logX),
    y: fig.cells?.length ? [yExt.min, yExt.max] : padDomain(yExt, logY),
  };
}

function seriesColor(s: Series, mainIdx: number, overlayIdx: number): string {
  if (s.emphasis === "faint") {
    return FAINT_COLOR;
  }
  const palette = s.emphasis === "overlay" ? OVERLAY_COLORS : MAIN_COLORS;
  const idx = s.emphasis === "overlay" ? overlayIdx : mainIdx;
  return palette[idx % palette.length] as string;
}

function linePath(s: Series, sx: ScaleFn, sy: ScaleFn, logY: boolean): string {
  const parts: string[] = [];
  let pen = false;
  for (const [i, xv] of s.x.entries()) {
    const yv = s.y[i] as number;
    if (!Number.isFinite(xv) || !Number.isFinite(yv) || (logY && !(yv > 0))) {
      pen = false;
      continue;
    }
    parts.push(`${pen ? "L" : "M"}${px(sx(xv))} ${px(sy(yv))}`);
    pen = true;
  }
  return parts.join(" ");
}

function rampColor(t: number): string {
  const mix = (a: number, b: number) => Math.round(a + (b - a) * t);
  const [r, g, b] = [0, 1, 2].map((i) =>
    mix(RAMP_LOW[i] as number, RAMP_HIGH[i] as number),
  );
  return `rgb(${r},${g},${b})`;
}

/** Map cell values to [0, 1] on a log ramp; zeros pin to the bottom. */
export function cellShade(values: number[]): number[] {
  const positive = values.filter((v) => v > 0);
  if (positive.length === 0) {
    return values.map(() => 0);
  }
  const hi = Math.log10(Math.max(...positive));
  const lo = Math.log10(Math.min(...positive));
  const span = hi - lo || 1;
  return values.map((v) =>
    v > 0 ? (Math.log10(v) - lo) / span : 0,
  );
}

export function renderFigure(
  fig: Figure,
  options: Partial<RenderOptions> = {},
): string {
  const { width, height } = { ...DEFAULTS, ...options };
  const hasCells = (fig.cells?.length ?? 0) > 0;
  const right = MARGIN.right + (hasCells ? RAMP_GUTTER : 0);
  const x0 = MARGIN.left;
  const x1 = width - right;
  const y0 = height - MARGIN.bottom;
  const y1 = MARGIN.top;
  const { x: xDom, y: yDom } = figureExtents(fig);
  const sx = makeScale(fig.xScale, xDom, [x0, x1]);
  const sy = makeScale(fig.yScale, yDom, [y0, y1]);
  const xTicks = fig.xScale === "log"
    ? logTicks(xDom[0], xDom[1])
    : linearTicks(xDom[0], xDom[1]);
  const yTicks = fig.yScale === "log"
    ? logTicks(yDom[0], yDom[1], 6)
    : linearTicks(yDom[0], yDom[1], 6);

  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
    `height="${height}" viewBox="0 0 ${width} ${height}" ` +
    `font-family="sans-serif">`,
  );
  out.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  out.push(
    `<text x="${px((x0 + x1) / 2)}" y="${MARGIN.top - 18}" ` +
    `text-anchor="middle" font-size="14">${esc(fig.title)}</text>`,
  );

  // gridlines under everything else
  for (const t of xTicks) {
    out.push(
      `<line x1="${px(sx(t))}" y1="${y0}" x2="${px(sx(t))}" y2="${y1}" ` +
      `stroke="#e0e0e0" stroke-width="0.5"/>`,
    );
  }
  for (const t of yTicks) {
    out.push(
      `<line x1="${x0}" y1="${px(sy(t))}" x2="${x1}" y2="${px(sy(t))}" ` +
      `stroke="#e0e0e0" stroke-width="0.5"/>`,
    );
  }

  if (hasCells) {
    out.push(...renderCells(fig.cells as HeatCell[], sx, sy));
    out.push(...renderRamp(fig, x1, y0, y1));
  }

  let mainIdx = 0;
  let overlayIdx = 0;
  for (const s of fig.series) {
    const color = seriesColor(s, mainIdx, overlayIdx);
    if (s.emphasis === "main") {
      mainIdx += 1;
    } else if (s.emphasis === "overlay") {
      overlayIdx += 1;
    }
    out.push(...renderSeries(s, sx, sy, color, fig.yScale === "log", y0, y1));
  }

  out.push(...renderAxes(fig, x0, x1, y0, y1, sx, sy, xTicks, yTicks));
  out.push(...renderLegend(fig, x0, y1));
  out.push("</svg>");
  return out.join("\n") + "\n";
}

function renderSeries(
  s: Series,
  sx: ScaleFn,
  sy: ScaleFn,
  color: string,
  logY: boolean,
  yBottom: number,
  yTop: number,
): string[] {
  const out: string[] = [];
  const dash = s.emphasis === "overlay" ? ' stroke-dasharray="6 3"' : "";
  const width = s.emphasis === "faint" ? 1 : 1.8;
  if (s.yErr) {
    for (const [i, xv] of s.x.entries()) {
      const yv = s.y[i] as number;
      const err = s.yErr[i] as number;
      if (!Number.isFinite(yv) || (logY && !(yv > 0)) || !(err > 0)) {
        continue;
      }
      const cx = px(sx(xv));
      const lo = logY && yv - err <= 0 ? yBottom : sy(yv - err);
      const hiRaw = sy(yv + err);
      const hi = Math.max(Math.min(hiRaw, yBottom), yTop);
      out.push(
        `<line class="errbar" x1="${cx}" y1="${px(lo)}" x2="${cx}" ` +
        `y2="${px(hi)}" stroke="${color}" stroke-width="1"/>`,
      );
    }
  }
  if (s.kind === "line") {
    const d = linePath(s, sx, sy, logY);
    if (d.length > 0) {
      out.push(
        `<path class="series" d="${d}" fill="none" stroke="${color}" ` +
        `stroke-width="${width}"${dash}/>`,
      );
    }
  } else {
    for (const [i, xv] of s.x.entries()) {
      const yv = s.y[i] as number;
      if (!Number.isFinite(yv) || (logY && !(yv > 0))) {
        continue;
      }
      out.push(
        `<circle class="marker" cx="${px(sx(xv))}" cy="${px(sy(yv))}" ` +
        `r="3" fill="${color}"/>`,
      );
    }
  }
  return out;
}

function renderCells(cells: HeatCell[], sx: ScaleFn, sy: ScaleFn): string[] {
  const shade = cellShade(cells.map((c) => c.value));
  const out: string[] = [];
  for (const [i, c] of cells.entries()) {
    const x = sx(c.x0);
    const y = sy(c.y1);
    const w = sx(c.x1) - x;
    const h = sy(c.y0) - y;
    const stroke = c.flagged
      ? ` stroke="${FLAG_COLOR}" stroke-width="1.4"`
      : ` stroke="#ffffff" stroke-width="0.3"`;
    out.push(
      `<rect class="cell" x="${px(x)}" y="${px(y)}" width="${px(w)}" ` +
      `height="${px(h)}" fill="${rampColor(shade[i] as number)}"${stroke}/>`,
    );
  }
  return out;
}

function renderRamp(fig: Figure, x1: number, y0: number, y1: number): string[] {
  const values = (fig.cells as HeatCell[]).map((c) => c.value)
    .filter((v) => v > 0);
  const barX = x1 + 18;
  const steps = 24;
  const out: string[] = [];
  const barH = (y0 - y1) / steps;
  for (let i = 0; i < steps; i += 1) {
    const t = 1 - i / (steps - 1);
    out.push(
      `<rect x="${barX}" y="${px(y1 + i * barH)}" width="12" ` +
      `height="${px(barH + 0.5)}" fill="${rampColor(t)}"/>`,
    );
  }
  const label = fig.cellLabel ?? "value";
  out.push(
    `<text x="${barX + 16}" y="${y1 + 10}" font-size="10">` +
    `${values.length ? esc(fmtTick(Math.max(...values))) : "0"}</text>`,
  );
  out.push(
    `<text x="${barX + 16}" y="${y0}" font-size="10">` +
    `${values.length ? esc(fmtTick(Math.min(...values))) : "0"}</text>`,
  );
  out.push(
    `<text x="${barX}" y="${y1 - 8}" font-size="10">${esc(label)}</text>`,
  );
  out.push(
    `<rect x="${barX + 34}" y="${px(y1 + 16)}" width="10" height="10" ` +
    `fill="none" stroke="${FLAG_COLOR}" stroke-width="1.4"/>`,
  );
  out.push(
    `<text x="${barX + 34}" y="${px(y1 + 38)}" font-size="10">excl.</text>`,
  );
  return out;
}

function renderAxes(
  fig: Figure,
  x0: number,
  x1: number,
  y0: number,
  y1: number,
  sx: ScaleFn,
  sy: ScaleFn,
  xTicks: number[],
  yTicks: number[],
): string[] {
  const out: string[] = [];
  out.push(
    `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`,
    `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`,
  );
  for (const t of xTicks) {
    const cx = px(sx(t));
    out.push(
      `<line x1="${cx}" y1="${y0}" x2="${cx}" y2="${y0 + 5}" stroke="black"/>`,
      `<text class="xtick" x="${cx}" y="${y0 + 18}" text-anchor="middle" ` +
      `font-size="11">${esc(fmtTick(t))}</text>`,
    );
  }
  for (const t of yTicks) {
    const cy = px(sy(t));
    out.push(
      `<line x1="${x0 - 5}" y1="${cy}" x2="${x0}" y2="${cy}" stroke="black"/>`,
      `<text class="ytick" x="${x0 - 8}" y="${cy}" text-anchor="end" ` +
      `dominant-baseline="middle" font-size="11">${esc(fmtTick(t))}</text>`,
    );
  }
  out.push(
    `<text x="${px((x0 + x1) / 2)}" y="${y0 + 38}" text-anchor="middle" ` +
    `font-size="12">${esc(fig.xLabel)}</text>`,
  );
  out.push(
    `<text x="${x0 - 56}" y="${px((y0 + y1) / 2)}" text-anchor="middle" ` +
    `font-size="12" transform="rotate(-90 ${x0 - 56} ` +
    `${px((y0 + y1) / 2)})">${esc(fig.yLabel)}</text>`,
  );
  return out;
}

function renderLegend(fig: Figure, x0: number, y1: number): string[] {
  const entries: { label: string; color: string; dash: boolean }[] = [];
  let mainIdx = 0;
  let overlayIdx = 0;
  let faint = 0;
  for (const s of fig.series) {
    if (s.emphasis === "faint") {
      faint += 1;
      continue;
    }
    entries.push({
      label: s.label,
      color: seriesColor(s, mainIdx, overlayIdx),
      dash: s.emphasis === "overlay",
    });
    if (s.emphasis === "main") {
      mainIdx += 1;
    } else {
      overlayIdx += 1;
    }
  }
  if (faint > 0) {
    entries.unshift({
      label: `samples (${faint})`,
      color: FAINT_COLOR,
      dash: false,
    });
  }
  const out: string[] = [];
  for (const [i, e] of entries.entries()) {
    const y = y1 + 14 + i * 16;
    const dash = e.dash ? ' stroke-dasharray="6 3"' : "";
    out.push(
      `<line x1="${x0 + 8}" y1="${y - 4}" x2="${x0 + 30}" y2="${y - 4}" ` +
      `stroke="${e.color}" stroke-width="1.8"${dash}/>`,
      `<text class="legend" x="${x0 + 36}" y="${y}" font-size="11">` +
      `${esc(e.label)}</text>`,
    );
  }
  return out;
}
