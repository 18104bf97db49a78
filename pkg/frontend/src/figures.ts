/**
 * Figure builders: collapsim tables in, backend-neutral scene out.
 *
 * Each kind maps one documented CSV layout to axes, series, and (for the
 * exclusion map) heatmap cells.  No SVG here; svg.ts renders the scene.
 */

import { column, hasColumn, sampleColumns, Table } from "./csv.js";

export type Scale = "linear" | "log";
export type SeriesKind = "line" | "points";
export type Emphasis = "main" | "faint" | "overlay";

export interface Series {
  label: string;
  x: number[];
  y: number[];
  yErr?: number[];
  kind: SeriesKind;
  emphasis: Emphasis;
}

export interface HeatCell {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
  value: number;
  flagged: boolean;
}

export interface Figure {
  title: string;
  xLabel: string;
  yLabel: string;
  xScale: Scale;
  yScale: Scale;
  series: Series[];
  cells?: HeatCell[];
  /** Label for the cell color ramp, when cells are present. */
  cellLabel?: string;
}

export const FIGURE_KINDS = [
  "modes",
  "trajectory",
  "spectrum",
  "cls",
  "exclusion",
] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export function buildFigure(
  kind: FigureKind,
  table: Table,
  overlay?: Table,
): Figure {
  switch (kind) {
    case "modes":
      return modesFigure(table, overlay);
    case "trajectory":
      return trajectoryFigure(table, overlay);
    case "spectrum":
      return spectrumFigure(table, overlay);
    case "cls":
      return clsFigure(table, overlay);
    case "exclusion":
      if (overlay !== undefined) {
        throw new Error("the exclusion kind takes no overlay");
      }
      return exclusionFigure(table);
  }
}

function hypot(re: number[], im: number[]): number[] {
  return re.map((r, i) => Math.hypot(r, im[i] as number));
}

function negated(eta: number[]): number[] {
  return eta.map((t) => -t);
}

function kTag(table: Table): string {
  return table.meta["k"] !== undefined ? `k = ${table.meta["k"]}` : "";
}

/** modes_k<i>.csv: |u|, |v| against -eta, both log. */
export function modesFigure(table: Table, overlay?: Table): Figure {
  const series = modesSeries(table, "main");
  if (overlay !== undefined) {
    series.push(...modesSeries(overlay, "overlay"));
  }
  return {
    title: `Bogoliubov amplitudes, ${kTag(table)}`.trim(),
    xLabel: "-eta",
    yLabel: "|u|, |v|",
    xScale: "log",
    yScale: "log",
    series,
  };
}

function modesSeries(table: Table, emphasis: Emphasis): Series[] {
  const x = negated(column(table, "eta"));
  const tag = emphasis === "overlay" && kTag(table) ? ` (${kTag(table)})` : "";
  return [
    {
      label: `|u|${tag}`,
      x,
      y: hypot(column(table, "re_u"), column(table, "im_u")),
      kind: "line",
      emphasis,
    },
    {
      label: `|v|${tag}`,
      x,
      y: hypot(column(table, "re_v"), column(table, "im_v")),
      kind: "line",
      emphasis,
    },
  ];
}

/** csl_k<i>.csv: kept sample means as a fan, ensemble mean on top. */
export function trajectoryFigure(table: Table, overlay?: Table): Figure {
  const x = negated(column(table, "eta"));
  const series: Series[] = sampleColumns(table).map((name) => ({
    label: name,
    x,
    y: column(table, name),
    kind: "line" as const,
    emphasis: "faint" as const,
  }));
  series.push({
    label: "ensemble mean",
    x,
    y: column(table, "zbar_mean"),
    kind: "line",
    emphasis: "main",
  });
  if (overlay !== undefined) {
    series.push({
      label: `ensemble mean (${kTag(overlay)})`,
      x: negated(column(overlay, "eta")),
      y: column(overlay, "zbar_mean"),
      kind: "line",
      emphasis: "overlay",
    });
  }
  const n = table.meta["n_traj"];
  const tag = kTag(table) + (n !== undefined ? `, n_traj = ${n}` : "");
  return {
    title: `Conditional means, ${tag}`.trim(),
    xLabel: "-eta",
    yLabel: "zbar",
    xScale: "log",
    yScale: "linear",
    series,
  };
}

/** spectrum.csv (p_zeta, p_err) or spectrum_analytic.csv (p_std, p_csl). */
export function spectrumFigure(table: Table, overlay?: Table): Figure {
  const series = spectrumSeries(table, "main");
  if (overlay !== undefined) {
    series.push(...spectrumSeries(overlay, "overlay"));
  }
  return {
    title: "Curvature power spectrum",
    xLabel: "k",
    yLabel: "P_zeta",
    xScale: "log",
    yScale: "log",
    series,
  };
}

function spectrumSeries(table: Table, emphasis: Emphasis): Series[] {
  if (!hasColumn(table, "p_zeta") && !hasColumn(table, "p_csl")) {
    throw new Error("spectrum table needs a p_zeta or p_csl column");
  }
  const x = column(table, "k");
  const tag = emphasis === "overlay" ? " (overlay)" : "";
  if (hasColumn(table, "p_zeta")) {
    const out: Series[] = [
      {
        label: `P_zeta, Monte Carlo${tag}`,
        x,
        y: column(table, "p_zeta"),
        kind: "points",
        emphasis,
      },
    ];
    if (hasColumn(table, "p_err")) {
      (out[0] as Series).yErr = column(table, "p_err");
    }
    return out;
  }
  return [
    {
      label: `P_zeta, standard${tag}`,
      x,
      y: column(table, "p_std"),
      kind: "line",
      emphasis: emphasis === "main" ? "faint" : emphasis,
    },
    {
      label: `P_zeta, collapse${tag}`,
      x,
      y: column(table, "p_csl"),
      kind: "line",
      emphasis,
    },
  ];
}

/** cls.csv or cls_synth.csv: l(l+1) C_l, plus estimator means if present. */
export function clsFigure(table: Table, overlay?: Table): Figure {
  const series = clsSeries(table, "main");
  if (overlay !== undefined) {
    series.push(...clsSeries(overlay, "overlay"));
  }
  return {
    title: "Sachs-Wolfe multipoles",
    xLabel: "l",
    yLabel: "l (l+1) C_l",
    xScale: "linear",
    yScale: "linear",
    series,
  };
}

function clsSeries(table: Table, emphasis: Emphasis): Series[] {
  const l = column(table, "l");
  const weight = l.map((ll) => ll * (ll + 1));
  const scaled = (values: number[]): number[] =>
    values.map((v, i) => v * (weight[i] as number));
  const tag = emphasis === "overlay" ? " (overlay)" : "";
  const out: Series[] = [
    {
      label: `l (l+1) C_l${tag}`,
      x: l,
      y: scaled(column(table, "c_l")),
      kind: "line",
      emphasis,
    },
  ];
  if (hasColumn(table, "cosmic_variance")) {
    (out[0] as Series).yErr = scaled(
      column(table, "cosmic_variance").map(Math.sqrt),
    );
  }
  if (hasColumn(table, "c_l_hat_mean")) {
    const hat: Series = {
      label: `estimator mean${tag}`,
      x: l,
      y: scaled(column(table, "c_l_hat_mean")),
      kind: "points",
      emphasis: emphasis === "main" ? "overlay" : emphasis,
    };
    if (hasColumn(table, "c_l_hat_var")) {
      hat.yErr = scaled(column(table, "c_l_hat_var").map(Math.sqrt));
    }
    out.push(hat);
  }
  return out;
}

/** exclusion.csv: one heatmap cell per (r_c, lambda) grid point. */
export function exclusionFigure(table: Table): Figure {
  const rc = column(table, "r_c");
  const lam = column(table, "lambda");
  const delta = column(table, "delta_ns");
  const excluded = column(table, "excluded");
  const rcEdges = gridEdges(uniqueSorted(rc), "r_c");
  const lamEdges = gridEdges(uniqueSorted(lam), "lambda");
  const cells: HeatCell[] = rc.map((r, i) => {
    const [x0, x1] = edgePair(rcEdges.values, rcEdges.edges, r);
    const [y0, y1] = edgePair(lamEdges.values, lamEdges.edges, lam[i] as number);
    return {
      x0,
      x1,
      y0,
      y1,
      value: Math.abs(delta[i] as number),
      flagged: (excluded[i] as number) !== 0,
    };
  });
  const threshold = table.meta["threshold"];
  const title = threshold !== undefined
    ? `Exclusion map, |delta n_s| > ${threshold}`
    : "Exclusion map";
  return {
    title,
    xLabel: "r_c",
    yLabel: "lambda",
    xScale: "log",
    yScale: "log",
    series: [],
    cells,
    cellLabel: "|delta n_s|",
  };
}

function uniqueSorted(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

/** Geometric-midpoint bin edges for a log-spaced grid. */
export function gridEdges(
  values: number[],
  label: string,
): { values: number[]; edges: number[] } {
  if (values.length < 2) {
    throw new Error(`${label} grid needs at least 2 distinct values`);
  }
  if (values.some((v) => !(v > 0))) {
    throw new Error(`${label} grid must be positive for log bins`);
  }
  const mids = values.slice(1).map((v, i) => Math.sqrt(v * (values[i] as number)));
  const first = (values[0] as number) ** 2 / (mids[0] as number);
  const last = (values[values.length - 1] as number) ** 2 /
    (mids[mids.length - 1] as number);
  return { values, edges: [first, ...mids, last] };
}

function edgePair(
  values: number[],
  edges: number[],
  value: number,
): [number, number] {
  const idx = values.indexOf(value);
  if (idx < 0) {
    throw new Error(`grid value ${value} missing from axis`);
  }
  return [edges[idx] as number, edges[idx + 1] as number];
}
