import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { readTable } from "../src/csv.js";
import { buildFigure } from "../src/figures.js";
import {
  cellShade,
  fmtTick,
  linearTicks,
  logTicks,
  makeScale,
  renderFigure,
} from "../src/svg.js";

const fixture = (name: string): string =>
  fileURLToPath(new URL(`../fixtures/${name}`, import.meta.url));

const count = (text: string, needle: string): number =>
  text.split(needle).length - 1;

describe("scales and ticks", () => {
  it("maps domains onto pixel ranges", () => {
    const lin = makeScale("linear", [0, 10], [100, 200]);
    expect(lin(0)).toBe(100);
    expect(lin(5)).toBe(150);
    const log = makeScale("log", [1, 100], [0, 10]);
    expect(log(10)).toBeCloseTo(5, 12);
    expect(() => makeScale("log", [0, 1], [0, 1])).toThrow(/positive/);
  });

  it("picks 1-2-5 linear ticks", () => {
    expect(linearTicks(0, 10, 6)).toEqual([0, 2, 4, 6, 8, 10]);
    expect(linearTicks(0, 1, 6)).toEqual([0, 0.2, 0.4, 0.6, 0.8, 1]);
  });

  it("thins decade ticks to the requested count", () => {
    const ticks = logTicks(1e-28, 1e-12, 8);
    expect(ticks.length).toBeLessThanOrEqual(8);
    expect(ticks[0]).toBe(1e-28);
    for (const t of ticks) {
      expect(Math.log10(t) % 1).toBeCloseTo(0, 12);
    }
  });

  it("falls back to linear ticks inside one decade", () => {
    const ticks = logTicks(2, 8, 8);
    expect(ticks.length).toBeGreaterThan(1);
    expect(ticks[0]).toBeGreaterThanOrEqual(2);
  });

  it("formats ticks compactly", () => {
    expect(fmtTick(0)).toBe("0");
    expect(fmtTick(100)).toBe("100");
    expect(fmtTick(0.0126)).toBe("0.0126");
    expect(fmtTick(1e-25)).toBe("1e-25");
    expect(fmtTick(12000)).toBe("1e4");
  });

  it("shades cells on a log ramp with zeros at the bottom", () => {
    const shade = cellShade([0, 1e-6, 1e-3, 1]);
    expect(shade[0]).toBe(0);
    expect(shade[1]).toBe(0);
    expect(shade[3]).toBe(1);
    expect(shade[2]).toBeCloseTo(0.5, 12);
  });
});

describe("renderFigure", () => {
  it("renders one path per line series", () => {
    const fig = buildFigure("modes", readTable(fixture("modes_k0.csv")));
    const svg = renderFigure(fig);
    expect(svg.startsWith("<svg xmlns=")).toBe(true);
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    expect(count(svg, 'class="series"')).toBe(2);
    expect(svg).not.toContain("NaN");
  });

  it("renders every heatmap cell as a rect", () => {
    const table = readTable(fixture("exclusion.csv"));
    const svg = renderFigure(buildFigure("exclusion", table));
    expect(count(svg, 'class="cell"')).toBe(table.rows);
    expect(svg).toContain("1e-28");
    expect(svg).not.toContain("NaN");
  });

  it("draws error bars for the Monte-Carlo spectrum", () => {
    const table = readTable(fixture("spectrum.csv"));
    const svg = renderFigure(buildFigure("spectrum", table));
    expect(count(svg, 'class="marker"')).toBe(2);
    expect(count(svg, 'class="errbar"')).toBe(2);
  });

  it("escapes markup in labels", () => {
    const fig = buildFigure("cls", readTable(fixture("cls.csv")));
    fig.title = "a < b & c";
    const svg = renderFigure(fig);
    expect(svg).toContain("a &lt; b &amp; c");
  });

  it("respects custom dimensions", () => {
    const fig = buildFigure("cls", readTable(fixture("cls.csv")));
    const svg = renderFigure(fig, { width: 400, height: 300 });
    expect(svg).toContain('width="400"');
    expect(svg).toContain('viewBox="0 0 400 300"');
  });

  it("collapses the sample fan into one legend entry", () => {
    const fig = buildFigure("trajectory", readTable(fixture("csl_k0.csv")));
    const svg = renderFigure(fig);
    expect(svg).toContain("samples (6)");
    expect(count(svg, 'class="series"')).toBe(7);
  });
});
