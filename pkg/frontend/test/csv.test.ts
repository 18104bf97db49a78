import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { column, hasColumn, parseTable, readTable, sampleColumns } from "../src/csv.js";

const SAMPLE = `# tool: collapsim 0.1.0
# command: collapsim spectrum --config run.toml --out-dir out
# threshold: 0.0126
k,p_zeta,p_err
1,1.25e-09,2.5e-10
2,2.2250738585072014e-308,0
`;

const fixture = (name: string): string =>
  fileURLToPath(new URL(`../fixtures/${name}`, import.meta.url));

describe("parseTable", () => {
  it("splits metadata on the first colon only", () => {
    const t = parseTable(SAMPLE);
    expect(t.meta["tool"]).toBe("collapsim 0.1.0");
    expect(t.meta["command"]).toBe(
      "collapsim spectrum --config run.toml --out-dir out",
    );
    expect(t.meta["threshold"]).toBe("0.0126");
  });

  it("keeps header order and numeric values", () => {
    const t = parseTable(SAMPLE);
    expect(t.names).toEqual(["k", "p_zeta", "p_err"]);
    expect(t.rows).toBe(2);
    expect(column(t, "k")).toEqual([1, 2]);
    expect(column(t, "p_zeta")[0]).toBe(1.25e-9);
    expect(column(t, "p_zeta")[1]).toBe(2.2250738585072014e-308);
  });

  it("rejects non-numeric cells", () => {
    const bad = "a,b\n1,oops\n";
    expect(() => parseTable(bad)).toThrow(/column 'b'/);
  });

  it("rejects empty input", () => {
    expect(() => parseTable("")).toThrow(/header/);
  });

  it("names the missing column and the alternatives", () => {
    const t = parseTable(SAMPLE);
    expect(() => column(t, "nope")).toThrow(/no column 'nope'.*k, p_zeta/);
    expect(hasColumn(t, "p_err")).toBe(true);
    expect(hasColumn(t, "nope")).toBe(false);
  });
});

describe("readTable on fixtures", () => {
  it("reads the Monte-Carlo spectrum", () => {
    const t = readTable(fixture("spectrum.csv"));
    expect(t.names).toEqual(["k", "p_zeta", "p_err", "n_traj"]);
    expect(column(t, "k")).toEqual([1, 2]);
    expect(t.meta["tool"]).toMatch(/^collapsim /);
  });

  it("orders trajectory sample columns by index", () => {
    const t = readTable(fixture("csl_k0.csv"));
    expect(sampleColumns(t)).toEqual(
      [0, 1, 2, 3, 4, 5].map((j) => `zbar_sample_${j}`),
    );
    expect(column(t, "zbar_mean")[0]).toBe(0);
  });
});
