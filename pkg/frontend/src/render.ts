/**
 * CLI: render one collapsim CSV into an SVG figure.
 *
 *   node dist/render.js --kind spectrum --in out/spectrum.csv \
 *     --out spectrum.svg [--overlay out/spectrum_analytic.csv]
 */

import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import yargs from "yargs";

import { readTable } from "./csv.js";
import { buildFigure, FIGURE_KINDS, FigureKind } from "./figures.js";
import { renderFigure } from "./svg.js";

export async function runCli(argv: string[]): Promise<string> {
  const args = await yargs(argv)
    .usage("$0 --kind <figure> --in <csv> --out <svg> [--overlay <csv>]")
    .option("kind", {
      choices: FIGURE_KINDS,
      demandOption: true,
      describe: "figure type",
    })
    .option("in", {
      type: "string",
      demandOption: true,
      describe: "input CSV written by collapsim",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "output SVG path",
    })
    .option("overlay", {
      type: "string",
      describe: "second CSV drawn dashed on the same axes",
    })
    .option("width", { type: "number", default: 720 })
    .option("height", { type: "number", default: 480 })
    .strict()
    .fail((msg, err) => {
      throw err ?? new Error(msg);
    })
    .parse();

  const table = readTable(args.in);
  const overlay = args.overlay !== undefined
    ? readTable(args.overlay)
    : undefined;
  const figure = buildFigure(args.kind as FigureKind, table, overlay);
  const svg = renderFigure(figure, {
    width: args.width,
    height: args.height,
  });
  writeFileSync(args.out, svg, "utf8");
  return args.out;
}

const entry = process.argv[1];
if (entry !== undefined && import.meta.url === pathToFileURL(entry).href) {
  runCli(process.argv.slice(2)).catch((err: unknown) => {
    console.error(err instanceof Error ? err.message : String(err));
    process.exitCode = 1;
  });
}
