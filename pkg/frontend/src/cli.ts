/**
 * plot <csv> --scenario S --out FILE [--logy] [--scatter] [--group-by COL]
 *
 * Renders one scenario from a harness result CSV to an SVG image. Exit
 * codes: 0 success, 1 bad arguments or bad data, 2 I/O failure.
 */
import { parseArgs } from "node:util";

import { SchemaError } from "./csv.js";
import { DataError, render } from "./plot.js";

const USAGE =
  "usage: plot <csv> --scenario S --out FILE [--logy] [--scatter] " +
  "[--group-by COL]";

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        scenario: { type: "string" },
        out: { type: "string" },
        logy: { type: "boolean", default: false },
        scatter: { type: "boolean", default: false },
        "group-by": { type: "string", default: "algorithm" },
        help: { type: "boolean", default: false },
      },
    });
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    console.error(USAGE);
    return 1;
  }
  if (parsed.values.help) {
    console.log(USAGE);
    return 0;
  }
  const csvPath = parsed.positionals[0];
  const scenario = parsed.values.scenario;
  const outPath = parsed.values.out;
  if (csvPath === undefined || scenario === undefined || outPath === undefined) {
    console.error("error: csv path, --scenario, and --out are all required");
    console.error(USAGE);
    return 1;
  }
  if (parsed.positionals.length > 1) {
    console.error(`error: unexpected argument "${parsed.positionals[1]}"`);
    console.error(USAGE);
    return 1;
  }
  try {
    render({
      csvPath,
      scenario,
      outPath,
      yScale: parsed.values.logy ? "log" : "linear",
      includeTrials: parsed.values.scatter,
      groupBy: parsed.values["group-by"],
    });
  } catch (err) {
    if (err instanceof SchemaError || err instanceof DataError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    console.error(`i/o error: ${(err as Error).message}`);
    return 2;
  }
  console.log(`wrote ${outPath}`);
  return 0;
}
