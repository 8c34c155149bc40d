/**
 * Strict reader for the harness result schema. One row per
 * (scenario, algorithm, sweep value, trial); aggregate rows carry the
 * literal trial marker AGGREGATE and a converged fraction instead of a
 * boolean.
 */
import Papa from "papaparse";

export const COLUMNS = [
  "scenario",
  "algorithm",
  "sweep_name",
  "sweep_value",
  "trial",
  "current_amps",
  "iterations",
  "converged",
  "wall_ms",
] as const;

export type ColumnName = (typeof COLUMNS)[number];

export const AGGREGATE = "AGGREGATE";

export interface ResultRow {
  scenario: string;
  algorithm: string;
  sweep_name: string;
  sweep_value: number;
  trial: number | typeof AGGREGATE;
  current_amps: number;
  iterations: number;
  /** true/false on trial rows, a fraction in [0, 1] on aggregate rows */
  converged: boolean | number;
  wall_ms: number;
}

export class SchemaError extends Error {}

function numeric(raw: string, column: ColumnName, line: number): number {
  const value = Number(raw);
  if (raw.trim() === "" || !Number.isFinite(value)) {
    if (raw.trim().toLowerCase() === "nan") return NaN; // failed-run rows
    throw new SchemaError(
      `line ${line}: column "${column}" is not numeric (got "${raw}")`,
    );
  }
  return value;
}

export function parseResults(text: string): ResultRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new SchemaError(`CSV parse error: ${first.message}`);
  }
  const fields = parsed.meta.fields ?? [];
  const missing = COLUMNS.filter((c) => !fields.includes(c));
  if (missing.length > 0) {
    const names = missing.map((c) => `"${c}"`).join(", ");
    const noun = missing.length === 1 ? "column" : "columns";
    throw new SchemaError(`missing ${noun} ${names}`);
  }

  return parsed.data.map((record, i) => {
    const line = i + 2; // 1-based, after the header line
    const trialRaw = record.trial;
    let trial: number | typeof AGGREGATE;
    if (trialRaw === AGGREGATE) {
      trial = AGGREGATE;
    } else {
      trial = numeric(trialRaw, "trial", line);
    }
    const convergedRaw = record.converged;
    let converged: boolean | number;
    if (convergedRaw === "true" || convergedRaw === "false") {
      converged = convergedRaw === "true";
    } else {
      converged = numeric(convergedRaw, "converged", line);
    }
    return {
      scenario: record.scenario,
      algorithm: record.algorithm,
      sweep_name: record.sweep_name,
      sweep_value: numeric(record.sweep_value, "sweep_value", line),
      trial,
      current_amps: numeric(record.current_amps, "current_amps", line),
      iterations: numeric(record.iterations, "iterations", line),
      converged,
      wall_ms: numeric(record.wall_ms, "wall_ms", line),
    };
  });
}

/** String-valued field lookup used for series grouping. */
export function groupKey(row: ResultRow, column: string): string {
  switch (column) {
    case "scenario":
      return row.scenario;
    case "algorithm":
      return row.algorithm;
    case "sweep_name":
      return row.sweep_name;
    default:
      throw new SchemaError(`cannot group by unknown column "${column}"`);
  }
}
