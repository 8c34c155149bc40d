/**
 * Every scenario family the harness emits must render without error and
 * byte-identically across repeated runs, both through the library and
 * through the CLI binary.
 */
import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { parseResults } from "../src/csv.js";
import { renderSvg } from "../src/plot.js";

const FIXTURES = ["convergence", "idc_vs_N", "idc_vs_L", "discrete_bits"];

const fixturePath = (name: string) =>
  fileURLToPath(new URL(`./fixtures/${name}.csv`, import.meta.url));
const binPath = fileURLToPath(new URL("../dist/bin.js", import.meta.url));

describe("deterministic rendering", () => {
  for (const name of FIXTURES) {
    it(`renders ${name} identically twice in-process`, () => {
      const first = renderSvg(parseResults(readFileSync(fixturePath(name), "utf-8")), {
        scenario: name,
      });
      const second = renderSvg(parseResults(readFileSync(fixturePath(name), "utf-8")), {
        scenario: name,
      });
      expect(first.startsWith("<svg")).toBe(true);
      expect(first.length).toBeGreaterThan(1000);
      expect(second).toBe(first);
    });

    it(`renders ${name} identically twice through the CLI`, () => {
      const dir = mkdtempSync(join(tmpdir(), "plotdet-"));
      const outputs: Buffer[] = [];
      for (const tag of ["a", "b"]) {
        const out = join(dir, `${name}-${tag}.svg`);
        const proc = spawnSync(process.execPath, [
          binPath,
          fixturePath(name),
          "--scenario",
          name,
          "--out",
          out,
        ]);
        expect(proc.status, proc.stderr.toString()).toBe(0);
        outputs.push(readFileSync(out));
      }
      expect(outputs[0].equals(outputs[1])).toBe(true);
    });
  }

  it("stays deterministic with the log axis and the trial overlay", () => {
    const rows = () =>
      parseResults(readFileSync(fixturePath("idc_vs_L"), "utf-8"));
    const opts = {
      scenario: "idc_vs_L",
      yScale: "log" as const,
      includeTrials: true,
    };
    expect(renderSvg(rows(), opts)).toBe(renderSvg(rows(), opts));
  });
});
