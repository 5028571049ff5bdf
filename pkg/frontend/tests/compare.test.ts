import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { GridMismatchError, compare } from "../src/compare.js";
import { parseCsv } from "../src/csv.js";

const FIXTURES = join(__dirname, "fixtures");

function load(name: string) {
  return parseCsv(readFileSync(join(FIXTURES, name), "utf8"), name);
}

describe("compare", () => {
  it("reports zero deviation for identical files", () => {
    const a = load("square-L-resonant_J1.csv");
    const b = load("square-L-resonant_J1.csv");
    const report = compare(a, b, 0);
    expect(report.maxDeviation).toBe(0);
    expect(report.pass).toBe(true);
    for (const col of report.columns) {
      expect(col.maxDeviation).toBe(0);
      expect(col.meanDeviation).toBe(0);
    }
  });

  it("passes dense vs krylov trajectories at 1e-8", () => {
    const report = compare(load("dense_J1.csv"), load("krylov_J1.csv"), 1e-8);
    expect(report.pass).toBe(true);
    expect(report.maxDeviation).toBeLessThanOrEqual(1e-8);
    expect(report.maxDeviation).toBeGreaterThan(0);
  });

  it("fails between different couplings at any small tolerance", () => {
    const report = compare(
      load("square-L-resonant_J0.csv"),
      load("square-L-resonant_J1.csv"),
      1e-3,
    );
    expect(report.pass).toBe(false);
    expect(report.maxDeviation).toBeGreaterThan(0.1);
  });

  it("rejects mismatched grids without the interpolation flag", () => {
    const a = load("square-L-resonant_J0.csv");
    const text = readFileSync(join(FIXTURES, "square-L-resonant_J0.csv"), "utf8");
    const lines = text.trim().split("\n");
    const coarse = [lines[0], ...lines.slice(1).filter((_, i) => i % 2 === 0)].join("\n");
    const b = parseCsv(coarse, "coarse.csv");
    expect(() => compare(a, b, 1e-8)).toThrowError(GridMismatchError);
    // with interpolation the shared grid points agree to rounding noise
    const report = compare(b, a, 1e-9, true);
    expect(report.interpolated).toBe(true);
    expect(report.pass).toBe(true);
  });

  it("interpolation refuses extrapolation", () => {
    const text =
      "t,fidelity,overlap_other_strings,matter_occupation,energy,norm_error\n" +
      "0,1,0,0,1,0\n1,1,0,0,1,0\n";
    const shortSeries = parseCsv(text, "short.csv");
    const a = load("square-L-resonant_J0.csv");
    expect(() => compare(a, shortSeries, 1e-8, true)).toThrowError(GridMismatchError);
  });
});
