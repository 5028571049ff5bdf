/**
 * Column-wise deviation report between two observable series.
 *
 * Grids must match exactly unless interpolation is requested, in which
 * case the second series is linearly interpolated onto the first grid
 * (its time range must cover the first).
 */

import { CSV_COLUMNS, ColumnName, CsvError, Series } from "./csv.js";

export interface ColumnReport {
  column: ColumnName;
  maxDeviation: number;
  meanDeviation: number;
}

export interface CompareReport {
  fileA: string;
  fileB: string;
  tolerance: number;
  interpolated: boolean;
  columns: ColumnReport[];
  maxDeviation: number;
  pass: boolean;
}

export class GridMismatchError extends Error {}

function interpolate(tOut: number[], tIn: number[], values: number[]): number[] {
  const out: number[] = [];
  let k = 0;
  for (const t of tOut) {
    if (t < tIn[0] || t > tIn[tIn.length - 1]) {
      throw new GridMismatchError(
        `interpolation target t=${t} outside source range [${tIn[0]}, ${tIn[tIn.length - 1]}]`,
      );
    }
    while (k < tIn.length - 2 && tIn[k + 1] <= t) k += 1;
    const span = tIn[k + 1] - tIn[k];
    const w = span === 0 ? 0 : (t - tIn[k]) / span;
    out.push(values[k] * (1 - w) + values[k + 1] * w);
  }
  return out;
}

export function compare(
  a: Series,
  b: Series,
  tolerance: number,
  interpolateFlag = false,
): CompareReport {
  const ta = a.columns.t;
  const tb = b.columns.t;
  const gridsMatch =
    ta.length === tb.length && ta.every((t, i) => t === tb[i]);
  if (!gridsMatch && !interpolateFlag) {
    throw new GridMismatchError(
      `${a.path} and ${b.path} have different time grids ` +
        `(${ta.length} vs ${tb.length} points); pass the interpolation flag`,
    );
  }
  const columns: ColumnReport[] = [];
  let worst = 0;
  for (const name of CSV_COLUMNS) {
    if (name === "t") continue;
    const va = a.columns[name];
    const vb = gridsMatch
      ? b.columns[name]
      : interpolate(ta, tb, b.columns[name]);
    let maxDev = 0;
    let sum = 0;
    for (let i = 0; i < va.length; i++) {
      const d = Math.abs(va[i] - vb[i]);
      if (d > maxDev) maxDev = d;
      sum += d;
    }
    const report = {
      column: name,
      maxDeviation: maxDev,
      meanDeviation: sum / va.length,
    };
    columns.push(report);
    if (maxDev > worst) worst = maxDev;
  }
  return {
    fileA: a.path,
    fileB: b.path,
    tolerance,
    interpolated: !gridsMatch,
    columns,
    maxDeviation: worst,
    pass: worst <= tolerance,
  };
}

export function formatReport(report: CompareReport): string {
  const lines = [
    `compare ${report.fileA} vs ${report.fileB}`,
    `tolerance ${report.tolerance}${report.interpolated ? " (interpolated)" : ""}`,
  ];
  for (const c of report.columns) {
    lines.push(
      `  ${c.column}: max ${c.maxDeviation.toExponential(3)} ` +
        `mean ${c.meanDeviation.toExponential(3)}`,
    );
  }
  lines.push(`max deviation ${report.maxDeviation.toExponential(3)}`);
  lines.push(report.pass ? "PASS" : "FAIL");
  return lines.join("\n");
}
