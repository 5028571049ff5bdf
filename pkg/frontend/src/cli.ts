#!/usr/bin/env node
/**
 * stringdyn-plot render <manifest.json> [--out figure.svg]
 * stringdyn-plot compare <a.csv> <b.csv> [--tolerance 1e-8] [--interpolate]
 *
 * The manifest lists the CSV curves of one figure:
 *   { "output": "figure.svg", "title": "optional",
 *     "curves": [ { "path": "run_J0.csv", "label": "J/k = 0" }, ... ] }
 */

import { readFile, writeFile } from "node:fs/promises";
import process from "node:process";

import { CsvError, loadCsv } from "./csv.js";
import { GridMismatchError, compare, formatReport } from "./compare.js";
import { Curve, renderFigure } from "./render.js";

interface Manifest {
  output?: string;
  title?: string;
  curves: { path: string; label: string }[];
}

function fail(message: string, code = 2): never {
  console.error(`error: ${message}`);
  process.exit(code);
}

function takeOption(args: string[], name: string): string | undefined {
  const i = args.indexOf(name);
  if (i < 0) return undefined;
  const value = args[i + 1];
  if (value === undefined) fail(`${name} needs a value`);
  args.splice(i, 2);
  return value;
}

function takeFlag(args: string[], name: string): boolean {
  const i = args.indexOf(name);
  if (i < 0) return false;
  args.splice(i, 1);
  return true;
}

async function cmdRender(args: string[]): Promise<number> {
  const out = takeOption(args, "--out");
  if (args.length !== 1) fail("render needs exactly one manifest file");
  let manifest: Manifest;
  try {
    manifest = JSON.parse(await readFile(args[0], "utf8")) as Manifest;
  } catch (err) {
    fail(`cannot read manifest ${args[0]}: ${(err as Error).message}`);
  }
  if (!manifest.curves || manifest.curves.length === 0) {
    fail("manifest lists no curves");
  }
  const output = out ?? manifest.output;
  if (!output) fail("no output path: set --out or manifest.output");
  const curves: Curve[] = [];
  for (const entry of manifest.curves) {
    curves.push({ series: await loadCsv(entry.path), label: entry.label });
  }
  const svg = renderFigure(curves, { title: manifest.title });
  await writeFile(output, svg, "utf8");
  console.log(output);
  return 0;
}

async function cmdCompare(args: string[]): Promise<number> {
  const tolText = takeOption(args, "--tolerance") ?? "1e-8";
  const interpolate = takeFlag(args, "--interpolate");
  const tolerance = Number(tolText);
  if (!Number.isFinite(tolerance) || tolerance < 0) {
    fail(`bad tolerance ${tolText}`);
  }
  if (args.length !== 2) fail("compare needs exactly two CSV files");
  const a = await loadCsv(args[0]);
  const b = await loadCsv(args[1]);
  const report = compare(a, b, tolerance, interpolate);
  console.log(formatReport(report));
  return report.pass ? 0 : 1;
}

async function main(): Promise<number> {
  const [, , verb, ...rest] = process.argv;
  try {
    switch (verb) {
      case "render":
        return await cmdRender(rest);
      case "compare":
        return await cmdCompare(rest);
      default:
        fail("usage: stringdyn-plot render <manifest.json> | compare <a.csv> <b.csv>");
    }
  } catch (err) {
    if (err instanceof CsvError || err instanceof GridMismatchError) {
      fail(err.message, 3);
    }
    throw err;
  }
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(err);
    process.exit(4);
  },
);
