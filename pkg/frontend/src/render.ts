/**
 * Three-panel figure from observable CSV files: fidelity, overlap with
 * the other minimal strings, and patch matter occupation versus time,
 * one curve per input file.  Pure function of its inputs.
 */

import { ColumnName, Series } from "./csv.js";
import { Box, escapeXml, fmt, polyline, ticks } from "./svg.js";

export interface Curve {
  series: Series;
  label: string;
}

export interface RenderOptions {
  width?: number;
  panelHeight?: number;
  title?: string;
}

const PANELS: { column: ColumnName; label: string; clamp01: boolean }[] = [
  { column: "fidelity", label: "fidelity", clamp01: true },
  { column: "overlap_other_strings", label: "overlap with other strings", clamp01: true },
  { column: "matter_occupation", label: "matter occupation", clamp01: false },
];

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const MARGIN = { left: 64, right: 16, top: 28, bottom: 40 };
const PANEL_GAP = 18;

export function renderFigure(curves: Curve[], options: RenderOptions = {}): string {
  if (curves.length === 0) {
    throw new Error("nothing to render: no curves given");
  }
  const width = options.width ?? 640;
  const panelHeight = options.panelHeight ?? 170;
  const innerWidth = width - MARGIN.left - MARGIN.right;
  const height =
    MARGIN.top + PANELS.length * panelHeight + (PANELS.length - 1) * PANEL_GAP + MARGIN.bottom;

  const tMin = Math.min(...curves.map((c) => c.series.columns.t[0]));
  const tMax = Math.max(...curves.map((c) => c.series.columns.t[c.series.nRows - 1]));

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${fmt(height)}" ` +
      `viewBox="0 0 ${width} ${fmt(height)}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${width}" height="${fmt(height)}" fill="white"/>`);
  if (options.title) {
    parts.push(
      `<text x="${width / 2}" y="18" text-anchor="middle" font-size="13">` +
        `${escapeXml(options.title)}</text>`,
    );
  }

  PANELS.forEach((panel, p) => {
    const box: Box = {
      x: MARGIN.left,
      y: MARGIN.top + p * (panelHeight + PANEL_GAP),
      width: innerWidth,
      height: panelHeight,
    };
    let lo = Infinity;
    let hi = -Infinity;
    for (const c of curves) {
      for (const v of c.series.columns[panel.column]) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
      }
    }
    if (panel.clamp01) {
      lo = 0;
      hi = 1;
    } else {
      if (lo > 0) lo = 0;
      if (hi <= lo) hi = lo + 1;
      hi *= 1.05;
    }
    parts.push(`<g class="panel" data-observable="${panel.column}">`);
    parts.push(
      `<rect x="${fmt(box.x)}" y="${fmt(box.y)}" width="${fmt(box.width)}" ` +
        `height="${fmt(box.height)}" fill="none" stroke="#222" stroke-width="1"/>`,
    );
    for (const tick of ticks(lo, hi, 4)) {
      const y = box.y + box.height - ((tick - lo) / (hi - lo)) * box.height;
      parts.push(
        `<line x1="${fmt(box.x - 4)}" y1="${fmt(y)}" x2="${fmt(box.x)}" y2="${fmt(y)}" ` +
          `stroke="#222"/>`,
      );
      parts.push(
        `<text x="${fmt(box.x - 8)}" y="${fmt(y + 3)}" text-anchor="end" font-size="10">` +
          `${fmt(tick)}</text>`,
      );
    }
    for (const tick of ticks(tMin, tMax, 5)) {
      const x = box.x + ((tick - tMin) / (tMax - tMin || 1)) * box.width;
      parts.push(
        `<line x1="${fmt(x)}" y1="${fmt(box.y + box.height)}" x2="${fmt(x)}" ` +
          `y2="${fmt(box.y + box.height + 4)}" stroke="#222"/>`,
      );
      if (p === PANELS.length - 1) {
        parts.push(
          `<text x="${fmt(x)}" y="${fmt(box.y + box.height + 16)}" text-anchor="middle" ` +
            `font-size="10">${fmt(tick)}</text>`,
        );
      }
    }
    parts.push(
      `<text x="${fmt(box.x - 48)}" y="${fmt(box.y + box.height / 2)}" font-size="11" ` +
        `text-anchor="middle" transform="rotate(-90 ${fmt(box.x - 48)} ` +
        `${fmt(box.y + box.height / 2)})">${escapeXml(panel.label)}</text>`,
    );
    curves.forEach((curve, k) => {
      const path = polyline(
        curve.series.columns.t,
        curve.series.columns[panel.column],
        box,
        [tMin, tMax],
        [lo, hi],
      );
      parts.push(
        `<path class="curve" d="${path}" fill="none" ` +
          `stroke="${PALETTE[k % PALETTE.length]}" stroke-width="1.4"/>`,
      );
    });
    parts.push("</g>");
  });

  const axisY = MARGIN.top + PANELS.length * panelHeight + (PANELS.length - 1) * PANEL_GAP;
  parts.push(
    `<text x="${MARGIN.left + innerWidth / 2}" y="${fmt(axisY + 32)}" ` +
      `text-anchor="middle" font-size="11">t·κ</text>`,
  );

  curves.forEach((curve, k) => {
    const x = MARGIN.left + 8 + k * 110;
    const y = MARGIN.top - 10;
    parts.push(
      `<line x1="${fmt(x)}" y1="${fmt(y)}" x2="${fmt(x + 18)}" y2="${fmt(y)}" ` +
        `stroke="${PALETTE[k % PALETTE.length]}" stroke-width="2"/>`,
    );
    parts.push(
      `<text x="${fmt(x + 22)}" y="${fmt(y + 3)}" font-size="10">` +
        `${escapeXml(curve.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
