/**
 * The four figure kinds over laboratory CSVs:
 *   eig-convergence  -- per-mode eigenvalue gap against the squeeze factor
 *   gap-ladder       -- relative spectral gaps with the 2*pi reference
 *   manifold-slice   -- one chart coefficient along the first coordinate
 *   semidistance     -- attractor semidistance decay in the squeeze factor
 */

import { CsvError, distinct, requireColumns, Table } from "./csv";
import { extentOf, PALETTE, renderScene, Series } from "./svg";

export interface FigureOptions {
  column?: string;
  logY?: boolean;
  title?: string;
}

export const FIGURE_KINDS = [
  "eig-convergence",
  "gap-ladder",
  "manifold-slice",
  "semidistance",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export function render(kind: FigureKind, table: Table,
                       opts: FigureOptions = {}): string {
  switch (kind) {
    case "eig-convergence":
      return eigConvergence(table, opts);
    case "gap-ladder":
      return gapLadder(table, opts);
    case "manifold-slice":
      return manifoldSlice(table, opts);
    case "semidistance":
      return semidistance(table, opts);
    default:
      throw new CsvError(`unknown figure kind '${kind}'`);
  }
}

function positiveFloor(values: number[]): number[] {
  const floor = 1e-16;
  return values.map((v) => (v > floor ? v : floor));
}

function eigConvergence(table: Table, opts: FigureOptions): string {
  requireColumns(table, ["epsilon", "j", "gap"]);
  const js = distinct(table, "j");
  const series: Series[] = js.map((j, idx) => {
    const rows = table.rows.filter((r) => r.j === j);
    return {
      label: `mode ${j}`,
      x: rows.map((r) => r.epsilon),
      y: positiveFloor(rows.map((r) => r.gap)),
      color: PALETTE[idx % PALETTE.length],
    };
  });
  const logY = opts.logY ?? true;
  return renderScene({
    title: opts.title ?? "Eigenvalue gap to the limit operator",
    xLabel: "squeeze factor",
    yLabel: "|lambda_eps - lambda_0|",
    xExtent: extentOf(series.flatMap((s) => s.x), false),
    yExtent: extentOf(series.flatMap((s) => s.y), logY),
    series,
  });
}

function gapLadder(table: Table, opts: FigureOptions): string {
  requireColumns(table, ["nu", "ratio"]);
  const rows = table.rows;
  const series: Series[] = [
    {
      label: "gap ratio",
      x: rows.map((r) => r.nu),
      y: rows.map((r) => r.ratio),
      color: PALETTE[0],
    },
  ];
  const twoPi = 2 * Math.PI;
  const ys = series[0].y.concat([twoPi]);
  return renderScene({
    title: opts.title ?? "Relative spectral gaps",
    xLabel: "mode index",
    yLabel: "(lambda_{nu+1} - lambda_nu) / sqrt(lambda_nu)",
    xExtent: extentOf(series[0].x, false),
    yExtent: extentOf(ys, opts.logY ?? false),
    series,
    references: [{ y: twoPi, label: "2 pi" }],
  });
}

function manifoldSlice(table: Table, opts: FigureOptions): string {
  requireColumns(table, ["xi_1"]);
  const xiCols = table.columns.filter((c) => c.startsWith("xi_"));
  const coefCols = table.columns.filter((c) => c.startsWith("L_"));
  if (coefCols.length === 0) {
    throw new CsvError("no chart coefficient columns (L_*)");
  }
  const nu = xiCols.length;
  const column = opts.column ?? `L_${nu + 1}`;
  requireColumns(table, [column]);
  // slice: secondary coordinates at their value closest to zero
  let rows = table.rows;
  for (const c of xiCols.slice(1)) {
    const vals = distinct(table, c);
    const nearest = vals.reduce((a, b) => (Math.abs(b) < Math.abs(a) ? b : a));
    rows = rows.filter((r) => r[c] === nearest);
  }
  rows = [...rows].sort((a, b) => a.xi_1 - b.xi_1);
  const series: Series[] = [
    {
      label: column,
      x: rows.map((r) => r.xi_1),
      y: rows.map((r) => r[column]),
      color: PALETTE[1],
    },
  ];
  return renderScene({
    title: opts.title ?? "Invariant manifold chart slice",
    xLabel: "xi_1",
    yLabel: column,
    xExtent: extentOf(series[0].x, false),
    yExtent: extentOf(series[0].y, false),
    series,
  });
}

function semidistance(table: Table, opts: FigureOptions): string {
  requireColumns(table, ["epsilon", "semidistance"]);
  const rows = [...table.rows].sort((a, b) => b.epsilon - a.epsilon);
  const series: Series[] = [
    {
      label: "semidistance",
      x: rows.map((r) => r.epsilon),
      y: positiveFloor(rows.map((r) => r.semidistance)),
      color: PALETTE[2],
    },
  ];
  const logY = opts.logY ?? true;
  return renderScene({
    title: opts.title ?? "Attractor semidistance to the limit",
    xLabel: "squeeze factor",
    yLabel: "sup-inf distance",
    xExtent: extentOf(series[0].x, true),
    yExtent: extentOf(series[0].y, logY),
    series,
  });
}
