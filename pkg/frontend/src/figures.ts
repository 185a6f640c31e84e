import { readFileSync, writeFileSync } from "fs";

import { column, columnIndex, parseTable, requirePreset, requireRows, DataTable } from "./csv.js";
import { SchemaMismatch } from "./errors.js";
import { Panel, renderFigure } from "./svg.js";

const BULK_COLOR = "#111111"; // band functions: black
const GAP_COLOR = "#cc2222"; // gap functions: red

export interface FigureSpec {
  figureId: string;
  /** Main CSV input; fig5 additionally takes a band-diagram CSV. */
  input: string;
  bandsInput?: string;
  output: string;
}

function load(path: string): DataTable {
  return parseTable(readFileSync(path, "utf-8"));
}

function pick(table: DataTable, names: string[]): number[][] {
  const idx = names.map((n) => columnIndex(table, n));
  return table.rows.map((row) => idx.map((i) => row[i]));
}

/** Split 1D sweep rows into bulk (beta = 0) and gap (beta != 0) series. */
function chainPanels(table: DataTable, deltaLabel: string): Panel[] {
  const rows = pick(table, ["alpha", "beta", "branch", "omega"]);
  const bulk = rows.filter((r) => r[1] === 0);
  const gap = rows.filter((r) => r[1] !== 0);
  const left: Panel = {
    title: "gap functions",
    xLabel: "beta",
    yLabel: "omega",
    series: [{ x: gap.map((r) => r[1]), y: gap.map((r) => r[3]), color: GAP_COLOR, style: "dots" }],
  };
  const right: Panel = {
    title: `band functions (${deltaLabel})`,
    xLabel: "alpha",
    yLabel: "omega",
    series: [{ x: bulk.map((r) => r[0]), y: bulk.map((r) => r[3]), color: BULK_COLOR, style: "dots" }],
  };
  return [left, right];
}

function renderChain1d(spec: FigureSpec): string {
  const table = load(spec.input);
  requirePreset(table, spec.figureId);
  requireRows(table);
  const caption = `1D subwavelength band structure, spacings ${table.metadata["spacings"] ?? "?"}, delta ${table.metadata["delta"] ?? "?"}`;
  return renderFigure(chainPanels(table, `delta = ${table.metadata["delta"]}`), caption);
}

function renderTransfer(spec: FigureSpec): string {
  const table = load(spec.input);
  requirePreset(table, spec.figureId);
  requireRows(table);
  const rows = pick(table, ["k", "branch", "alpha", "beta", "in_gap"]);
  const alphaPanel: Panel = {
    title: "alpha(k)",
    xLabel: "k",
    yLabel: "alpha",
    series: [
      {
        x: rows.filter((r) => !r[4]).map((r) => r[0]),
        y: rows.filter((r) => !r[4]).map((r) => r[2]),
        color: BULK_COLOR,
        style: "dots",
      },
      {
        x: rows.filter((r) => r[4]).map((r) => r[0]),
        y: rows.filter((r) => r[4]).map((r) => r[2]),
        color: GAP_COLOR,
        style: "dots",
      },
    ],
  };
  const betaPanel: Panel = {
    title: "beta(k)",
    xLabel: "k",
    yLabel: "beta",
    series: [
      { x: rows.map((r) => r[0]), y: rows.map((r) => r[3]), color: GAP_COLOR, style: "dots" },
    ],
  };
  const caption = `transfer-matrix sweep: a=${table.metadata["a"]}, n=${table.metadata["n"]}, delta=${table.metadata["delta"]}`;
  return renderFigure([alphaPanel, betaPanel], caption);
}

function renderSsh(spec: FigureSpec): string {
  const table = load(spec.input);
  requirePreset(table, "fig5");
  requireRows(table);
  if (!spec.bandsInput) {
    throw new SchemaMismatch("fig5 needs the band-diagram CSV as a second input (--bands)");
  }
  const bands = load(spec.bandsInput);
  requirePreset(bands, "fig5bands", "band-diagram input");
  requireRows(bands, "band-diagram input");

  const omega = Number(table.metadata["omega"]);
  const panels = chainPanels(bands, `delta = ${bands.metadata["delta"]}`);
  for (const panel of panels) {
    const xs = panel.series[0].x;
    if (xs.length === 0) continue;
    const lo = Math.min(...xs);
    const hi = Math.max(...xs);
    panel.series.push({ x: [lo, hi], y: [omega, omega], color: "#2255cc", style: "line", dash: "5,3" });
  }
  const bandPanel = panels[1];
  bandPanel.title = "band diagram with interface frequency";

  const rows = pick(table, ["resonator", "cell", "amplitude", "envelope"]);
  const modePanel: Panel = {
    title: "interface mode and decay envelope",
    xLabel: "resonator",
    yLabel: "u",
    series: [
      { x: rows.map((r) => r[0]), y: rows.map((r) => r[2]), color: "#2255cc", style: "line" },
      { x: rows.map((r) => r[0]), y: rows.map((r) => r[3]), color: GAP_COLOR, style: "line", dash: "4,3" },
      { x: rows.map((r) => r[0]), y: rows.map((r) => -r[3]), color: GAP_COLOR, style: "line", dash: "4,3" },
    ],
  };
  const logPanel: Panel = {
    title: "log scale",
    xLabel: "resonator",
    yLabel: "|u|",
    yScale: "log",
    series: [
      { x: rows.map((r) => r[0]), y: rows.map((r) => Math.abs(r[2])), color: "#2255cc", style: "dots", size: 2.2 },
      { x: rows.map((r) => r[0]), y: rows.map((r) => r[3]), color: GAP_COLOR, style: "line", dash: "4,3" },
    ],
  };
  const caption = `interface mode: omega=${table.metadata["omega"]}, predicted beta=${table.metadata["predicted_beta"]}`;
  return renderFigure([bandPanel, modePanel, logPanel], caption);
}

function renderBand2d(spec: FigureSpec): string {
  const table = load(spec.input);
  requirePreset(table, spec.figureId);
  requireRows(table);
  const rows = pick(table, ["kind", "band", "branch", "alpha_x", "alpha_y", "path_pos", "beta", "omega"]);
  const bulk = rows.filter((r) => r[0] === 0);
  const gap = rows.filter((r) => r[0] === 1);
  const zero = rows.filter((r) => r[0] === 2);
  const left: Panel = {
    title: "omega vs beta",
    xLabel: "|beta|",
    yLabel: "omega",
    series: [
      { x: gap.map((r) => r[6]), y: gap.map((r) => r[7]), color: GAP_COLOR, style: "dots" },
      { x: zero.map((r) => r[6]), y: zero.map((r) => r[7]), color: GAP_COLOR, style: "dots", size: 3.2 },
      { x: bulk.map((r) => 0), y: bulk.map((r) => r[7]), color: BULK_COLOR, style: "dots" },
    ],
  };
  let xTicks: { value: number; label: string }[] | undefined;
  const ticksMeta = table.metadata["ticks"];
  if (ticksMeta) {
    try {
      xTicks = (JSON.parse(ticksMeta) as [number, string][]).map(([value, label]) => ({ value, label }));
    } catch {
      xTicks = undefined;
    }
  }
  const right: Panel = {
    title: "omega vs alpha",
    xLabel: "alpha path",
    yLabel: "omega",
    xTicks,
    series: [
      { x: gap.map((r) => r[5]), y: gap.map((r) => r[7]), color: GAP_COLOR, style: "dots" },
      { x: zero.map((r) => r[5]), y: zero.map((r) => r[7]), color: GAP_COLOR, style: "dots", size: 3.2 },
      { x: bulk.map((r) => r[5]), y: bulk.map((r) => r[7]), color: BULK_COLOR, style: "dots" },
    ],
  };
  const caption = `complex band structure: R=${table.metadata["radius"]}, beta_dir=${table.metadata["beta_dir"]}, delta=${table.metadata["delta"]} (assumed)`;
  return renderFigure([left, right], caption);
}

function renderScan2d(spec: FigureSpec): string {
  const table = load(spec.input);
  requirePreset(table, spec.figureId);
  requireRows(table);
  const ts = column(table, "t");
  const lam = column(table, "lambda_max_abs");
  let vlines: { x: number; color: string; dash?: string }[] = [];
  try {
    const predictions = JSON.parse(table.metadata["predictions"] ?? "[]") as number[];
    vlines = predictions.map((x) => ({ x, color: "#888888", dash: "4,3" }));
  } catch {
    vlines = [];
  }
  const panel: Panel = {
    title: "capacitance magnitude along the decay axis",
    xLabel: "|beta|",
    yLabel: "max |lambda|",
    yScale: "log",
    vlines,
    series: [{ x: ts, y: lam, color: GAP_COLOR, style: "line" }],
  };
  const caption = `dilute singularity scan: R=${table.metadata["radius"]}; dashed lines mark zero-frequency Rayleigh points`;
  return renderFigure([panel], caption);
}

const RENDERERS: Record<string, (spec: FigureSpec) => string> = {
  fig2a: renderChain1d,
  fig2b: renderChain1d,
  fig5bands: renderChain1d,
  fig3a: renderTransfer,
  fig3b: renderTransfer,
  fig5: renderSsh,
  fig6: renderBand2d,
  fig7: renderBand2d,
  fig8: renderBand2d,
  fig7dilute: renderScan2d,
};

export const FIGURE_IDS = Object.keys(RENDERERS);

/** Render a figure to SVG text (no file output). */
export function renderToString(spec: FigureSpec): string {
  const renderer = RENDERERS[spec.figureId];
  if (!renderer) {
    throw new SchemaMismatch(
      `unknown figure id '${spec.figureId}' (known: ${FIGURE_IDS.join(", ")})`,
    );
  }
  return renderer(spec);
}

/** Render and write; on any error nothing is written. */
export function render(spec: FigureSpec): void {
  const svg = renderToString(spec);
  writeFileSync(spec.output, svg, "utf-8");
}
