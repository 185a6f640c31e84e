/** Minimal SVG panel plotting: just enough for band diagrams. */

export interface Series {
  x: number[];
  y: number[];
  color: string;
  /** "dots" scatters markers, "line" joins points in order. */
  style: "dots" | "line";
  size?: number;
  dash?: string;
}

export interface Panel {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  yScale?: "linear" | "log";
  xTicks?: { value: number; label: string }[];
  vlines?: { x: number; color: string; dash?: string }[];
  xRange?: [number, number];
  yRange?: [number, number];
}

const PANEL_W = 420;
const PANEL_H = 360;
const MARGIN = { left: 62, right: 16, top: 34, bottom: 46 };

function finite(values: number[]): number[] {
  return values.filter((v) => Number.isFinite(v));
}

function extent(values: number[], pad = 0.04): [number, number] {
  const vals = finite(values);
  if (vals.length === 0) return [0, 1];
  let lo = Math.min(...vals);
  let hi = Math.max(...vals);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const span = hi - lo;
  return [lo - pad * span, hi + pad * span];
}

function ticks(lo: number, hi: number, count = 5): number[] {
  const rawStep = (hi - lo) / count;
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * power).find((s) => (hi - lo) / s <= count + 1) ?? rawStep;
  const first = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = first; v <= hi + 1e-12 * Math.abs(step); v += step) out.push(v);
  return out;
}

function fmt(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1000 || abs < 0.01) return value.toExponential(1);
  return parseFloat(value.toPrecision(4)).toString();
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function renderPanel(panel: Panel, originX: number, originY: number): string {
  const logY = panel.yScale === "log";
  const xs = panel.series.flatMap((s) => s.x).concat((panel.vlines ?? []).map((v) => v.x));
  const ysRaw = panel.series.flatMap((s) => s.y);
  const ys = logY ? ysRaw.filter((v) => v > 0).map(Math.log10) : ysRaw;
  const [x0, x1] = panel.xRange ?? extent(xs);
  const [y0, y1] = panel.yRange
    ? (logY ? [Math.log10(panel.yRange[0]), Math.log10(panel.yRange[1])] : panel.yRange)
    : extent(ys);
  const plotW = PANEL_W - MARGIN.left - MARGIN.right;
  const plotH = PANEL_H - MARGIN.top - MARGIN.bottom;
  const px = (x: number) => originX + MARGIN.left + ((x - x0) / (x1 - x0)) * plotW;
  const py = (y: number) => originY + MARGIN.top + plotH - ((y - y0) / (y1 - y0)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<rect x="${originX + MARGIN.left}" y="${originY + MARGIN.top}" width="${plotW}" height="${plotH}" fill="white" stroke="#333" stroke-width="1"/>`,
  );
  parts.push(
    `<text x="${originX + PANEL_W / 2}" y="${originY + 20}" text-anchor="middle" font-size="14" font-family="sans-serif">${esc(panel.title)}</text>`,
  );

  const xTickDefs =
    panel.xTicks ?? ticks(x0, x1).map((v) => ({ value: v, label: fmt(v) }));
  for (const tick of xTickDefs) {
    if (tick.value < x0 - 1e-12 || tick.value > x1 + 1e-12) continue;
    const x = px(tick.value);
    const yBase = originY + MARGIN.top + plotH;
    parts.push(`<line x1="${x}" y1="${yBase}" x2="${x}" y2="${yBase + 5}" stroke="#333"/>`);
    parts.push(
      `<text x="${x}" y="${yBase + 18}" text-anchor="middle" font-size="11" font-family="sans-serif">${esc(tick.label)}</text>`,
    );
  }
  for (const v of ticks(y0, y1)) {
    const y = py(v);
    parts.push(`<line x1="${originX + MARGIN.left - 5}" y1="${y}" x2="${originX + MARGIN.left}" y2="${y}" stroke="#333"/>`);
    const label = logY ? `1e${fmt(v)}` : fmt(v);
    parts.push(
      `<text x="${originX + MARGIN.left - 8}" y="${y + 4}" text-anchor="end" font-size="11" font-family="sans-serif">${esc(label)}</text>`,
    );
  }
  parts.push(
    `<text x="${originX + MARGIN.left + plotW / 2}" y="${originY + PANEL_H - 8}" text-anchor="middle" font-size="12" font-family="sans-serif">${esc(panel.xLabel)}</text>`,
  );
  parts.push(
    `<text x="${originX + 16}" y="${originY + MARGIN.top + plotH / 2}" text-anchor="middle" font-size="12" font-family="sans-serif" transform="rotate(-90 ${originX + 16} ${originY + MARGIN.top + plotH / 2})">${esc(panel.yLabel)}</text>`,
  );

  for (const vline of panel.vlines ?? []) {
    if (vline.x < x0 || vline.x > x1) continue;
    const x = px(vline.x);
    parts.push(
      `<line x1="${x}" y1="${originY + MARGIN.top}" x2="${x}" y2="${originY + MARGIN.top + plotH}" stroke="${vline.color}" stroke-width="1"${vline.dash ? ` stroke-dasharray="${vline.dash}"` : ""}/>`,
    );
  }

  for (const series of panel.series) {
    const pts: [number, number][] = [];
    for (let i = 0; i < series.x.length; i++) {
      const yRaw = series.y[i];
      const y = logY ? (yRaw > 0 ? Math.log10(yRaw) : NaN) : yRaw;
      if (!Number.isFinite(series.x[i]) || !Number.isFinite(y)) continue;
      pts.push([px(series.x[i]), py(y)]);
    }
    if (series.style === "line" && pts.length > 1) {
      const d = pts.map((p, i) => `${i === 0 ? "M" : "L"}${p[0].toFixed(2)},${p[1].toFixed(2)}`).join("");
      parts.push(
        `<path d="${d}" fill="none" stroke="${series.color}" stroke-width="1.4"${series.dash ? ` stroke-dasharray="${series.dash}"` : ""}/>`,
      );
    } else {
      const r = series.size ?? 1.6;
      for (const [x, y] of pts) {
        parts.push(`<circle cx="${x.toFixed(2)}" cy="${y.toFixed(2)}" r="${r}" fill="${series.color}"/>`);
      }
    }
  }
  return parts.join("\n");
}

/** Compose panels side by side into one standalone SVG document. */
export function renderFigure(panels: Panel[], caption: string): string {
  const width = PANEL_W * panels.length;
  const height = PANEL_H + 24;
  const body = panels.map((panel, i) => renderPanel(panel, i * PANEL_W, 0)).join("\n");
  const captionText = `<text x="${width / 2}" y="${PANEL_H + 14}" text-anchor="middle" font-size="12" font-family="sans-serif">${esc(caption)}</text>`;
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    body,
    captionText,
    `</svg>`,
    ``,
  ].join("\n");
}
