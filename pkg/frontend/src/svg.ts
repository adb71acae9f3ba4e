/**
 * Minimal deterministic SVG chart assembly: fixed canvas, fixed fonts,
 * stable number formatting, no timestamps.  Series are tagged with
 * class="series" and data-name so tests can count and identify them.
 */

export interface Scale {
  (value: number): number;
  ticks: number[];
}

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 72, right: 24, top: 36, bottom: 54 };

export const PLOT = {
  width: WIDTH,
  height: HEIGHT,
  x0: MARGIN.left,
  x1: WIDTH - MARGIN.right,
  y0: HEIGHT - MARGIN.bottom,
  y1: MARGIN.top,
};

export const COLORS = ["#1f6fb2", "#d1495b", "#3a8f5d", "#8a5ab8",
  "#c98a2b", "#4a4a4a", "#7aa6c2", "#b05fa0"];

export function fmt(value: number): string {
  if (!Number.isFinite(value)) {
    throw new Error(`non-finite coordinate: ${value}`);
  }
  return Number(value.toPrecision(6)).toString();
}

function niceStep(span: number): number {
  const raw = span / 6;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const mult of [1, 2, 5, 10]) {
    if (mult * mag >= raw) return mult * mag;
  }
  return 10 * mag;
}

export function linearScale(
  lo: number,
  hi: number,
  outLo: number,
  outHi: number,
): Scale {
  if (hi <= lo) {
    hi = lo + 1;
  }
  const f = (v: number) => outLo + ((v - lo) / (hi - lo)) * (outHi - outLo);
  const step = niceStep(hi - lo);
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12; t += step) {
    ticks.push(Number(t.toPrecision(10)));
  }
  return Object.assign(f, { ticks });
}

export function logScale(
  lo: number,
  hi: number,
  outLo: number,
  outHi: number,
): Scale {
  if (lo <= 0 || hi <= 0) {
    throw new Error("log scale needs positive bounds");
  }
  if (hi <= lo) {
    hi = lo * 10;
  }
  const a = Math.log10(lo);
  const b = Math.log10(hi);
  const f = (v: number) => outLo + ((Math.log10(v) - a) / (b - a)) * (outHi - outLo);
  const ticks: number[] = [];
  for (let e = Math.ceil(a - 1e-12); e <= Math.floor(b + 1e-12); e++) {
    ticks.push(Math.pow(10, e));
  }
  if (ticks.length === 0) {
    ticks.push(Math.pow(10, Math.round((a + b) / 2)));
  }
  return Object.assign(f, { ticks });
}

function tickLabel(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 1e4 || Math.abs(v) < 1e-3)) {
    const e = Math.round(Math.log10(Math.abs(v)));
    if (Math.abs(v / Math.pow(10, e) - 1) < 1e-9) {
      return `1e${e}`;
    }
    return v.toExponential(1);
  }
  return Number(v.toPrecision(6)).toString();
}

export interface Series {
  name: string;
  points: Array<[number, number]>;
  dashed?: boolean;
}

export interface Bar {
  label: string;
  value: number;
}

export class Figure {
  private parts: string[] = [];
  private legendRow = 0;

  constructor(title: string, xLabel: string, yLabel: string) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
        `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
        `font-family="Helvetica, Arial, sans-serif">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
      `<text x="${WIDTH / 2}" y="22" text-anchor="middle" ` +
        `font-size="15">${title}</text>`,
      `<text x="${(PLOT.x0 + PLOT.x1) / 2}" y="${HEIGHT - 14}" ` +
        `text-anchor="middle" font-size="12">${xLabel}</text>`,
      `<text x="18" y="${(PLOT.y0 + PLOT.y1) / 2}" text-anchor="middle" ` +
        `font-size="12" transform="rotate(-90 18 ` +
        `${(PLOT.y0 + PLOT.y1) / 2})">${yLabel}</text>`,
    );
  }

  axes(xScale: Scale, yScale: Scale): void {
    this.parts.push(
      `<line x1="${PLOT.x0}" y1="${PLOT.y0}" x2="${PLOT.x1}" ` +
        `y2="${PLOT.y0}" stroke="#333333"/>`,
      `<line x1="${PLOT.x0}" y1="${PLOT.y0}" x2="${PLOT.x0}" ` +
        `y2="${PLOT.y1}" stroke="#333333"/>`,
    );
    for (const t of xScale.ticks) {
      const x = fmt(xScale(t));
      this.parts.push(
        `<line x1="${x}" y1="${PLOT.y0}" x2="${x}" y2="${PLOT.y0 + 5}" ` +
          `stroke="#333333"/>`,
        `<text x="${x}" y="${PLOT.y0 + 18}" text-anchor="middle" ` +
          `font-size="11">${tickLabel(t)}</text>`,
      );
    }
    for (const t of yScale.ticks) {
      const y = fmt(yScale(t));
      this.parts.push(
        `<line x1="${PLOT.x0 - 5}" y1="${y}" x2="${PLOT.x0}" y2="${y}" ` +
          `stroke="#333333"/>`,
        `<text x="${PLOT.x0 - 8}" y="${y}" text-anchor="end" ` +
          `dominant-baseline="middle" font-size="11">${tickLabel(t)}</text>`,
      );
    }
  }

  series(s: Series, xScale: Scale, yScale: Scale, color: string): void {
    const pts = s.points
      .map(([x, y]) => `${fmt(xScale(x))},${fmt(yScale(y))}`)
      .join(" ");
    const dash = s.dashed ? ' stroke-dasharray="6 4"' : "";
    this.parts.push(
      `<polyline class="series" data-name="${s.name}" fill="none" ` +
        `stroke="${color}" stroke-width="1.5"${dash} points="${pts}"/>`,
    );
  }

  bars(bars: Bar[], xScale: Scale, yScale: Scale, color: string): void {
    const slot = (PLOT.x1 - PLOT.x0) / Math.max(bars.length, 1);
    bars.forEach((bar, i) => {
      const x = PLOT.x0 + i * slot + slot * 0.15;
      const y = yScale(bar.value);
      const h = PLOT.y0 - y;
      this.parts.push(
        `<rect class="bar" data-label="${bar.label}" x="${fmt(x)}" ` +
          `y="${fmt(y)}" width="${fmt(slot * 0.7)}" height="${fmt(h)}" ` +
          `fill="${color}"/>`,
        `<text x="${fmt(x + slot * 0.35)}" y="${PLOT.y0 + 18}" ` +
          `text-anchor="middle" font-size="11">${bar.label}</text>`,
      );
    });
  }

  legend(label: string, color: string, dashed = false): void {
    const y = PLOT.y1 + 14 + this.legendRow * 16;
    const x = PLOT.x1 - 190;
    const dash = dashed ? ' stroke-dasharray="6 4"' : "";
    this.parts.push(
      `<line x1="${x}" y1="${y - 4}" x2="${x + 22}" y2="${y - 4}" ` +
        `stroke="${color}" stroke-width="1.5"${dash}/>`,
      `<text class="legend" x="${x + 28}" y="${y}" ` +
        `font-size="11">${label}</text>`,
    );
    this.legendRow += 1;
  }

  toString(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}
