/** Dependency-free SVG output. Everything is deterministic: the same
 * data always yields the same bytes, which keeps re-renders idempotent
 * and lets tests compare whole files. */

export interface Box {
  x: number;
  y: number;
  w: number;
  h: number;
}

const fmt = (x: number): string => {
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
};

export const escapeText = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

/** Round ticks covering [lo, hi]: 1/2/5 ladder, at most `want` labels. */
export function ticks(lo: number, hi: number, want = 5): number[] {
  if (!(hi > lo)) return [lo];
  const raw = (hi - lo) / Math.max(want - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * step; v += step) {
    out.push(Math.abs(v) < 1e-12 * step ? 0 : v);
  }
  return out;
}

const tickLabel = (v: number): string => {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-2) return v.toExponential(0).replace("e+", "e");
  return String(parseFloat(v.toPrecision(4)));
};

export interface Curve {
  t: number[];
  value: number[];
  stroke: string;
  width?: number;
  dash?: string;
}

export interface AxesOptions {
  xLabel: string;
  yLabel: string;
  title: string;
  fontScale?: number;
}

/** One panel: frame, ticks, labels, curves clipped to the frame. */
export function axesGroup(box: Box, curves: Curve[], opt: AxesOptions, clipId: string): string {
  const fs = opt.fontScale ?? 1;
  let tLo = Infinity;
  let tHi = -Infinity;
  let vLo = Infinity;
  let vHi = -Infinity;
  for (const c of curves) {
    for (const x of c.t) {
      if (x < tLo) tLo = x;
      if (x > tHi) tHi = x;
    }
    for (const y of c.value) {
      if (y < vLo) vLo = y;
      if (y > vHi) vHi = y;
    }
  }
  if (!Number.isFinite(tLo)) {
    tLo = 0;
    tHi = 1;
    vLo = 0;
    vHi = 1;
  }
  if (vHi === vLo) {
    vHi = vLo + 1;
  }
  const pad = 0.04 * (vHi - vLo);
  vLo -= pad;
  vHi += pad;

  const px = (t: number): number => box.x + ((t - tLo) / (tHi - tLo)) * box.w;
  const py = (v: number): number => box.y + box.h - ((v - vLo) / (vHi - vLo)) * box.h;

  const parts: string[] = [];
  parts.push(
    `<rect x="${fmt(box.x)}" y="${fmt(box.y)}" width="${fmt(box.w)}" height="${fmt(box.h)}" fill="white" stroke="black" stroke-width="0.8"/>`,
  );

  for (const tv of ticks(tLo, tHi)) {
    const x = px(tv);
    parts.push(`<line x1="${fmt(x)}" y1="${fmt(box.y + box.h)}" x2="${fmt(x)}" y2="${fmt(box.y + box.h - 4)}" stroke="black" stroke-width="0.6"/>`);
    parts.push(
      `<text x="${fmt(x)}" y="${fmt(box.y + box.h + 11 * fs)}" font-size="${fmt(9 * fs)}" text-anchor="middle">${tickLabel(tv)}</text>`,
    );
  }
  for (const tv of ticks(vLo, vHi, 4)) {
    const y = py(tv);
    parts.push(`<line x1="${fmt(box.x)}" y1="${fmt(y)}" x2="${fmt(box.x + 4)}" y2="${fmt(y)}" stroke="black" stroke-width="0.6"/>`);
    parts.push(
      `<text x="${fmt(box.x - 4)}" y="${fmt(y + 3 * fs)}" font-size="${fmt(9 * fs)}" text-anchor="end">${tickLabel(tv)}</text>`,
    );
  }

  parts.push(
    `<text x="${fmt(box.x + box.w / 2)}" y="${fmt(box.y + box.h + 26 * fs)}" font-size="${fmt(10 * fs)}" text-anchor="middle">${escapeText(opt.xLabel)}</text>`,
  );
  parts.push(
    `<text x="${fmt(box.x - 34 * fs)}" y="${fmt(box.y + box.h / 2)}" font-size="${fmt(10 * fs)}" text-anchor="middle" transform="rotate(-90 ${fmt(box.x - 34 * fs)} ${fmt(box.y + box.h / 2)})">${escapeText(opt.yLabel)}</text>`,
  );
  parts.push(
    `<text x="${fmt(box.x + box.w / 2)}" y="${fmt(box.y - 6)}" font-size="${fmt(11 * fs)}" text-anchor="middle" font-weight="bold">${escapeText(opt.title)}</text>`,
  );

  parts.push(`<clipPath id="${clipId}"><rect x="${fmt(box.x)}" y="${fmt(box.y)}" width="${fmt(box.w)}" height="${fmt(box.h)}"/></clipPath>`);
  for (const c of curves) {
    const pts: string[] = [];
    for (let i = 0; i < c.t.length; i++) {
      pts.push(`${fmt(px(c.t[i] as number))},${fmt(py(c.value[i] as number))}`);
    }
    const dash = c.dash ? ` stroke-dasharray="${c.dash}"` : "";
    parts.push(
      `<polyline points="${pts.join(" ")}" fill="none" stroke="${c.stroke}" stroke-width="${fmt(c.width ?? 1.1)}"${dash} clip-path="url(#${clipId})"/>`,
    );
  }
  return parts.join("\n");
}

/** Centered annotation used when a panel's data cannot be read. */
export function errorPanel(box: Box, title: string, message: string): string {
  return [
    `<rect x="${fmt(box.x)}" y="${fmt(box.y)}" width="${fmt(box.w)}" height="${fmt(box.h)}" fill="#fff4f4" stroke="#c00" stroke-width="0.8"/>`,
    `<text x="${fmt(box.x + box.w / 2)}" y="${fmt(box.y - 6)}" font-size="11" text-anchor="middle" font-weight="bold">${escapeText(title)}</text>`,
    `<text x="${fmt(box.x + box.w / 2)}" y="${fmt(box.y + box.h / 2)}" font-size="9" text-anchor="middle" fill="#c00">${escapeText(message)}</text>`,
  ].join("\n");
}

export function document(width: number, height: number, body: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    body,
    `</svg>`,
    ``,
  ].join("\n");
}
