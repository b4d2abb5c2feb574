import { writeFileSync } from "node:fs";

import { DataError, readSeries } from "./csv.js";
import {
  envPopulationFile,
  loadRunMeta,
  populationFile,
  qsdFile,
  RunMeta,
  seriesPath,
} from "./rundir.js";
import { axesGroup, Box, Curve, document as svgDocument, errorPanel } from "./svg.js";

export type FigureId = "fig2" | "fig3" | "fig4" | "fig5";

export const FIGURE_IDS: FigureId[] = ["fig2", "fig3", "fig4", "fig5"];

export interface PanelSource {
  file: string;
  column: string;
  label: string;
  stroke: string;
  dash?: string;
}

export interface InsetSpec {
  sources: PanelSource[];
  xLabel: string;
  yLabel: string;
}

export interface PanelSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  sources: PanelSource[];
  inset?: InsetSpec;
}

export interface FigureSpec {
  dir: string;
  rows: number;
  cols: number;
  panels: PanelSpec[];
  output: "svg";
}

const KIND_COLOR: Record<string, string> = {
  markovian: "#222222",
  lorentzian: "#1f77b4",
  lorentzian_squared: "#d62728",
  ohmic: "#2ca02c",
};

const colorFor = (kind: string): string => KIND_COLOR[kind] ?? "#666666";

const letters = "abcdefghijklmnop";
const panelLetter = (i: number): string => `(${letters[i] ?? "?"})`;

/** 2x2 survival-probability layout: the memoryless reference panel plus
 * one panel per reservoir, each overlaying the reference as a dashed
 * guide. Used for both the single-qubit and the longer-chain runs. */
function populationFigure(meta: RunMeta): FigureSpec {
  const panels: PanelSpec[] = [];
  panels.push({
    title: `${panelLetter(0)} memoryless reference`,
    xLabel: "t",
    yLabel: "P(t)",
    sources: [
      {
        file: populationFile("markovian"),
        column: "value",
        label: "markovian",
        stroke: colorFor("markovian"),
      },
    ],
  });
  for (const [i, res] of meta.reservoirs.entries()) {
    panels.push({
      title: `${panelLetter(i + 1)} ${res.tag}`,
      xLabel: "t",
      yLabel: "P(t)",
      sources: [
        {
          file: populationFile(res.tag),
          column: "value",
          label: res.tag,
          stroke: colorFor(res.kind),
        },
        {
          file: populationFile("markovian"),
          column: "value",
          label: "reference",
          stroke: "#999999",
          dash: "4 3",
        },
      ],
    });
  }
  const rows = Math.ceil(panels.length / 2);
  return { dir: meta.dir, rows, cols: 2, panels, output: "svg" };
}

/** measures x reservoirs distance grid; `withInset` adds the
 * reservoir-population overlay on the Hellinger panel of the broad
 * (ohmic) column. */
function qsdFigure(meta: RunMeta, withInset: boolean): FigureSpec {
  const rows = meta.measures.length;
  const cols = meta.reservoirs.length;
  if (rows === 0 || cols === 0) {
    throw new DataError(`${meta.dir}: scenario has no measures or no reservoirs`);
  }
  const panels: PanelSpec[] = [];
  for (const [mi, measure] of meta.measures.entries()) {
    for (const [ri, res] of meta.reservoirs.entries()) {
      const panel: PanelSpec = {
        title: `${panelLetter(mi * cols + ri)} ${measure}, ${res.tag}`,
        xLabel: "t",
        yLabel: `D_${measure}`,
        sources: [
          {
            file: qsdFile(measure, res.tag),
            column: "value",
            label: `${measure} ${res.tag}`,
            stroke: colorFor(res.kind),
          },
        ],
      };
      if (withInset && measure === "hellinger" && res.kind === "ohmic") {
        panel.inset = {
          sources: [
            {
              file: envPopulationFile(res.tag),
              column: "value",
              label: "reservoir population",
              stroke: colorFor(res.kind),
            },
          ],
          xLabel: "t",
          yLabel: "P_env",
        };
      }
      panels.push(panel);
    }
  }
  return { dir: meta.dir, rows, cols, panels, output: "svg" };
}

export function buildFigure(dir: string, id: FigureId): FigureSpec {
  const meta = loadRunMeta(dir);
  switch (id) {
    case "fig2":
    case "fig4":
      return populationFigure(meta);
    case "fig3":
      return qsdFigure(meta, false);
    case "fig5":
      return qsdFigure(meta, true);
  }
}

export interface RenderResult {
  path: string;
  panelErrors: string[];
}

const CELL_W = 360;
const CELL_H = 296;
const BOX: Omit<Box, "x" | "y"> & { dx: number; dy: number } = {
  dx: 56,
  dy: 30,
  w: 276,
  h: 206,
};

function loadCurves(dir: string, sources: PanelSource[]): Curve[] {
  const curves: Curve[] = [];
  for (const src of sources) {
    const series = readSeries(seriesPath({ dir } as RunMeta, src.file), src.column);
    if (series.t.length !== series.value.length || series.t.length < 2) {
      throw new DataError(`${src.file}: series too short or ragged`);
    }
    curves.push({
      t: series.t,
      value: series.value,
      stroke: src.stroke,
      dash: src.dash,
    });
  }
  return curves;
}

/** Draw the figure. Panels whose data is missing or malformed come out
 * as annotated error cells; the list of their messages is returned so
 * the caller can pick the exit code. Writes nothing until the document
 * is fully composed. */
export function render(spec: FigureSpec, outPath: string): RenderResult {
  const parts: string[] = [];
  const panelErrors: string[] = [];

  for (const [i, panel] of spec.panels.entries()) {
    const row = Math.floor(i / spec.cols);
    const col = i % spec.cols;
    const box: Box = {
      x: col * CELL_W + BOX.dx,
      y: row * CELL_H + BOX.dy,
      w: BOX.w,
      h: BOX.h,
    };
    parts.push(`<g class="panel" data-title="${panel.title}">`);
    let curves: Curve[];
    try {
      curves = loadCurves(spec.dir, panel.sources);
    } catch (err) {
      const msg = err instanceof Error ? err.message : String(err);
      panelErrors.push(`${panel.title}: ${msg}`);
      parts.push(errorPanel(box, panel.title, msg));
      parts.push(`</g>`);
      continue;
    }
    parts.push(
      axesGroup(box, curves, { xLabel: panel.xLabel, yLabel: panel.yLabel, title: panel.title }, `clip${i}`),
    );

    if (panel.inset) {
      const insetBox: Box = {
        x: box.x + 0.52 * box.w,
        y: box.y + 0.1 * box.h,
        w: 0.42 * box.w,
        h: 0.38 * box.h,
      };
      parts.push(`<g class="inset">`);
      try {
        const insetCurves = loadCurves(spec.dir, panel.inset.sources);
        parts.push(
          axesGroup(
            insetBox,
            insetCurves,
            { xLabel: panel.inset.xLabel, yLabel: panel.inset.yLabel, title: "", fontScale: 0.7 },
            `clip${i}i`,
          ),
        );
      } catch (err) {
        const msg = err instanceof Error ? err.message : String(err);
        panelErrors.push(`${panel.title} inset: ${msg}`);
        parts.push(errorPanel(insetBox, "", msg));
      }
      parts.push(`</g>`);
    }
    parts.push(`</g>`);
  }

  const width = spec.cols * CELL_W + 20;
  const height = spec.rows * CELL_H + 24;
  writeFileSync(outPath, svgDocument(width, height, parts.join("\n")), "utf8");
  return { path: outPath, panelErrors };
}
