export { DataError, readSeries, readTable } from "./csv.js";
export type { Series } from "./csv.js";
export { loadRunMeta, populationFile, envPopulationFile, qsdFile } from "./rundir.js";
export type { RunMeta, ReservoirInfo } from "./rundir.js";
export { buildFigure, render, FIGURE_IDS } from "./figures.js";
export type { FigureId, FigureSpec, PanelSpec, PanelSource, RenderResult } from "./figures.js";
export { ticks } from "./svg.js";
