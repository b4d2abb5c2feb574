import { readFileSync } from "node:fs";
import { join } from "node:path";
import { load } from "js-yaml";

import { DataError } from "./csv.js";

const FORMAT = "chainqsd-run/1";

export interface ReservoirInfo {
  tag: string;
  kind: string;
}

/** The slice of the run's meta document the figures need. */
export interface RunMeta {
  dir: string;
  reservoirs: ReservoirInfo[];
  measures: string[];
  nQubits: number;
  tEnd: number;
}

export function loadRunMeta(dir: string): RunMeta {
  let text: string;
  try {
    text = readFileSync(join(dir, "meta"), "utf8");
  } catch {
    throw new DataError(`${dir}: not a run directory (no meta document)`);
  }
  const doc = load(text) as Record<string, unknown>;
  if (!doc || doc["format"] !== FORMAT) {
    throw new DataError(`${dir}: unsupported meta format ${String(doc?.["format"])}`);
  }
  const sc = doc["scenario"] as Record<string, unknown>;
  const chain = sc["chain"] as Record<string, unknown>;
  const time = sc["time"] as Record<string, unknown>;
  const reservoirs = (sc["reservoirs"] as Record<string, unknown>[]).map((r) => ({
    tag: String(r["tag"]),
    kind: String(r["kind"]),
  }));
  return {
    dir,
    reservoirs,
    measures: (sc["measures"] as string[]).map(String),
    nQubits: Number(chain["n_qubits"]),
    tEnd: Number(time["t_end"]),
  };
}

export const seriesPath = (meta: RunMeta, name: string): string => join(meta.dir, name);

export const populationFile = (tag: string): string => `population_${tag}.csv`;
export const envPopulationFile = (tag: string): string => `env_population_${tag}.csv`;
export const qsdFile = (measure: string, tag: string): string => `qsd_${measure}_${tag}.csv`;
