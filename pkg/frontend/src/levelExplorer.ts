/**
 * Level explorer: small-multiples grid of refinements at every level above
 * the sketch's measured source level. Cells fail independently.
 */

import { ApiError, ServiceClient } from "./client";
import type { RefineResponse, SketchState } from "./types";

export interface ExplorerCell {
  level: number;
  response: RefineResponse | null;
  error: string | null;
}

export interface ExplorerGrid {
  /** One measured source level, shared by every cell. */
  sourceLevel: number;
  cells: ExplorerCell[];
}

/** Levels the explorer enumerates: sourceLevel+1 .. nLevels. */
export function explorerLevels(sourceLevel: number, nLevels: number): number[] {
  const out: number[] = [];
  for (let level = sourceLevel + 1; level <= nLevels; level++) out.push(level);
  return out;
}

/**
 * Measure the sketch's level once, then request one refinement per finer
 * level. A failing cell records its error; the others still render.
 */
export async function exploreLevels(
  state: SketchState,
  client: ServiceClient,
  options: { k?: number; seed?: number; signal?: AbortSignal } = {},
): Promise<ExplorerGrid> {
  if (!state.model || !state.series) {
    throw new Error("draw a sketch and pick a model first");
  }
  const model = state.model;
  const series = state.series;
  const measured = await client.measure(model.model_id, series, options.signal);
  const sourceLevel = measured.level;

  const cells: ExplorerCell[] = [];
  for (const level of explorerLevels(sourceLevel, model.n_levels)) {
    try {
      const response = await client.refine(
        {
          model_id: model.model_id,
          series,
          target_level: level,
          source_level: sourceLevel,
          k: options.k ?? 3,
          seed: options.seed,
        },
        options.signal,
      );
      cells.push({ level, response, error: null });
    } catch (err) {
      if (err instanceof ApiError) {
        cells.push({ level, response: null, error: err.detail });
      } else {
        throw err;
      }
    }
  }
  return { sourceLevel, cells };
}
