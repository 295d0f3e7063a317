/**
 * Refinement overlay: the sketch condition rendered bold, with K translucent
 * generated samples on a shared axis. Rendering is pure data-in, SVG-out so
 * the browser shell stays a thin wrapper.
 */

import { ApiError, ServiceClient } from "./client";
import type { RefineResponse, SketchState } from "./types";

export interface Curve {
  kind: "sketch" | "sample";
  values: number[];
  /** Decode seed for sample curves, enabling CLI reproduction. */
  seed?: number;
}

export interface OverlayScene {
  curves: Curve[];
  sourceLevel: number;
  targetLevel: number;
  seeds: number[];
  /** Shared value axis across all curves. */
  yMin: number;
  yMax: number;
}

/**
 * Submit the current sketch for refinement and return the next state.
 * Errors keep the sketch and series untouched; only `error` changes.
 */
export async function submitRefinement(
  state: SketchState,
  client: ServiceClient,
  options: { seed?: number; signal?: AbortSignal } = {},
): Promise<SketchState> {
  if (!state.model || !state.series) {
    return { ...state, error: "draw a sketch and pick a model first" };
  }
  try {
    const response = await client.refine(
      {
        model_id: state.model.model_id,
        series: state.series,
        target_level: state.targetLevel,
        k: state.k,
        seed: options.seed,
      },
      options.signal,
    );
    return { ...state, lastResponse: response, error: null };
  } catch (err) {
    if (err instanceof ApiError) {
      return { ...state, error: err.detail };
    }
    throw err;
  }
}

/**
 * Re-run the last refinement with fresh seeds: same sketch, same levels,
 * no seed in the request so the service draws a new one.
 */
export async function regenerate(
  state: SketchState,
  client: ServiceClient,
  signal?: AbortSignal,
): Promise<SketchState> {
  return submitRefinement(state, client, { signal });
}

/** Build the scene for a refinement response: 1 sketch + K sample curves. */
export function buildOverlayScene(
  series: number[],
  response: RefineResponse,
): OverlayScene {
  const curves: Curve[] = [{ kind: "sketch", values: series }];
  response.samples.forEach((sample, i) => {
    curves.push({ kind: "sample", values: sample, seed: response.sample_seeds[i] });
  });
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const c of curves) {
    for (const v of c.values) {
      if (v < yMin) yMin = v;
      if (v > yMax) yMax = v;
    }
  }
  if (yMin === yMax) {
    yMin -= 1;
    yMax += 1;
  }
  return {
    curves,
    sourceLevel: response.source_level_used,
    targetLevel: response.target_level,
    seeds: [...response.sample_seeds],
    yMin,
    yMax,
  };
}

function polylinePoints(
  values: number[],
  width: number,
  height: number,
  yMin: number,
  yMax: number,
): string {
  const n = values.length;
  return values
    .map((v, i) => {
      const x = (i / (n - 1)) * width;
      const y = height - ((v - yMin) / (yMax - yMin)) * height;
      return `${x.toFixed(2)},${y.toFixed(2)}`;
    })
    .join(" ");
}

/** Render the scene to an SVG string: samples translucent, sketch bold on top. */
export function renderOverlaySvg(
  scene: OverlayScene,
  width = 640,
  height = 320,
): string {
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}">`,
  ];
  const ordered = [...scene.curves].sort((a) => (a.kind === "sketch" ? 1 : -1));
  for (const curve of ordered) {
    const pts = polylinePoints(curve.values, width, height, scene.yMin, scene.yMax);
    if (curve.kind === "sketch") {
      parts.push(
        `<polyline class="sketch" points="${pts}" fill="none" stroke="#1a1a2e" stroke-width="2.5"/>`,
      );
    } else {
      parts.push(
        `<polyline class="sample" data-seed="${curve.seed}" points="${pts}" ` +
          `fill="none" stroke="#3366cc" stroke-width="1" stroke-opacity="0.45"/>`,
      );
    }
  }
  parts.push("</svg>");
  return parts.join("");
}
