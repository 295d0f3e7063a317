/** Shared types for the sketch-studio client. */

/** One freehand stroke point in screen coordinates (y grows downward). */
export interface StrokePoint {
  x: number;
  y: number;
}

/** A model entry as returned by GET /v1/models. */
export interface ModelInfo {
  model_id: string;
  series_length: number;
  n_levels: number;
  total_tokens: number;
  allocation: string;
  n_classes: number;
}

export interface MeasureResponse {
  model_id: string;
  distances: number[];
  improvements: number[];
  level: number;
  threshold: number;
}

export interface RefineResponse {
  model_id: string;
  samples: number[][];
  source_level_used: number;
  target_level: number;
  token_prefix_length: number;
  seed: number;
  sample_seeds: number[];
}

export interface RefineRequest {
  model_id: string;
  series: number[];
  target_level: number;
  source_level?: number;
  k?: number;
  temperature?: number;
  top_k?: number;
  class_label?: number;
  seed?: number;
}

/**
 * All client-side state for one sketch session. Responses are stored
 * verbatim; rendering never mutates returned samples.
 */
export interface SketchState {
  /** Raw freehand stroke in screen coordinates. */
  stroke: StrokePoint[];
  /** Resampled, z-normalized series of exactly model.series_length points. */
  series: number[] | null;
  model: ModelInfo | null;
  targetLevel: number;
  k: number;
  /** Most recent refinement, kept verbatim for overlay rendering. */
  lastResponse: RefineResponse | null;
  /** Inline error from the last failed request; the sketch survives it. */
  error: string | null;
}

export function emptySketchState(): SketchState {
  return {
    stroke: [],
    series: null,
    model: null,
    targetLevel: 8,
    k: 5,
    lastResponse: null,
    error: null,
  };
}
