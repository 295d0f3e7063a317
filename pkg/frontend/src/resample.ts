/** Stroke-to-series resampling: monotone-x piecewise-linear interpolation. */

import type { StrokePoint } from "./types";

export class SketchValidationError extends Error {}

/**
 * Collapse duplicate-x points, keeping the last one drawn at each x.
 * The surviving points are sorted by x.
 */
export function dedupeStroke(points: StrokePoint[]): StrokePoint[] {
  const byX = new Map<number, StrokePoint>();
  for (const p of points) {
    byX.set(p.x, p);
  }
  return [...byX.values()].sort((a, b) => a.x - b.x);
}

/**
 * Piecewise-linear interpolation of a stroke at `t` uniform abscissae.
 *
 * Duplicate x positions collapse deterministically (last drawn wins); the
 * remaining knots must give at least two strictly increasing x values.
 * Screen y grows downward, so the value axis is flipped. Values are in
 * screen units; see resampleSketch for model units.
 */
export function interpolateStroke(points: StrokePoint[], t: number): number[] {
  if (!Number.isInteger(t) || t < 2) {
    throw new SketchValidationError(`series length must be an integer >= 2, got ${t}`);
  }
  const knots = dedupeStroke(points).filter(
    (p) => Number.isFinite(p.x) && Number.isFinite(p.y),
  );
  if (knots.length < 2) {
    throw new SketchValidationError(
      "draw a longer stroke: need at least two points at distinct x positions",
    );
  }

  const x0 = knots[0].x;
  const x1 = knots[knots.length - 1].x;
  const out = new Array<number>(t);
  let seg = 0;
  for (let i = 0; i < t; i++) {
    const x = x0 + ((x1 - x0) * i) / (t - 1);
    while (seg < knots.length - 2 && knots[seg + 1].x < x) seg++;
    const a = knots[seg];
    const b = knots[seg + 1];
    const w = (x - a.x) / (b.x - a.x);
    // flip: screen y grows downward, series values grow upward
    out[i] = -(a.y + w * (b.y - a.y));
  }
  return out;
}

/**
 * Resample a stroke to exactly `t` samples in model units: interpolate,
 * then z-normalize (the models operate in normalized space).
 */
export function resampleSketch(points: StrokePoint[], t: number): number[] {
  return znormalize(interpolateStroke(points, t));
}

/** Normalize to zero mean, unit variance; a flat sketch stays at zero. */
export function znormalize(values: number[]): number[] {
  const mean = values.reduce((s, v) => s + v, 0) / values.length;
  const variance =
    values.reduce((s, v) => s + (v - mean) * (v - mean), 0) / values.length;
  const std = Math.sqrt(variance);
  if (std === 0) return values.map(() => 0);
  return values.map((v) => (v - mean) / std);
}
