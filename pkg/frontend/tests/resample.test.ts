import { describe, expect, it } from "vitest";

import {
  dedupeStroke,
  interpolateStroke,
  resampleSketch,
  SketchValidationError,
} from "../src/resample";

describe("resampleSketch", () => {
  it("turns two corner points into a straight increasing line of length T", () => {
    const t = 128;
    // left-bottom to right-top in screen coordinates (y grows downward)
    const series = resampleSketch(
      [
        { x: 0, y: 200 },
        { x: 640, y: 0 },
      ],
      t,
    );
    expect(series).toHaveLength(t);
    for (let i = 1; i < t; i++) {
      expect(series[i]).toBeGreaterThan(series[i - 1]);
    }
    // uniform slope after normalization
    const step = series[1] - series[0];
    for (let i = 1; i < t; i++) {
      expect(series[i] - series[i - 1]).toBeCloseTo(step, 10);
    }
  });

  it("preserves knot values when the stroke is already at T uniform x positions", () => {
    const t = 16;
    const points = Array.from({ length: t }, (_, i) => ({
      x: i * 10,
      y: Math.sin(i / 3) * 40,
    }));
    const raw = interpolateStroke(points, t);
    points.forEach((p, i) => expect(raw[i]).toBeCloseTo(-p.y, 10));
  });

  it("collapses duplicate-x points keeping the last drawn", () => {
    const knots = dedupeStroke([
      { x: 0, y: 5 },
      { x: 10, y: 1 },
      { x: 10, y: 9 },
      { x: 20, y: 3 },
    ]);
    expect(knots).toEqual([
      { x: 0, y: 5 },
      { x: 10, y: 9 },
      { x: 20, y: 3 },
    ]);
  });

  it("rejects strokes with fewer than two usable points", () => {
    expect(() => resampleSketch([], 64)).toThrow(SketchValidationError);
    expect(() => resampleSketch([{ x: 3, y: 1 }], 64)).toThrow(SketchValidationError);
    // two points at the same x collapse to one
    expect(() =>
      resampleSketch(
        [
          { x: 3, y: 1 },
          { x: 3, y: 7 },
        ],
        64,
      ),
    ).toThrow(SketchValidationError);
  });

  it("always returns exactly T finite values for wiggly strokes", () => {
    for (const t of [2, 24, 128, 333]) {
      const points = Array.from({ length: 50 }, (_, i) => ({
        x: i * 3.7 + (i % 5 === 0 ? 0 : 0.01),
        y: Math.cos(i) * 120 + 60,
      }));
      const series = resampleSketch(points, t);
      expect(series).toHaveLength(t);
      series.forEach((v) => expect(Number.isFinite(v)).toBe(true));
    }
  });

  it("z-normalizes to zero mean and unit variance", () => {
    const series = resampleSketch(
      [
        { x: 0, y: 100 },
        { x: 50, y: 30 },
        { x: 100, y: 80 },
      ],
      64,
    );
    const mean = series.reduce((s, v) => s + v, 0) / series.length;
    const variance = series.reduce((s, v) => s + (v - mean) ** 2, 0) / series.length;
    expect(mean).toBeCloseTo(0, 10);
    expect(variance).toBeCloseTo(1, 10);
  });
});
