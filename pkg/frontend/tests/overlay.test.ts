import { describe, expect, it } from "vitest";

import { ServiceClient, type FetchLike } from "../src/client";
import {
  buildOverlayScene,
  regenerate,
  renderOverlaySvg,
  submitRefinement,
} from "../src/overlay";
import { emptySketchState, type RefineResponse, type SketchState } from "../src/types";

const T = 32;
const MODEL = {
  model_id: "toy",
  series_length: T,
  n_levels: 8,
  total_tokens: 128,
  allocation: "pow2",
  n_classes: 2,
};

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function refineResponse(k: number, seed: number): RefineResponse {
  return {
    model_id: "toy",
    samples: Array.from({ length: k }, (_, i) =>
      Array.from({ length: T }, (_, j) => Math.sin(j / 3 + i)),
    ),
    source_level_used: 2,
    target_level: 8,
    token_prefix_length: 2,
    seed,
    sample_seeds: Array.from({ length: k }, (_, i) => seed + i),
  };
}

function sketchState(): SketchState {
  return {
    ...emptySketchState(),
    model: MODEL,
    series: Array.from({ length: T }, (_, i) => Math.cos(i / 5)),
    targetLevel: 8,
    k: 5,
  };
}

describe("submitRefinement overlay", () => {
  it("renders 1 + K curves for a successful K=5 call", async () => {
    const mock: FetchLike = async () => jsonResponse(200, refineResponse(5, 42));
    const client = new ServiceClient("", mock);
    const state = await submitRefinement(sketchState(), client);

    expect(state.error).toBeNull();
    expect(state.lastResponse).not.toBeNull();
    const scene = buildOverlayScene(state.series!, state.lastResponse!);
    expect(scene.curves).toHaveLength(6);
    expect(scene.curves.filter((c) => c.kind === "sketch")).toHaveLength(1);
    expect(scene.curves.filter((c) => c.kind === "sample")).toHaveLength(5);

    const svg = renderOverlaySvg(scene);
    expect(svg.match(/<polyline class="sample"/g)).toHaveLength(5);
    expect(svg.match(/<polyline class="sketch"/g)).toHaveLength(1);
  });

  it("shows the message and keeps the sketch on a 400 level conflict", async () => {
    const mock: FetchLike = async () =>
      jsonResponse(400, { detail: "source level 8 >= target level 8; raise the target level" });
    const client = new ServiceClient("", mock);
    const before = sketchState();
    const after = await submitRefinement(before, client);

    expect(after.error).toContain("source level 8 >= target level 8");
    expect(after.series).toEqual(before.series);
    expect(after.stroke).toEqual(before.stroke);
    expect(after.lastResponse).toBeNull();
  });

  it("surfaces 404 and 422 details without losing the sketch", async () => {
    for (const [status, detail] of [
      [404, "unknown model 'toy'"],
      [422, "series contains non-finite values"],
    ] as const) {
      const mock: FetchLike = async () => jsonResponse(status, { detail });
      const after = await submitRefinement(sketchState(), new ServiceClient("", mock));
      expect(after.error).toBe(detail);
      expect(after.series).toEqual(sketchState().series);
    }
  });

  it("regenerate draws fresh seeds and leaves the sketch unchanged", async () => {
    let calls = 0;
    const mock: FetchLike = async (_url, init) => {
      const body = JSON.parse(String(init?.body));
      expect(body.seed).toBeUndefined(); // service picks a fresh seed
      calls += 1;
      return jsonResponse(200, refineResponse(5, 100 * calls));
    };
    const client = new ServiceClient("", mock);
    const first = await submitRefinement(sketchState(), client);
    const second = await regenerate(first, client);

    expect(first.lastResponse!.sample_seeds).not.toEqual(
      second.lastResponse!.sample_seeds,
    );
    expect(second.series).toEqual(first.series);
    expect(second.stroke).toEqual(first.stroke);
  });

  it("rendered curves equal the response payload verbatim", async () => {
    const payload = refineResponse(3, 7);
    const mock: FetchLike = async () => jsonResponse(200, payload);
    const state = await submitRefinement(sketchState(), new ServiceClient("", mock));
    const scene = buildOverlayScene(state.series!, state.lastResponse!);
    scene.curves
      .filter((c) => c.kind === "sample")
      .forEach((c, i) => {
        expect(c.values).toEqual(payload.samples[i]);
        expect(c.seed).toBe(payload.sample_seeds[i]);
      });
  });
});
