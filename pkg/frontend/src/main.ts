/**
 * Browser shell: stroke capture on a canvas, model/level controls, and the
 * overlay / level-explorer views. All model math happens server-side.
 */

import { ServiceClient } from "./client";
import { exploreLevels } from "./levelExplorer";
import { buildOverlayScene, renderOverlaySvg, submitRefinement } from "./overlay";
import { resampleSketch, SketchValidationError } from "./resample";
import { emptySketchState, type ModelInfo, type SketchState } from "./types";

const baseUrl = (window as { TIMETOK_BASE_URL?: string }).TIMETOK_BASE_URL ?? "";
const client = new ServiceClient(baseUrl);

let state: SketchState = emptySketchState();
let inFlight: AbortController | null = null;

const canvas = document.getElementById("sketch-canvas") as HTMLCanvasElement;
const modelSelect = document.getElementById("model-select") as HTMLSelectElement;
const levelSelect = document.getElementById("level-select") as HTMLSelectElement;
const refineButton = document.getElementById("refine") as HTMLButtonElement;
const regenerateButton = document.getElementById("regenerate") as HTMLButtonElement;
const exploreButton = document.getElementById("explore") as HTMLButtonElement;
const clearButton = document.getElementById("clear") as HTMLButtonElement;
const errorBox = document.getElementById("error") as HTMLElement;
const overlayBox = document.getElementById("overlay") as HTMLElement;
const detailBox = document.getElementById("detail") as HTMLElement;
const gridBox = document.getElementById("grid") as HTMLElement;

function drawStroke(): void {
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#1a1a2e";
  ctx.lineWidth = 2;
  ctx.beginPath();
  state.stroke.forEach((p, i) => (i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
  ctx.stroke();
}

function showError(message: string | null): void {
  errorBox.textContent = message ?? "";
  errorBox.hidden = !message;
}

function showOverlay(): void {
  if (!state.lastResponse || !state.series) return;
  const scene = buildOverlayScene(state.series, state.lastResponse);
  overlayBox.innerHTML = renderOverlaySvg(scene);
  detailBox.textContent =
    `measured source level ${scene.sourceLevel}, target ${scene.targetLevel}, ` +
    `seeds [${scene.seeds.join(", ")}] (request seed ${state.lastResponse.seed})`;
}

function resampleOrWarn(): boolean {
  if (!state.model) {
    showError("pick a model first");
    return false;
  }
  try {
    state.series = resampleSketch(state.stroke, state.model.series_length);
    return true;
  } catch (err) {
    if (err instanceof SketchValidationError) {
      showError(err.message);
      return false;
    }
    throw err;
  }
}

function nextSignal(): AbortSignal {
  inFlight?.abort();
  inFlight = new AbortController();
  return inFlight.signal;
}

async function onRefine(): Promise<void> {
  if (!resampleOrWarn()) return;
  state = await submitRefinement(state, client, { signal: nextSignal() });
  showError(state.error);
  showOverlay();
}

async function onExplore(): Promise<void> {
  if (!resampleOrWarn()) return;
  const grid = await exploreLevels(state, client, { signal: nextSignal() });
  gridBox.innerHTML = "";
  for (const cell of grid.cells) {
    const div = document.createElement("div");
    div.className = "cell";
    const label = document.createElement("p");
    label.textContent = `level ${cell.level}`;
    div.appendChild(label);
    if (cell.response && state.series) {
      div.innerHTML += renderOverlaySvg(
        buildOverlayScene(state.series, cell.response), 220, 110,
      );
      div.addEventListener("click", () => {
        state = { ...state, targetLevel: cell.level, lastResponse: cell.response };
        showOverlay();
      });
    } else {
      const err = document.createElement("p");
      err.className = "cell-error";
      err.textContent = cell.error ?? "failed";
      div.appendChild(err);
    }
    gridBox.appendChild(div);
  }
}

function attachStrokeCapture(): void {
  let drawing = false;
  canvas.addEventListener("pointerdown", (ev) => {
    drawing = true;
    state = { ...state, stroke: [{ x: ev.offsetX, y: ev.offsetY }], lastResponse: null };
    drawStroke();
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (!drawing) return;
    state.stroke.push({ x: ev.offsetX, y: ev.offsetY });
    drawStroke();
  });
  window.addEventListener("pointerup", () => (drawing = false));
}

async function loadModels(): Promise<void> {
  const models = await client.listModels();
  modelSelect.innerHTML = "";
  for (const m of models) {
    const opt = document.createElement("option");
    opt.value = m.model_id;
    opt.textContent = `${m.model_id} (T=${m.series_length}, L=${m.n_levels})`;
    modelSelect.appendChild(opt);
  }
  const pick = (m: ModelInfo): void => {
    state = { ...state, model: m, targetLevel: m.n_levels };
    levelSelect.innerHTML = "";
    for (let level = 1; level <= m.n_levels; level++) {
      const opt = document.createElement("option");
      opt.value = String(level);
      opt.textContent = `level ${level}`;
      levelSelect.appendChild(opt);
    }
    levelSelect.value = String(m.n_levels);
  };
  if (models.length > 0) pick(models[0]);
  modelSelect.addEventListener("change", () => {
    const m = models.find((x) => x.model_id === modelSelect.value);
    if (m) pick(m);
  });
  levelSelect.addEventListener("change", () => {
    state = { ...state, targetLevel: Number(levelSelect.value) };
  });
}

attachStrokeCapture();
refineButton.addEventListener("click", () => void onRefine());
regenerateButton.addEventListener("click", () => void onRefine());
exploreButton.addEventListener("click", () => void onExplore());
clearButton.addEventListener("click", () => {
  state = { ...state, stroke: [], series: null, lastResponse: null, error: null };
  drawStroke();
  overlayBox.innerHTML = "";
  gridBox.innerHTML = "";
  showError(null);
});
void loadModels().catch((err) => showError(String(err)));
