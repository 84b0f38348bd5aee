/** Single-page wiring: palette, brushes, undo, explicit propagate button,
 * overlay selection, and a dismissible error banner. */

import { ApiError, PropagateResponse, RequestGate, buildPayload, postPropagate } from "./api.js";
import { AnnotationState, Point, WALL_CLASS, rasterizeStroke } from "./model.js";
import { drawAnnotations, drawOverlay } from "./render.js";
import { Layer, makeViewState } from "./view.js";

const GRID = 32;
const NUM_CLASSES = 4;
const SERVICE_URL = "http://127.0.0.1:8754";
const SCALE = 16;

const state = new AnnotationState(GRID, GRID, NUM_CLASSES);
const gate = new RequestGate<PropagateResponse>();
let lastResponse: PropagateResponse | null = null;
let activeClass = 0; // WALL_CLASS selects the wall brush
let eraseWalls = false;
let brushRadius = 1;
let activeLayer: Layer = { kind: "map" };
let overlayOpacity = 0.6;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function redraw(): void {
  const annCtx = el<HTMLCanvasElement>("annotations").getContext("2d")!;
  annCtx.clearRect(0, 0, GRID, GRID);
  drawAnnotations(annCtx, state);
  const ovCtx = el<HTMLCanvasElement>("overlay").getContext("2d")!;
  ovCtx.clearRect(0, 0, GRID, GRID);
  if (lastResponse) {
    const view = makeViewState(activeLayer, overlayOpacity, GRID, GRID, NUM_CLASSES);
    drawOverlay(ovCtx, view, lastResponse, NUM_CLASSES);
  }
  el<HTMLButtonElement>("propagate").disabled = state.scribblePixelCount === 0;
}

function banner(message: string | null): void {
  const node = el<HTMLDivElement>("banner");
  node.textContent = message ?? "";
  node.style.display = message ? "block" : "none";
}

function canvasPoint(ev: PointerEvent): Point {
  const rect = el<HTMLCanvasElement>("annotations").getBoundingClientRect();
  return {
    x: Math.floor(((ev.clientX - rect.left) / rect.width) * GRID),
    y: Math.floor(((ev.clientY - rect.top) / rect.height) * GRID),
  };
}

function setupPainting(): void {
  const canvas = el<HTMLCanvasElement>("annotations");
  let samples: Point[] | null = null;
  canvas.addEventListener("pointerdown", (ev) => {
    samples = [canvasPoint(ev)];
    canvas.setPointerCapture(ev.pointerId);
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (samples) samples.push(canvasPoint(ev));
  });
  canvas.addEventListener("pointerup", () => {
    if (!samples) return;
    const pixels = rasterizeStroke(samples, brushRadius, GRID, GRID);
    samples = null;
    if (pixels.length === 0) return;
    if (eraseWalls) {
      state.eraseWall(pixels);
    } else {
      state.applyStroke({ classId: activeClass, pixels, brushRadius });
    }
    redraw();
  });
}

async function propagate(): Promise<void> {
  banner(null);
  try {
    lastResponse = await gate.submit(() =>
      postPropagate(SERVICE_URL, buildPayload(state)),
    );
    redraw();
  } catch (err) {
    if (err instanceof Error && err.message === "replaced") return;
    if (err instanceof ApiError) {
      banner(`service error (${err.status}): ${err.message}`);
    } else {
      banner("cannot reach the propagation service — is it running?");
    }
  }
}

function setupControls(): void {
  el<HTMLDivElement>("palette")
    .querySelectorAll<HTMLButtonElement>("button[data-class]")
    .forEach((btn) => {
      btn.addEventListener("click", () => {
        activeClass = Number(btn.dataset.class);
        eraseWalls = false;
      });
    });
  el<HTMLButtonElement>("wall-brush").addEventListener("click", () => {
    activeClass = WALL_CLASS;
    eraseWalls = false;
  });
  el<HTMLButtonElement>("wall-eraser").addEventListener("click", () => {
    eraseWalls = true;
  });
  el<HTMLInputElement>("wall-value").addEventListener("change", (ev) => {
    state.wallValue = Number((ev.target as HTMLInputElement).value);
  });
  el<HTMLInputElement>("brush-radius").addEventListener("change", (ev) => {
    brushRadius = Number((ev.target as HTMLInputElement).value);
  });
  el<HTMLButtonElement>("undo").addEventListener("click", () => {
    state.undo();
    redraw();
  });
  el<HTMLButtonElement>("propagate").addEventListener("click", () => void propagate());
  el<HTMLSelectElement>("layer").addEventListener("change", (ev) => {
    const value = (ev.target as HTMLSelectElement).value;
    activeLayer = value.startsWith("p:")
      ? { kind: "p", channel: Number(value.slice(2)) }
      : ({ kind: value } as Layer);
    redraw();
  });
  el<HTMLInputElement>("opacity").addEventListener("input", (ev) => {
    overlayOpacity = Number((ev.target as HTMLInputElement).value);
    redraw();
  });
  el<HTMLButtonElement>("banner-close").addEventListener("click", () => banner(null));
}

export function start(): void {
  for (const id of ["annotations", "overlay"]) {
    const canvas = el<HTMLCanvasElement>(id);
    canvas.width = GRID;
    canvas.height = GRID;
    canvas.style.width = `${GRID * SCALE}px`;
    canvas.style.height = `${GRID * SCALE}px`;
  }
  setupPainting();
  setupControls();
  redraw();
}

if (typeof document !== "undefined" && document.getElementById("annotations")) {
  start();
}
