/** Overlay view state: which result layer is shown and at what opacity. */

import { PropagateResponse } from "./api.js";

export type Layer =
  | { kind: "map" }
  | { kind: "entropy" }
  | { kind: "weights" }
  | { kind: "p"; channel: number };

export interface ViewState {
  activeLayer: Layer;
  overlayOpacity: number; // [0, 1]
  gridSize: { width: number; height: number };
}

export function makeViewState(
  activeLayer: Layer,
  overlayOpacity: number,
  width: number,
  height: number,
  numClasses: number,
): ViewState {
  if (!(overlayOpacity >= 0 && overlayOpacity <= 1)) {
    throw new Error("opacity must be in [0, 1]");
  }
  if (activeLayer.kind === "p") {
    if (
      !Number.isInteger(activeLayer.channel) ||
      activeLayer.channel < 0 ||
      activeLayer.channel >= numClasses
    ) {
      throw new Error(`p-channel ${activeLayer.channel} outside [0, ${numClasses})`);
    }
  }
  return { activeLayer, overlayOpacity, gridSize: { width, height } };
}

/** Scalar field in [0,1] for the active layer, or null for the MAP layer
 * (which is categorical and rendered from the class palette). */
export function layerField(view: ViewState, resp: PropagateResponse, numClasses: number): number[] | null {
  const n = view.gridSize.width * view.gridSize.height;
  switch (view.activeLayer.kind) {
    case "map":
      return null;
    case "entropy": {
      const maxH = Math.log(Math.max(numClasses, 2));
      return resp.entropy.map((h) => h / maxH);
    }
    case "weights":
      return resp.weights.slice(0, n);
    case "p": {
      const c = view.activeLayer.channel;
      const out = new Array<number>(n);
      for (let i = 0; i < n; i++) out[i] = resp.p[i * numClasses + c];
      return out;
    }
  }
}
