/** Canvas painting.  Overlays are pure renderings of the last response; the
 * annotation layer draws scribbles and walls on top. */

import { PropagateResponse } from "./api.js";
import { blueRed, classColor, heat } from "./colormap.js";
import { AnnotationState } from "./model.js";
import { ViewState, layerField } from "./view.js";

export function drawOverlay(
  ctx: CanvasRenderingContext2D,
  view: ViewState,
  resp: PropagateResponse,
  numClasses: number,
): void {
  const { width, height } = view.gridSize;
  const img = ctx.createImageData(width, height);
  const field = layerField(view, resp, numClasses);
  for (let i = 0; i < width * height; i++) {
    let rgb: [number, number, number];
    if (field === null) {
      rgb = classColor(resp.map[i]);
    } else if (view.activeLayer.kind === "weights") {
      rgb = blueRed(field[i]);
    } else {
      rgb = heat(field[i]);
    }
    img.data[4 * i] = rgb[0];
    img.data[4 * i + 1] = rgb[1];
    img.data[4 * i + 2] = rgb[2];
    img.data[4 * i + 3] = Math.round(255 * view.overlayOpacity);
  }
  ctx.putImageData(img, 0, 0);
}

export function drawAnnotations(
  ctx: CanvasRenderingContext2D,
  state: AnnotationState,
): void {
  const img = ctx.createImageData(state.width, state.height);
  for (let y = 0; y < state.height; y++) {
    for (let x = 0; x < state.width; x++) {
      const i = y * state.width + x;
      const cls = state.labelAt(x, y);
      if (cls !== undefined) {
        const [r, g, b] = classColor(cls);
        img.data[4 * i] = r;
        img.data[4 * i + 1] = g;
        img.data[4 * i + 2] = b;
        img.data[4 * i + 3] = 255;
      } else if (state.boundaryAt(x, y) > 0) {
        img.data[4 * i] = 20;
        img.data[4 * i + 1] = 20;
        img.data[4 * i + 2] = 20;
        img.data[4 * i + 3] = 255;
      }
    }
  }
  ctx.putImageData(img, 0, 0);
}
