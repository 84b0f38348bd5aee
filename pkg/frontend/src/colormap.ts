/** Color mapping for overlays: class palette, entropy heat, and the
 * blue-to-red weight map (low weight = blue, high weight = red). */

export type Rgb = [number, number, number];

// first ten of the usual categorical palette
export const CLASS_COLORS: Rgb[] = [
  [31, 119, 180],
  [255, 127, 14],
  [44, 160, 44],
  [214, 39, 40],
  [148, 103, 189],
  [140, 86, 75],
  [227, 119, 194],
  [127, 127, 127],
  [188, 189, 34],
  [23, 190, 207],
];

export function classColor(classId: number): Rgb {
  if (classId < 0) throw new Error("class id must be >= 0");
  return CLASS_COLORS[classId % CLASS_COLORS.length];
}

function lerp(a: number, b: number, t: number): number {
  return Math.round(a + (b - a) * t);
}

/** t in [0,1]: 0 -> blue, 0.5 -> white, 1 -> red. */
export function blueRed(t: number): Rgb {
  const u = Math.min(1, Math.max(0, t));
  const blue: Rgb = [59, 76, 192];
  const white: Rgb = [255, 255, 255];
  const red: Rgb = [180, 4, 38];
  if (u < 0.5) {
    const s = u / 0.5;
    return [lerp(blue[0], white[0], s), lerp(blue[1], white[1], s), lerp(blue[2], white[2], s)];
  }
  const s = (u - 0.5) / 0.5;
  return [lerp(white[0], red[0], s), lerp(white[1], red[1], s), lerp(white[2], red[2], s)];
}

/** t in [0,1]: black -> orange -> yellow heat ramp for entropy. */
export function heat(t: number): Rgb {
  const u = Math.min(1, Math.max(0, t));
  if (u < 0.5) {
    const s = u / 0.5;
    return [lerp(0, 230, s), lerp(0, 97, s), 0];
  }
  const s = (u - 0.5) / 0.5;
  return [lerp(230, 255, s), lerp(97, 235, s), lerp(0, 80, s)];
}

/** Normalize a field to [0,1]; a constant field maps to all zeros. */
export function normalize(values: number[]): number[] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!(hi > lo)) return values.map(() => 0);
  return values.map((v) => (v - lo) / (hi - lo));
}
