import { describe, expect, it } from "vitest";

import { AnnotationState, WALL_CLASS, rasterizeStroke } from "../src/model.js";

describe("rasterizeStroke", () => {
  it("single click with radius 0 gives one entry", () => {
    expect(rasterizeStroke([{ x: 3, y: 4 }], 0, 32, 32)).toEqual([{ x: 3, y: 4 }]);
  });

  it("clips strokes leaving the canvas", () => {
    const pixels = rasterizeStroke([{ x: 0, y: 0 }], 2, 8, 8);
    expect(pixels.length).toBeGreaterThan(0);
    for (const p of pixels) {
      expect(p.x).toBeGreaterThanOrEqual(0);
      expect(p.y).toBeGreaterThanOrEqual(0);
      expect(p.x).toBeLessThan(8);
      expect(p.y).toBeLessThan(8);
    }
  });

  it("deduplicates overlapping stamps", () => {
    const pixels = rasterizeStroke(
      [
        { x: 2, y: 2 },
        { x: 2, y: 2 },
        { x: 3, y: 2 },
      ],
      1,
      8,
      8,
    );
    const keys = pixels.map((p) => `${p.x},${p.y}`);
    expect(new Set(keys).size).toBe(keys.length);
  });

  it("interpolates between distant pointer samples", () => {
    const pixels = rasterizeStroke(
      [
        { x: 0, y: 0 },
        { x: 7, y: 0 },
      ],
      0,
      8,
      8,
    );
    expect(pixels.length).toBe(8);
  });
});

describe("AnnotationState", () => {
  it("applies class strokes and reports entries sorted by pixel index", () => {
    const s = new AnnotationState(4, 4, 2);
    s.applyStroke({ classId: 1, pixels: [{ x: 3, y: 2 }], brushRadius: 0 });
    s.applyStroke({ classId: 0, pixels: [{ x: 0, y: 0 }], brushRadius: 0 });
    expect(s.labelEntries()).toEqual([
      { x: 0, y: 0, class: 0 },
      { x: 3, y: 2, class: 1 },
    ]);
  });

  it("last stroke wins on overlap", () => {
    const s = new AnnotationState(4, 4, 2);
    s.applyStroke({ classId: 0, pixels: [{ x: 1, y: 1 }], brushRadius: 0 });
    s.applyStroke({ classId: 1, pixels: [{ x: 1, y: 1 }], brushRadius: 0 });
    expect(s.labelAt(1, 1)).toBe(1);
    expect(s.scribblePixelCount).toBe(1);
  });

  it("rejects classes outside the palette", () => {
    const s = new AnnotationState(4, 4, 2);
    expect(() =>
      s.applyStroke({ classId: 2, pixels: [{ x: 0, y: 0 }], brushRadius: 0 }),
    ).toThrow(/palette/);
  });

  it("wall brush writes the configured boundary value", () => {
    const s = new AnnotationState(4, 4, 2);
    expect(s.wallValue).toBe(10.0);
    s.wallValue = 3.5;
    s.applyStroke({ classId: WALL_CLASS, pixels: [{ x: 2, y: 0 }], brushRadius: 0 });
    expect(s.boundaryAt(2, 0)).toBe(3.5);
    expect(s.hasWalls()).toBe(true);
  });

  it("undo after one stroke restores the previous state", () => {
    const s = new AnnotationState(4, 4, 2);
    s.applyStroke({ classId: 0, pixels: [{ x: 0, y: 0 }], brushRadius: 0 });
    s.applyStroke({ classId: WALL_CLASS, pixels: [{ x: 1, y: 0 }], brushRadius: 0 });
    expect(s.undo()).toBe(true);
    expect(s.boundaryAt(1, 0)).toBe(0);
    expect(s.labelAt(0, 0)).toBe(0);
    expect(s.undo()).toBe(true);
    expect(s.scribblePixelCount).toBe(0);
    expect(s.undo()).toBe(false);
  });

  it("wall eraser zeroes the boundary and is undoable", () => {
    const s = new AnnotationState(4, 4, 2);
    s.applyStroke({ classId: WALL_CLASS, pixels: [{ x: 1, y: 1 }], brushRadius: 0 });
    s.eraseWall([{ x: 1, y: 1 }]);
    expect(s.hasWalls()).toBe(false);
    s.undo();
    expect(s.boundaryAt(1, 1)).toBe(10.0);
  });
});
