/**
 * Pure annotation state for the scribble editor: class scribbles, the
 * painted boundary (wall) field, and an undo stack of strokes.  Everything
 * here is DOM-free so it can be unit-tested directly.
 */

export interface Point {
  x: number;
  y: number;
}

export interface Stroke {
  /** -1 paints the wall brush, otherwise a palette class id. */
  classId: number;
  pixels: Point[];
  brushRadius: number;
}

export const WALL_CLASS = -1;
export const DEFAULT_WALL_VALUE = 10.0;

/** Rasterize a polyline of pointer samples into deduplicated grid pixels. */
export function rasterizeStroke(
  samples: Point[],
  brushRadius: number,
  width: number,
  height: number,
): Point[] {
  const seen = new Set<number>();
  const out: Point[] = [];
  const stamp = (cx: number, cy: number) => {
    const r = Math.max(0, Math.floor(brushRadius));
    for (let dy = -r; dy <= r; dy++) {
      for (let dx = -r; dx <= r; dx++) {
        if (dx * dx + dy * dy > r * r + 1e-9) continue;
        const x = cx + dx;
        const y = cy + dy;
        if (x < 0 || y < 0 || x >= width || y >= height) continue; // clip
        const key = y * width + x;
        if (!seen.has(key)) {
          seen.add(key);
          out.push({ x, y });
        }
      }
    }
  };
  for (let i = 0; i < samples.length; i++) {
    const a = samples[Math.max(0, i - 1)];
    const b = samples[i];
    // walk the segment so fast pointer moves leave no gaps
    const steps = Math.max(Math.abs(b.x - a.x), Math.abs(b.y - a.y), 1);
    for (let s = 0; s <= steps; s++) {
      const x = Math.round(a.x + ((b.x - a.x) * s) / steps);
      const y = Math.round(a.y + ((b.y - a.y) * s) / steps);
      stamp(x, y);
    }
  }
  return out;
}

export class AnnotationState {
  readonly width: number;
  readonly height: number;
  readonly numClasses: number;
  wallValue = DEFAULT_WALL_VALUE;
  /** pixel index -> class id, last stroke wins */
  private labels = new Map<number, number>();
  private boundary: Float64Array;
  private undoStack: Stroke[] = [];
  /** snapshots taken before each stroke, parallel to undoStack */
  private snapshots: { labels: Map<number, number>; boundary: Float64Array }[] = [];

  constructor(width: number, height: number, numClasses: number) {
    if (width < 1 || height < 1) throw new Error("grid must be non-empty");
    if (numClasses < 1) throw new Error("need at least one class");
    this.width = width;
    this.height = height;
    this.numClasses = numClasses;
    this.boundary = new Float64Array(width * height);
  }

  index(x: number, y: number): number {
    return y * this.width + x;
  }

  /** Apply a stroke; records it for undo.  classId WALL_CLASS paints walls. */
  applyStroke(stroke: Stroke): void {
    if (stroke.classId !== WALL_CLASS) {
      if (stroke.classId < 0 || stroke.classId >= this.numClasses) {
        throw new Error(`class ${stroke.classId} outside palette`);
      }
    }
    this.snapshots.push({
      labels: new Map(this.labels),
      boundary: this.boundary.slice(),
    });
    this.undoStack.push(stroke);
    for (const p of stroke.pixels) {
      const i = this.index(p.x, p.y);
      if (stroke.classId === WALL_CLASS) {
        this.boundary[i] = this.wallValue;
      } else {
        this.labels.set(i, stroke.classId);
      }
    }
  }

  /** Erase walls under the stroke footprint (sets boundary back to 0). */
  eraseWall(pixels: Point[]): void {
    this.snapshots.push({
      labels: new Map(this.labels),
      boundary: this.boundary.slice(),
    });
    this.undoStack.push({ classId: WALL_CLASS, pixels, brushRadius: 0 });
    for (const p of pixels) this.boundary[this.index(p.x, p.y)] = 0;
  }

  undo(): boolean {
    const snap = this.snapshots.pop();
    this.undoStack.pop();
    if (!snap) return false;
    this.labels = snap.labels;
    this.boundary = snap.boundary;
    return true;
  }

  get strokeCount(): number {
    return this.undoStack.length;
  }

  get scribblePixelCount(): number {
    return this.labels.size;
  }

  hasWalls(): boolean {
    return this.boundary.some((v) => v > 0);
  }

  /** Sorted (pixel, class) entries, one per pixel. */
  labelEntries(): { x: number; y: number; class: number }[] {
    return [...this.labels.entries()]
      .sort((a, b) => a[0] - b[0])
      .map(([i, c]) => ({ x: i % this.width, y: Math.floor(i / this.width), class: c }));
  }

  boundaryArray(): number[] {
    return [...this.boundary];
  }

  labelAt(x: number, y: number): number | undefined {
    return this.labels.get(this.index(x, y));
  }

  boundaryAt(x: number, y: number): number {
    return this.boundary[this.index(x, y)];
  }
}
