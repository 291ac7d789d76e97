/** Small state machines behind the interactive pieces. Pure TypeScript —
 * the browser glue feeds them events and re-renders from their state. */

import type { ReferenceAnnotation, WoundSize } from "./types.js";
import { areaFromComponents, calibrateScale } from "./sizing.js";

/** Date selection on a trajectory chart.
 *
 * Selecting (slider input or pressing a chart point) moves the value line;
 * releasing the pointer keeps it — the line persists until another date is
 * selected or the chart is explicitly cleared. */
export class ChartSelection {
  private selected: string | null = null;

  get current(): string | null {
    return this.selected;
  }

  select(date: string): void {
    this.selected = date;
  }

  /** Pointer release: deliberately keeps the selection. */
  release(): void {
    // no-op by contract: the value line must survive pointer release
  }

  clear(): void {
    this.selected = null;
  }
}

/** Two-point reference-object annotation in source-image coordinates. */
export class AnnotationState {
  private points: Array<{ x: number; y: number }> = [];
  private knownMm: number | null = null;

  addPoint(x: number, y: number): void {
    if (this.points.length >= 2) this.points = [];
    this.points.push({ x, y });
  }

  setKnownLengthMm(mm: number): void {
    this.knownMm = mm > 0 ? mm : null;
  }

  reset(): void {
    this.points = [];
    this.knownMm = null;
  }

  get endpoints(): ReadonlyArray<{ x: number; y: number }> {
    return this.points;
  }

  /** Complete annotation, or null while endpoints / length are missing. */
  ro(): ReferenceAnnotation | null {
    const [a, b] = this.points;
    if (!a || !b || this.knownMm === null) return null;
    if (a.x === b.x && a.y === b.y) return null;
    return { ax: a.x, ay: a.y, bx: b.x, by: b.y, known_length_mm: this.knownMm };
  }

  scaleMmPerPx(): number | null {
    const ro = this.ro();
    return ro ? calibrateScale(ro) : null;
  }

  /** Preview of the size the server will compute for these components. */
  previewSize(
    componentPixelCounts: number[],
    cropWidth: number,
    maskWidth: number,
  ): WoundSize | null {
    const scale = this.scaleMmPerPx();
    if (scale === null) return null;
    return areaFromComponents(componentPixelCounts, scale, cropWidth, maskWidth);
  }
}

/** Serializes booking mutations per slot so the dashboard never races itself
 * on one slot; the server's compare-and-swap remains the arbiter. */
export class SlotActionQueue {
  private tails = new Map<string, Promise<unknown>>();

  run<T>(slotId: string, action: () => Promise<T>): Promise<T> {
    const tail = this.tails.get(slotId) ?? Promise.resolve();
    const next = tail.then(action, action);
    this.tails.set(slotId, next.catch(() => undefined));
    return next;
  }
}
