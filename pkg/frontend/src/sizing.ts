/** Client-side wound sizing: identical arithmetic to the server and CLI so a
 * clinician sees the final area while placing the reference annotation,
 * before the server confirms it. */

import type { ReferenceAnnotation, WoundSize } from "./types.js";

/** Millimetres per source pixel from a two-point annotation. */
export function calibrateScale(ro: ReferenceAnnotation): number {
  const dist = Math.hypot(ro.bx - ro.ax, ro.by - ro.ay);
  if (!(ro.known_length_mm > 0)) {
    throw new Error(`known_length_mm must be positive, got ${ro.known_length_mm}`);
  }
  if (dist <= 0) {
    throw new Error("reference endpoints must be distinct");
  }
  return ro.known_length_mm / dist;
}

/** Per-component and total area from mask-space pixel counts.
 *
 * `scaleMmPerPx` applies to source pixels; a mask pixel covers
 * `cropWidth / maskWidth` source pixels per side. With an identity crop the
 * factor is 1 and this reduces to count * scale^2.
 */
export function areaFromComponents(
  componentPixelCounts: number[],
  scaleMmPerPx: number,
  cropWidth: number,
  maskWidth: number,
): WoundSize {
  if (!(scaleMmPerPx > 0)) {
    throw new Error(`scale must be positive, got ${scaleMmPerPx}`);
  }
  const mmPerMaskPx = scaleMmPerPx * (cropWidth / maskWidth);
  const componentMm2 = componentPixelCounts.map((count) => count * mmPerMaskPx ** 2);
  const totalMm2 = componentMm2.reduce((a, b) => a + b, 0);
  return {
    component_mm2: componentMm2,
    total_mm2: totalMm2,
    total_cm2: totalMm2 / 100,
    scale_mm_per_px: scaleMmPerPx,
  };
}

/** Round to `digits` significant digits (for display and cross-checks). */
export function toSignificant(value: number, digits: number): number {
  if (value === 0 || !Number.isFinite(value)) return value;
  return Number(value.toPrecision(digits));
}
