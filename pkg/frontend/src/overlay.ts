/** Client-side wound-boundary extraction, pixel-identical to the server's
 * overlay renderer: a wound pixel is boundary iff any 4-neighbor lies outside
 * the wound, and raster-edge wound pixels always count as boundary. */

export interface Bitmap {
  width: number;
  height: number;
  /** Row-major 0/1 per pixel. */
  data: Uint8Array;
}

export const OVERLAY_COLOR = "#ff0066"; // matches the server's boundary color

export function maskBoundary(mask: Bitmap): Bitmap {
  const { width: w, height: h, data } = mask;
  if (data.length !== w * h) {
    throw new Error(`bitmap data length ${data.length} != ${w}x${h}`);
  }
  const out = new Uint8Array(w * h);
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      const i = y * w + x;
      if (!data[i]) continue;
      const onEdge = x === 0 || y === 0 || x === w - 1 || y === h - 1;
      const interior =
        !onEdge &&
        data[i - 1]! && data[i + 1]! && data[i - w]! && data[i + w]!;
      out[i] = interior ? 0 : 1;
    }
  }
  return { width: w, height: h, data: out };
}

/** Decode a run-length encoding: alternating run lengths starting with a
 * zero-run. Used by tests to ship masks as compact JSON fixtures; in the
 * browser the bitmap comes from a canvas readback of the mask PNG. */
export function decodeRle(width: number, height: number, runs: number[]): Bitmap {
  const data = new Uint8Array(width * height);
  let pos = 0;
  let value = 0;
  for (const run of runs) {
    if (value) data.fill(1, pos, pos + run);
    pos += run;
    value ^= 1;
  }
  if (pos !== width * height) {
    throw new Error(`RLE covers ${pos} pixels, bitmap has ${width * height}`);
  }
  return { width, height, data };
}

export function countPixels(mask: Bitmap): number {
  let n = 0;
  for (const v of mask.data) n += v;
  return n;
}

/** Map a boundary pixel from mask space to source-image space the same way
 * the server does: floor(origin + (index + 0.5) * extent_ratio), clipped. */
export function maskToSource(
  index: number,
  origin: number,
  cropExtent: number,
  maskExtent: number,
  sourceExtent: number,
): number {
  const mapped = Math.floor(origin + (index + 0.5) * (cropExtent / maskExtent));
  return Math.min(Math.max(mapped, 0), sourceExtent - 1);
}
