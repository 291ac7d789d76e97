/** Review pane for a single submitted photo: the image with an optional mask
 * outline, the day's reported values, and a reference-object panel where two
 * placed endpoints plus a known length produce a scale and a recomputed
 * wound size. The preview is informational; the saved size always comes
 * back from the server. */

import type { GalleryItem, WoundSize } from "../types.js";
import type { OverlayMode } from "./gallery.js";
import { esc, fmt } from "../html.js";

export interface ReviewModel {
  item: GalleryItem;
  /** Reported values for the photo's day, in the trajectory's series order. */
  dayValues: Array<{ series: string; label: string; value: number | null }>;
  overlayMode: OverlayMode;
  endpoints: ReadonlyArray<{ x: number; y: number }>;
  knownLengthMm: number | null;
  scaleMmPerPx: number | null;
  previewSize: WoundSize | null;
  savedSize: WoundSize | null;
}

function sizeTable(size: WoundSize, caption: string): string {
  const components = size.component_mm2
    .map((mm2, i) => `<tr><td>Region ${i + 1}</td><td>${fmt(mm2)} mm²</td></tr>`)
    .join("");
  return `
  <table class="size">
    <caption>${esc(caption)}</caption>
    <tbody>
      ${components}
      <tr><td>Total</td><td>${fmt(size.total_mm2)} mm² (${fmt(size.total_cm2)} cm²)</td></tr>
      <tr><td>Scale</td><td>${fmt(size.scale_mm_per_px)} mm/px</td></tr>
    </tbody>
  </table>`;
}

function annotationPanel(model: ReviewModel): string {
  const placed = model.endpoints
    .map((p, i) => `<li>Point ${i === 0 ? "A" : "B"}: (${fmt(p.x)}, ${fmt(p.y)})</li>`)
    .join("");
  const scale =
    model.scaleMmPerPx === null
      ? '<p class="muted">Place two points on the reference object and enter its length.</p>'
      : `<p>Scale: <strong>${fmt(model.scaleMmPerPx)}</strong> mm/px</p>`;
  const preview = model.previewSize === null ? "" : sizeTable(model.previewSize, "Computed size (preview)");
  const canSave = model.scaleMmPerPx !== null;
  return `
  <div class="card" data-panel="ro-annotation">
    <h3>Reference object</h3>
    <p class="muted">Press on each end of the reference object in the photo.</p>
    <ul class="endpoints">${placed || "<li class=\"muted\">No points placed.</li>"}</ul>
    <label>Known length (mm)
      <input type="number" name="known_length_mm" min="1" step="any" value="${model.knownLengthMm === null ? "" : fmt(model.knownLengthMm)}" data-action="known-length">
    </label>
    ${scale}
    ${preview}
    <div class="row">
      <button data-action="save-annotation"${canSave ? "" : " disabled"}>Save annotation</button>
      <button data-action="reset-annotation">Reset</button>
    </div>
  </div>`;
}

export function renderReview(model: ReviewModel): string {
  const item = model.item;
  const overlay =
    model.overlayMode === "a_posteriori" && item.mask_blob
      ? `<canvas class="mask-overlay" data-mask-blob="${esc(item.mask_blob)}" aria-hidden="true"></canvas>`
      : "";
  const values =
    model.dayValues.length === 0
      ? '<p class="muted">No reported values for this day.</p>'
      : `<table><tbody>${model.dayValues
          .map(
            (row) =>
              `<tr><td>${esc(row.label)}</td><td>${row.value === null ? "—" : esc(fmt(row.value))}</td></tr>`,
          )
          .join("")}</tbody></table>`;
  const saved = model.savedSize === null ? "" : sizeTable(model.savedSize, "Saved size");
  return `
<section aria-label="Documentation review">
  <h2>Review — ${esc(item.counter)}</h2>
  <p class="muted">${esc(item.timestamp)}</p>
  <div class="row">
    <button data-action="overlay-mode" data-mode="none"${model.overlayMode === "none" ? ' aria-pressed="true"' : ' aria-pressed="false"'}>No overlay</button>
    <button data-action="overlay-mode" data-mode="a_posteriori"${model.overlayMode === "a_posteriori" ? ' aria-pressed="true"' : ' aria-pressed="false"'}>Outline</button>
  </div>
  <figure class="review-figure">
    <img data-image-blob="${esc(item.image_blob)}" data-action="place-point" alt="Wound photo ${esc(item.counter)} for review">
    ${overlay}
  </figure>
  <div class="card">
    <h3>Reported that day</h3>
    ${values}
  </div>
  ${annotationPanel(model)}
  ${saved}
</section>`.trim();
}
