/** Wound image gallery: chronological figures with "i of N" counters and a
 * global mask-overlay toggle (none / outline after capture). Images carry
 * their blob keys; the browser glue fetches them with the bearer token and
 * fills in object URLs. */

import type { Gallery } from "../types.js";
import { esc } from "../html.js";

export type OverlayMode = "none" | "a_posteriori";

export function renderGallery(gallery: Gallery, overlayMode: OverlayMode): string {
  if (gallery.items.length === 0) {
    return '<p class="muted">No images have been submitted for this wound.</p>';
  }
  const toggle = `
  <div class="row" role="group" aria-label="Mask overlay">
    <span class="muted">Overlay:</span>
    <button data-action="overlay-mode" data-mode="none"${overlayMode === "none" ? ' aria-pressed="true"' : ' aria-pressed="false"'}>None</button>
    <button data-action="overlay-mode" data-mode="a_posteriori"${overlayMode === "a_posteriori" ? ' aria-pressed="true"' : ' aria-pressed="false"'}>Outline</button>
  </div>`;
  const figures = gallery.items
    .map((item) => {
      const overlay =
        overlayMode === "a_posteriori" && item.mask_blob
          ? `<canvas class="mask-overlay" data-mask-blob="${esc(item.mask_blob)}" aria-hidden="true"></canvas>`
          : "";
      return `
    <figure class="card">
      <img data-image-blob="${esc(item.image_blob)}" alt="Wound photo ${esc(item.counter)}, taken ${esc(item.timestamp)}">
      ${overlay}
      <figcaption>
        <span class="counter">${esc(item.counter)}</span> · ${esc(item.timestamp)}
        <button data-action="open-review" data-documentation="${esc(item.documentation_id)}" data-wound="${esc(item.wound_id)}">Review</button>
      </figcaption>
    </figure>`;
    })
    .join("");
  return `
<section aria-label="Wound gallery">
  <h2>Gallery</h2>
  ${toggle}
  ${figures}
</section>`.trim();
}
