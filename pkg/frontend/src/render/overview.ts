/** Patient detail header: demographics-free overview of conditions,
 * medication, dressing, and the wound list with documentation counts. */

import type { PatientOverview } from "../types.js";
import { esc } from "../html.js";

const LOCATION_LABELS: Record<string, string> = {
  front: "front",
  back: "back",
  left: "left",
  right: "right",
  midline: "midline",
};

export function formatLocation(location: {
  region: string;
  laterality: string;
  aspect: string;
}): string {
  const region = location.region.replace(/_/g, " ");
  const lat = LOCATION_LABELS[location.laterality] ?? location.laterality;
  const aspect = LOCATION_LABELS[location.aspect] ?? location.aspect;
  return `${lat} ${region}, ${aspect}`;
}

function listOrNone(values: string[]): string {
  return values.length ? esc(values.join(", ")) : '<span class="muted">none recorded</span>';
}

export function renderPatientOverview(overview: PatientOverview): string {
  const wounds = overview.wounds
    .map(
      (w) => `
    <tr>
      <td>${esc(formatLocation(w.location))}</td>
      <td>${esc(w.documentation_count)}</td>
      <td>${esc(w.last_documented_at ?? "") || '<span class="muted">never</span>'}</td>
      <td class="row">
        <button data-action="open-gallery" data-wound="${esc(w.id)}">Gallery</button>
        <button data-action="open-trajectory" data-wound="${esc(w.id)}">Trajectory</button>
      </td>
    </tr>`,
    )
    .join("");
  return `
<section aria-label="Patient overview">
  <h2>${esc(overview.display_name)}</h2>
  <div class="card">
    <p><strong>Conditions:</strong> ${listOrNone(overview.conditions)}</p>
    <p><strong>Allergies:</strong> ${listOrNone(overview.allergies)}</p>
    <p><strong>Medications:</strong> ${listOrNone(overview.medications)}</p>
    <p><strong>Current dressing:</strong> ${esc(overview.dressing ?? "") || '<span class="muted">none recorded</span>'}</p>
  </div>
  <h3>Wounds</h3>
  <table>
    <thead><tr><th>Location</th><th>Documentations</th><th>Last documented</th><th></th></tr></thead>
    <tbody>${wounds}
  </tbody>
  </table>
  <div class="row">
    <button data-action="open-general-trajectory" data-patient="${esc(overview.id)}">General health trajectory</button>
    <button data-action="open-calendar">Calendar</button>
  </div>
</section>`.trim();
}
