/** Clinician landing screen: assigned patients with open-detail buttons. */

import type { PatientList } from "../types.js";
import { esc } from "../html.js";

export function renderPatientList(list: PatientList): string {
  if (list.patients.length === 0) {
    return '<p class="muted">No patients are assigned to you yet.</p>';
  }
  const rows = list.patients
    .map(
      (p) => `
    <tr>
      <td>${esc(p.display_name)}</td>
      <td>${esc(p.conditions.join(", ")) || '<span class="muted">none recorded</span>'}</td>
      <td>${esc(p.dressing ?? "") || '<span class="muted">—</span>'}</td>
      <td><button data-action="open-patient" data-patient="${esc(p.id)}">Open</button></td>
    </tr>`,
    )
    .join("");
  return `
<section aria-label="Assigned patients">
  <h2>Patients</h2>
  <table>
    <thead><tr><th>Name</th><th>Conditions</th><th>Dressing</th><th></th></tr></thead>
    <tbody>${rows}
  </tbody>
  </table>
</section>`.trim();
}
