/** Appointment calendar: one card per day, slots shown with state-coloured
 * badges and only the actions that the current state allows. Buttons carry
 * slot ids; the browser glue sends the request and re-renders from the
 * server's response (never from an assumed outcome). */

import type { AppointmentSlot, SlotDays, SlotState } from "../types.js";
import { SLOT_STATE_COLORS } from "../a11y.js";
import { esc } from "../html.js";

function timeOfDay(iso: string): string {
  const t = iso.indexOf("T");
  return t < 0 ? iso : iso.slice(t + 1, t + 6);
}

function slotActions(slot: AppointmentSlot): string {
  const actions: string[] = [];
  if (slot.state === "booked") {
    actions.push(`<button data-action="confirm-slot" data-slot="${esc(slot.id)}">Confirm</button>`);
  }
  if (slot.state === "booked" || slot.state === "confirmed") {
    actions.push(
      `<button class="danger" data-action="cancel-slot" data-slot="${esc(slot.id)}">Cancel</button>`,
    );
  }
  if (slot.state === "confirmed") {
    actions.push(`<button data-action="video-session" data-slot="${esc(slot.id)}">Video</button>`);
  }
  return actions.join(" ");
}

function renderSlot(slot: AppointmentSlot): string {
  const color = SLOT_STATE_COLORS[slot.state as SlotState] ?? SLOT_STATE_COLORS.available;
  const patient = slot.patient_id ? ` · ${esc(slot.patient_id)}` : "";
  return `
    <li class="slot" data-slot-id="${esc(slot.id)}">
      <span class="badge" style="background:${color}">${esc(slot.state)}</span>
      ${esc(timeOfDay(slot.start))}–${esc(timeOfDay(slot.end))}${patient}
      ${slotActions(slot)}
    </li>`;
}

export function renderCalendar(days: SlotDays): string {
  const content =
    days.days.length === 0
      ? '<p class="muted">No slots in this range.</p>'
      : days.days
          .map(
            (day) => `
  <div class="card">
    <h3>${esc(day.date)}</h3>
    <ul class="slots">${day.slots.map(renderSlot).join("")}</ul>
  </div>`,
          )
          .join("");
  return `
<section aria-label="Appointment calendar">
  <h2>Calendar</h2>
  ${content}
  <form class="card" data-form="create-slot">
    <h3>Open a new slot</h3>
    <label>Start <input type="datetime-local" name="start" required></label>
    <label>End <input type="datetime-local" name="end" required></label>
    <button type="submit">Create slot</button>
  </form>
</section>`.trim();
}
