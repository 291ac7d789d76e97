/** Browser entry point. Owns the view state, delegates clicks from
 * data-action attributes, fetches blobs with the bearer token (plain <img>
 * URLs cannot carry it), and re-renders each screen from the server's
 * responses — booking buttons stay inert until the server has answered. */

import { ApiClient, ApiError } from "./api.js";
import { AnnotationState, ChartSelection, SlotActionQueue } from "./controller.js";
import type {
  Gallery,
  GalleryItem,
  PatientList,
  PatientOverview,
  SlotDays,
  Trajectory,
  WoundSize,
} from "./types.js";
import { esc, fmt } from "./html.js";
import { OVERLAY_COLOR, countPixels, maskBoundary, maskToSource, type Bitmap } from "./overlay.js";
import { renderCalendar } from "./render/calendar.js";
import { renderGallery, type OverlayMode } from "./render/gallery.js";
import { renderPatientList } from "./render/patients.js";
import { renderPatientOverview } from "./render/overview.js";
import { renderReview, type ReviewModel } from "./render/review.js";
import { renderTrajectory, seriesLabel } from "./render/trajectory.js";

type View =
  | { kind: "login"; message: string | null }
  | { kind: "patients"; data: PatientList }
  | { kind: "overview"; data: PatientOverview }
  | { kind: "gallery"; patientId: string; data: Gallery }
  | { kind: "trajectory"; patientId: string; data: Trajectory }
  | { kind: "calendar"; data: SlotDays }
  | {
      kind: "review";
      patientId: string;
      item: GalleryItem;
      trajectory: Trajectory;
      saved: WoundSize | null;
    };

const HELP_SCREENS: Record<View["kind"], string> = {
  login: "login",
  patients: "home",
  overview: "patient_overview",
  gallery: "gallery",
  trajectory: "trajectory",
  calendar: "calendar",
  review: "ro_annotation",
};

const api = new ApiClient(resolveBaseUrl(), (url, init) => fetch(url, init));
const chartSelection = new ChartSelection();
const annotation = new AnnotationState();
const slotQueue = new SlotActionQueue();

let view: View = { kind: "login", message: null };
let overlayMode: OverlayMode = "none";
let clinicianId: string | null = null;
const maskCache = new Map<string, Bitmap>();

function resolveBaseUrl(): string {
  const meta = document.querySelector('meta[name="api-base"]');
  const content = meta?.getAttribute("content");
  return content && content.length > 0 ? content : window.location.origin;
}

function main(): HTMLElement {
  const el = document.querySelector("main");
  if (!el) throw new Error("missing <main> element");
  return el;
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    const field = err.body.field ? ` (${err.body.field})` : "";
    return `${err.body.error}${field}`;
  }
  return err instanceof Error ? err.message : String(err);
}

function setNotice(text: string | null): void {
  const existing = document.querySelector(".notice");
  existing?.remove();
  if (text === null) return;
  const div = document.createElement("div");
  div.className = "card notice";
  div.setAttribute("role", "alert");
  div.textContent = text;
  main().prepend(div);
}

// -- rendering -------------------------------------------------------------------------

function loginForm(message: string | null): string {
  return `
<section aria-label="Sign in">
  <h2>Sign in</h2>
  ${message === null ? "" : `<p class="card" role="alert">${esc(message)}</p>`}
  <form class="card" data-form="login">
    <label>Username <input type="text" name="username" autocomplete="username" required></label>
    <label>Password <input type="password" name="password" autocomplete="current-password" required></label>
    <button type="submit">Sign in</button>
  </form>
</section>`;
}

function reviewModel(state: Extract<View, { kind: "review" }>): ReviewModel {
  const day = state.item.timestamp.slice(0, 10);
  const point = state.trajectory.points.find((p) => p.date === day);
  const dayValues = state.trajectory.series.map((series) => ({
    series,
    label: seriesLabel(series),
    value: point?.values[series] ?? null,
  }));
  const mask = state.item.mask_blob ? maskCache.get(state.item.mask_blob) : undefined;
  const preview =
    mask === undefined
      ? null
      : annotation.previewSize([countPixels(mask)], mask.width, mask.width);
  return {
    item: state.item,
    dayValues,
    overlayMode,
    endpoints: annotation.endpoints,
    knownLengthMm: knownLengthFromState(),
    scaleMmPerPx: annotation.scaleMmPerPx(),
    previewSize: preview,
    savedSize: state.saved,
  };
}

function knownLengthFromState(): number | null {
  const input = document.querySelector<HTMLInputElement>('input[data-action="known-length"]');
  if (!input || input.value === "") return null;
  const mm = Number(input.value);
  return Number.isFinite(mm) && mm > 0 ? mm : null;
}

function render(): void {
  let body: string;
  switch (view.kind) {
    case "login":
      body = loginForm(view.message);
      break;
    case "patients":
      body = renderPatientList(view.data);
      break;
    case "overview":
      body = renderPatientOverview(view.data);
      break;
    case "gallery":
      body = `${backButton()}${renderGallery(view.data, overlayMode)}`;
      break;
    case "trajectory":
      body = `${backButton()}${renderTrajectory(view.data, chartSelection.current)}`;
      break;
    case "calendar":
      body = `${backButton()}${renderCalendar(view.data)}`;
      break;
    case "review":
      body = `${backButton()}${renderReview(reviewModel(view))}`;
      break;
  }
  main().innerHTML = body;
  void hydrateImages();
  void hydrateOverlays();
}

function backButton(): string {
  return '<button data-action="back">Back</button>';
}

// -- blob hydration ----------------------------------------------------------------------

async function hydrateImages(): Promise<void> {
  const images = Array.from(document.querySelectorAll<HTMLImageElement>("img[data-image-blob]"));
  await Promise.all(
    images.map(async (img) => {
      const key = img.dataset["imageBlob"];
      if (!key) return;
      try {
        const blob = await api.imageBlob(key);
        img.src = URL.createObjectURL(blob);
      } catch (err) {
        img.alt = `${img.alt} (failed to load: ${describeError(err)})`;
      }
    }),
  );
}

async function decodeMask(blobKey: string): Promise<Bitmap> {
  const cached = maskCache.get(blobKey);
  if (cached) return cached;
  const blob = await api.imageBlob(blobKey);
  const bitmap = await createImageBitmap(blob);
  const canvas = document.createElement("canvas");
  canvas.width = bitmap.width;
  canvas.height = bitmap.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas unavailable");
  ctx.drawImage(bitmap, 0, 0);
  const pixels = ctx.getImageData(0, 0, bitmap.width, bitmap.height).data;
  const data = new Uint8Array(bitmap.width * bitmap.height);
  for (let i = 0; i < data.length; i += 1) {
    data[i] = (pixels[i * 4] ?? 0) >= 128 ? 1 : 0;
  }
  const mask: Bitmap = { width: bitmap.width, height: bitmap.height, data };
  maskCache.set(blobKey, mask);
  return mask;
}

/** Outline the mask on a canvas covering the photo. Stored masks map onto
 * the full photo frame, so each boundary mask pixel colours the source
 * pixel at floor((index + 0.5) * source/mask) — the same rule the service
 * uses when it renders overlays. */
async function hydrateOverlays(): Promise<void> {
  const canvases = Array.from(
    document.querySelectorAll<HTMLCanvasElement>("canvas[data-mask-blob]"),
  );
  for (const canvas of canvases) {
    const key = canvas.dataset["maskBlob"];
    if (!key) continue;
    try {
      const mask = await decodeMask(key);
      drawBoundary(canvas, mask);
    } catch {
      canvas.remove();
    }
  }
}

function drawBoundary(canvas: HTMLCanvasElement, mask: Bitmap): void {
  const img = canvas.parentElement?.querySelector("img");
  const width = img?.naturalWidth || mask.width;
  const height = img?.naturalHeight || mask.height;
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.fillStyle = OVERLAY_COLOR;
  const boundary = maskBoundary(mask);
  for (let r = 0; r < mask.height; r += 1) {
    for (let c = 0; c < mask.width; c += 1) {
      if (boundary.data[r * mask.width + c] !== 1) continue;
      const sx = maskToSource(c, 0, width, mask.width, width);
      const sy = maskToSource(r, 0, height, mask.height, height);
      ctx.fillRect(sx, sy, 1, 1);
    }
  }
}

// -- navigation ------------------------------------------------------------------------

async function showPatients(): Promise<void> {
  view = { kind: "patients", data: await api.listPatients() };
  render();
}

async function showOverview(patientId: string): Promise<void> {
  view = { kind: "overview", data: await api.patientOverview(patientId) };
  render();
}

async function showGallery(patientId: string, woundId: string): Promise<void> {
  const data = await api.gallery(woundId);
  for (const item of data.items) {
    if (item.mask_blob) await decodeMask(item.mask_blob).catch(() => undefined);
  }
  view = { kind: "gallery", patientId, data };
  render();
}

async function showWoundTrajectory(patientId: string, woundId: string): Promise<void> {
  chartSelection.clear();
  view = { kind: "trajectory", patientId, data: await api.woundTrajectory(woundId) };
  render();
}

async function showGeneralTrajectory(patientId: string): Promise<void> {
  chartSelection.clear();
  view = { kind: "trajectory", patientId, data: await api.generalTrajectory(patientId) };
  render();
}

async function showCalendar(): Promise<void> {
  const filter = clinicianId === null ? undefined : { clinician_id: clinicianId };
  view = { kind: "calendar", data: await api.slots(filter) };
  render();
}

async function showReview(patientId: string, woundId: string, documentationId: string): Promise<void> {
  const [gallery, trajectory] = await Promise.all([
    api.gallery(woundId),
    api.woundTrajectory(woundId),
  ]);
  const item = gallery.items.find((i) => i.documentation_id === documentationId);
  if (!item) throw new ApiError(404, { error: "documentation not in gallery" });
  if (item.mask_blob) await decodeMask(item.mask_blob).catch(() => undefined);
  annotation.reset();
  view = { kind: "review", patientId, item, trajectory, saved: null };
  render();
}

async function goBack(): Promise<void> {
  switch (view.kind) {
    case "overview":
    case "calendar":
      await showPatients();
      return;
    case "gallery":
    case "trajectory":
      await showOverview(view.patientId);
      return;
    case "review":
      await showGallery(view.patientId, view.item.wound_id);
      return;
    default:
      await showPatients();
  }
}

// -- event wiring ------------------------------------------------------------------------

async function handleAction(target: HTMLElement): Promise<void> {
  const action = target.dataset["action"];
  switch (action) {
    case "help": {
      try {
        const entry = await api.help(HELP_SCREENS[view.kind]);
        setNotice(entry.text);
      } catch {
        setNotice("No help is available for this screen.");
      }
      return;
    }
    case "back":
      await goBack();
      return;
    case "open-patient":
      await showOverview(requireData(target, "patient"));
      return;
    case "open-gallery":
      if (view.kind === "overview") {
        await showGallery(view.data.id, requireData(target, "wound"));
      }
      return;
    case "open-trajectory":
      if (view.kind === "overview") {
        await showWoundTrajectory(view.data.id, requireData(target, "wound"));
      }
      return;
    case "open-general-trajectory":
      if (view.kind === "overview") {
        await showGeneralTrajectory(view.data.id);
      }
      return;
    case "open-calendar":
      await showCalendar();
      return;
    case "open-review":
      if (view.kind === "gallery") {
        await showReview(
          view.patientId,
          requireData(target, "wound"),
          requireData(target, "documentation"),
        );
      }
      return;
    case "overlay-mode":
      overlayMode = target.dataset["mode"] === "a_posteriori" ? "a_posteriori" : "none";
      render();
      return;
    case "confirm-slot":
      await runSlotAction(requireData(target, "slot"), (id) => api.confirmAppointment(id));
      return;
    case "cancel-slot":
      await runSlotAction(requireData(target, "slot"), (id) => api.cancelAppointment(id));
      return;
    case "video-session": {
      const session = await api.videoSession(requireData(target, "slot"));
      setNotice(`Video session for ${session.appointment_id}: token ${session.token}, valid until ${session.valid_until}.`);
      return;
    }
    case "save-annotation":
      await saveAnnotation();
      return;
    case "reset-annotation":
      annotation.reset();
      render();
      return;
    default:
      return;
  }
}

function requireData(target: HTMLElement, name: string): string {
  const value = target.dataset[name];
  if (!value) throw new Error(`button is missing data-${name}`);
  return value;
}

async function runSlotAction(slotId: string, call: (id: string) => Promise<unknown>): Promise<void> {
  // The button stays as-is until the server answers; the whole calendar is
  // then re-read so the UI can never show a booking the server refused.
  await slotQueue.run(slotId, () => call(slotId));
  await showCalendar();
}

async function saveAnnotation(): Promise<void> {
  if (view.kind !== "review") return;
  const ro = annotation.ro();
  if (ro === null) {
    setNotice("Place two distinct points and enter the reference length first.");
    return;
  }
  const result = await api.annotateReferenceObject(view.item.documentation_id, view.item.wound_id, ro);
  view = { ...view, saved: result.size };
  render();
  setNotice(`Saved: ${fmt(result.size.total_cm2)} cm² at ${fmt(result.size.scale_mm_per_px)} mm/px.`);
}

async function handleLogin(form: HTMLFormElement): Promise<void> {
  const data = new FormData(form);
  const username = String(data.get("username") ?? "");
  const password = String(data.get("password") ?? "");
  try {
    const session = await api.login(username, password);
    if (session.role !== "clinician") {
      api.setToken(null);
      view = { kind: "login", message: "This dashboard is for clinicians." };
      render();
      return;
    }
    clinicianId = session.principal_id;
    await showPatients();
  } catch (err) {
    view = { kind: "login", message: describeError(err) };
    render();
  }
}

async function handleCreateSlot(form: HTMLFormElement): Promise<void> {
  const data = new FormData(form);
  const start = localToIso(String(data.get("start") ?? ""));
  const end = localToIso(String(data.get("end") ?? ""));
  await api.createSlot(start, end);
  await showCalendar();
}

function localToIso(value: string): string {
  // datetime-local yields "YYYY-MM-DDTHH:MM"; the service stores UTC.
  return value.length === 16 ? `${value}:00Z` : `${value}Z`;
}

function wire(): void {
  document.body.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target) return;
    if (target.dataset["action"] === "place-point") {
      const img = target as HTMLImageElement;
      const rect = img.getBoundingClientRect();
      const x = ((event.clientX - rect.left) / rect.width) * img.naturalWidth;
      const y = ((event.clientY - rect.top) / rect.height) * img.naturalHeight;
      annotation.addPoint(Math.round(x * 100) / 100, Math.round(y * 100) / 100);
      render();
      return;
    }
    if (target instanceof HTMLInputElement) return;
    event.preventDefault();
    handleAction(target).catch((err) => setNotice(describeError(err)));
  });

  document.body.addEventListener("input", (event) => {
    const target = event.target as HTMLElement;
    if (target instanceof HTMLInputElement && target.dataset["action"] === "select-day") {
      if (view.kind !== "trajectory") return;
      const dates = view.data.points.map((p) => p.date);
      const date = dates[Number(target.value)];
      if (date !== undefined) {
        chartSelection.select(date);
        render();
      }
    }
    if (target instanceof HTMLInputElement && target.dataset["action"] === "known-length") {
      const mm = Number(target.value);
      annotation.setKnownLengthMm(Number.isFinite(mm) ? mm : 0);
      // Re-render only the computed outputs on blur/change to avoid stealing
      // focus from the number input while the clinician types.
    }
  });

  document.body.addEventListener("change", (event) => {
    const target = event.target as HTMLElement;
    if (target instanceof HTMLInputElement && target.dataset["action"] === "known-length") {
      render();
    }
  });

  // Pointer release must not clear the trajectory value line.
  document.body.addEventListener("pointerup", () => chartSelection.release());

  document.body.addEventListener("submit", (event) => {
    const form = event.target as HTMLFormElement;
    event.preventDefault();
    if (form.dataset["form"] === "login") {
      void handleLogin(form);
    } else if (form.dataset["form"] === "create-slot") {
      handleCreateSlot(form).catch((err) => setNotice(describeError(err)));
    }
  });
}

wire();
render();
