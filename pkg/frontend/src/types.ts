/** JSON payload shapes of the /api/v1 service. Field names are snake_case
 * on the wire; these types mirror them exactly so responses need no mapping. */

export interface LoginResponse {
  token: string;
  role: "patient" | "clinician";
  principal_id: string;
  display_name: string;
  expires_at: string;
}

export interface PatientRow {
  id: string;
  display_name: string;
  conditions: string[];
  allergies: string[];
  medications: string[];
  dressing: string | null;
  clinician_ids: string[];
}

export interface PatientList {
  patients: PatientRow[];
}

export interface WoundLocation {
  region: string;
  laterality: string;
  aspect: string;
}

export interface WoundSummary {
  id: string;
  location: WoundLocation;
  created_at: string;
  documentation_count: number;
  last_documented_at: string | null;
}

export interface PatientOverview {
  id: string;
  display_name: string;
  conditions: string[];
  allergies: string[];
  medications: string[];
  dressing: string | null;
  wounds: WoundSummary[];
}

export interface GalleryItem {
  index: number;
  total: number;
  counter: string; // "i of N"
  wound_id: string;
  documentation_id: string;
  timestamp: string;
  image_blob: string;
  mask_blob: string | null;
}

export interface Gallery {
  wound_id: string;
  items: GalleryItem[];
}

export interface TrajectoryPoint {
  date: string; // YYYY-MM-DD
  values: Record<string, number>;
}

export interface Trajectory {
  kind: "wound" | "general";
  subject_id: string;
  series: string[];
  points: TrajectoryPoint[];
}

export type SlotState = "available" | "booked" | "confirmed" | "completed" | "cancelled";

export interface AuditEntry {
  action: string;
  from: string;
  to: string;
  actor: string;
  at: string;
}

export interface AppointmentSlot {
  id: string;
  clinician_id: string;
  start: string;
  end: string;
  state: SlotState;
  patient_id: string | null;
  audit?: AuditEntry[];
}

export interface SlotDay {
  date: string;
  slots: AppointmentSlot[];
}

export interface SlotDays {
  days: SlotDay[];
}

export interface ReferenceAnnotation {
  ax: number;
  ay: number;
  bx: number;
  by: number;
  known_length_mm: number;
}

export interface WoundSize {
  component_mm2: number[];
  total_mm2: number;
  total_cm2: number;
  scale_mm_per_px: number;
}

export interface RoAnnotationResult {
  documentation_id: string;
  wound_id: string;
  ro: ReferenceAnnotation;
  size: WoundSize;
}

export interface VideoSession {
  appointment_id: string;
  token: string;
  issued_at: string;
  valid_until: string;
}

export interface HelpEntry {
  screen: string;
  text: string;
  audio: string | null;
}

export interface ApiErrorBody {
  error: string;
  code?: string;
  field?: string;
  detail?: string;
}
