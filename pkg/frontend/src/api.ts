/** Thin typed client over the /api/v1 JSON service.
 *
 * The fetch function is injectable so tests can run against recorded
 * responses without a network; the browser entry point passes the real
 * `fetch`. Every mutation helper returns the server's response body — the
 * dashboard re-renders from server truth, never from optimistic state. */

import type {
  ApiErrorBody,
  Gallery,
  HelpEntry,
  LoginResponse,
  PatientList,
  PatientOverview,
  ReferenceAnnotation,
  RoAnnotationResult,
  SlotDays,
  Trajectory,
  VideoSession,
  AppointmentSlot,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(`${status}: ${body.error}${body.code ? ` (${body.code})` : ""}`);
    this.status = status;
    this.body = body;
  }
}

export class ApiClient {
  private token: string | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike,
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  /** URL for an image blob; <img> tags cannot send headers, so callers
   * should fetch blobs through `imageBlob` and object-URL them instead. */
  imageUrl(blobKey: string): string {
    return `${this.baseUrl}/api/v1/images/${blobKey}`;
  }

  async login(username: string, password: string): Promise<LoginResponse> {
    const result = await this.request<LoginResponse>("POST", "/api/v1/auth/login", {
      json: { username, password },
    });
    this.token = result.token;
    return result;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/healthz");
  }

  help(screenId: string, locale = "en"): Promise<HelpEntry> {
    return this.request("GET", `/api/v1/help/${screenId}?locale=${locale}`);
  }

  listPatients(): Promise<PatientList> {
    return this.request("GET", "/api/v1/clinician/patients");
  }

  patientOverview(patientId: string): Promise<PatientOverview> {
    return this.request("GET", `/api/v1/patients/${patientId}/overview`);
  }

  gallery(woundId: string): Promise<Gallery> {
    return this.request("GET", `/api/v1/wounds/${woundId}/gallery`);
  }

  woundTrajectory(woundId: string, range?: { start?: string; end?: string }): Promise<Trajectory> {
    return this.request("GET", `/api/v1/wounds/${woundId}/trajectory${rangeQuery(range)}`);
  }

  generalTrajectory(patientId: string, range?: { start?: string; end?: string }): Promise<Trajectory> {
    return this.request(
      "GET",
      `/api/v1/patients/${patientId}/trajectory/general${rangeQuery(range)}`,
    );
  }

  slots(filter?: { clinician_id?: string; start_date?: string; end_date?: string }): Promise<SlotDays> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(filter ?? {})) {
      if (value) params.set(key, value);
    }
    const query = params.toString();
    return this.request("GET", `/api/v1/appointments/slots${query ? `?${query}` : ""}`);
  }

  createSlot(start: string, end: string): Promise<AppointmentSlot> {
    return this.request("POST", "/api/v1/clinician/slots", { json: { start, end } });
  }

  confirmAppointment(appointmentId: string): Promise<AppointmentSlot> {
    return this.request("POST", `/api/v1/appointments/${appointmentId}/confirm`);
  }

  cancelAppointment(appointmentId: string): Promise<AppointmentSlot> {
    return this.request("DELETE", `/api/v1/appointments/${appointmentId}`);
  }

  videoSession(appointmentId: string): Promise<VideoSession> {
    return this.request("POST", `/api/v1/appointments/${appointmentId}/video-session`);
  }

  annotateReferenceObject(
    documentationId: string,
    woundId: string,
    ro: ReferenceAnnotation,
  ): Promise<RoAnnotationResult> {
    return this.request("POST", `/api/v1/documentations/${documentationId}/ro-annotation`, {
      json: { wound_id: woundId, ro },
    });
  }

  async imageBlob(blobKey: string): Promise<Blob> {
    const resp = await this.fetchFn(this.imageUrl(blobKey), {
      headers: this.headers(),
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, await errorBody(resp));
    }
    return resp.blob();
  }

  private headers(contentType?: string): Record<string, string> {
    const headers: Record<string, string> = {};
    if (contentType) headers["content-type"] = contentType;
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async request<T>(
    method: string,
    path: string,
    options: { json?: unknown } = {},
  ): Promise<T> {
    const init: RequestInit = { method, headers: this.headers(
      options.json === undefined ? undefined : "application/json",
    ) };
    if (options.json !== undefined) init.body = JSON.stringify(options.json);
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, await errorBody(resp));
    }
    return (await resp.json()) as T;
  }
}

function rangeQuery(range?: { start?: string; end?: string }): string {
  const params = new URLSearchParams();
  if (range?.start) params.set("start", range.start);
  if (range?.end) params.set("end", range.end);
  const query = params.toString();
  return query ? `?${query}` : "";
}

async function errorBody(resp: Response): Promise<ApiErrorBody> {
  try {
    return (await resp.json()) as ApiErrorBody;
  } catch {
    return { error: `http_${resp.status}` };
  }
}
