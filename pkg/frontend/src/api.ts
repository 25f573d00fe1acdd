/**
 * Typed client for the annotation service HTTP API.
 *
 * Every height or error figure shown in the UI originates from these
 * responses; the client never derives heights locally, so UI, service, and
 * CLI cannot disagree. The fetch implementation is injectable for tests.
 */

export interface Box {
  class_id: number;
  cx: number;
  cy: number;
  w: number;
  h: number;
}

export interface SessionInfo {
  session_id: string;
  image_id: string;
  lat_deg: number;
  lon_deg: number;
  capture_date: string;
  resolved_time: string | null;
  cursor: number;
  n_boxes: number;
  width: number;
  height: number;
  boxes: Box[];
  gt_heights_m: (number | null)[];
  gsd_m_per_px: number;
}

export interface AnnotationResult {
  stored: Record<string, unknown>;
  est_height_m: number;
  shadow_length_m: number;
  gt_height_m?: number;
  abs_error_m?: number;
  time_source: "metadata" | "inferred" | "solar_noon";
  time_used: string;
  cursor: number;
}

export interface TimeFitResult {
  best_time: string;
  residual_rmse_m: number;
  n_buildings: number;
  search_step_s: number;
  local_minima: [string, number][];
}

export interface ServiceError {
  error: string;
  message: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly body: ServiceError) {
    super(`${body.error}: ${body.message}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class AnnotationClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, body?: unknown): Promise<T> {
    const init: RequestInit = body === undefined
      ? {}
      : {
          method: "POST",
          headers: { "Content-Type": "application/json" },
          body: JSON.stringify(body),
        };
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, payload as ServiceError);
    }
    return payload as T;
  }

  openSession(imageId: string): Promise<SessionInfo> {
    return this.request<SessionInfo>("/sessions", { image_id: imageId });
  }

  submitAnnotation(
    sessionId: string,
    bboxIndex: number,
    start: [number, number],
    end: [number, number],
    verticalEdgePx?: number,
  ): Promise<AnnotationResult> {
    return this.request<AnnotationResult>(`/sessions/${sessionId}/annotations`, {
      bbox_index: bboxIndex,
      shadow_start_px: start,
      shadow_end_px: end,
      ...(verticalEdgePx === undefined ? {} : { vertical_edge_px: verticalEdgePx }),
    });
  }

  refineTime(sessionId: string): Promise<TimeFitResult> {
    return this.request<TimeFitResult>(`/sessions/${sessionId}/refine-time`, {});
  }

  imageUrl(imageId: string): string {
    return `${this.baseUrl}/images/${imageId}`;
  }
}
