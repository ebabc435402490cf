/** Typed client for the notice service HTTP API. */

import type { FetchLike } from "./config.js";

export type NoticeLabel = "Mandatory" | "Voluntary" | "NotNotice";

export type FeedbackAction = "Confirm" | "Correct" | "Reject";

/** Mirror of a served notice record plus the derived display color. */
export interface ViewNotice {
  id: string;
  scope_key: string;
  label: NoticeLabel;
  distribution: number[];
  text: string;
  source_url: string;
  channel_kind: string;
  observed_at: string;
  status: string;
  supersedes: string | null;
  reviewed: boolean;
  color: string;
}

export interface FeatureProperties {
  id: string;
  fips: string;
  label: NoticeLabel;
  text: string;
  source_url: string;
  observed_at: string;
  reviewed: boolean;
}

export type Ring = [number, number][];

export interface FeedFeature {
  type: "Feature";
  // Null when the serving side has no geometry for the notice's scope.
  geometry:
    | { type: "Polygon"; coordinates: Ring[] }
    | { type: "MultiPolygon"; coordinates: Ring[][] }
    | null;
  properties: FeatureProperties;
}

export interface FeedCollection {
  type: "FeatureCollection";
  features: FeedFeature[];
}

const LABEL_COLORS: Record<string, string> = {
  Mandatory: "#c0392b",
  Voluntary: "#e67e22",
};

/** Map color for a label; anything below notice level renders neutral. */
export function labelColor(label: string): string {
  return LABEL_COLORS[label] ?? "#95a5a6";
}

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
  }
}

function asView(record: Record<string, unknown>): ViewNotice {
  const notice = record as unknown as Omit<ViewNotice, "color">;
  return { ...notice, color: labelColor(notice.label) };
}

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly token: string,
    private readonly fetchFn: FetchLike,
  ) {}

  private async get(path: string): Promise<unknown> {
    const resp = await this.fetchFn(`${this.base}${path}`);
    if (!resp.ok) throw new ApiError(resp.status, `GET ${path} failed`);
    return resp.json();
  }

  async feed(): Promise<FeedCollection> {
    return (await this.get("/api/feed.geojson")) as FeedCollection;
  }

  async lookup(lon: number, lat: number): Promise<ViewNotice[]> {
    const body = (await this.get(`/api/lookup?lon=${lon}&lat=${lat}`)) as {
      notices: Record<string, unknown>[];
    };
    return body.notices.map(asView);
  }

  async reviewQueue(limit = 50): Promise<ViewNotice[]> {
    const body = (await this.get(`/api/review-queue?limit=${limit}`)) as {
      notices: Record<string, unknown>[];
    };
    return body.notices.map(asView);
  }

  async notices(): Promise<ViewNotice[]> {
    const body = (await this.get("/api/notices")) as {
      notices: Record<string, unknown>[];
    };
    return body.notices.map(asView);
  }

  /** The console's only mutation: every call lands in the server audit log. */
  async feedback(
    noticeId: string,
    action: FeedbackAction,
    correctedLabel?: NoticeLabel,
  ): Promise<ViewNotice> {
    const payload: Record<string, unknown> = { notice_id: noticeId, action };
    if (correctedLabel !== undefined) payload["corrected_label"] = correctedLabel;
    const resp = await this.fetchFn(`${this.base}/api/feedback`, {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        "X-Reviewer-Token": this.token,
      },
      body: JSON.stringify(payload),
    });
    if (!resp.ok) {
      let detail = `feedback failed: ${resp.status}`;
      try {
        const body = (await resp.json()) as { detail?: string };
        if (body.detail) detail = String(body.detail);
      } catch {
        // keep the status-based message
      }
      throw new ApiError(resp.status, detail);
    }
    const body = (await resp.json()) as { notice: Record<string, unknown> };
    return asView(body.notice);
  }
}
