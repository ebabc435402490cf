/** Shared test scaffolding: a detached DOM and scriptable fetch stubs. */

import { JSDOM } from "jsdom";

import type { FeedCollection, ViewNotice } from "../src/api.js";
import type { FetchLike } from "../src/config.js";

export function makeRoot(): HTMLElement {
  const dom = new JSDOM('<main id="root"></main>');
  const root = dom.window.document.getElementById("root");
  if (root === null) throw new Error("fixture root missing");
  return root as unknown as HTMLElement;
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export interface RecordedCall {
  url: string;
  init?: RequestInit;
}

/** Fetch stub that answers by URL substring and records every call. */
export function routedFetch(
  routes: Array<[string, () => Response | Promise<Response>]>,
): { fetchFn: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    calls.push({ url, init });
    for (const [needle, responder] of routes) {
      if (url.includes(needle)) return responder();
    }
    throw new Error(`unrouted fetch: ${url}`);
  };
  return { fetchFn, calls };
}

export function sampleNotice(overrides: Partial<ViewNotice> = {}): Record<string, unknown> {
  return {
    id: "n-000001",
    scope_key: "12086",
    label: "Mandatory",
    distribution: [0.8, 0.15, 0.05],
    text: "Mandatory evacuation ordered for zone A",
    source_url: "https://example.gov/alerts/1",
    channel_kind: "gov_site",
    observed_at: "2019-08-30T12:00:00Z",
    status: "ACTIVE",
    supersedes: null,
    reviewed: false,
    ...overrides,
  };
}

export function sampleFeed(): FeedCollection {
  return {
    type: "FeatureCollection",
    features: [
      {
        type: "Feature",
        geometry: {
          type: "Polygon",
          coordinates: [
            [
              [-80.5, 25.2],
              [-80.1, 25.2],
              [-80.1, 25.8],
              [-80.5, 25.8],
              [-80.5, 25.2],
            ],
          ],
        },
        properties: {
          id: "n-000001",
          fips: "12086",
          label: "Mandatory",
          text: "Mandatory evacuation ordered for zone A",
          source_url: "https://example.gov/alerts/1",
          observed_at: "2019-08-30T12:00:00Z",
          reviewed: false,
        },
      },
      {
        type: "Feature",
        geometry: {
          type: "Polygon",
          coordinates: [
            [
              [-80.0, 26.0],
              [-79.6, 26.0],
              [-79.6, 26.6],
              [-80.0, 26.6],
              [-80.0, 26.0],
            ],
          ],
        },
        properties: {
          id: "n-000002",
          fips: "12011",
          label: "Voluntary",
          text: "Voluntary evacuation encouraged for coastal areas",
          source_url: "https://example.gov/alerts/2",
          observed_at: "2019-08-30T13:00:00Z",
          reviewed: false,
        },
      },
    ],
  };
}
