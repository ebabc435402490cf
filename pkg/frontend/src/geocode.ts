/** Pluggable external geocoder.
 *
 * Protocol: GET `{geocoder_url}?q=<query>` returning
 * `{"matches": [{"lon": ..., "lat": ...}, ...]}`. The first match wins;
 * an empty list means the query resolved to nothing. Any other outcome
 * is an error: the console never fabricates a location.
 */

import type { FetchLike } from "./config.js";

export interface GeoPoint {
  lon: number;
  lat: number;
}

export class GeocoderError extends Error {}

export async function geocode(
  query: string,
  geocoderUrl: string,
  fetchFn: FetchLike,
): Promise<GeoPoint | null> {
  if (!geocoderUrl) throw new GeocoderError("no geocoder configured");
  let resp: Response;
  try {
    resp = await fetchFn(`${geocoderUrl}?q=${encodeURIComponent(query)}`);
  } catch (err) {
    throw new GeocoderError(`geocoder unreachable: ${String(err)}`);
  }
  if (!resp.ok) throw new GeocoderError(`geocoder returned ${resp.status}`);
  const body = (await resp.json()) as { matches?: unknown };
  if (!Array.isArray(body.matches)) throw new GeocoderError("malformed geocoder response");
  const first = body.matches[0] as { lon?: unknown; lat?: unknown } | undefined;
  if (first === undefined) return null;
  if (typeof first.lon !== "number" || typeof first.lat !== "number") {
    throw new GeocoderError("malformed geocoder match");
  }
  return { lon: first.lon, lat: first.lat };
}
