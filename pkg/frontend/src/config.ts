/** Console configuration, loaded from the static `ui-config.json` file. */

export interface UiConfig {
  api_base: string;
  geocoder_url: string;
  reviewer_token: string;
  poll_secs: number;
}

export class ConfigError extends Error {}

export function parseConfig(raw: unknown): UiConfig {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ConfigError("config must be a JSON object");
  }
  const obj = raw as Record<string, unknown>;
  const text = (name: string, fallback: string): string => {
    const value = obj[name] ?? fallback;
    if (typeof value !== "string") throw new ConfigError(`${name} must be a string`);
    return value;
  };
  const poll = obj["poll_secs"] ?? 10;
  if (typeof poll !== "number" || !(poll > 0)) {
    throw new ConfigError("poll_secs must be a positive number");
  }
  return {
    api_base: text("api_base", ""),
    geocoder_url: text("geocoder_url", ""),
    reviewer_token: text("reviewer_token", ""),
    poll_secs: poll,
  };
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export async function loadConfig(
  fetchFn: FetchLike,
  url = "ui-config.json",
): Promise<UiConfig> {
  const resp = await fetchFn(url);
  if (!resp.ok) throw new ConfigError(`config fetch failed: ${resp.status}`);
  return parseConfig(await resp.json());
}
