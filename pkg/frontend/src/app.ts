/** Console shell: map + address lookup, plus the review queue when a
 * reviewer token is configured.
 *
 * The console is read-only except for feedback posts. Polling drives all
 * state: a failed poll shows a connectivity banner and keeps the last
 * rendered layer instead of blanking the map.
 */

import { ApiClient } from "./api.js";
import type { ViewNotice } from "./api.js";
import type { FetchLike, UiConfig } from "./config.js";
import { geocode, GeocoderError } from "./geocode.js";
import { MapView, NoticeDetail } from "./map.js";
import { ReviewQueueView } from "./queue.js";

function pickDisplayNotice(notices: ViewNotice[]): ViewNotice | undefined {
  // Mandatory outranks Voluntary when a point sits under both.
  const rank: Record<string, number> = { Mandatory: 0, Voluntary: 1 };
  return [...notices].sort(
    (a, b) => (rank[a.label] ?? 2) - (rank[b.label] ?? 2),
  )[0];
}

export class App {
  readonly api: ApiClient;
  private config: UiConfig;
  private fetchFn: FetchLike;
  private map: MapView;
  private detail: NoticeDetail;
  private queue: ReviewQueueView | null = null;
  private banner: HTMLElement;
  private lookupInput: HTMLInputElement;
  private lookupResult: HTMLElement;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(root: HTMLElement, config: UiConfig, fetchFn: FetchLike) {
    this.config = config;
    this.fetchFn = fetchFn;
    this.api = new ApiClient(config.api_base, config.reviewer_token, fetchFn);

    const doc = root.ownerDocument;
    root.replaceChildren();
    root.classList.add("console-app");

    this.banner = doc.createElement("div");
    this.banner.className = "connectivity-banner";
    this.banner.textContent = "Connection lost; showing last known notices";
    this.banner.style.display = "none";

    const mapRoot = doc.createElement("div");
    mapRoot.className = "map-root";
    const detailRoot = doc.createElement("div");
    detailRoot.className = "detail-panel";
    this.map = new MapView(mapRoot, (props) => this.detail.show(props));
    this.detail = new NoticeDetail(detailRoot);

    const lookupBox = doc.createElement("div");
    lookupBox.className = "lookup-box";
    this.lookupInput = doc.createElement("input");
    this.lookupInput.className = "lookup-input";
    this.lookupInput.placeholder = "Street address or place";
    const lookupButton = doc.createElement("button");
    lookupButton.className = "lookup-button";
    lookupButton.textContent = "Check address";
    lookupButton.addEventListener("click", () => void this.lookup(this.lookupInput.value));
    this.lookupResult = doc.createElement("div");
    this.lookupResult.className = "lookup-result";
    lookupBox.append(this.lookupInput, lookupButton, this.lookupResult);

    root.append(this.banner, mapRoot, detailRoot, lookupBox);

    if (config.reviewer_token) {
      const queueRoot = doc.createElement("div");
      queueRoot.className = "queue-root";
      this.queue = new ReviewQueueView(queueRoot, this.api, () => void this.pollOnce());
      root.append(queueRoot);
    }
  }

  /** One refresh cycle: feed always, queue when token-gated view exists. */
  async pollOnce(): Promise<void> {
    try {
      const feed = await this.api.feed();
      this.map.render(feed);
      if (this.queue !== null) {
        this.queue.setNotices(await this.api.reviewQueue());
      }
      this.banner.style.display = "none";
    } catch {
      // Keep whatever layer is on screen; just flag the outage.
      this.banner.style.display = "";
    }
  }

  start(): void {
    void this.pollOnce();
    this.timer = setInterval(() => void this.pollOnce(), this.config.poll_secs * 1000);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }

  /** Resolve an address and report the ruling notice at that point. */
  async lookup(query: string): Promise<void> {
    const doc = this.lookupResult.ownerDocument;
    this.lookupResult.replaceChildren();

    let point;
    try {
      point = await geocode(query, this.config.geocoder_url, this.fetchFn);
    } catch (err) {
      const msg = doc.createElement("p");
      msg.className = "lookup-error";
      msg.textContent =
        err instanceof GeocoderError
          ? "Address lookup is unavailable right now; please try again."
          : `Lookup failed: ${String(err)}`;
      this.lookupResult.append(msg);
      return;
    }
    if (point === null) {
      const msg = doc.createElement("p");
      msg.className = "lookup-miss";
      msg.textContent = "No location found for that address.";
      this.lookupResult.append(msg);
      return;
    }

    let notices: ViewNotice[];
    try {
      notices = await this.api.lookup(point.lon, point.lat);
    } catch {
      const msg = doc.createElement("p");
      msg.className = "lookup-error";
      msg.textContent = "Notice service is unreachable; please try again.";
      this.lookupResult.append(msg);
      return;
    }

    const ruling = pickDisplayNotice(notices);
    if (ruling === undefined) {
      const msg = doc.createElement("p");
      msg.className = "lookup-none";
      msg.textContent = "No active notice at this location.";
      this.lookupResult.append(msg);
      return;
    }
    const heading = doc.createElement("p");
    heading.className = "lookup-hit";
    heading.dataset.label = ruling.label;
    heading.textContent = `${ruling.label} notice in effect`;
    const text = doc.createElement("p");
    text.className = "lookup-hit-text";
    text.textContent = ruling.text;
    this.lookupResult.append(heading, text);
  }
}
