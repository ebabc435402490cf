/** SVG map of the active-notice feed.
 *
 * Renders each feature as an SVG path (even-odd fill, so polygon holes stay
 * unfilled) colored by label. Clicking a polygon surfaces the notice text,
 * source link, and observation time in a detail panel.
 */

import type { FeatureProperties, FeedCollection, FeedFeature, Ring } from "./api.js";
import { labelColor } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

interface Bounds {
  minLon: number;
  minLat: number;
  maxLon: number;
  maxLat: number;
}

function featureRings(feature: FeedFeature): Ring[] {
  const geom = feature.geometry;
  if (geom === null) return [];
  if (geom.type === "Polygon") return geom.coordinates;
  const rings: Ring[] = [];
  for (const polygon of geom.coordinates) rings.push(...polygon);
  return rings;
}

function collectionBounds(collection: FeedCollection): Bounds | null {
  let bounds: Bounds | null = null;
  for (const feature of collection.features) {
    for (const ring of featureRings(feature)) {
      for (const [lon, lat] of ring) {
        if (bounds === null) {
          bounds = { minLon: lon, minLat: lat, maxLon: lon, maxLat: lat };
        } else {
          bounds.minLon = Math.min(bounds.minLon, lon);
          bounds.minLat = Math.min(bounds.minLat, lat);
          bounds.maxLon = Math.max(bounds.maxLon, lon);
          bounds.maxLat = Math.max(bounds.maxLat, lat);
        }
      }
    }
  }
  return bounds;
}

export class MapView {
  private root: HTMLElement;
  private onSelect: (props: FeatureProperties) => void;
  readonly viewSize = 600;

  constructor(root: HTMLElement, onSelect: (props: FeatureProperties) => void) {
    this.root = root;
    this.onSelect = onSelect;
  }

  /** Replace the rendered layer with `collection`. */
  render(collection: FeedCollection): void {
    const doc = this.root.ownerDocument;
    this.root.replaceChildren();

    if (collection.features.length === 0) {
      const banner = doc.createElement("div");
      banner.className = "banner banner-empty";
      banner.textContent = "No active notices";
      this.root.append(banner);
      return;
    }

    const bounds = collectionBounds(collection);
    if (bounds === null) return;
    // Degenerate extents still need a nonzero scale.
    const spanLon = Math.max(bounds.maxLon - bounds.minLon, 1e-9);
    const spanLat = Math.max(bounds.maxLat - bounds.minLat, 1e-9);
    const scale = (this.viewSize * 0.9) / Math.max(spanLon, spanLat);
    const pad = this.viewSize * 0.05;
    const project = (lon: number, lat: number): [number, number] => [
      pad + (lon - bounds.minLon) * scale,
      // SVG y grows downward; latitude grows upward.
      pad + (bounds.maxLat - lat) * scale,
    ];

    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${this.viewSize} ${this.viewSize}`);
    svg.setAttribute("class", "notice-map");

    for (const feature of collection.features) {
      const segments: string[] = [];
      for (const ring of featureRings(feature)) {
        const points = ring.map(([lon, lat]) => project(lon, lat).join(","));
        segments.push(`M${points.join("L")}Z`);
      }
      if (segments.length === 0) continue;
      const path = doc.createElementNS(SVG_NS, "path");
      path.setAttribute("d", segments.join(""));
      path.setAttribute("fill", labelColor(feature.properties.label));
      path.setAttribute("fill-rule", "evenodd");
      path.setAttribute("stroke", "#2c3e50");
      path.setAttribute("data-fips", feature.properties.fips);
      path.setAttribute("data-label", feature.properties.label);
      path.addEventListener("click", () => this.onSelect(feature.properties));
      svg.append(path);
    }
    this.root.append(svg);
  }
}

/** Detail panel for a clicked polygon. */
export class NoticeDetail {
  private root: HTMLElement;

  constructor(root: HTMLElement) {
    this.root = root;
  }

  show(props: FeatureProperties): void {
    const doc = this.root.ownerDocument;
    this.root.replaceChildren();

    const text = doc.createElement("p");
    text.className = "detail-text";
    text.textContent = props.text;

    const source = doc.createElement("a");
    source.className = "detail-source";
    source.href = props.source_url;
    source.textContent = props.source_url;

    const observed = doc.createElement("p");
    observed.className = "detail-observed";
    observed.textContent = `Observed at ${props.observed_at}`;

    this.root.append(text, source, observed);
  }

  clear(): void {
    this.root.replaceChildren();
  }
}
