/**
 * Plan viewer model. A composed plan is an SVG whose layer groups and
 * drawn shapes are annotated with data-record-id; clicking any annotated
 * shape navigates to that record, while legend entries and blank space do
 * nothing. The resolution logic lives here, on the parsed tree, so it can
 * be exercised without a browser.
 */

import { XmlElement, findAll, parseXml, walk } from "./xmlmini.js";

export const RECORD_ATTR = "data-record-id";
export const PERIOD_ATTR = "data-period-id";

export interface PlanLayer {
  element: XmlElement;
  recordId: string;
  periodId: string | null;
  fill: string;
}

export interface LegendEntry {
  element: XmlElement;
  periodId: string;
  color: string;
  label: string;
}

export interface PlanModel {
  root: XmlElement;
  viewBox: string;
  layers: PlanLayer[];
  legend: LegendEntry[];
}

function legendLabel(entry: XmlElement): string {
  const text = findAll(entry, (el) => el.tag === "text")[0];
  return text ? text.text.trim() : "";
}

function legendColor(entry: XmlElement): string {
  const swatch = findAll(entry, (el) => el.attrs.fill !== undefined)[0];
  return swatch ? swatch.attrs.fill : "";
}

function periodOf(layerId: string, periodIds: string[]): string | null {
  // Layer ids are "layer-{period}-{place}-{record}"; period ids may
  // themselves contain hyphens, so match against the known set.
  const best = periodIds
    .filter((pid) => layerId.startsWith(`layer-${pid}-`))
    .sort((a, b) => b.length - a.length)[0];
  return best ?? null;
}

export function parsePlan(svgText: string): PlanModel {
  const root = parseXml(svgText);
  const legendRoot = findAll(root, (el) => el.attrs.id === "legend")[0] ?? null;
  const legend: LegendEntry[] = [];
  if (legendRoot) {
    for (const entry of legendRoot.children) {
      const periodId = entry.attrs[PERIOD_ATTR];
      if (!periodId) continue;
      legend.push({ element: entry, periodId, color: legendColor(entry), label: legendLabel(entry) });
    }
  }
  const periodIds = legend.map((entry) => entry.periodId);
  const layers: PlanLayer[] = [];
  for (const el of walk(root)) {
    const id = el.attrs.id ?? "";
    if (!id.startsWith("layer-")) continue;
    layers.push({
      element: el,
      recordId: el.attrs[RECORD_ATTR] ?? "",
      periodId: periodOf(id, periodIds),
      fill: el.attrs.fill ?? "",
    });
  }
  return { root, viewBox: root.attrs.viewBox ?? "0 0 100 100", layers, legend };
}

function insideLegend(element: XmlElement): boolean {
  for (let el: XmlElement | null = element; el; el = el.parent) {
    if (el.attrs.id === "legend") return true;
  }
  return false;
}

/** Record id a click on this element should open, or null for a no-op.
 * Walks from the element through its ancestors, mirroring how an event
 * bubbles from the shape actually hit up to its layer group. */
export function resolveClick(element: XmlElement): string | null {
  if (insideLegend(element)) return null;
  for (let el: XmlElement | null = element; el; el = el.parent) {
    const recordId = el.attrs[RECORD_ATTR];
    if (recordId) return recordId;
  }
  return null;
}

/** Every element carrying a record annotation, layer groups included. */
export function annotatedElements(root: XmlElement): XmlElement[] {
  return findAll(root, (el) => el.attrs[RECORD_ATTR] !== undefined);
}
