/**
 * Scene viewer model. Composed 3D scenes arrive as X3D: one named Group
 * per place/period pair holding a Material color and an Inline reference
 * to the massing geometry. Browsers have no native X3D support and the
 * viewer stays dependency free, so the UI renders a proxy: each group
 * becomes an isometric block at its scene translation, in its assigned
 * period color. Parsing and projection are pure; only the SVG assembly
 * touches the DOM.
 */

import { XmlElement, byLocalName, parseXml } from "./xmlmini.js";

export interface SceneGroup {
  name: string;
  color: string;
  translation: [number, number, number];
  inlineUrl: string;
}

export interface SceneModel {
  groups: SceneGroup[];
}

export function parseColor(color: string): [number, number, number] {
  const parts = color.trim().split(/\s+/).map(Number);
  return [parts[0] ?? 0, parts[1] ?? 0, parts[2] ?? 0];
}

export function cssColor(color: string, scale = 1): string {
  const [r, g, b] = parseColor(color).map((c) =>
    Math.round(Math.max(0, Math.min(1, c * scale)) * 255),
  );
  return `rgb(${r},${g},${b})`;
}

function firstLocal(element: XmlElement, name: string): XmlElement | null {
  return byLocalName(element, name)[0] ?? null;
}

function parseTranslation(group: XmlElement): [number, number, number] {
  const transform = firstLocal(group, "Transform");
  if (!transform) return [0, 0, 0];
  const parts = (transform.attrs.translation ?? "0 0 0").trim().split(/\s+/).map(Number);
  return [parts[0] || 0, parts[1] || 0, parts[2] || 0];
}

function parseInlineUrl(group: XmlElement): string {
  const inline = firstLocal(group, "Inline");
  if (!inline) return "";
  // MFString values wrap each entry in literal double quotes.
  return (inline.attrs.url ?? "").replace(/^"|"$/g, "");
}

export function parseScene(x3dText: string): SceneModel {
  const root = parseXml(x3dText);
  const groups: SceneGroup[] = [];
  for (const group of byLocalName(root, "Group")) {
    const name = group.attrs.DEF;
    if (!name) continue;
    const material = firstLocal(group, "Material");
    groups.push({
      name,
      color: material?.attrs.diffuseColor ?? "1 1 1",
      translation: parseTranslation(group),
      inlineUrl: parseInlineUrl(group),
    });
  }
  return { groups };
}

export interface GroupName {
  placeId: string;
  periodId: string;
  recordId: string;
}

/** Split "{place}-{period}-{record}" given the known vocabularies; all
 * three parts may themselves contain hyphens, so match longest-first. */
export function splitGroupName(
  name: string,
  placeIds: string[],
  periodIds: string[],
): GroupName | null {
  const places = [...placeIds].sort((a, b) => b.length - a.length);
  for (const placeId of places) {
    if (!name.startsWith(`${placeId}-`)) continue;
    const rest = name.slice(placeId.length + 1);
    const periods = [...periodIds].sort((a, b) => b.length - a.length);
    for (const periodId of periods) {
      if (rest.startsWith(`${periodId}-`)) {
        return { placeId, periodId, recordId: rest.slice(periodId.length + 1) };
      }
    }
  }
  return null;
}

export interface Point2 {
  x: number;
  y: number;
}

const ISO_COS = Math.cos(Math.PI / 6);
const ISO_SIN = 0.5;

/** Standard isometric projection: scene x runs right-down, z left-down,
 * y straight up. */
export function project(x: number, y: number, z: number): Point2 {
  return { x: (x - z) * ISO_COS, y: (x + z) * ISO_SIN - y };
}

export interface BlockFace {
  points: Point2[];
  shade: number;
}

/** Three visible faces of an axis-aligned block centred on (x, z) with
 * its base at y; top face brightest, right face darkest. */
export function blockFaces(
  translation: [number, number, number],
  size = 8,
  height = 10,
): BlockFace[] {
  const [cx, baseY, cz] = translation;
  const h = size / 2;
  const corner = (dx: number, dy: number, dz: number) =>
    project(cx + dx, baseY + dy, cz + dz);
  const top = [corner(-h, height, -h), corner(h, height, -h), corner(h, height, h), corner(-h, height, h)];
  const left = [corner(-h, height, h), corner(h, height, h), corner(h, 0, h), corner(-h, 0, h)];
  const right = [corner(h, height, h), corner(h, height, -h), corner(h, 0, -h), corner(h, 0, h)];
  return [
    { points: top, shade: 1 },
    { points: left, shade: 0.8 },
    { points: right, shade: 0.6 },
  ];
}

export function facePoints(face: BlockFace): string {
  return face.points.map((p) => `${round2(p.x)},${round2(p.y)}`).join(" ");
}

function round2(value: number): number {
  return Math.round(value * 100) / 100;
}

export interface SceneBounds {
  viewBox: string;
}

export function sceneBounds(groups: SceneGroup[], size = 8, height = 10): SceneBounds {
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  for (const group of groups) {
    for (const face of blockFaces(group.translation, size, height)) {
      for (const point of face.points) {
        minX = Math.min(minX, point.x);
        minY = Math.min(minY, point.y);
        maxX = Math.max(maxX, point.x);
        maxY = Math.max(maxY, point.y);
      }
    }
  }
  if (!groups.length) return { viewBox: "0 0 100 100" };
  const pad = size;
  return {
    viewBox: `${round2(minX - pad)} ${round2(minY - pad)} ${round2(maxX - minX + 2 * pad)} ${round2(maxY - minY + 2 * pad)}`,
  };
}
