/**
 * Form state helpers shared by the compose and edit views. Pure functions
 * so submission rules and patch construction are testable without a DOM.
 */

import {
  AttributeMap,
  ContentRef,
  RecordDetail,
  RecordFields,
  SchemaNode,
  Violation,
} from "./api.js";

export interface ComposeForm {
  mode: "model" | "plan" | "montage";
  places: string[];
  periods: string[];
}

/** Compositions need at least one place and one period; the submit
 * button stays disabled until both are chosen. */
export function canCompose(form: ComposeForm): boolean {
  return form.places.length > 0 && form.periods.length > 0;
}

export function toggleValue(values: string[], value: string): string[] {
  return values.includes(value) ? values.filter((v) => v !== value) : [...values, value];
}

export function parseCsv(raw: string): string[] {
  return raw
    .split(",")
    .map((item) => item.trim())
    .filter((item) => item.length > 0);
}

export function formatCsv(values: string[]): string {
  return values.join(", ");
}

export interface EditState {
  title: string;
  author: string;
  provenance: string;
  captureDate: string;
  subject: string;
  places: string[];
  periods: string[];
  attributes: { [path: string]: string };
}

function flattenAttributes(attrs: AttributeMap, prefix = ""): { [path: string]: string } {
  const out: { [path: string]: string } = {};
  for (const [name, value] of Object.entries(attrs)) {
    const path = prefix ? `${prefix}.${name}` : name;
    if (typeof value === "string") {
      out[path] = value;
    } else if (Array.isArray(value)) {
      out[path] = formatCsv(value);
    } else {
      Object.assign(out, flattenAttributes(value, path));
    }
  }
  return out;
}

export function editStateFrom(record: RecordDetail): EditState {
  return {
    title: record.title,
    author: record.author,
    provenance: record.provenance,
    captureDate: record.captureDate ?? "",
    subject: formatCsv(record.subject),
    places: [...record.places],
    periods: [...record.periods],
    attributes: flattenAttributes(record.attributes),
  };
}

function unflattenAttributes(flat: { [path: string]: string }): AttributeMap {
  const out: AttributeMap = {};
  for (const [path, value] of Object.entries(flat)) {
    const parts = path.split(".");
    let cursor = out;
    for (const part of parts.slice(0, -1)) {
      const next = cursor[part];
      if (next && typeof next === "object" && !Array.isArray(next)) {
        cursor = next;
      } else {
        const fresh: AttributeMap = {};
        cursor[part] = fresh;
        cursor = fresh;
      }
    }
    cursor[parts[parts.length - 1]] = value;
  }
  return out;
}

function sameList(a: string[], b: string[]): boolean {
  return a.length === b.length && a.every((item, i) => item === b[i]);
}

/** Fields for PUT /records/{id}: only what the user actually changed,
 * so an untouched form produces an empty patch. */
export function editPatch(original: RecordDetail, state: EditState): RecordFields {
  const patch: RecordFields = {};
  if (state.title !== original.title) patch.title = state.title;
  if (state.author !== original.author) patch.author = state.author;
  if (state.provenance !== original.provenance) patch.provenance = state.provenance;
  const capture = state.captureDate.trim();
  if (capture !== (original.captureDate ?? "")) patch.captureDate = capture || null;
  const subject = parseCsv(state.subject);
  if (!sameList(subject, original.subject)) patch.subject = subject;
  if (!sameList(state.places, original.places)) patch.places = state.places;
  if (!sameList(state.periods, original.periods)) patch.periods = state.periods;
  const originalAttrs = flattenAttributes(original.attributes);
  const changedAttr = Object.keys({ ...originalAttrs, ...state.attributes }).some(
    (path) => originalAttrs[path] !== state.attributes[path],
  );
  if (changedAttr) patch.attributes = unflattenAttributes(state.attributes);
  return patch;
}

export interface CreateState {
  kind: string;
  title: string;
  author: string;
  provenance: string;
  subject: string;
  places: string[];
  periods: string[];
  captureDate: string;
  contentHref: string;
  contentFormat: string;
  contentChecksum: string;
  contentSize: string;
  attributes: { [path: string]: string };
}

export function emptyCreateState(): CreateState {
  return {
    kind: "photo",
    title: "",
    author: "",
    provenance: "",
    subject: "",
    places: [],
    periods: [],
    captureDate: "",
    contentHref: "",
    contentFormat: "",
    contentChecksum: "",
    contentSize: "0",
    attributes: {},
  };
}

/** Dotted paths of every attribute leaf a kind's schema declares, in
 * declaration order; these become the create form's attribute inputs. */
export function attributePaths(nodes: SchemaNode[], prefix = ""): string[] {
  const out: string[] = [];
  for (const node of nodes) {
    const path = prefix ? `${prefix}.${node.name}` : node.name;
    if (node.children && node.children.length) {
      out.push(...attributePaths(node.children, path));
    } else {
      out.push(path);
    }
  }
  return out;
}

/** Fields for POST /records, in the canonical body order. Attribute
 * inputs left blank are omitted rather than sent as empty strings. */
export function createFields(state: CreateState): RecordFields {
  const content: ContentRef = {
    href: state.contentHref.trim(),
    format: state.contentFormat.trim(),
    checksum: state.contentChecksum.trim(),
    size: parseInt(state.contentSize, 10) || 0,
  };
  const filled: { [path: string]: string } = {};
  for (const [path, value] of Object.entries(state.attributes)) {
    if (value.trim() !== "") filled[path] = value;
  }
  return {
    kind: state.kind,
    title: state.title,
    author: state.author,
    provenance: state.provenance,
    subject: parseCsv(state.subject),
    places: state.places,
    periods: state.periods,
    captureDate: state.captureDate.trim() || null,
    content,
    attributes: unflattenAttributes(filled),
  };
}

/** Group violations by the leading path segment, which is how the edit
 * view decides which input to flag. Whole-record violations land on "". */
export function violationsByField(violations: Violation[]): { [field: string]: Violation[] } {
  const out: { [field: string]: Violation[] } = {};
  for (const violation of violations) {
    const field = violation.path.split(".")[0] ?? "";
    (out[field] ??= []).push(violation);
  }
  return out;
}
