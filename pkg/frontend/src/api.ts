/**
 * Service contract layer: typed payloads, canonical request encoders, and
 * a small fetch client.
 *
 * The encoders are the contract-sensitive part. Body key order and query
 * parameter order are fixed here so that what the app sends is exactly
 * what the service's recorded fixtures show; tests compare the bytes.
 */

export interface ResultItem {
  id: string;
  kind: string;
  subkind: string | null;
  title: string;
  author: string;
  captureDate: string | null;
  places: string[];
  periods: string[];
  keywords: string[];
  archived: boolean;
}

export interface ResultPage {
  items: ResultItem[];
  total: number;
  page: number;
  pageSize: number;
}

export interface RelatedItem extends ResultItem {
  score: number;
}

export interface ContentRef {
  href: string;
  format: string;
  checksum: string;
  size: number;
}

export type AttributeValue = string | string[] | AttributeMap;
export interface AttributeMap {
  [name: string]: AttributeValue;
}

export interface RecordDetail {
  id: string;
  kind: string;
  subkind: string | null;
  title: string;
  author: string;
  provenance: string;
  captureDate: string | null;
  subject: string[];
  places: string[];
  periods: string[];
  coordinates: number[] | null;
  content: ContentRef;
  attributes: AttributeMap;
  legacy: { path: string; value: string }[];
  schemaVersion: number;
  createdAt: string;
  updatedAt: string;
  archived: boolean;
}

export interface FacetMap {
  [facet: string]: string[];
}

export interface Period {
  id: string;
  label: string;
  startYear: number;
  endYear: number;
  description: string;
}

export interface Place {
  id: string;
  name: string;
  parentId: string | null;
  description: string;
  footprint: number[][] | null;
}

export interface SchemaNode {
  name: string;
  type: string;
  required: boolean;
  repeatable: boolean;
  facet?: string;
  children?: SchemaNode[];
}

export interface SchemaInfo {
  version: number;
  kinds: { [kind: string]: SchemaNode[] };
}

export interface Violation {
  path: string;
  rule: string;
  message: string;
}

export interface SearchForm {
  kinds: string[];
  places: string[];
  keywords: string[];
  authors: string[];
  periodFrom: number | null;
  periodTo: number | null;
  includeArchived: boolean;
  page: number;
  pageSize: number;
}

export function emptySearchForm(): SearchForm {
  return {
    kinds: [],
    places: [],
    keywords: [],
    authors: [],
    periodFrom: null,
    periodTo: null,
    includeArchived: false,
    page: 1,
    pageSize: 50,
  };
}

/** Query string for GET /records; parameters appear in a fixed order and
 * defaults are omitted, so equal forms give equal URLs. */
export function buildSearchQuery(form: SearchForm): string {
  const params: [string, string][] = [];
  for (const kind of form.kinds) params.push(["kind", kind]);
  for (const place of form.places) params.push(["place", place]);
  for (const keyword of form.keywords) params.push(["keyword", keyword]);
  for (const author of form.authors) params.push(["author", author]);
  if (form.periodFrom !== null) params.push(["periodFrom", String(form.periodFrom)]);
  if (form.periodTo !== null) params.push(["periodTo", String(form.periodTo)]);
  if (form.includeArchived) params.push(["includeArchived", "true"]);
  if (form.page !== 1) params.push(["page", String(form.page)]);
  if (form.pageSize !== 50) params.push(["pageSize", String(form.pageSize)]);
  return params
    .map(([key, value]) => `${key}=${encodeURIComponent(value)}`)
    .join("&");
}

export function buildLoginBody(username: string, password: string): string {
  return JSON.stringify({ username, password });
}

export function buildComposeBody(places: string[], periods: string[]): string {
  return JSON.stringify({ places, periods });
}

export interface MontageEntry {
  recordId: string;
  opacity: number;
}

export function buildMontageBody(entries: MontageEntry[]): string {
  return JSON.stringify({
    entries: entries.map((entry) => ({ recordId: entry.recordId, opacity: entry.opacity })),
  });
}

export interface RecordFields {
  kind?: string;
  subkind?: string | null;
  title?: string;
  author?: string;
  provenance?: string;
  subject?: string[];
  places?: string[];
  periods?: string[];
  captureDate?: string | null;
  coordinates?: number[] | null;
  content?: ContentRef;
  attributes?: AttributeMap;
}

const FIELD_ORDER: (keyof RecordFields)[] = [
  "kind",
  "subkind",
  "title",
  "author",
  "provenance",
  "subject",
  "places",
  "periods",
  "captureDate",
  "coordinates",
  "content",
  "attributes",
];

/** Body for POST /records and PUT /records/{id}: only the provided
 * fields, always in the same order, content sub-keys normalized. */
export function buildRecordBody(fields: RecordFields): string {
  const body: { [key: string]: unknown } = {};
  for (const key of FIELD_ORDER) {
    if (fields[key] === undefined) continue;
    if (key === "content") {
      const c = fields.content as ContentRef;
      body.content = { href: c.href, format: c.format, checksum: c.checksum, size: c.size };
    } else {
      body[key] = fields[key];
    }
  }
  return JSON.stringify(body);
}

export interface ComposeResult {
  body: string;
  warnings: string[];
  legend: [string, string][];
}

export class ApiError extends Error {
  status: number;
  code: string;
  violations: Violation[];

  constructor(status: number, code: string, message: string, violations: Violation[] = []) {
    super(message);
    this.status = status;
    this.code = code;
    this.violations = violations;
  }
}

function errorFromPayload(status: number, payload: unknown): ApiError {
  let box = payload as { [key: string]: unknown } | null;
  if (box && typeof box === "object" && "detail" in box) {
    box = box.detail as { [key: string]: unknown };
  }
  const error = box && typeof box === "object" ? (box.error as { [key: string]: unknown }) : null;
  if (error && typeof error === "object") {
    return new ApiError(
      status,
      String(error.code ?? "error"),
      String(error.message ?? "request failed"),
      Array.isArray(error.violations) ? (error.violations as Violation[]) : [],
    );
  }
  return new ApiError(status, "error", `request failed with status ${status}`);
}

/** Thin fetch wrapper; one instance holds the session token. */
export class ApiClient {
  token: string | null = null;
  role: string | null = null;

  private headers(json: boolean): HeadersInit {
    const out: { [key: string]: string } = {};
    if (json) out["Content-Type"] = "application/json";
    if (this.token) out["Authorization"] = `Bearer ${this.token}`;
    return out;
  }

  private async request(method: string, path: string, body?: string): Promise<Response> {
    const response = await fetch(path, { method, headers: this.headers(body !== undefined), body });
    if (!response.ok) {
      let payload: unknown = null;
      try {
        payload = await response.json();
      } catch {
        // non-JSON error body; fall through to the generic message
      }
      throw errorFromPayload(response.status, payload);
    }
    return response;
  }

  private async getJson<T>(path: string): Promise<T> {
    return (await (await this.request("GET", path)).json()) as T;
  }

  async login(username: string, password: string): Promise<void> {
    const response = await this.request("POST", "/auth/login", buildLoginBody(username, password));
    const data = (await response.json()) as { token: string; role: string };
    this.token = data.token;
    this.role = data.role;
  }

  async logout(): Promise<void> {
    if (this.token) await this.request("POST", "/auth/logout");
    this.token = null;
    this.role = null;
  }

  get isExpert(): boolean {
    return this.role === "expert";
  }

  search(form: SearchForm): Promise<ResultPage> {
    const query = buildSearchQuery(form);
    return this.getJson(query ? `/records?${query}` : "/records");
  }

  record(id: string): Promise<RecordDetail> {
    return this.getJson(`/records/${encodeURIComponent(id)}`);
  }

  related(id: string): Promise<RelatedItem[]> {
    return this.getJson(`/records/${encodeURIComponent(id)}/related`);
  }

  facets(): Promise<FacetMap> {
    return this.getJson("/facets");
  }

  periods(): Promise<Period[]> {
    return this.getJson("/periods");
  }

  places(): Promise<Place[]> {
    return this.getJson("/places");
  }

  browseHistory(periodId: string): Promise<ResultItem[]> {
    return this.getJson(`/browse/history/${encodeURIComponent(periodId)}`);
  }

  browsePlace(placeId: string): Promise<ResultItem[]> {
    return this.getJson(`/browse/place/${encodeURIComponent(placeId)}`);
  }

  schema(): Promise<SchemaInfo> {
    return this.getJson("/schema");
  }

  async createRecord(fields: RecordFields): Promise<RecordDetail> {
    const response = await this.request("POST", "/records", buildRecordBody(fields));
    return (await response.json()) as RecordDetail;
  }

  async updateRecord(id: string, fields: RecordFields): Promise<RecordDetail> {
    const response = await this.request(
      "PUT",
      `/records/${encodeURIComponent(id)}`,
      buildRecordBody(fields),
    );
    return (await response.json()) as RecordDetail;
  }

  async archiveRecord(id: string): Promise<RecordDetail> {
    const response = await this.request("DELETE", `/records/${encodeURIComponent(id)}`);
    return (await response.json()) as RecordDetail;
  }

  async restoreRecord(id: string): Promise<RecordDetail> {
    const response = await this.request("POST", `/records/${encodeURIComponent(id)}/restore`);
    return (await response.json()) as RecordDetail;
  }

  private async compose(path: string, body: string): Promise<ComposeResult> {
    const response = await this.request("POST", path, body);
    return {
      body: await response.text(),
      warnings: JSON.parse(response.headers.get("X-Composition-Warnings") ?? "[]"),
      legend: JSON.parse(response.headers.get("X-Composition-Legend") ?? "[]"),
    };
  }

  composeModel(places: string[], periods: string[]): Promise<ComposeResult> {
    return this.compose("/compose/model", buildComposeBody(places, periods));
  }

  composePlan(places: string[], periods: string[]): Promise<ComposeResult> {
    return this.compose("/compose/plan", buildComposeBody(places, periods));
  }

  async composeMontage(entries: MontageEntry[]): Promise<string> {
    const response = await this.request("POST", "/compose/montage", buildMontageBody(entries));
    return response.text();
  }
}
