/**
 * Hash routing. Every view, including form state for search and compose,
 * is encoded in the fragment so any screen can be bookmarked or reloaded.
 */

import { SearchForm, emptySearchForm, buildSearchQuery } from "./api.js";

export type ComposeMode = "model" | "plan" | "montage";

export type Route =
  | { view: "search"; form: SearchForm }
  | { view: "record"; id: string }
  | { view: "history"; periodId: string | null }
  | { view: "places"; placeId: string | null }
  | { view: "compose"; mode: ComposeMode; places: string[]; periods: string[] }
  | { view: "edit"; id: string | null }
  | { view: "help" }
  | { view: "login"; next: string };

function splitHash(hash: string): { path: string[]; query: string } {
  let raw = hash;
  if (raw.startsWith("#")) raw = raw.slice(1);
  if (raw.startsWith("/")) raw = raw.slice(1);
  const qmark = raw.indexOf("?");
  const query = qmark < 0 ? "" : raw.slice(qmark + 1);
  const pathPart = qmark < 0 ? raw : raw.slice(0, qmark);
  const path = pathPart.split("/").filter((seg) => seg.length > 0).map(decodeURIComponent);
  return { path, query };
}

export function parseSearchQuery(query: string): SearchForm {
  const form = emptySearchForm();
  for (const [key, value] of new URLSearchParams(query)) {
    switch (key) {
      case "kind":
        form.kinds.push(value);
        break;
      case "place":
        form.places.push(value);
        break;
      case "keyword":
        form.keywords.push(value);
        break;
      case "author":
        form.authors.push(value);
        break;
      case "periodFrom":
        form.periodFrom = parseInt(value, 10);
        break;
      case "periodTo":
        form.periodTo = parseInt(value, 10);
        break;
      case "includeArchived":
        form.includeArchived = value === "true";
        break;
      case "page":
        form.page = Math.max(1, parseInt(value, 10) || 1);
        break;
      case "pageSize":
        form.pageSize = parseInt(value, 10) || 50;
        break;
      default:
        break;
    }
  }
  return form;
}

function parseList(params: URLSearchParams, key: string): string[] {
  const raw = params.get(key);
  if (!raw) return [];
  return raw.split(",").filter((item) => item.length > 0);
}

export function parseRoute(hash: string): Route {
  const { path, query } = splitHash(hash);
  const head = path[0] ?? "";
  switch (head) {
    case "":
    case "search":
      return { view: "search", form: parseSearchQuery(query) };
    case "record":
      if (path[1]) return { view: "record", id: path[1] };
      return { view: "search", form: emptySearchForm() };
    case "history":
      return { view: "history", periodId: path[1] ?? null };
    case "places":
      return { view: "places", placeId: path[1] ?? null };
    case "compose": {
      const params = new URLSearchParams(query);
      const mode = params.get("mode");
      return {
        view: "compose",
        mode: mode === "plan" || mode === "montage" ? mode : "model",
        places: parseList(params, "places"),
        periods: parseList(params, "periods"),
      };
    }
    case "edit":
      return { view: "edit", id: path[1] && path[1] !== "new" ? path[1] : null };
    case "help":
      return { view: "help" };
    case "login": {
      const params = new URLSearchParams(query);
      return { view: "login", next: params.get("next") ?? "#/" };
    }
    default:
      return { view: "search", form: emptySearchForm() };
  }
}

export function buildHash(route: Route): string {
  switch (route.view) {
    case "search": {
      const query = buildSearchQuery(route.form);
      return query ? `#/search?${query}` : "#/search";
    }
    case "record":
      return `#/record/${encodeURIComponent(route.id)}`;
    case "history":
      return route.periodId ? `#/history/${encodeURIComponent(route.periodId)}` : "#/history";
    case "places":
      return route.placeId ? `#/places/${encodeURIComponent(route.placeId)}` : "#/places";
    case "compose": {
      const params: string[] = [];
      if (route.places.length) params.push(`places=${route.places.map(encodeURIComponent).join(",")}`);
      if (route.periods.length) params.push(`periods=${route.periods.map(encodeURIComponent).join(",")}`);
      if (route.mode !== "model") params.push(`mode=${route.mode}`);
      return params.length ? `#/compose?${params.join("&")}` : "#/compose";
    }
    case "edit":
      return route.id ? `#/edit/${encodeURIComponent(route.id)}` : "#/edit/new";
    case "help":
      return "#/help";
    case "login":
      return route.next === "#/" ? "#/login" : `#/login?next=${encodeURIComponent(route.next)}`;
  }
}

export function recordHash(id: string): string {
  return buildHash({ view: "record", id });
}
