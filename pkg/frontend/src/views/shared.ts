/**
 * Pieces shared by every screen: the app context threaded through views,
 * the header, result listings, and error rendering.
 */

import { ApiError, FacetMap, Period, Place, ResultItem } from "../api.js";
import { el } from "../dom.js";
import { buildHash, recordHash, Route } from "../router.js";
import { MutationGate, Session } from "../session.js";

export interface AppContext {
  session: Session;
  gate: MutationGate;
  navigate(hash: string): void;
  /** Re-render the current route, e.g. after login state changes. */
  refresh(): void;
}

export interface ReferenceData {
  facets: FacetMap;
  periods: Period[];
  places: Place[];
}

export async function loadReferences(ctx: AppContext): Promise<ReferenceData> {
  const [facets, periods, places] = await Promise.all([
    ctx.session.api.facets(),
    ctx.session.api.periods(),
    ctx.session.api.places(),
  ]);
  return { facets, periods, places };
}

export function navLink(hash: string, label: string, active: boolean): HTMLElement {
  return el(
    "a",
    {
      href: hash,
      class: active ? "nav-link active" : "nav-link",
    },
    label,
  );
}

export function header(ctx: AppContext, route: Route): HTMLElement {
  const links: [Route["view"], string, string][] = [
    ["search", "#/search", "Search"],
    ["history", "#/history", "History"],
    ["places", "#/places", "Places"],
    ["compose", "#/compose", "Compose"],
    ["help", "#/help", "Help"],
  ];
  const session = el("span", { class: "session-box" });
  if (ctx.session.loggedIn) {
    session.append(
      el("span", { class: "role-badge" }, ctx.session.role ?? ""),
      el(
        "button",
        {
          class: "linkish",
          onclick: () => {
            void ctx.session.logout().then(() => ctx.refresh());
          },
        },
        "Log out",
      ),
    );
  } else {
    session.append(el("a", { href: "#/login", class: "nav-link" }, "Log in"));
  }
  return el(
    "header",
    { class: "site-header" },
    el("a", { href: "#/", class: "site-title" }, "Site Archive"),
    el(
      "nav",
      {},
      ...links.map(([view, hash, label]) => navLink(hash, label, route.view === view)),
    ),
    session,
  );
}

export function errorBox(error: unknown): HTMLElement {
  if (error instanceof ApiError) {
    const box = el(
      "div",
      { class: "error-box", role: "alert" },
      el("strong", {}, error.code),
      el("span", {}, ` ${error.message}`),
    );
    if (error.violations.length) {
      box.append(
        el(
          "ul",
          {},
          ...error.violations.map((v) =>
            el("li", {}, `${v.path || "(record)"}: ${v.message} [${v.rule}]`),
          ),
        ),
      );
    }
    return box;
  }
  const message = error instanceof Error ? error.message : String(error);
  return el("div", { class: "error-box", role: "alert" }, message);
}

export function loading(): HTMLElement {
  return el("p", { class: "loading" }, "Loading…");
}

export function emptyNote(text: string): HTMLElement {
  return el("p", { class: "empty-note" }, text);
}

export function resultTable(items: ResultItem[]): HTMLElement {
  if (!items.length) return emptyNote("No records match.");
  const rows = items.map((item) =>
    el(
      "tr",
      { class: item.archived ? "archived" : "" },
      el("td", {}, el("a", { href: recordHash(item.id) }, item.title || item.id)),
      el("td", {}, item.kind + (item.subkind ? ` / ${item.subkind}` : "")),
      el("td", {}, item.captureDate ?? ""),
      el("td", {}, item.places.join(", ")),
      el("td", {}, item.periods.join(", ")),
      el("td", {}, item.archived ? "archived" : ""),
    ),
  );
  return el(
    "table",
    { class: "result-table" },
    el(
      "thead",
      {},
      el(
        "tr",
        {},
        el("th", {}, "Title"),
        el("th", {}, "Kind"),
        el("th", {}, "Captured"),
        el("th", {}, "Places"),
        el("th", {}, "Periods"),
        el("th", {}, ""),
      ),
    ),
    el("tbody", {}, ...rows),
  );
}

export function section(title: string, ...children: (Node | string)[]): HTMLElement {
  return el("section", { class: "panel" }, el("h2", {}, title), ...children);
}

/** Redirect to the login screen, preserving where the user was. */
export function requireLogin(ctx: AppContext, currentRoute: Route): void {
  ctx.session.clear();
  ctx.navigate(buildHash({ view: "login", next: buildHash(currentRoute) }));
}

export function isAuthError(error: unknown): boolean {
  return error instanceof ApiError && (error.status === 401 || error.status === 403);
}

export function placeName(places: Place[], id: string): string {
  return places.find((p) => p.id === id)?.name ?? id;
}

export function periodLabel(periods: Period[], id: string): string {
  return periods.find((p) => p.id === id)?.label ?? id;
}
