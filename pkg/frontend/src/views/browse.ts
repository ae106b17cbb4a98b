/**
 * Guided entry points: browse by historical period (a timeline in year
 * order) or by place (the site hierarchy). Selecting an entry lists every
 * active record attached to it, including records on descendant places.
 */

import { Period, Place } from "../api.js";
import { el } from "../dom.js";
import { buildHash } from "../router.js";
import { AppContext, errorBox, loading, resultTable, section } from "./shared.js";

function periodList(periods: Period[], selected: string | null): HTMLElement {
  const items = [...periods]
    .sort((a, b) => a.startYear - b.startYear)
    .map((period) =>
      el(
        "li",
        { class: period.id === selected ? "selected" : "" },
        el(
          "a",
          { href: buildHash({ view: "history", periodId: period.id }) },
          `${period.label} (${period.startYear}–${period.endYear})`,
        ),
        period.description ? el("p", { class: "description" }, period.description) : null,
      ),
    );
  return el("ul", { class: "period-list" }, ...items);
}

function placeTree(places: Place[], parentId: string | null, selected: string | null): HTMLElement {
  const children = places.filter((place) => place.parentId === parentId);
  return el(
    "ul",
    { class: "place-tree" },
    ...children.map((place) =>
      el(
        "li",
        { class: place.id === selected ? "selected" : "" },
        el("a", { href: buildHash({ view: "places", placeId: place.id }) }, place.name),
        place.description ? el("p", { class: "description" }, place.description) : null,
        placeTree(places, place.id, selected),
      ),
    ),
  );
}

export function renderHistory(ctx: AppContext, periodId: string | null, mount: HTMLElement): void {
  const index = section("Browse by period", loading());
  mount.append(index);
  void ctx.session.api
    .periods()
    .then((periods) => {
      index.replaceChildren(el("h2", {}, "Browse by period"), periodList(periods, periodId));
    })
    .catch((error) => index.append(errorBox(error)));

  if (!periodId) return;
  const results = section(`Records for ${periodId}`, loading());
  mount.append(results);
  void ctx.session.api
    .browseHistory(periodId)
    .then((items) => {
      results.replaceChildren(el("h2", {}, `Records for ${periodId}`), resultTable(items));
    })
    .catch((error) => results.append(errorBox(error)));
}

export function renderPlaces(ctx: AppContext, placeId: string | null, mount: HTMLElement): void {
  const index = section("Browse by place", loading());
  mount.append(index);
  void ctx.session.api
    .places()
    .then((places) => {
      index.replaceChildren(el("h2", {}, "Browse by place"), placeTree(places, null, placeId));
    })
    .catch((error) => index.append(errorBox(error)));

  if (!placeId) return;
  const results = section(`Records at ${placeId}`, loading());
  mount.append(results);
  void ctx.session.api
    .browsePlace(placeId)
    .then((items) => {
      results.replaceChildren(
        el("h2", {}, `Records at ${placeId} (including enclosed places)`),
        resultTable(items),
      );
    })
    .catch((error) => results.append(errorBox(error)));
}
