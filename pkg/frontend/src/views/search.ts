/**
 * Faceted search. Every control writes itself back into the location
 * hash, so the form state and the result page are always reconstructible
 * from the URL alone. Facet choices come from the service's facet map;
 * nothing here is free-typed except the year bounds.
 */

import { ResultPage, SearchForm } from "../api.js";
import { el } from "../dom.js";
import { buildHash } from "../router.js";
import {
  AppContext,
  ReferenceData,
  errorBox,
  loadReferences,
  resultTable,
  section,
} from "./shared.js";

function facetChecks(
  legend: string,
  options: string[],
  selected: string[],
  onToggle: (value: string) => void,
): HTMLElement {
  const box = el("fieldset", { class: "facet-group" }, el("legend", {}, legend));
  for (const option of options) {
    const input = el("input", {
      type: "checkbox",
      onchange: () => onToggle(option),
    }) as HTMLInputElement;
    input.checked = selected.includes(option);
    box.append(el("label", { class: "facet-option" }, input, option));
  }
  return box;
}

function yearInput(value: number | null, onChange: (value: number | null) => void): HTMLElement {
  const input = el("input", {
    type: "number",
    class: "year-input",
    onchange: (event) => {
      const raw = (event.target as HTMLInputElement).value.trim();
      onChange(raw === "" ? null : parseInt(raw, 10));
    },
  }) as HTMLInputElement;
  if (value !== null) input.value = String(value);
  return input;
}

function pager(ctx: AppContext, form: SearchForm, page: ResultPage): HTMLElement {
  const lastPage = Math.max(1, Math.ceil(page.total / page.pageSize));
  const go = (n: number) =>
    ctx.navigate(buildHash({ view: "search", form: { ...form, page: n } }));
  const prev = el("button", { onclick: () => go(form.page - 1) }, "Previous") as HTMLButtonElement;
  const next = el("button", { onclick: () => go(form.page + 1) }, "Next") as HTMLButtonElement;
  prev.disabled = form.page <= 1;
  next.disabled = form.page >= lastPage;
  return el(
    "div",
    { class: "pager" },
    prev,
    el("span", {}, `page ${page.page} of ${lastPage} (${page.total} matching)`),
    next,
  );
}

export function renderSearch(ctx: AppContext, form: SearchForm, mount: HTMLElement): void {
  const apply = (changed: Partial<SearchForm>) =>
    ctx.navigate(buildHash({ view: "search", form: { ...form, ...changed, page: 1 } }));

  const formBox = el("div", { class: "search-form" });
  const resultsBox = el("div", { class: "search-results" });
  mount.append(section("Search the archive", formBox), resultsBox);

  void loadReferences(ctx)
    .then((refs: ReferenceData) => {
      formBox.append(
        facetChecks("Kind", refs.facets.kind ?? [], form.kinds, (kind) =>
          apply({ kinds: form.kinds.includes(kind) ? form.kinds.filter((k) => k !== kind) : [...form.kinds, kind] }),
        ),
        facetChecks(
          "Place",
          refs.places.map((p) => p.id),
          form.places,
          (place) =>
            apply({
              places: form.places.includes(place)
                ? form.places.filter((p) => p !== place)
                : [...form.places, place],
            }),
        ),
        facetChecks("Subject", refs.facets.subject ?? [], form.keywords, (keyword) =>
          apply({
            keywords: form.keywords.includes(keyword)
              ? form.keywords.filter((k) => k !== keyword)
              : [...form.keywords, keyword],
          }),
        ),
        facetChecks("Author", refs.facets.author ?? [], form.authors, (author) =>
          apply({
            authors: form.authors.includes(author)
              ? form.authors.filter((a) => a !== author)
              : [...form.authors, author],
          }),
        ),
        el(
          "div",
          { class: "facet-group" },
          el("label", {}, "Active between "),
          yearInput(form.periodFrom, (periodFrom) => apply({ periodFrom })),
          el("label", {}, " and "),
          yearInput(form.periodTo, (periodTo) => apply({ periodTo })),
        ),
      );
      const archived = el("input", {
        type: "checkbox",
        onchange: () => apply({ includeArchived: !form.includeArchived }),
      }) as HTMLInputElement;
      archived.checked = form.includeArchived;
      formBox.append(el("label", { class: "facet-option" }, archived, "include archived"));
    })
    .catch((error) => formBox.append(errorBox(error)));

  void ctx.session.api
    .search(form)
    .then((page) => {
      resultsBox.append(resultTable(page.items), pager(ctx, form, page));
    })
    .catch((error) => resultsBox.append(errorBox(error)));
}
