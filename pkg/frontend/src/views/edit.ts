/**
 * Expert editing. One screen covers both updating an existing record and
 * describing a new one. Validation failures come back as structured
 * violations; each one is shown against the input it belongs to, and an
 * expired or missing login bounces to the login screen with a return
 * path.
 */

import { ApiError, RecordDetail, SchemaInfo, Violation } from "../api.js";
import { clear, el } from "../dom.js";
import {
  CreateState,
  EditState,
  attributePaths,
  createFields,
  editPatch,
  editStateFrom,
  emptyCreateState,
  toggleValue,
  violationsByField,
} from "../forms.js";
import { recordHash, Route } from "../router.js";
import {
  AppContext,
  ReferenceData,
  errorBox,
  isAuthError,
  loadReferences,
  loading,
  requireLogin,
  section,
} from "./shared.js";

function fieldRow(field: string, label: string, ...inputs: (Node | string)[]): HTMLElement {
  return el(
    "div",
    { class: "field-row", "data-field": field },
    el("label", {}, label),
    ...inputs,
    el("span", { class: "field-errors" }),
  );
}

function textInput(value: string, onChange: (value: string) => void): HTMLInputElement {
  const input = el("input", {
    type: "text",
    onchange: (event) => onChange((event.target as HTMLInputElement).value),
  }) as HTMLInputElement;
  input.value = value;
  return input;
}

function checks(
  field: string,
  label: string,
  options: [string, string][],
  selected: () => string[],
  update: (next: string[]) => void,
): HTMLElement {
  const box = el("fieldset", { class: "facet-group", "data-field": field }, el("legend", {}, label));
  for (const [id, text] of options) {
    const input = el("input", {
      type: "checkbox",
      onchange: () => update(toggleValue(selected(), id)),
    }) as HTMLInputElement;
    input.checked = selected().includes(id);
    box.append(el("label", { class: "facet-option" }, input, text));
  }
  box.append(el("span", { class: "field-errors" }));
  return box;
}

function clearViolations(mount: HTMLElement): void {
  for (const row of mount.querySelectorAll("[data-field]")) {
    row.classList.remove("invalid");
    const slot = row.querySelector(".field-errors");
    if (slot) slot.textContent = "";
  }
}

function showViolations(mount: HTMLElement, violations: Violation[]): void {
  clearViolations(mount);
  const grouped = violationsByField(violations);
  const stray: Violation[] = [];
  for (const [field, items] of Object.entries(grouped)) {
    const row = mount.querySelector(`[data-field="${field}"]`);
    if (!row) {
      stray.push(...items);
      continue;
    }
    row.classList.add("invalid");
    const slot = row.querySelector(".field-errors");
    if (slot) slot.textContent = items.map((v) => `${v.message} [${v.rule}]`).join("; ");
  }
  if (stray.length) {
    mount.append(
      el(
        "div",
        { class: "error-box", role: "alert" },
        el("ul", {}, ...stray.map((v) => el("li", {}, `${v.path || "(record)"}: ${v.message}`))),
      ),
    );
  }
}

function handleSubmitError(
  ctx: AppContext,
  route: Route,
  mount: HTMLElement,
  error: unknown,
): void {
  if (isAuthError(error)) {
    requireLogin(ctx, route);
    return;
  }
  if (error instanceof ApiError && error.violations.length) {
    showViolations(mount, error.violations);
    return;
  }
  mount.append(errorBox(error));
}

function renderUpdateForm(
  ctx: AppContext,
  record: RecordDetail,
  refs: ReferenceData,
  mount: HTMLElement,
): void {
  const state: EditState = editStateFrom(record);
  const route: Route = { view: "edit", id: record.id };
  const status = el("p", { class: "hint" });

  const attrRows = Object.entries(state.attributes).map(([path, value]) =>
    fieldRow(
      `attributes.${path}`,
      path,
      textInput(value, (next) => {
        state.attributes[path] = next;
      }),
    ),
  );

  const form = el(
    "div",
    { class: "edit-form" },
    fieldRow("title", "Title", textInput(state.title, (v) => (state.title = v))),
    fieldRow("author", "Author", textInput(state.author, (v) => (state.author = v))),
    fieldRow(
      "provenance",
      "Provenance",
      textInput(state.provenance, (v) => (state.provenance = v)),
    ),
    fieldRow(
      "captureDate",
      "Capture date (YYYY-MM-DD)",
      textInput(state.captureDate, (v) => (state.captureDate = v)),
    ),
    fieldRow(
      "subject",
      "Subjects (comma separated)",
      textInput(state.subject, (v) => (state.subject = v)),
    ),
    checks(
      "places",
      "Places",
      refs.places.map((p) => [p.id, p.name]),
      () => state.places,
      (next) => (state.places = next),
    ),
    checks(
      "periods",
      "Periods",
      refs.periods.map((p) => [p.id, p.label]),
      () => state.periods,
      (next) => (state.periods = next),
    ),
    ...(attrRows.length ? [el("h3", {}, "Kind-specific attributes"), ...attrRows] : []),
  );

  const submit = el(
    "button",
    {
      class: "primary",
      onclick: () => {
        const patch = editPatch(record, state);
        if (Object.keys(patch).length === 0) {
          status.textContent = "Nothing changed.";
          return;
        }
        status.textContent = "Saving…";
        void ctx.gate
          .run(() => ctx.session.api.updateRecord(record.id, patch))
          .then((updated) => ctx.navigate(recordHash(updated.id)))
          .catch((error) => {
            status.textContent = "";
            handleSubmitError(ctx, route, mount, error);
          });
      },
    },
    "Save changes",
  );

  mount.append(
    el("h1", {}, `Edit: ${record.title}`),
    section("Metadata", form, submit, status),
    el("p", {}, el("a", { href: recordHash(record.id) }, "Back to record")),
  );
}

function renderCreateForm(
  ctx: AppContext,
  refs: ReferenceData,
  schema: SchemaInfo,
  mount: HTMLElement,
): void {
  const state: CreateState = emptyCreateState();
  const route: Route = { view: "edit", id: null };
  const status = el("p", { class: "hint" });

  const attrBox = el("div", { class: "attr-rows" });
  const renderAttrRows = () => {
    clear(attrBox);
    state.attributes = {};
    for (const path of attributePaths(schema.kinds[state.kind] ?? [])) {
      attrBox.append(
        fieldRow(
          `attributes.${path}`,
          path,
          textInput("", (value) => {
            state.attributes[path] = value;
          }),
        ),
      );
    }
  };

  const kindSelect = el("select", {
    onchange: (event) => {
      state.kind = (event.target as HTMLSelectElement).value;
      renderAttrRows();
    },
  }) as HTMLSelectElement;
  for (const kind of Object.keys(schema.kinds)) {
    const option = el("option", { value: kind }, kind) as HTMLOptionElement;
    if (kind === state.kind) option.selected = true;
    kindSelect.append(option);
  }
  if (!(state.kind in schema.kinds) && kindSelect.options.length) {
    state.kind = kindSelect.options[0].value;
    kindSelect.value = state.kind;
  }
  renderAttrRows();

  const form = el(
    "div",
    { class: "edit-form" },
    fieldRow("kind", "Kind", kindSelect),
    fieldRow("title", "Title", textInput(state.title, (v) => (state.title = v))),
    fieldRow("author", "Author", textInput(state.author, (v) => (state.author = v))),
    fieldRow(
      "provenance",
      "Provenance",
      textInput(state.provenance, (v) => (state.provenance = v)),
    ),
    fieldRow(
      "captureDate",
      "Capture date (YYYY-MM-DD, optional)",
      textInput(state.captureDate, (v) => (state.captureDate = v)),
    ),
    fieldRow(
      "subject",
      "Subjects (comma separated)",
      textInput(state.subject, (v) => (state.subject = v)),
    ),
    checks(
      "places",
      "Places",
      refs.places.map((p) => [p.id, p.name]),
      () => state.places,
      (next) => (state.places = next),
    ),
    checks(
      "periods",
      "Periods",
      refs.periods.map((p) => [p.id, p.label]),
      () => state.periods,
      (next) => (state.periods = next),
    ),
    el("h3", {}, "Kind-specific attributes"),
    attrBox,
    el("h3", {}, "Content file"),
    fieldRow(
      "content",
      "Path under the data directory",
      textInput(state.contentHref, (v) => (state.contentHref = v)),
    ),
    fieldRow("format", "Media type", textInput(state.contentFormat, (v) => (state.contentFormat = v))),
    fieldRow(
      "checksum",
      "SHA-256 checksum",
      textInput(state.contentChecksum, (v) => (state.contentChecksum = v)),
    ),
    fieldRow("size", "Size in bytes", textInput(state.contentSize, (v) => (state.contentSize = v))),
  );

  const submit = el(
    "button",
    {
      class: "primary",
      onclick: () => {
        status.textContent = "Saving…";
        void ctx.gate
          .run(() => ctx.session.api.createRecord(createFields(state)))
          .then((created) => ctx.navigate(recordHash(created.id)))
          .catch((error) => {
            status.textContent = "";
            handleSubmitError(ctx, route, mount, error);
          });
      },
    },
    "Create record",
  );

  mount.append(el("h1", {}, "Describe a new record"), section("Metadata", form, submit, status));
}

export function renderEdit(ctx: AppContext, id: string | null, mount: HTMLElement): void {
  const route: Route = { view: "edit", id };
  if (!ctx.session.loggedIn || !ctx.session.isExpert) {
    requireLogin(ctx, route);
    return;
  }
  mount.append(loading());
  void loadReferences(ctx)
    .then(async (refs) => {
      if (id === null) {
        const schema = await ctx.session.api.schema();
        mount.replaceChildren();
        renderCreateForm(ctx, refs, schema, mount);
        return;
      }
      const record = await ctx.session.api.record(id);
      mount.replaceChildren();
      renderUpdateForm(ctx, record, refs, mount);
    })
    .catch((error) => {
      mount.replaceChildren();
      if (isAuthError(error)) requireLogin(ctx, route);
      else mount.append(errorBox(error));
    });
}
