/**
 * Composition screen. The form gathers places and periods (both required)
 * and the three product tabs share it: a 3D massing scene rendered as an
 * isometric block proxy, a layered plan with click-through to records,
 * and a photomontage built from chosen photographs.
 *
 * Click handling reuses the pure resolution logic by keeping a mapping
 * from rendered SVG nodes back to parsed elements.
 */

import { ApiError, ComposeResult, MontageEntry } from "../api.js";
import { el, svgEl } from "../dom.js";
import { ComposeForm, canCompose, toggleValue } from "../forms.js";
import { annotatedElements, parsePlan, resolveClick } from "../plan.js";
import { blockFaces, cssColor, facePoints, parseScene, sceneBounds, splitGroupName } from "../scene.js";
import { XmlElement } from "../xmlmini.js";
import { buildHash, ComposeMode, recordHash } from "../router.js";
import {
  AppContext,
  ReferenceData,
  errorBox,
  loadReferences,
  periodLabel,
  placeName,
  section,
} from "./shared.js";

function modeTabs(form: ComposeForm): HTMLElement {
  const tabs: [ComposeMode, string][] = [
    ["model", "3D massing"],
    ["plan", "Layered plan"],
    ["montage", "Photomontage"],
  ];
  return el(
    "nav",
    { class: "mode-tabs" },
    ...tabs.map(([mode, label]) =>
      el(
        "a",
        {
          href: buildHash({ view: "compose", mode, places: form.places, periods: form.periods }),
          class: form.mode === mode ? "tab active" : "tab",
        },
        label,
      ),
    ),
  );
}

function selectionForm(ctx: AppContext, form: ComposeForm, refs: ReferenceData): HTMLElement {
  const navigateWith = (changed: Partial<ComposeForm>) =>
    ctx.navigate(buildHash({ view: "compose", ...form, ...changed }));

  const checks = (
    legend: string,
    options: [string, string][],
    selected: string[],
    key: "places" | "periods",
  ) => {
    const box = el("fieldset", { class: "facet-group" }, el("legend", {}, legend));
    for (const [id, label] of options) {
      const input = el("input", {
        type: "checkbox",
        onchange: () => navigateWith({ [key]: toggleValue(selected, id) }),
      }) as HTMLInputElement;
      input.checked = selected.includes(id);
      box.append(el("label", { class: "facet-option" }, input, label));
    }
    return box;
  };

  return el(
    "div",
    { class: "compose-form" },
    checks(
      "Places",
      refs.places.map((p) => [p.id, p.name]),
      form.places,
      "places",
    ),
    checks(
      "Periods",
      [...refs.periods]
        .sort((a, b) => a.startYear - b.startYear)
        .map((p) => [p.id, `${p.label} (${p.startYear}–${p.endYear})`]),
      form.periods,
      "periods",
    ),
  );
}

function warningsBox(warnings: string[]): HTMLElement | null {
  if (!warnings.length) return null;
  return el(
    "div",
    { class: "warnings" },
    el("h3", {}, "Gaps in coverage"),
    el("ul", {}, ...warnings.map((w) => el("li", {}, w))),
  );
}

function legendBox(result: ComposeResult, refs: ReferenceData): HTMLElement | null {
  if (!result.legend.length) return null;
  return el(
    "ul",
    { class: "scene-legend" },
    ...result.legend.map(([periodId, color]) => {
      const swatch = el("span", { class: "swatch" });
      swatch.style.backgroundColor = cssColor(color);
      return el("li", {}, swatch, ` ${periodLabel(refs.periods, periodId)}`);
    }),
  );
}

function explainEmpty(error: unknown, mount: HTMLElement): boolean {
  if (error instanceof ApiError && error.code === "empty-composition") {
    mount.append(
      el(
        "p",
        { class: "empty-note" },
        "Nothing to compose: no active record documents the chosen places during the chosen periods. Widen the period range or pick other places.",
      ),
    );
    return true;
  }
  return false;
}

function renderSceneResult(
  ctx: AppContext,
  result: ComposeResult,
  refs: ReferenceData,
  mount: HTMLElement,
): void {
  const scene = parseScene(result.body);
  const bounds = sceneBounds(scene.groups);
  const svg = svgEl("svg", { viewBox: bounds.viewBox, class: "scene-view" });
  const placeIds = refs.places.map((p) => p.id);
  const periodIds = refs.periods.map((p) => p.id);
  // Paint back-to-front so nearer blocks overlap farther ones.
  const ordered = [...scene.groups].sort(
    (a, b) => a.translation[0] + a.translation[2] - (b.translation[0] + b.translation[2]),
  );
  for (const group of ordered) {
    const parts = splitGroupName(group.name, placeIds, periodIds);
    const block = svgEl("g", { class: "scene-block" });
    for (const face of blockFaces(group.translation)) {
      block.append(
        svgEl("polygon", {
          points: facePoints(face),
          fill: cssColor(group.color, face.shade),
          stroke: "#333",
          "stroke-width": "0.3",
        }),
      );
    }
    const title = parts
      ? `${placeName(refs.places, parts.placeId)}, ${periodLabel(refs.periods, parts.periodId)}`
      : group.name;
    block.append(svgEl("title", {}, title));
    if (parts) {
      block.addEventListener("click", () => ctx.navigate(recordHash(parts.recordId)));
      block.classList.add("clickable");
    }
    svg.append(block);
  }
  const download = el("a", { class: "button", download: "scene.x3d" }, "Download X3D") as HTMLAnchorElement;
  download.href = URL.createObjectURL(new Blob([result.body], { type: "model/x3d+xml" }));
  mount.append(
    el(
      "p",
      { class: "hint" },
      `${scene.groups.length} massing blocks; click one to open its source record. The X3D file itself is available below.`,
    ),
    svg,
    legendBox(result, refs) ?? "",
    warningsBox(result.warnings) ?? "",
    el("p", {}, download),
  );
}

/** Rebuild the parsed SVG as live DOM, remembering which parsed element
 * produced each node so clicks resolve through the tested logic. */
function domFromParsed(element: XmlElement, origin: Map<Node, XmlElement>): SVGElement {
  const attrs: { [name: string]: string } = {};
  for (const [name, value] of Object.entries(element.attrs)) {
    if (name === "xmlns") continue;
    attrs[name] = value;
  }
  const node = svgEl(element.tag, attrs);
  if (element.text.trim()) node.append(element.text);
  for (const child of element.children) node.append(domFromParsed(child, origin));
  origin.set(node, element);
  return node;
}

function renderPlanResult(ctx: AppContext, result: ComposeResult, mount: HTMLElement): void {
  const plan = parsePlan(result.body);
  const origin = new Map<Node, XmlElement>();
  const svg = domFromParsed(plan.root, origin);
  svg.classList.add("plan-view");
  svg.addEventListener("click", (event) => {
    for (let node = event.target as Node | null; node; node = node.parentNode) {
      const parsed = origin.get(node);
      if (!parsed) continue;
      const recordId = resolveClick(parsed);
      if (recordId) ctx.navigate(recordHash(recordId));
      return;
    }
  });
  const clickable = annotatedElements(plan.root).length;
  mount.append(
    el(
      "p",
      { class: "hint" },
      `${plan.layers.length} period layers, ${clickable} clickable shapes. Click a shape to open the plan record it came from; the legend is informational.`,
    ),
    svg,
    warningsBox(result.warnings) ?? "",
  );
}

function renderMontageForm(ctx: AppContext, form: ComposeForm, mount: HTMLElement): void {
  const chooser = section("Choose photographs", el("p", { class: "loading" }, "Loading photographs…"));
  const resultBox = el("div", { class: "compose-result" });
  mount.append(chooser, resultBox);

  const selections = new Map<string, { include: boolean; opacity: string }>();

  void ctx.session.api
    .search({
      kinds: ["photo"],
      places: form.places,
      keywords: [],
      authors: [],
      periodFrom: null,
      periodTo: null,
      includeArchived: false,
      page: 1,
      pageSize: 100,
    })
    .then((page) => {
      chooser.replaceChildren(el("h2", {}, "Choose photographs"));
      if (!page.items.length) {
        chooser.append(
          el("p", { class: "empty-note" }, "No photographs cover the chosen places."),
        );
        return;
      }
      const rows = page.items.map((item) => {
        const state = { include: false, opacity: "0.8" };
        selections.set(item.id, state);
        const include = el("input", {
          type: "checkbox",
          onchange: (event) => {
            state.include = (event.target as HTMLInputElement).checked;
          },
        });
        const opacity = el("input", {
          type: "number",
          class: "opacity-input",
          onchange: (event) => {
            state.opacity = (event.target as HTMLInputElement).value;
          },
        }) as HTMLInputElement;
        opacity.value = state.opacity;
        opacity.min = "0";
        opacity.max = "1";
        opacity.step = "0.05";
        return el(
          "tr",
          {},
          el("td", {}, include),
          el("td", {}, el("a", { href: recordHash(item.id) }, item.title || item.id)),
          el("td", {}, item.captureDate ?? ""),
          el("td", {}, opacity),
        );
      });
      chooser.append(
        el(
          "table",
          { class: "result-table" },
          el(
            "thead",
            {},
            el(
              "tr",
              {},
              el("th", {}, ""),
              el("th", {}, "Photograph"),
              el("th", {}, "Captured"),
              el("th", {}, "Opacity"),
            ),
          ),
          el("tbody", {}, ...rows),
        ),
        el(
          "button",
          {
            class: "primary",
            onclick: () => {
              const entries: MontageEntry[] = [];
              for (const [recordId, state] of selections) {
                if (!state.include) continue;
                entries.push({ recordId, opacity: parseFloat(state.opacity) });
              }
              resultBox.replaceChildren();
              if (!entries.length) {
                resultBox.append(el("p", { class: "empty-note" }, "Pick at least one photograph."));
                return;
              }
              void ctx.session.api
                .composeMontage(entries)
                .then((svgText) => {
                  const holder = el("div", { class: "montage-view" });
                  holder.innerHTML = svgText.replace(/^<\?xml[^>]*\?>\s*/, "");
                  resultBox.append(holder);
                })
                .catch((error) => {
                  if (!explainEmpty(error, resultBox)) resultBox.append(errorBox(error));
                });
            },
          },
          "Compose montage",
        ),
      );
    })
    .catch((error) => chooser.append(errorBox(error)));
}

export function renderCompose(ctx: AppContext, form: ComposeForm, mount: HTMLElement): void {
  mount.append(el("h1", {}, "Compose a view of the site"), modeTabs(form));

  void loadReferences(ctx)
    .then((refs) => {
      if (form.mode === "montage") {
        renderMontageForm(ctx, form, mount);
        return;
      }

      const formBox = section("Scope", selectionForm(ctx, form, refs));
      const resultBox = el("div", { class: "compose-result" });
      const submit = el(
        "button",
        {
          class: "primary",
          onclick: () => {
            resultBox.replaceChildren(el("p", { class: "loading" }, "Composing…"));
            const call =
              form.mode === "model"
                ? ctx.session.api.composeModel(form.places, form.periods)
                : ctx.session.api.composePlan(form.places, form.periods);
            void call
              .then((result) => {
                resultBox.replaceChildren();
                if (form.mode === "model") renderSceneResult(ctx, result, refs, resultBox);
                else renderPlanResult(ctx, result, resultBox);
              })
              .catch((error) => {
                resultBox.replaceChildren();
                if (!explainEmpty(error, resultBox)) resultBox.append(errorBox(error));
              });
          },
        },
        form.mode === "model" ? "Compose 3D scene" : "Compose plan",
      ) as HTMLButtonElement;
      submit.disabled = !canCompose(form);
      formBox.append(
        submit,
        canCompose(form)
          ? ""
          : el("p", { class: "hint" }, "Pick at least one place and one period to compose."),
      );
      mount.append(formBox, resultBox);
    })
    .catch((error) => mount.append(errorBox(error)));
}
