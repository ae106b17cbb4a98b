/**
 * Record detail: full metadata, the media asset when it is an image,
 * preserved legacy values, and related records ranked by shared facets.
 * Experts get edit and archive controls; visitors see a read-only page.
 */

import { AttributeMap, AttributeValue, RecordDetail } from "../api.js";
import { el } from "../dom.js";
import { buildHash, recordHash } from "../router.js";
import { AppContext, emptyNote, errorBox, isAuthError, requireLogin, section } from "./shared.js";

const IMAGE_FORMATS = new Set(["image/png", "image/jpeg", "image/gif", "image/svg+xml"]);

function metaRow(label: string, value: Node | string): HTMLElement {
  return el("tr", {}, el("th", {}, label), el("td", {}, value));
}

function attributeRows(attrs: AttributeMap, prefix = ""): HTMLElement[] {
  const rows: HTMLElement[] = [];
  for (const [name, value] of Object.entries(attrs)) {
    const path = prefix ? `${prefix}.${name}` : name;
    rows.push(...attributeValueRows(path, value));
  }
  return rows;
}

function attributeValueRows(path: string, value: AttributeValue): HTMLElement[] {
  if (typeof value === "string") return [metaRow(path, value)];
  if (Array.isArray(value)) return [metaRow(path, value.join(", "))];
  return attributeRows(value, path);
}

function linkList(hashes: [string, string][]): HTMLElement {
  return el(
    "span",
    {},
    ...hashes.flatMap(([hash, label], i) => {
      const link = el("a", { href: hash }, label);
      return i === 0 ? [link as Node] : [", " as unknown as Node, link as Node];
    }),
  );
}

function mediaPanel(record: RecordDetail): HTMLElement {
  const url = `/media/${encodeURIComponent(record.id)}`;
  if (IMAGE_FORMATS.has(record.content.format)) {
    return section(
      "Media",
      el("img", { src: url, alt: record.title, class: "record-media" }),
      el("p", {}, el("a", { href: url }, record.content.href)),
    );
  }
  return section(
    "Media",
    el(
      "p",
      {},
      el("a", { href: url }, record.content.href),
      ` (${record.content.format}, ${record.content.size} bytes)`,
    ),
  );
}

export function renderDetail(ctx: AppContext, id: string, mount: HTMLElement): void {
  void ctx.session.api
    .record(id)
    .then((record) => {
      const meta = el(
        "table",
        { class: "meta-table" },
        metaRow("Identifier", record.id),
        metaRow("Kind", record.kind + (record.subkind ? ` / ${record.subkind}` : "")),
        metaRow("Author", record.author),
        metaRow("Provenance", record.provenance),
        metaRow("Captured", record.captureDate ?? "unknown"),
        metaRow("Subjects", record.subject.join(", ")),
        metaRow(
          "Places",
          linkList(record.places.map((p) => [buildHash({ view: "places", placeId: p }), p])),
        ),
        metaRow(
          "Periods",
          linkList(record.periods.map((p) => [buildHash({ view: "history", periodId: p }), p])),
        ),
        metaRow("Coordinates", record.coordinates ? record.coordinates.join(", ") : "none"),
        metaRow("Schema version", String(record.schemaVersion)),
        metaRow("Created", record.createdAt),
        metaRow("Updated", record.updatedAt),
        metaRow("Status", record.archived ? "archived" : "active"),
      );

      const heading = el("h1", {}, record.title);
      if (record.archived) heading.append(el("span", { class: "archived-flag" }, " (archived)"));
      mount.append(heading, section("Metadata", meta), mediaPanel(record));

      const attrRows = attributeRows(record.attributes);
      if (attrRows.length) {
        mount.append(section("Attributes", el("table", { class: "meta-table" }, ...attrRows)));
      }
      if (record.legacy.length) {
        mount.append(
          section(
            "Preserved legacy values",
            el(
              "table",
              { class: "meta-table" },
              ...record.legacy.map((item) => metaRow(item.path, item.value)),
            ),
          ),
        );
      }

      if (ctx.session.isExpert) {
        const actions = el("div", { class: "actions" });
        actions.append(
          el("a", { href: buildHash({ view: "edit", id: record.id }), class: "button" }, "Edit"),
        );
        const flip = record.archived ? "Restore" : "Archive";
        actions.append(
          el(
            "button",
            {
              onclick: () => {
                void ctx.gate
                  .run(() =>
                    record.archived
                      ? ctx.session.api.restoreRecord(record.id)
                      : ctx.session.api.archiveRecord(record.id),
                  )
                  .then(() => ctx.refresh())
                  .catch((error) => {
                    if (isAuthError(error)) requireLogin(ctx, { view: "record", id });
                    else mount.append(errorBox(error));
                  });
              },
            },
            flip,
          ),
        );
        mount.append(actions);
      }

      const relatedBox = section("Related records", emptyNote("Looking for related records…"));
      mount.append(relatedBox);
      void ctx.session.api
        .related(record.id)
        .then((related) => {
          relatedBox.replaceChildren(el("h2", {}, "Related records"));
          if (!related.length) {
            relatedBox.append(emptyNote("Nothing shares a place, period, or subject."));
            return;
          }
          relatedBox.append(
            el(
              "ul",
              {},
              ...related.map((item) =>
                el(
                  "li",
                  {},
                  el("a", { href: recordHash(item.id) }, item.title || item.id),
                  ` (${item.kind}, score ${item.score})`,
                ),
              ),
            ),
          );
        })
        .catch((error) => relatedBox.append(errorBox(error)));
    })
    .catch((error) => mount.append(errorBox(error)));
}
