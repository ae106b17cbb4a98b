/**
 * Static orientation page describing what each screen does.
 */

import { el } from "../dom.js";
import { AppContext, section } from "./shared.js";

export function renderHelp(_ctx: AppContext, mount: HTMLElement): void {
  mount.append(
    el("h1", {}, "How to use this archive"),
    section(
      "Finding records",
      el(
        "p",
        {},
        "Search combines facets: pick any mix of kinds, places, subjects and authors, ",
        "or bound the years a record's periods must overlap. Different facets narrow the ",
        "result; several choices inside one facet widen it. Every search is bookmarkable, ",
        "the full state lives in the address bar.",
      ),
      el(
        "p",
        {},
        "History and Places offer guided entry: a timeline of defined periods and the ",
        "spatial hierarchy of the site. Selecting a place also lists records attached to ",
        "anything it encloses.",
      ),
    ),
    section(
      "Composed views",
      el(
        "p",
        {},
        "Compose builds site-wide pictures on the fly. The 3D massing view assembles the ",
        "reconstruction models for the chosen places, one color per period; the layered ",
        "plan stacks ground plans the same way. Click any drawn shape or block to open ",
        "the record it was generated from. The photomontage tab overlays chosen ",
        "photographs with adjustable transparency.",
      ),
      el(
        "p",
        {},
        "Missing coverage is reported next to the result, a gap in the archive is shown, ",
        "never silently skipped.",
      ),
    ),
    section(
      "Editing",
      el(
        "p",
        {},
        "Users with an expert account can describe new records, correct metadata, and ",
        "archive records (archived records stay retrievable). Validation problems are ",
        "shown next to the fields they concern; nothing is saved until the record is ",
        "consistent.",
      ),
    ),
  );
}
