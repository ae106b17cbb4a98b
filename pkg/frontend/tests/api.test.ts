/**
 * Wire compatibility: every request the UI can emit must match, byte for
 * byte, the bodies and query strings a reference client recorded against
 * the live service. A drifting serializer shows up here first.
 */

import { describe, expect, it } from "vitest";

import {
  buildComposeBody,
  buildLoginBody,
  buildMontageBody,
  buildRecordBody,
  buildSearchQuery,
  emptySearchForm,
  RecordDetail,
} from "../src/api.js";
import { editPatch, editStateFrom } from "../src/forms.js";
import { parseSearchQuery } from "../src/router.js";
import { fixture, jsonFixture } from "./helpers.js";

describe("search query encoding", () => {
  it("matches the recorded query string", () => {
    const form = emptySearchForm();
    form.kinds = ["photo"];
    form.places = ["yard"];
    form.periodFrom = 1080;
    form.periodTo = 1170;
    expect(buildSearchQuery(form)).toBe(fixture("search_query.txt").trim());
  });

  it("round-trips through the hash parser", () => {
    const recorded = fixture("search_query.txt").trim();
    expect(buildSearchQuery(parseSearchQuery(recorded))).toBe(recorded);
  });

  it("omits defaults entirely", () => {
    expect(buildSearchQuery(emptySearchForm())).toBe("");
  });

  it("encodes paging and archived flags only when set", () => {
    const form = emptySearchForm();
    form.page = 3;
    form.pageSize = 10;
    form.includeArchived = true;
    expect(buildSearchQuery(form)).toBe("includeArchived=true&page=3&pageSize=10");
  });
});

describe("login body", () => {
  it("matches the recorded body", () => {
    expect(buildLoginBody("curator", "stone-arch-1998")).toBe(fixture("login_body.json"));
  });
});

describe("compose body", () => {
  it("matches the recorded body for three places and two periods", () => {
    const body = buildComposeBody(["yard", "chapel", "great-hall"], ["p1100", "p1150"]);
    expect(body).toBe(fixture("compose_body.json"));
  });
});

describe("montage body", () => {
  it("matches the recorded body including fractional opacities", () => {
    const body = buildMontageBody([
      { recordId: "yard-north-wall-photo", opacity: 0.7 },
      { recordId: "yard-from-the-keep", opacity: 0.45 },
    ]);
    expect(body).toBe(fixture("montage_body.json"));
  });
});

describe("record update body", () => {
  it("the edit form pipeline reproduces the recorded patch", () => {
    const original = jsonFixture<RecordDetail>("record.json");
    const state = editStateFrom(original);
    state.title = "Yard north wall photo (reframed)";
    state.subject = "masonry, defence-works, foundations";
    state.attributes.exposure = "1/250";
    state.attributes.condition = "good";
    const patch = editPatch(original, state);
    expect(buildRecordBody(patch)).toBe(fixture("update_body.json"));
  });

  it("an untouched form produces an empty patch", () => {
    const original = jsonFixture<RecordDetail>("record.json");
    const state = editStateFrom(original);
    expect(editPatch(original, state)).toEqual({});
  });

  it("the recorded update really changed the record the way the fixture says", () => {
    const updated = jsonFixture<RecordDetail>("updated_record.json");
    expect(updated.title).toBe("Yard north wall photo (reframed)");
    expect(updated.subject).toEqual(["masonry", "defence-works", "foundations"]);
    expect(updated.attributes).toEqual({ exposure: "1/250", condition: "good" });
  });
});

describe("record create body", () => {
  it("orders fields canonically to match the recorded body", () => {
    const body = buildRecordBody({
      kind: "photo",
      title: "Gate passage photo",
      author: "K. Weber",
      provenance: "site survey archive",
      subject: ["masonry"],
      places: ["yard"],
      periods: ["p1150"],
      captureDate: "2001-06-30",
      content: {
        href: "https://archive.example/gate-passage.png",
        format: "image/png",
        checksum: "cd".repeat(32),
        size: 2048,
      },
      attributes: { exposure: "1/60" },
    });
    expect(body).toBe(fixture("create_body.json"));
  });

  it("field order is independent of the caller's property order", () => {
    const shuffled = buildRecordBody({
      attributes: { exposure: "1/60" },
      captureDate: "2001-06-30",
      title: "Gate passage photo",
      content: {
        href: "https://archive.example/gate-passage.png",
        format: "image/png",
        checksum: "cd".repeat(32),
        size: 2048,
      },
      periods: ["p1150"],
      subject: ["masonry"],
      places: ["yard"],
      provenance: "site survey archive",
      author: "K. Weber",
      kind: "photo",
    });
    expect(shuffled).toBe(fixture("create_body.json"));
  });
});
