/**
 * Login screen. On success the browser returns to wherever the redirect
 * came from; visitors can log in too but gain no editing rights.
 */

import { el } from "../dom.js";
import { AppContext, errorBox, section } from "./shared.js";

export function renderLogin(ctx: AppContext, next: string, mount: HTMLElement): void {
  const username = el("input", { type: "text", autocomplete: "username" }) as HTMLInputElement;
  const password = el("input", {
    type: "password",
    autocomplete: "current-password",
  }) as HTMLInputElement;
  const errorSlot = el("div", {});

  const submit = () => {
    errorSlot.replaceChildren();
    void ctx.session
      .login(username.value.trim(), password.value)
      .then(() => ctx.navigate(next))
      .catch((error) => errorSlot.append(errorBox(error)));
  };

  const form = el(
    "form",
    {
      class: "login-form",
      onsubmit: (event) => {
        event.preventDefault();
        submit();
      },
    },
    el("div", { class: "field-row" }, el("label", {}, "Username"), username),
    el("div", { class: "field-row" }, el("label", {}, "Password"), password),
    el("button", { class: "primary", type: "submit" }, "Log in"),
    errorSlot,
  );

  mount.append(
    section("Log in", form),
    el(
      "p",
      { class: "hint" },
      "Expert accounts can edit records; visitor accounts browse everything read-only.",
    ),
  );
  username.focus();
}
