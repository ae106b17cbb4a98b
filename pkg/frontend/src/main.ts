/**
 * Application entry point: builds the session, listens to hash changes,
 * and hands each route to its view.
 */

import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { parseRoute, Route } from "./router.js";
import { MutationGate, Session } from "./session.js";
import { renderHistory, renderPlaces } from "./views/browse.js";
import { renderCompose } from "./views/compose.js";
import { renderDetail } from "./views/detail.js";
import { renderEdit } from "./views/edit.js";
import { renderHelp } from "./views/help.js";
import { renderLogin } from "./views/login.js";
import { renderSearch } from "./views/search.js";
import { AppContext, header } from "./views/shared.js";

function dispatch(ctx: AppContext, route: Route, mount: HTMLElement): void {
  switch (route.view) {
    case "search":
      renderSearch(ctx, route.form, mount);
      break;
    case "record":
      renderDetail(ctx, route.id, mount);
      break;
    case "history":
      renderHistory(ctx, route.periodId, mount);
      break;
    case "places":
      renderPlaces(ctx, route.placeId, mount);
      break;
    case "compose":
      renderCompose(ctx, { mode: route.mode, places: route.places, periods: route.periods }, mount);
      break;
    case "edit":
      renderEdit(ctx, route.id, mount);
      break;
    case "help":
      renderHelp(ctx, mount);
      break;
    case "login":
      renderLogin(ctx, route.next, mount);
      break;
  }
}

function boot(): void {
  const session = new Session(new ApiClient(), window.sessionStorage);
  const gate = new MutationGate();
  const shell = document.getElementById("app");
  if (!shell) throw new Error("missing #app mount point");

  const render = () => {
    const route = parseRoute(window.location.hash);
    clear(shell);
    const mount = el("main", { class: "view" });
    shell.append(header(ctx, route), mount);
    dispatch(ctx, route, mount);
  };

  const ctx: AppContext = {
    session,
    gate,
    navigate(hash: string): void {
      if (window.location.hash === hash) render();
      else window.location.hash = hash;
    },
    refresh: () => render(),
  };

  window.addEventListener("hashchange", render);
  render();
}

boot();
