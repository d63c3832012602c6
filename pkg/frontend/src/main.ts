/** App shell: hash router, privilege-driven navigation, and the 401 handler
 * that bounces an expired session back to the login page. */

import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { loginPage } from "./pages/login.js";
import { searchPage } from "./pages/search.js";
import { uploadPage } from "./pages/upload.js";
import { categoriesPage } from "./pages/categories.js";
import { adminPage } from "./pages/admin.js";
import { sessionFromLogin, UiSession, visibleNav } from "./session.js";

declare global {
  interface Window {
    ARCHIVIST_API_BASE?: string;
  }
}

export function startApp(root: HTMLElement, api?: ApiClient): void {
  const client = api ?? new ApiClient(window.ARCHIVIST_API_BASE ?? "");
  let session: UiSession | null = null;

  client.onUnauthorized = () => {
    session = null;
    client.token = null;
    window.location.hash = "#/login";
    render("your session has expired, please log in again");
  };

  function navBar(): HTMLElement {
    const items = visibleNav(session!.privileges).map((item) => {
      const active = window.location.hash.startsWith(item.hash);
      return el("a", {
        href: item.hash,
        class: active ? "nav-link active" : "nav-link",
        "data-nav-id": item.id,
      }, [item.label]);
    });
    const logout = el("button", { type: "button", class: "nav-logout" }, ["Log out"]);
    logout.addEventListener("click", async () => {
      try {
        await client.logout();
      } finally {
        session = null;
        window.location.hash = "#/login";
        render();
      }
    });
    return el("nav", { class: "nav" }, [
      ...items,
      el("span", { class: "nav-user" }, [session!.displayName]),
      logout,
    ]);
  }

  function page(): HTMLElement {
    const hash = window.location.hash || "#/search";
    if (hash.startsWith("#/upload")) return uploadPage(client);
    if (hash.startsWith("#/categories")) return categoriesPage(client);
    if (hash.startsWith("#/admin")) return adminPage(client);
    return searchPage(client, session!);
  }

  function render(notice = ""): void {
    clear(root);
    if (!session) {
      root.append(loginPage(client, (response) => {
        session = sessionFromLogin(response);
        window.location.hash = "#/search";
        render();
      }, notice));
      return;
    }
    const wanted = visibleNav(session.privileges);
    const hash = window.location.hash || "#/search";
    const target = wanted.find((item) => hash.startsWith(item.hash));
    if (!target && wanted.length > 0) {
      window.location.hash = wanted[0].hash;
    }
    root.append(navBar(), page());
  }

  window.addEventListener("hashchange", () => render());
  render();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  startApp(document.getElementById("app")!);
}
