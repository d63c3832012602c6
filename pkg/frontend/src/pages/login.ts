/** Login page. A failed login shows the server's message verbatim; a network
 * failure gets its own retry wording. */

import { ApiClient, ApiError, NetworkError } from "../api.js";
import type { LoginResponse } from "../api.js";
import { el, labeled } from "../dom.js";

export function loginPage(
  api: ApiClient,
  onLogin: (response: LoginResponse) => void,
  notice = "",
): HTMLElement {
  const userInput = el("input", { type: "text", name: "user_id", autocomplete: "username" });
  const passwordInput = el("input", {
    type: "password", name: "password", autocomplete: "current-password",
  });
  const error = el("p", { class: "login-error", role: "alert" });
  const noticeEl = el("p", { class: "login-notice" }, [notice]);
  const submit = el("button", { type: "submit" }, ["Log in"]);

  const form = el("form", { class: "login-form" }, [
    el("h1", {}, ["Electronic Medical Image Archive"]),
    noticeEl,
    labeled("Username", userInput),
    labeled("Password", passwordInput),
    submit,
    error,
  ]);

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    error.textContent = "";
    submit.disabled = true;
    try {
      const response = await api.login(userInput.value, passwordInput.value);
      passwordInput.value = "";
      onLogin(response);
    } catch (err) {
      if (err instanceof ApiError) {
        // shown exactly as the server sent it, no rewording
        error.textContent = err.envelope.error;
      } else if (err instanceof NetworkError) {
        error.textContent = err.message;
      } else {
        error.textContent = "unexpected error";
      }
    } finally {
      submit.disabled = false;
    }
  });

  return el("main", { class: "page page-login" }, [form]);
}
