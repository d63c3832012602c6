/** Image classification page: list existing categories, create new ones,
 * edit in place. Duplicate names surface inline. */

import { ApiClient, ApiError, Category } from "../api.js";
import { clear, el, labeled } from "../dom.js";

export function categoriesPage(api: ApiClient): HTMLElement {
  const listSlot = el("div", { class: "category-list" });
  const message = el("p", { class: "form-message", role: "status" });

  const name = el("input", { type: "text", name: "category_name", required: "" });
  const description = el("input", { type: "text", name: "category_description" });
  const createForm = el("form", { class: "category-form" }, [
    labeled("Classification name", name),
    labeled("Description", description),
    el("button", { type: "submit" }, ["Classify"]),
    message,
  ]);

  async function refresh() {
    const { items } = await api.categories();
    clear(listSlot);
    listSlot.append(...items.map(row));
  }

  function row(category: Category): HTMLElement {
    const nameInput = el("input", { type: "text", value: category.category_name });
    nameInput.value = category.category_name;
    const descInput = el("input", { type: "text" });
    descInput.value = category.category_description;
    const update = el("button", { type: "button" }, ["Update"]);
    const rowMessage = el("span", { class: "row-message" });
    update.addEventListener("click", async () => {
      rowMessage.textContent = "";
      try {
        await api.updateCategory(category.category_id, {
          category_name: nameInput.value,
          category_description: descInput.value,
        });
        rowMessage.textContent = "saved";
        refresh();
      } catch (err) {
        rowMessage.textContent =
          err instanceof ApiError && err.envelope.code === "duplicate_category"
            ? "a category with that name already exists"
            : err instanceof Error ? err.message : "update failed";
      }
    });
    return el("div", { class: "category-row", "data-category-id": category.category_id },
      [nameInput, descInput, update, rowMessage]);
  }

  createForm.addEventListener("submit", async (event) => {
    event.preventDefault();
    message.textContent = "";
    try {
      await api.createCategory(name.value, description.value);
      name.value = "";
      description.value = "";
      refresh();
    } catch (err) {
      message.textContent =
        err instanceof ApiError && err.envelope.code === "duplicate_category"
          ? "a category with that name already exists"
          : err instanceof Error ? err.message : "create failed";
    }
  });

  refresh();
  return el("main", { class: "page page-categories" }, [
    el("h1", {}, ["Image categories"]),
    createForm,
    listSlot,
  ]);
}
