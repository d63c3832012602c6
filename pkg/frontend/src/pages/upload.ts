/** Scan upload form with exactly the seven workflow fields: card number,
 * category, radiographer, the scan file, scan date, scan details and the
 * radiographer's findings. */

import { ApiClient, ApiError } from "../api.js";
import { el, labeled, option } from "../dom.js";

export const MAX_IMAGE_BYTES_DEFAULT = 25 * 1024 * 1024;

export function uploadPage(api: ApiClient, maxImageBytes = MAX_IMAGE_BYTES_DEFAULT): HTMLElement {
  const card = el("input", { type: "text", name: "card_number", required: "" });
  const category = el("select", { name: "scan_category_id", required: "" });
  const radiographer = el("input", { type: "text", name: "radiographer" });
  const image = el("input", { type: "file", name: "image", required: "" });
  const scanDate = el("input", { type: "datetime-local", name: "scan_date", required: "" });
  const details = el("input", { type: "text", name: "scan_details" });
  const findings = el("textarea", { name: "findings", rows: "3" });

  const message = el("p", { class: "form-message", role: "status" });
  const submit = el("button", { type: "submit" }, ["Upload scan"]);

  api.categories().then(({ items }) => {
    for (const c of items) category.append(option(c.category_id, c.category_name));
  });

  image.addEventListener("change", () => {
    message.className = "form-message";
    const file = image.files?.[0];
    if (file && file.size > maxImageBytes) {
      message.textContent =
        `selected file is ${file.size} bytes, above the ${maxImageBytes}-byte limit`;
      message.className = "form-message warning";
    } else {
      message.textContent = "";
    }
  });

  const form = el("form", { class: "upload-form" }, [
    labeled("Patient card number", card),
    labeled("Scan category", category),
    labeled("Radiographer", radiographer),
    labeled("Patient scan", image),
    labeled("Scan date", scanDate),
    labeled("Scan details", details),
    labeled("Radiographer's findings", findings),
    submit,
    message,
  ]);

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    message.className = "form-message";
    const file = image.files?.[0];
    if (!file) {
      message.textContent = "choose a scan image first";
      return;
    }
    if (file.size > maxImageBytes) {
      message.textContent = "file is above the size limit; it would be rejected";
      message.className = "form-message warning";
      return;
    }
    submit.disabled = true;
    try {
      const out = await api.uploadScan({
        card_number: card.value,
        scan_category_id: category.value,
        radiographer: radiographer.value,
        scan_date: new Date(scanDate.value).toISOString(),
        scan_details: details.value,
        findings: findings.value,
        image: file,
        imageName: file.name,
      });
      message.textContent = `scan uploaded: ${out.scan_id}`;
      message.className = "form-message success";
      form.reset();
    } catch (err) {
      if (err instanceof ApiError && err.envelope.code === "unknown_patient_card") {
        message.replaceChildren(
          "patient not registered: ",
          el("a", { href: "#/search" }, ["search for the patient"]),
          " or ask an administrator to register them first",
        );
        message.className = "form-message warning";
      } else {
        message.textContent = err instanceof Error ? err.message : "upload failed";
        message.className = "form-message warning";
      }
    } finally {
      submit.disabled = false;
    }
  });

  return el("main", { class: "page page-upload" }, [
    el("h1", {}, ["Upload a patient scan"]),
    form,
  ]);
}
