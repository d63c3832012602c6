/** Search page: scan search over the eight criteria (plus patient lookup for
 * users holding the patients privilege), paged results, and the image viewer
 * on row click. */

import { ApiClient, PatientRecord, ScanView } from "../api.js";
import { clear, el, labeled, option } from "../dom.js";
import type { UiSession } from "../session.js";
import { imageViewer } from "../viewer.js";

export const SCAN_CRITERIA: [string, string][] = [
  ["scan_details", "scan"],
  ["radiographer", "radiographer"],
  ["patient_name", "patient name"],
  ["card_number", "patient card number"],
  ["last_name", "patient last name"],
  ["first_name", "patient first name"],
  ["email", "patient email"],
  ["phone", "patient phone number"],
];

const PAGE_SIZE = 25;

export function searchPage(api: ApiClient, session: UiSession): HTMLElement {
  const canScans = session.privileges.has("patient_images");
  const canPatients = session.privileges.has("patients");

  const mode = el("select", { name: "mode" });
  if (canScans) mode.append(option("scans", "Scan images"));
  if (canPatients) mode.append(option("patients", "Patients"));

  const criterion = el("select", { name: "by" });
  for (const [wire, label] of SCAN_CRITERIA) criterion.append(option(wire, label));

  const term = el("input", { type: "search", name: "term", required: "" });
  const submit = el("button", { type: "submit" }, ["Search"]);
  const status = el("p", { class: "search-status", role: "status" });
  const results = el("div", { class: "search-results" });
  const pager = el("div", { class: "pager" });
  const viewerSlot = el("div", { class: "viewer-slot" });

  const form = el("form", { class: "search-form" }, [
    labeled("Search", mode),
    labeled("By", criterion),
    labeled("Term", term),
    submit,
  ]);

  mode.addEventListener("change", () => {
    criterion.parentElement!.style.display =
      mode.value === "scans" ? "" : "none";
  });

  let offset = 0;

  async function run() {
    status.textContent = "searching…";
    clear(results);
    clear(pager);
    clear(viewerSlot);
    try {
      if (mode.value === "patients") {
        const page = await api.searchPatients(term.value, offset, PAGE_SIZE);
        status.textContent = `${page.total_matches} patient(s) found`;
        results.append(patientTable(page.items));
        renderPager(page.total_matches);
      } else {
        const page = await api.searchScans(criterion.value, term.value, offset, PAGE_SIZE);
        status.textContent = `${page.total_matches} image(s) found`;
        results.append(scanTable(page.items));
        renderPager(page.total_matches);
      }
    } catch (err) {
      status.textContent = err instanceof Error ? err.message : "search failed";
    }
  }

  function renderPager(total: number) {
    const previous = el("button", { type: "button" }, ["Previous"]);
    const next = el("button", { type: "button" }, ["Next"]);
    previous.disabled = offset === 0;
    next.disabled = offset + PAGE_SIZE >= total;
    previous.addEventListener("click", () => { offset -= PAGE_SIZE; run(); });
    next.addEventListener("click", () => { offset += PAGE_SIZE; run(); });
    const label = total === 0 ? "no results" :
      `${offset + 1}–${Math.min(offset + PAGE_SIZE, total)} of ${total}`;
    pager.append(previous, el("span", { class: "pager-label" }, [label]), next);
  }

  function scanTable(items: ScanView[]): HTMLElement {
    const head = el("tr", {}, ["Date", "Category", "Patient", "Card number",
      "Radiographer", "Details"].map((h) => el("th", {}, [h])));
    const body = items.map((scan) => {
      const row = el("tr", { class: "scan-row", "data-scan-id": scan.scan_id }, [
        el("td", {}, [scan.scan_timestamp]),
        el("td", {}, [scan.category_name]),
        el("td", {}, [scan.patient_name]),
        el("td", {}, [scan.card_number]),
        el("td", {}, [scan.radiographer]),
        el("td", {}, [scan.scan_details]),
      ]);
      row.addEventListener("click", () => {
        clear(viewerSlot);
        viewerSlot.append(imageViewer(api, scan));
      });
      return row;
    });
    return el("table", { class: "results-table" }, [head, ...body]);
  }

  function patientTable(items: PatientRecord[]): HTMLElement {
    const head = el("tr", {}, ["Card number", "Last name", "First name",
      "Sex", "Phone", "Email"].map((h) => el("th", {}, [h])));
    const body = items.map((p) =>
      el("tr", {}, [
        el("td", {}, [p.card_number]),
        el("td", {}, [p.last_name]),
        el("td", {}, [p.first_name]),
        el("td", {}, [p.sex]),
        el("td", {}, [p.phone]),
        el("td", {}, [p.email]),
      ]));
    return el("table", { class: "results-table" }, [head, ...body]);
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    offset = 0;
    run();
  });

  return el("main", { class: "page page-search" }, [
    el("h1", {}, ["Search patient images"]),
    form,
    status,
    results,
    pager,
    viewerSlot,
  ]);
}
