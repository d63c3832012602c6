/** Image viewer with display-only brightness/contrast controls. The sliders
 * drive a CSS filter on the rendered image; the stored bytes are fetched once
 * and never altered. */

import type { ApiClient, ScanView } from "./api.js";
import { el, labeled } from "./dom.js";

export function imageViewer(api: ApiClient, scan: ScanView): HTMLElement {
  const img = el("img", { class: "scan-image", alt: `scan ${scan.scan_id}` });
  const brightness = el("input", {
    type: "range", min: "0", max: "200", value: "100", name: "brightness",
  });
  const contrast = el("input", {
    type: "range", min: "0", max: "200", value: "100", name: "contrast",
  });

  const applyFilter = () => {
    img.style.filter = `brightness(${brightness.value}%) contrast(${contrast.value}%)`;
  };
  brightness.addEventListener("input", applyFilter);
  contrast.addEventListener("input", applyFilter);
  applyFilter();

  const meta = el("p", { class: "scan-meta" }, [
    `${scan.category_name} — ${scan.patient_name} (${scan.card_number}) — ` +
    `${scan.radiographer} — ${scan.scan_timestamp}`,
  ]);
  const findings = el("p", { class: "scan-findings" }, [scan.comments]);
  const status = el("p", { class: "viewer-status" }, ["loading image…"]);

  api.fetchImage(scan.scan_id).then(
    (blob) => {
      img.src = URL.createObjectURL(blob);
      status.remove();
    },
    (err) => {
      status.textContent = err instanceof Error ? err.message : "failed to load image";
    },
  );

  return el("section", { class: "viewer" }, [
    meta,
    status,
    img,
    el("div", { class: "viewer-controls" }, [
      labeled("Brightness", brightness),
      labeled("Contrast", contrast),
    ]),
    findings,
  ]);
}
