// Navigation visibility must mirror the API permission matrix: a user never
// sees an entry for a page whose routes would 403.

import { describe, expect, it } from "vitest";
import { visibleNav } from "../src/session.js";

const matrix: [string, string[], string[]][] = [
  ["Administrator",
   ["patients", "patient_images", "manage_users", "news"],
   ["search", "upload", "categories", "admin"]],
  ["Doctors (clinical set)",
   ["patients", "patient_images", "news"],
   ["search", "upload", "categories"]],
  ["Radiographer",
   ["patients", "patient_images"],
   ["search", "upload", "categories"]],
  ["Patients-only clerk",
   ["patients"],
   ["search"]],
  ["News only",
   ["news"],
   []],
  ["No role",
   [],
   []],
];

describe("privilege-driven navigation", () => {
  it.each(matrix)("%s sees exactly the permitted entries", (_name, privileges, expected) => {
    const visible = visibleNav(new Set(privileges)).map((item) => item.id);
    expect(visible).toEqual(expected);
  });

  it("never shows user management without manage_users", () => {
    for (const privileges of [["patients"], ["patient_images"], ["news"],
                              ["patients", "patient_images", "news"]]) {
      const ids = visibleNav(new Set(privileges)).map((i) => i.id);
      expect(ids).not.toContain("admin");
    }
  });
});
