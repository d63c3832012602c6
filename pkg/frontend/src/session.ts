/** In-memory UI session and privilege-driven navigation. The token is never
 * persisted: refreshing the page means logging in again. */

import type { LoginResponse } from "./api.js";

export interface UiSession {
  token: string;
  userId: string;
  displayName: string;
  roleName: string | null;
  privileges: Set<string>;
}

export function sessionFromLogin(response: LoginResponse): UiSession {
  return {
    token: response.token,
    userId: response.user_id,
    displayName: response.display_name,
    roleName: response.role_name,
    privileges: new Set(response.privileges),
  };
}

export interface NavItem {
  id: string;
  label: string;
  hash: string;
  /** visible when the user holds at least one of these privileges */
  anyOf: string[];
}

/** One entry per operator page; `anyOf` mirrors the privileges the page's
 * API routes demand, so nothing visible can 403. */
export const NAV_ITEMS: NavItem[] = [
  { id: "search", label: "Search images", hash: "#/search",
    anyOf: ["patients", "patient_images"] },
  { id: "upload", label: "Upload scan", hash: "#/upload",
    anyOf: ["patient_images"] },
  { id: "categories", label: "Image categories", hash: "#/categories",
    anyOf: ["patient_images"] },
  { id: "admin", label: "Users & roles", hash: "#/admin",
    anyOf: ["manage_users"] },
];

export function visibleNav(privileges: Set<string>): NavItem[] {
  return NAV_ITEMS.filter((item) => item.anyOf.some((p) => privileges.has(p)));
}
