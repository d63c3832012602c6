/** Role and user administration: the role editor shows exactly the four
 * privilege checkboxes (patients / patient images / manage users / news);
 * the user table supports editing, role assignment and disabling. The
 * built-in Administrator role cannot be edited. */

import { ApiClient, ApiError, RoleRecord, UserRecord } from "../api.js";
import { clear, el, labeled, option } from "../dom.js";

export const PRIVILEGE_CHECKBOXES: [string, string][] = [
  ["patients", "patients"],
  ["patient_images", "patient images"],
  ["manage_users", "manage users"],
  ["news", "news"],
];

export const ADMIN_ROLE_TOOLTIP =
  "The built-in Administrator role always holds every privilege and cannot be edited";

export function adminPage(api: ApiClient): HTMLElement {
  // --- role editor -----------------------------------------------------------
  const roleName = el("input", { type: "text", name: "role_name", required: "" });
  const roleDescription = el("input", { type: "text", name: "description" });
  const checkboxes = new Map<string, HTMLInputElement>();
  const checkboxRow = el("fieldset", { class: "privilege-boxes" },
    [el("legend", {}, ["Role privileges"])]);
  for (const [wire, label] of PRIVILEGE_CHECKBOXES) {
    const box = el("input", { type: "checkbox", name: `privilege_${wire}` });
    checkboxes.set(wire, box);
    checkboxRow.append(el("label", { class: "privilege-box" }, [box, label]));
  }
  const roleMessage = el("p", { class: "form-message", role: "status" });
  const roleSubmit = el("button", { type: "submit" }, ["Save role"]);
  let editingRoleId: string | null = null;

  const roleForm = el("form", { class: "role-form" }, [
    labeled("Role name", roleName),
    labeled("Role description", roleDescription),
    checkboxRow,
    roleSubmit,
    roleMessage,
  ]);

  const rolesSlot = el("div", { class: "role-list" });
  const usersSlot = el("div", { class: "user-list" });

  let roles: RoleRecord[] = [];

  async function refreshRoles() {
    roles = (await api.roles()).items;
    clear(rolesSlot);
    for (const role of roles) {
      const edit = el("button", { type: "button" }, ["Edit"]);
      if (role.role_name === "Administrator") {
        edit.disabled = true;
        edit.title = ADMIN_ROLE_TOOLTIP;
      } else {
        edit.addEventListener("click", () => {
          editingRoleId = role.role_id;
          roleName.value = role.role_name;
          for (const [wire, box] of checkboxes) {
            box.checked = role.privileges.includes(wire);
          }
          roleMessage.textContent = `editing ${role.role_name}`;
        });
      }
      rolesSlot.append(el("div", { class: "role-row", "data-role-id": role.role_id }, [
        el("strong", {}, [role.role_name]),
        el("span", {}, [` ${role.privileges.join(", ") || "no privileges"} `]),
        edit,
      ]));
    }
  }

  roleForm.addEventListener("submit", async (event) => {
    event.preventDefault();
    roleMessage.textContent = "";
    const chosen = [...checkboxes.entries()]
      .filter(([, box]) => box.checked)
      .map(([wire]) => wire);
    try {
      if (editingRoleId) {
        await api.updateRole(editingRoleId, roleName.value, roleDescription.value, chosen);
      } else {
        await api.createRole(roleName.value, roleDescription.value, chosen);
      }
      editingRoleId = null;
      roleForm.reset();
      roleMessage.textContent = "role saved";
      await refreshRoles();
      await refreshUsers();
    } catch (err) {
      roleMessage.textContent = err instanceof Error ? err.message : "save failed";
    }
  });

  // --- users ------------------------------------------------------------------
  const newUserId = el("input", { type: "text", name: "user_id", required: "" });
  const newUserPassword = el("input", {
    type: "password", name: "password", required: "", autocomplete: "new-password",
  });
  const userMessage = el("p", { class: "form-message", role: "status" });
  const userForm = el("form", { class: "user-form" }, [
    labeled("Login name", newUserId),
    labeled("Initial password", newUserPassword),
    el("button", { type: "submit" }, ["Create user"]),
    userMessage,
  ]);

  userForm.addEventListener("submit", async (event) => {
    event.preventDefault();
    userMessage.textContent = "";
    try {
      await api.createUser({ user_id: newUserId.value, password: newUserPassword.value });
      userForm.reset();
      await refreshUsers();
    } catch (err) {
      userMessage.textContent =
        err instanceof ApiError ? err.envelope.error :
        err instanceof Error ? err.message : "create failed";
    }
  });

  async function refreshUsers() {
    const { items } = await api.users();
    clear(usersSlot);
    const head = el("tr", {}, ["User", "Name", "Status", "Role", "", ""]
      .map((h) => el("th", {}, [h])));
    const rows = items.map((user) => userRow(user));
    usersSlot.append(el("table", { class: "users-table" }, [head, ...rows]));
  }

  function userRow(user: UserRecord): HTMLElement {
    const statusSelect = el("select", {}, []);
    statusSelect.append(option("Active", "Active"), option("Disabled", "Disabled"));
    statusSelect.value = user.account_status;

    const roleSelect = el("select", {}, [option("", "no role")]);
    for (const role of roles) {
      roleSelect.append(option(role.role_id, role.role_name));
    }
    roleSelect.value = user.role_id ?? "";

    const save = el("button", { type: "button" }, ["Save"]);
    const rowMessage = el("span", { class: "row-message" });
    save.addEventListener("click", async () => {
      rowMessage.textContent = "";
      try {
        await api.updateUser(user.user_id, { account_status: statusSelect.value });
        if (roleSelect.value && roleSelect.value !== (user.role_id ?? "")) {
          await api.assignRole(roleSelect.value, user.user_id);
        }
        rowMessage.textContent = "saved";
        refreshUsers();
      } catch (err) {
        rowMessage.textContent = err instanceof Error ? err.message : "save failed";
      }
    });

    return el("tr", { class: "user-row", "data-user-id": user.user_id }, [
      el("td", {}, [user.user_id]),
      el("td", {}, [`${user.first_name} ${user.last_name}`.trim()]),
      el("td", {}, [statusSelect]),
      el("td", {}, [roleSelect]),
      el("td", {}, [save]),
      el("td", {}, [rowMessage]),
    ]);
  }

  refreshRoles().then(refreshUsers);

  return el("main", { class: "page page-admin" }, [
    el("h1", {}, ["Users & roles"]),
    el("section", {}, [el("h2", {}, ["Roles"]), roleForm, rolesSlot]),
    el("section", {}, [el("h2", {}, ["Users"]), userForm, usersSlot]),
  ]);
}
