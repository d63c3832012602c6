"""Accounts, sessions, roles/privileges and the append-only audit trail.

Login failures are deliberately uniform: wrong password, unknown user and
disabled account all produce the same error payload so the login form cannot
be used to enumerate accounts.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum

from .errors import (
    CannotModifyAdministrator,
    DuplicateUserId,
    EmptyDescription,
    FieldErrors,
    Forbidden,
    InvalidSession,
    LoginError,
    UniqueViolation,
    UnknownRole,
    UnknownUser,
    WeakPassword,
)
from .model import (
    AccountStatus,
    AuditEntry,
    BlobRef,
    EnabledStatus,
    Privilege,
    Role,
    RolePrivilege,
    SessionToken,
    Sex,
    USER_ID_RE,
    UserAccount,
    email_ok,
    format_instant,
    phone_ok,
    utc_now,
)
from .storage import Delete, EntityKind, Put, Store

ADMINISTRATOR_ROLE_NAME = "Administrator"
SYSTEM_ACTOR = "system"
MIN_PASSWORD_LEN = 8
DEFAULT_SESSION_TTL = timedelta(minutes=30)

PBKDF2_ALGORITHM = "pbkdf2_sha256"
PBKDF2_ITERATIONS = 60_000


class PrivilegeName(Enum):
    """The four seed privileges; values are the persisted descriptions."""

    PATIENTS = "patients"
    PATIENT_IMAGES = "patient images"
    MANAGE_USERS = "manage users"
    NEWS = "news"

    @property
    def wire(self) -> str:
        return self.value.replace(" ", "_")

    @classmethod
    def from_wire(cls, name: str) -> "PrivilegeName":
        for member in cls:
            if member.wire == name:
                return member
        raise ValueError(f"unknown privilege {name!r}")


@dataclass
class Credentials:
    """Login input. Never persisted, never logged."""

    user_id: str
    password: str


def hash_password(password: str, *, iterations: int = PBKDF2_ITERATIONS,
                  salt: bytes | None = None) -> str:
    """Salted, deliberately slow digest; the algorithm name travels with the
    digest so it can be migrated later."""
    salt = salt if salt is not None else secrets.token_bytes(16)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)
    return f"{PBKDF2_ALGORITHM}${iterations}${salt.hex()}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        algorithm, iterations, salt_hex, digest_hex = stored.split("$")
        if algorithm != PBKDF2_ALGORITHM:
            return False
        recomputed = hashlib.pbkdf2_hmac(
            "sha256", password.encode("utf-8"), bytes.fromhex(salt_hex), int(iterations)
        )
    except (ValueError, TypeError):
        return False
    return hmac.compare_digest(recomputed.hex(), digest_hex)


# Burned once at import so unknown-user logins hash against something real
# and cost the same as a wrong password.
_DUMMY_DIGEST = hash_password("invalid-password-placeholder")


class AuthService:
    def __init__(self, store: Store, session_ttl: timedelta = DEFAULT_SESSION_TTL):
        self.store = store
        self.session_ttl = session_ttl
        self._sessions: dict[str, SessionToken] = {}
        self._sessions_lock = threading.Lock()

    # --- lookups ------------------------------------------------------------

    def get_user(self, user_id: str) -> UserAccount | None:
        rec = self.store.load_entity(EntityKind.USER_ACCOUNT, user_id)
        return None if rec is None else UserAccount.from_record(rec)

    def list_users(self) -> list[UserAccount]:
        return [
            UserAccount.from_record(rec)
            for rec in self.store.query_entities(EntityKind.USER_ACCOUNT)
        ]

    def get_role(self, role_id: str) -> Role | None:
        row = self.store.load_entity(EntityKind.ROLE, role_id)
        if row is None:
            return None
        joins = self.store.query_entities(
            EntityKind.ROLE_PRIVILEGE, {"role_id": role_id}
        )
        return Role.from_row(row, frozenset(j["privilege_id"] for j in joins))

    def find_role_by_name(self, role_name: str) -> Role | None:
        rows = self.store.query_entities(EntityKind.ROLE, {"role_name": role_name})
        return self.get_role(rows[0]["role_id"]) if rows else None

    def list_roles(self) -> list[Role]:
        return [
            role
            for row in self.store.query_entities(EntityKind.ROLE)
            if (role := self.get_role(row["role_id"])) is not None
        ]

    def list_privileges(self) -> list[Privilege]:
        return [
            Privilege.from_record(rec)
            for rec in self.store.query_entities(EntityKind.PRIVILEGE)
        ]

    def find_privilege(self, name: PrivilegeName) -> Privilege | None:
        rows = self.store.query_entities(
            EntityKind.PRIVILEGE, {"privilege_description": name.value}
        )
        return Privilege.from_record(rows[0]) if rows else None

    # --- privilege checks ------------------------------------------------------

    def check_privilege(self, user: UserAccount, privilege: PrivilegeName) -> bool:
        """Allow iff the user's role is enabled, contains the privilege, and
        the privilege record itself is enabled. Reads live store state, so
        role changes take effect on the very next check."""
        if user.role_id is None:
            return False
        role = self.get_role(user.role_id)
        if role is None or role.status is not EnabledStatus.ENABLED:
            return False
        for privilege_id in role.privilege_ids:
            rec = self.store.load_entity(EntityKind.PRIVILEGE, privilege_id)
            if rec is None:
                continue
            record = Privilege.from_record(rec)
            if (
                record.privilege_description == privilege.value
                and record.status is EnabledStatus.ENABLED
            ):
                return True
        return False

    def is_administrator(self, user: UserAccount) -> bool:
        if user.role_id is None:
            return False
        role = self.get_role(user.role_id)
        return role is not None and role.role_name == ADMINISTRATOR_ROLE_NAME

    def granted_privileges(self, user: UserAccount) -> list[PrivilegeName]:
        return [p for p in PrivilegeName if self.check_privilege(user, p)]

    def require_privilege(self, actor: UserAccount, privilege: PrivilegeName) -> None:
        if not self.check_privilege(actor, privilege):
            raise Forbidden(privilege.wire)

    def require_administrator(self, actor: UserAccount) -> None:
        if not self.is_administrator(actor):
            raise Forbidden("administrator")

    # --- account lifecycle -------------------------------------------------------

    def create_user(self, actor: UserAccount, account: dict, initial_password: str) -> str:
        """Create an account from candidate fields (canonical names, no
        password_digest). Appends one audit entry attributed to the actor."""
        self.require_privilege(actor, PrivilegeName.MANAGE_USERS)
        user_id = str(account.get("user_id", "")).strip()
        if not USER_ID_RE.fullmatch(user_id):
            raise FieldErrors(["user_id"])
        if self.get_user(user_id) is not None:
            raise DuplicateUserId(f"user {user_id!r} already exists")
        if len(initial_password) < MIN_PASSWORD_LEN:
            raise WeakPassword(
                f"password must be at least {MIN_PASSWORD_LEN} characters"
            )
        user = self._build_account(user_id, account, hash_password(initial_password))
        try:
            self.store.commit([
                Put(EntityKind.USER_ACCOUNT, user.user_id, user.to_record()),
                self._audit_put(actor.user_id, f"user created: {user_id}"),
            ])
        except UniqueViolation as exc:
            raise DuplicateUserId(str(exc)) from exc
        return user_id

    def _build_account(self, user_id: str, fields: dict, digest: str) -> UserAccount:
        bad = []
        email = str(fields.get("email", "")).strip()
        phone = str(fields.get("phone", "")).strip()
        if not email_ok(email):
            bad.append("email")
        if not phone_ok(phone):
            bad.append("phone")
        try:
            sex = Sex(fields.get("sex", "U"))
        except ValueError:
            sex = None
            bad.append("sex")
        try:
            status = AccountStatus(fields.get("account_status", "Active"))
        except ValueError:
            status = None
            bad.append("account_status")
        if bad:
            raise FieldErrors(bad)
        role_id = fields.get("role_id")
        if role_id is not None and self.get_role(role_id) is None:
            raise UnknownRole(f"no role {role_id!r}")
        photo = fields.get("photo")
        return UserAccount(
            user_id=user_id,
            password_digest=digest,
            title=str(fields.get("title", "")).strip(),
            first_name=str(fields.get("first_name", "")).strip(),
            last_name=str(fields.get("last_name", "")).strip(),
            sex=sex,
            phone=phone,
            email=email,
            address=str(fields.get("address", "")).strip(),
            photo=BlobRef.from_record(photo) if isinstance(photo, dict) else None,
            user_profession=str(fields.get("user_profession", "")).strip(),
            account_status=status,
            role_id=role_id,
        )

    _MUTABLE_USER_FIELDS = (
        "title", "first_name", "last_name", "sex", "phone", "email",
        "address", "user_profession", "account_status", "role_id",
    )

    def update_user(self, actor: UserAccount, user_id: str, changes: dict) -> UserAccount:
        self.require_privilege(actor, PrivilegeName.MANAGE_USERS)
        current = self.get_user(user_id)
        if current is None:
            raise UnknownUser(f"no user {user_id!r}")
        merged = current.to_record()
        password = changes.get("password")
        bad = []
        for key, value in changes.items():
            if key == "password":
                continue
            if key not in self._MUTABLE_USER_FIELDS:
                bad.append(key)
                continue
            merged[key] = value
        if bad:
            raise FieldErrors(bad)
        if password is not None:
            if len(password) < MIN_PASSWORD_LEN:
                raise WeakPassword(
                    f"password must be at least {MIN_PASSWORD_LEN} characters"
                )
            merged["password_digest"] = hash_password(password)
        rebuilt = self._build_account(
            user_id,
            merged,
            merged["password_digest"],
        )
        self.store.commit([
            Put(EntityKind.USER_ACCOUNT, user_id, rebuilt.to_record()),
            self._audit_put(actor.user_id, f"update user: {user_id}"),
        ])
        return rebuilt

    # --- sessions -------------------------------------------------------------

    def login(self, credentials: Credentials, now: datetime | None = None) -> SessionToken:
        now = now or utc_now()
        user = self.get_user(credentials.user_id)
        if user is None:
            verify_password(credentials.password, _DUMMY_DIGEST)
            raise LoginError()
        if not verify_password(credentials.password, user.password_digest):
            raise LoginError()
        if user.account_status is not AccountStatus.ACTIVE:
            raise LoginError()
        with self._sessions_lock:
            token = secrets.token_urlsafe(32)
            while token in self._sessions:
                token = secrets.token_urlsafe(32)
            session = SessionToken(
                token=token,
                user_id=user.user_id,
                issued_at=now,
                expires_at=now + self.session_ttl,
            )
            self._sessions[token] = session
        self.append_audit(user.user_id, f"login: {user.user_id}", now)
        return session

    def logout(self, token: str) -> None:
        with self._sessions_lock:
            session = self._sessions.pop(token, None)
        if session is not None:
            self.append_audit(session.user_id, f"logout: {session.user_id}")

    def resolve_session(self, token: str, now: datetime | None = None) -> UserAccount:
        now = now or utc_now()
        with self._sessions_lock:
            session = self._sessions.get(token)
            if session is not None and now >= session.expires_at:
                del self._sessions[token]
                session = None
        if session is None:
            raise InvalidSession("session missing or expired")
        user = self.get_user(session.user_id)
        if user is None or user.account_status is not AccountStatus.ACTIVE:
            raise InvalidSession("account unavailable")
        return user

    # --- roles -----------------------------------------------------------------

    def create_or_update_role(
        self,
        actor: UserAccount,
        role_name: str,
        description: str = "",
        privileges: set[PrivilegeName] | None = None,
        role_id: str | None = None,
    ) -> Role:
        """Persist a role with exactly the given privilege set.

        The role description is accepted for form fidelity but the role table
        has no column for it, so it is not persisted.
        """
        del description
        self.require_privilege(actor, PrivilegeName.MANAGE_USERS)
        role_name = role_name.strip()
        if not role_name:
            raise FieldErrors(["role_name"])
        privileges = privileges or set()

        existing = None
        if role_id is not None:
            existing = self.get_role(role_id)
            if existing is None:
                raise UnknownRole(f"no role {role_id!r}")
            if existing.role_name == ADMINISTRATOR_ROLE_NAME:
                raise CannotModifyAdministrator("the built-in role is immutable")
        if role_name == ADMINISTRATOR_ROLE_NAME and (
            existing is None or existing.role_name != ADMINISTRATOR_ROLE_NAME
        ):
            admin = self.find_role_by_name(ADMINISTRATOR_ROLE_NAME)
            if admin is not None:
                raise CannotModifyAdministrator("the built-in role is immutable")

        privilege_ids = []
        for name in sorted(privileges, key=lambda p: p.value):
            record = self.find_privilege(name)
            if record is None:
                raise UnknownRole(f"privilege {name.wire!r} is not seeded")
            privilege_ids.append(record.privilege_id)

        ops = []
        if existing is None:
            role_id = self.store.reserve_id(EntityKind.ROLE)
            verb = "create role"
        else:
            verb = "update role"
            old_joins = self.store.query_entities(
                EntityKind.ROLE_PRIVILEGE, {"role_id": role_id}
            )
            ops.extend(Delete(EntityKind.ROLE_PRIVILEGE, j["sn"]) for j in old_joins)
        row = {"role_id": role_id, "role_name": role_name,
               "status": EnabledStatus.ENABLED.value}
        ops.append(Put(EntityKind.ROLE, role_id, row))
        ops.extend(
            Put(EntityKind.ROLE_PRIVILEGE, None,
                {"sn": None, "role_id": role_id, "privilege_id": pid})
            for pid in privilege_ids
        )
        ops.append(self._audit_put(actor.user_id, f"{verb}: {role_id}"))
        self.store.commit(ops)
        return self.get_role(role_id)

    def assign_role(self, actor: UserAccount, user_id: str, role_id: str) -> None:
        self.require_privilege(actor, PrivilegeName.MANAGE_USERS)
        user = self.get_user(user_id)
        if user is None:
            raise UnknownUser(f"no user {user_id!r}")
        if self.get_role(role_id) is None:
            raise UnknownRole(f"no role {role_id!r}")
        record = user.to_record()
        record["role_id"] = role_id
        self.store.commit([
            Put(EntityKind.USER_ACCOUNT, user_id, record),
            self._audit_put(actor.user_id, f"assign role: {role_id} to {user_id}"),
        ])

    # --- audit trail ---------------------------------------------------------------

    def _audit_put(self, actor_id: str, description: str,
                   now: datetime | None = None) -> Put:
        if not description:
            raise EmptyDescription("audit event description is empty")
        record = {
            "log_id": None,  # assigned inside the commit, in insertion order
            "user_id": actor_id,
            "event_description": description,
            "event_timestamp": format_instant(now or utc_now()),
        }
        return Put(EntityKind.AUDIT_ENTRY, None, record)

    def append_audit(self, actor_id: str, event_description: str,
                     now: datetime | None = None) -> AuditEntry:
        put = self._audit_put(actor_id, event_description, now)
        assigned = self.store.commit([put])
        record = dict(put.record)
        record["log_id"] = assigned[0]
        return AuditEntry.from_record(record)

    def query_audit(
        self,
        actor: UserAccount,
        user_id: str | None = None,
        time_from: datetime | None = None,
        time_to: datetime | None = None,
    ) -> list[AuditEntry]:
        """Matching entries in log id order; both range ends are inclusive."""
        self.require_privilege(actor, PrivilegeName.MANAGE_USERS)
        entries = [
            AuditEntry.from_record(rec)
            for rec in self.store.query_entities(EntityKind.AUDIT_ENTRY)
        ]
        out = []
        for entry in entries:
            if user_id is not None and entry.user_id != user_id:
                continue
            if time_from is not None and entry.event_timestamp < time_from:
                continue
            if time_to is not None and entry.event_timestamp > time_to:
                continue
            out.append(entry)
        out.sort(key=lambda e: e.log_id)
        return out
