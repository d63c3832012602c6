"""Domain entities for the image archive: the eight persisted record kinds,
their enumerations, field validators and the canonical serialized form.

Canonical form: JSON-shaped dicts with snake_case keys, RFC 3339 UTC
timestamps, sex as "F"/"M"/"U". Every other module builds on these types.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum

from .errors import (
    BadEmail,
    BadPhone,
    CardNumberTooLong,
    EmptyCardNumber,
    FieldErrors,
)

MAX_CARD_NUMBER_LEN = 64
MAX_PHONE_LEN = 32

_PHONE_RE = re.compile(r"^[0-9+\- ]+$")
# Login names double as storage keys, so keep them filesystem-safe.
USER_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.\-]{0,63}$")


class Sex(Enum):
    FEMALE = "F"
    MALE = "M"
    UNSPECIFIED = "U"


class AccountStatus(Enum):
    ACTIVE = "Active"
    DISABLED = "Disabled"


class EnabledStatus(Enum):
    """Shared by roles and privileges."""

    ENABLED = "Enabled"
    DISABLED = "Disabled"


# --- timestamps ---------------------------------------------------------------

def format_instant(dt: datetime) -> str:
    """RFC 3339 UTC with microseconds, e.g. 2021-01-01T00:00:00.000000Z."""
    if dt.tzinfo is None:
        raise ValueError("naive datetime not allowed")
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def parse_instant(raw: str) -> datetime:
    """Parse an RFC 3339 instant; 'Z' and explicit offsets both accepted."""
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def canonical_json(record: dict) -> str:
    """Deterministic JSON used for entity files, exports and fixtures."""
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


# --- blob references ------------------------------------------------------------

@dataclass(frozen=True)
class BlobRef:
    """Content address of stored bytes: hash digest, length and media type."""

    digest: str
    size_bytes: int
    media_type: str

    def to_record(self) -> dict:
        return {
            "digest": self.digest,
            "size_bytes": self.size_bytes,
            "media_type": self.media_type,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "BlobRef":
        return cls(
            digest=rec["digest"],
            size_bytes=int(rec["size_bytes"]),
            media_type=rec["media_type"],
        )


def _opt_blob(rec) -> BlobRef | None:
    return None if rec is None else BlobRef.from_record(rec)


def _opt_record(ref: BlobRef | None):
    return None if ref is None else ref.to_record()


# --- entities --------------------------------------------------------------------

@dataclass
class PatientRecord:
    patient_id: str
    first_name: str
    last_name: str
    address: str = ""
    phone: str = ""
    email: str = ""
    sex: Sex = Sex.UNSPECIFIED
    card_number: str = ""
    photo: BlobRef | None = None

    def to_record(self) -> dict:
        return {
            "patient_id": self.patient_id,
            "first_name": self.first_name,
            "last_name": self.last_name,
            "address": self.address,
            "phone": self.phone,
            "email": self.email,
            "sex": self.sex.value,
            "card_number": self.card_number,
            "photo": _opt_record(self.photo),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "PatientRecord":
        return cls(
            patient_id=rec["patient_id"],
            first_name=rec["first_name"],
            last_name=rec["last_name"],
            address=rec["address"],
            phone=rec["phone"],
            email=rec["email"],
            sex=Sex(rec["sex"]),
            card_number=rec["card_number"],
            photo=_opt_blob(rec["photo"]),
        )


@dataclass
class ScanCategory:
    category_id: str
    category_name: str
    category_description: str = ""

    def to_record(self) -> dict:
        return {
            "category_id": self.category_id,
            "category_name": self.category_name,
            "category_description": self.category_description,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ScanCategory":
        return cls(
            category_id=rec["category_id"],
            category_name=rec["category_name"],
            category_description=rec["category_description"],
        )


@dataclass
class ScanRecord:
    scan_id: str
    patient_id: str
    scan_category_id: str
    radiographer: str
    scan_image: BlobRef
    scan_timestamp: datetime
    expiry: datetime | None = None
    scan_details: str = ""
    comments: str = ""

    def to_record(self) -> dict:
        return {
            "scan_id": self.scan_id,
            "patient_id": self.patient_id,
            "scan_category_id": self.scan_category_id,
            "radiographer": self.radiographer,
            "scan_image": self.scan_image.to_record(),
            "scan_timestamp": format_instant(self.scan_timestamp),
            "expiry": None if self.expiry is None else format_instant(self.expiry),
            "scan_details": self.scan_details,
            "comments": self.comments,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ScanRecord":
        return cls(
            scan_id=rec["scan_id"],
            patient_id=rec["patient_id"],
            scan_category_id=rec["scan_category_id"],
            radiographer=rec["radiographer"],
            scan_image=BlobRef.from_record(rec["scan_image"]),
            scan_timestamp=parse_instant(rec["scan_timestamp"]),
            expiry=None if rec["expiry"] is None else parse_instant(rec["expiry"]),
            scan_details=rec["scan_details"],
            comments=rec["comments"],
        )


@dataclass
class UserAccount:
    user_id: str
    password_digest: str
    title: str = ""
    first_name: str = ""
    last_name: str = ""
    sex: Sex = Sex.UNSPECIFIED
    phone: str = ""
    email: str = ""
    address: str = ""
    photo: BlobRef | None = None
    user_profession: str = ""
    account_status: AccountStatus = AccountStatus.ACTIVE
    role_id: str | None = None

    @property
    def display_name(self) -> str:
        name = f"{self.first_name} {self.last_name}".strip()
        return name or self.user_id

    def to_record(self) -> dict:
        return {
            "user_id": self.user_id,
            "password_digest": self.password_digest,
            "title": self.title,
            "first_name": self.first_name,
            "last_name": self.last_name,
            "sex": self.sex.value,
            "phone": self.phone,
            "email": self.email,
            "address": self.address,
            "photo": _opt_record(self.photo),
            "user_profession": self.user_profession,
            "account_status": self.account_status.value,
            "role_id": self.role_id,
        }

    def to_public_record(self) -> dict:
        """API view of an account: everything except the password digest."""
        rec = self.to_record()
        del rec["password_digest"]
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "UserAccount":
        return cls(
            user_id=rec["user_id"],
            password_digest=rec["password_digest"],
            title=rec["title"],
            first_name=rec["first_name"],
            last_name=rec["last_name"],
            sex=Sex(rec["sex"]),
            phone=rec["phone"],
            email=rec["email"],
            address=rec["address"],
            photo=_opt_blob(rec["photo"]),
            user_profession=rec["user_profession"],
            account_status=AccountStatus(rec["account_status"]),
            role_id=rec["role_id"],
        )


@dataclass
class Privilege:
    privilege_id: str
    privilege_description: str
    status: EnabledStatus = EnabledStatus.ENABLED

    def to_record(self) -> dict:
        return {
            "privilege_id": self.privilege_id,
            "privilege_description": self.privilege_description,
            "status": self.status.value,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Privilege":
        return cls(
            privilege_id=rec["privilege_id"],
            privilege_description=rec["privilege_description"],
            status=EnabledStatus(rec["status"]),
        )


@dataclass
class Role:
    """A named privilege bundle. The privilege set is persisted as separate
    role/privilege join rows; this type carries the materialized view."""

    role_id: str
    role_name: str
    status: EnabledStatus = EnabledStatus.ENABLED
    privilege_ids: frozenset[str] = field(default_factory=frozenset)

    def to_record(self) -> dict:
        return {
            "role_id": self.role_id,
            "role_name": self.role_name,
            "status": self.status.value,
            "privilege_ids": sorted(self.privilege_ids),
        }

    def to_row(self) -> dict:
        """The bare role table row, without the join-row view."""
        return {
            "role_id": self.role_id,
            "role_name": self.role_name,
            "status": self.status.value,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Role":
        return cls(
            role_id=rec["role_id"],
            role_name=rec["role_name"],
            status=EnabledStatus(rec["status"]),
            privilege_ids=frozenset(rec["privilege_ids"]),
        )

    @classmethod
    def from_row(cls, row: dict, privilege_ids: frozenset[str]) -> "Role":
        return cls(
            role_id=row["role_id"],
            role_name=row["role_name"],
            status=EnabledStatus(row["status"]),
            privilege_ids=privilege_ids,
        )


@dataclass
class RolePrivilege:
    """Join row tying one privilege to one role."""

    sn: int
    role_id: str
    privilege_id: str

    def to_record(self) -> dict:
        return {"sn": self.sn, "role_id": self.role_id, "privilege_id": self.privilege_id}

    @classmethod
    def from_record(cls, rec: dict) -> "RolePrivilege":
        return cls(sn=int(rec["sn"]), role_id=rec["role_id"], privilege_id=rec["privilege_id"])


@dataclass
class AuditEntry:
    log_id: int
    user_id: str
    event_description: str
    event_timestamp: datetime

    def to_record(self) -> dict:
        return {
            "log_id": self.log_id,
            "user_id": self.user_id,
            "event_description": self.event_description,
            "event_timestamp": format_instant(self.event_timestamp),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "AuditEntry":
        return cls(
            log_id=int(rec["log_id"]),
            user_id=rec["user_id"],
            event_description=rec["event_description"],
            event_timestamp=parse_instant(rec["event_timestamp"]),
        )


@dataclass
class SessionToken:
    """Opaque bearer credential minted at login. Held in memory only."""

    token: str
    user_id: str
    issued_at: datetime
    expires_at: datetime

    def to_record(self) -> dict:
        return {
            "token": self.token,
            "user_id": self.user_id,
            "issued_at": format_instant(self.issued_at),
            "expires_at": format_instant(self.expires_at),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SessionToken":
        return cls(
            token=rec["token"],
            user_id=rec["user_id"],
            issued_at=parse_instant(rec["issued_at"]),
            expires_at=parse_instant(rec["expires_at"]),
        )


# --- validators ------------------------------------------------------------------

def validate_card_number(raw: str) -> str:
    """Trim and accept any card number up to 64 characters."""
    trimmed = raw.strip()
    if not trimmed:
        raise EmptyCardNumber("card number is empty")
    if len(trimmed) > MAX_CARD_NUMBER_LEN:
        raise CardNumberTooLong(
            f"card number exceeds {MAX_CARD_NUMBER_LEN} characters"
        )
    return trimmed


def email_ok(email: str) -> bool:
    if email == "":
        return True
    if email.count("@") != 1:
        return False
    local, _, domain = email.partition("@")
    return bool(local) and bool(domain)


def phone_ok(phone: str) -> bool:
    if phone == "":
        return True
    return len(phone) <= MAX_PHONE_LEN and _PHONE_RE.fullmatch(phone) is not None


def validate_contact(email: str, phone: str) -> tuple[str, str]:
    """Check contact fields against the accepted grammar; returns them trimmed."""
    email = email.strip()
    phone = phone.strip()
    if not email_ok(email):
        raise BadEmail(f"malformed email: {email!r}")
    if not phone_ok(phone):
        raise BadPhone("phone may only contain digits, spaces, '+' and '-'")
    return email, phone


def validate_patient_record(candidate: PatientRecord) -> PatientRecord:
    """Trim all text fields and enforce every patient invariant.

    Raises FieldErrors naming each offending field; already-valid records
    come back unchanged (validation is idempotent).
    """
    trimmed = replace(
        candidate,
        first_name=candidate.first_name.strip(),
        last_name=candidate.last_name.strip(),
        address=candidate.address.strip(),
        phone=candidate.phone.strip(),
        email=candidate.email.strip(),
        card_number=candidate.card_number.strip(),
    )
    bad: list[str] = []
    if not trimmed.first_name:
        bad.append("first_name")
    if not trimmed.last_name:
        bad.append("last_name")
    if not trimmed.card_number or len(trimmed.card_number) > MAX_CARD_NUMBER_LEN:
        bad.append("card_number")
    if not email_ok(trimmed.email):
        bad.append("email")
    if not phone_ok(trimmed.phone):
        bad.append("phone")
    if bad:
        raise FieldErrors(bad)
    return trimmed
