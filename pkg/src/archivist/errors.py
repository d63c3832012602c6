"""Exception hierarchy shared by every archivist module.

Each error carries a stable machine ``code`` so the HTTP layer can map it
to an error envelope without string matching.
"""

from __future__ import annotations

# The exact wording the login page shows for every authentication failure:
# wrong password, unknown user and disabled account are indistinguishable.
LOGIN_ERROR_MESSAGE = "login error, check your password and username"


class ArchivistError(Exception):
    """Base class for all domain errors."""

    code = "internal"

    def __init__(self, message: str | None = None):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


# --- validation -----------------------------------------------------------

class EmptyCardNumber(ArchivistError):
    code = "empty_card_number"


class CardNumberTooLong(ArchivistError):
    code = "card_number_too_long"


class FieldErrors(ArchivistError):
    """Validation failure naming every offending field, not just the first."""

    code = "field_errors"

    def __init__(self, fields: list[str]):
        self.fields = list(fields)
        super().__init__("invalid fields: " + ", ".join(self.fields))


class BadEmail(ArchivistError):
    code = "bad_email"


class BadPhone(ArchivistError):
    code = "bad_phone"


# --- storage ---------------------------------------------------------------

class AlreadyLocked(ArchivistError):
    code = "already_locked"


class CorruptStore(ArchivistError):
    code = "corrupt_store"


class IoFailure(ArchivistError):
    code = "io_failure"


class BlobTooLarge(ArchivistError):
    code = "blob_too_large"


class BlobNotFound(ArchivistError):
    code = "blob_not_found"


class IntegrityFailure(ArchivistError):
    code = "integrity_failure"


class UniqueViolation(ArchivistError):
    code = "unique_violation"

    def __init__(self, field: str):
        self.field = field
        super().__init__(f"unique constraint violated on {field}")


class ImmutableKind(ArchivistError):
    code = "immutable_kind"


class ForeignKeyViolation(ArchivistError):
    code = "foreign_key_violation"


class HasDependents(ArchivistError):
    code = "has_dependents"

    def __init__(self, count: int):
        self.count = count
        super().__init__(f"record has {count} dependent record(s)")


class UnknownField(ArchivistError):
    code = "unknown_field"


# --- auth / sessions --------------------------------------------------------

class LoginError(ArchivistError):
    """Uniform login failure; the message never discloses which check failed."""

    code = "login_error"

    def __init__(self):
        super().__init__(LOGIN_ERROR_MESSAGE)


class InvalidSession(ArchivistError):
    code = "invalid_session"


class Forbidden(ArchivistError):
    code = "forbidden"

    def __init__(self, privilege: str | None = None):
        self.privilege = privilege
        super().__init__(
            f"missing privilege: {privilege}" if privilege else "forbidden"
        )


class WeakPassword(ArchivistError):
    code = "weak_password"


class DuplicateUserId(ArchivistError):
    code = "duplicate_user_id"


class UnknownUser(ArchivistError):
    code = "unknown_user"


class UnknownRole(ArchivistError):
    code = "unknown_role"


class CannotModifyAdministrator(ArchivistError):
    code = "cannot_modify_administrator"


class EmptyDescription(ArchivistError):
    code = "empty_description"


# --- clinical workflows ------------------------------------------------------

class DuplicateCardNumber(ArchivistError):
    code = "duplicate_card_number"


class UnknownPatient(ArchivistError):
    code = "unknown_patient"


class UnknownPatientCard(ArchivistError):
    code = "unknown_patient_card"


class DuplicateCategory(ArchivistError):
    code = "duplicate_category"


class UnknownCategory(ArchivistError):
    code = "unknown_category"


class UnknownScan(ArchivistError):
    code = "unknown_scan"


# --- search ------------------------------------------------------------------

class EmptyTerm(ArchivistError):
    code = "empty_term"


class BadPaging(ArchivistError):
    code = "bad_paging"


# --- config ------------------------------------------------------------------

class ConfigParseError(ArchivistError):
    code = "config_parse_error"

    def __init__(self, field: str, message: str | None = None):
        self.field = field
        super().__init__(message or f"invalid configuration value for {field}")
