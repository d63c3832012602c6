"""Patient and scan search with deterministic, oracle-checkable semantics:
case-insensitive substring containment over normalized text, no stemming,
no fuzziness. A single letter is a legal term."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .archive import ArchiveService
from .auth import AuthService, PrivilegeName
from .errors import BadPaging, EmptyTerm
from .model import PatientRecord, ScanRecord
from .storage import EntityKind, Store

MAX_PAGE_LIMIT = 200


class ScanSearchCriterion(Enum):
    """The eight scan search criteria; values are the API wire names."""

    SCAN_DETAILS = "scan_details"
    RADIOGRAPHER = "radiographer"
    PATIENT_NAME = "patient_name"
    PATIENT_CARD_NUMBER = "card_number"
    PATIENT_LAST_NAME = "last_name"
    PATIENT_FIRST_NAME = "first_name"
    PATIENT_EMAIL = "email"
    PATIENT_PHONE = "phone"


@dataclass
class SearchResultPage:
    items: list
    total_matches: int
    offset: int
    limit: int


def normalize_term(raw: str) -> str:
    """Trim, collapse internal whitespace, case-fold. Whitespace-only input
    is rejected."""
    collapsed = " ".join(raw.split())
    if not collapsed:
        raise EmptyTerm("search term is empty")
    return collapsed.casefold()


def normalize_text(text: str) -> str:
    """Same normalization applied to the searched fields (may be empty)."""
    return " ".join(text.split()).casefold()


def _check_paging(offset: int, limit: int) -> None:
    if offset < 0 or limit < 1 or limit > MAX_PAGE_LIMIT:
        raise BadPaging(
            f"offset must be >= 0 and limit within [1, {MAX_PAGE_LIMIT}]"
        )


def _page(matches: list, offset: int, limit: int) -> SearchResultPage:
    return SearchResultPage(
        items=matches[offset:offset + limit],
        total_matches=len(matches),
        offset=offset,
        limit=limit,
    )


class SearchService:
    def __init__(self, store: Store, auth: AuthService, archive: ArchiveService):
        self.store = store
        self.auth = auth
        self.archive = archive

    def search_patients(self, actor, term: str, offset: int = 0,
                        limit: int = 50) -> SearchResultPage:
        """Patients whose name, card number, email or phone contains the
        term; ordered by last name, first name, then id."""
        self.auth.require_privilege(actor, PrivilegeName.PATIENTS)
        _check_paging(offset, limit)
        needle = normalize_term(term)
        matches = []
        for rec in self.store.query_entities(EntityKind.PATIENT):
            haystacks = (
                rec["first_name"], rec["last_name"], rec["card_number"],
                rec["email"], rec["phone"],
            )
            if any(needle in normalize_text(h) for h in haystacks):
                matches.append(PatientRecord.from_record(rec))
        matches.sort(
            key=lambda p: (p.last_name.casefold(), p.first_name.casefold(), p.patient_id)
        )
        return _page(matches, offset, limit)

    def search_scans(self, actor, criterion: ScanSearchCriterion, term: str,
                     offset: int = 0, limit: int = 50) -> SearchResultPage:
        """Scans whose criterion field (own or joined from the patient)
        contains the term; newest first."""
        self.auth.require_privilege(actor, PrivilegeName.PATIENT_IMAGES)
        _check_paging(offset, limit)
        needle = normalize_term(term)
        patients = {
            rec["patient_id"]: rec
            for rec in self.store.query_entities(EntityKind.PATIENT)
        }
        matches = []
        for rec in self.store.query_entities(EntityKind.SCAN):
            patient = patients.get(rec["patient_id"])
            if _scan_matches(criterion, needle, rec, patient):
                matches.append(ScanRecord.from_record(rec))
        matches.sort(key=lambda s: (s.scan_timestamp, s.scan_id), reverse=True)
        page = _page(matches, offset, limit)
        page.items = [self.archive.scan_view(s) for s in page.items]
        return page


def _scan_matches(criterion: ScanSearchCriterion, needle: str,
                  scan: dict, patient: dict | None) -> bool:
    if criterion is ScanSearchCriterion.SCAN_DETAILS:
        # "scan" as a search category keys the scan's own text: what was
        # imaged plus the recorded findings.
        return (
            needle in normalize_text(scan["scan_details"])
            or needle in normalize_text(scan["comments"])
        )
    if criterion is ScanSearchCriterion.RADIOGRAPHER:
        return needle in normalize_text(scan["radiographer"])
    if patient is None:
        return False
    if criterion is ScanSearchCriterion.PATIENT_NAME:
        return (
            needle in normalize_text(patient["first_name"])
            or needle in normalize_text(patient["last_name"])
        )
    field = {
        ScanSearchCriterion.PATIENT_CARD_NUMBER: "card_number",
        ScanSearchCriterion.PATIENT_LAST_NAME: "last_name",
        ScanSearchCriterion.PATIENT_FIRST_NAME: "first_name",
        ScanSearchCriterion.PATIENT_EMAIL: "email",
        ScanSearchCriterion.PATIENT_PHONE: "phone",
    }[criterion]
    return needle in normalize_text(patient[field])
