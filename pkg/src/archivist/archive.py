"""Clinical workflows: patient registration, scan categories, scan upload and
retrieval, and retention purge. Each operation is one storage transaction and
appends its own audit entry inside that transaction."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .auth import AuthService, PrivilegeName
from .errors import (
    DuplicateCardNumber,
    DuplicateCategory,
    FieldErrors,
    Forbidden,
    UniqueViolation,
    UnknownCategory,
    UnknownPatient,
    UnknownPatientCard,
    UnknownScan,
)
from .model import (
    BlobRef,
    PatientRecord,
    ScanCategory,
    ScanRecord,
    format_instant,
    utc_now,
    validate_card_number,
    validate_patient_record,
)
from .storage import Delete, EntityKind, Put, Store

ACCEPTED_MEDIA_TYPES = ("image/png", "image/jpeg", "application/octet-stream")


@dataclass
class ScanUploadRequest:
    """One-to-one image upload form: card number, category, radiographer,
    the image itself, scan date, details and the radiographer's findings."""

    card_number: str
    scan_category_id: str
    radiographer: str
    image_bytes: bytes
    image_media_type: str
    scan_date: datetime
    scan_details: str = ""
    findings: str = ""
    expiry: datetime | None = None


@dataclass
class ScanView:
    """A scan joined with its category name and patient identity; carries
    image metadata but never the bytes."""

    scan_id: str
    patient_id: str
    patient_name: str
    card_number: str
    scan_category_id: str
    category_name: str
    radiographer: str
    scan_timestamp: datetime
    expiry: datetime | None
    scan_details: str
    comments: str
    image: BlobRef

    def to_record(self) -> dict:
        return {
            "scan_id": self.scan_id,
            "patient_id": self.patient_id,
            "patient_name": self.patient_name,
            "card_number": self.card_number,
            "scan_category_id": self.scan_category_id,
            "category_name": self.category_name,
            "radiographer": self.radiographer,
            "scan_timestamp": format_instant(self.scan_timestamp),
            "expiry": None if self.expiry is None else format_instant(self.expiry),
            "scan_details": self.scan_details,
            "comments": self.comments,
            "image": self.image.to_record(),
        }


class ArchiveService:
    def __init__(self, store: Store, auth: AuthService):
        self.store = store
        self.auth = auth

    # --- patients ---------------------------------------------------------------

    def _require_patient_admin(self, actor) -> None:
        # Registration and edits are administrator work; the bare privilege
        # only grants read access.
        self.auth.require_privilege(actor, PrivilegeName.PATIENTS)
        self.auth.require_administrator(actor)

    def register_patient(self, actor, candidate: PatientRecord) -> str:
        self._require_patient_admin(actor)
        patient = validate_patient_record(candidate)
        patient_id = patient.patient_id or self.store.reserve_id(EntityKind.PATIENT)
        record = patient.to_record()
        record["patient_id"] = patient_id
        try:
            self.store.commit([
                Put(EntityKind.PATIENT, patient_id, record),
                self.auth._audit_put(
                    actor.user_id, f"register patient: {patient.card_number}"
                ),
            ])
        except UniqueViolation as exc:
            raise DuplicateCardNumber(
                f"card number {patient.card_number!r} is already registered"
            ) from exc
        return patient_id

    def update_patient(self, actor, patient_id: str, changes: dict) -> PatientRecord:
        self._require_patient_admin(actor)
        current = self.store.load_entity(EntityKind.PATIENT, patient_id)
        if current is None:
            raise UnknownPatient(f"no patient {patient_id!r}")
        allowed = {"first_name", "last_name", "address", "phone", "email",
                   "sex", "card_number"}
        bad = [key for key in changes if key not in allowed]
        if bad:
            raise FieldErrors(bad)
        merged = dict(current)
        merged.update(changes)
        try:
            patient = validate_patient_record(PatientRecord.from_record(merged))
        except ValueError:
            raise FieldErrors(["sex"]) from None
        try:
            self.store.commit([
                Put(EntityKind.PATIENT, patient_id, patient.to_record()),
                self.auth._audit_put(actor.user_id, f"update patient: {patient_id}"),
            ])
        except UniqueViolation as exc:
            raise DuplicateCardNumber(
                f"card number {patient.card_number!r} is already registered"
            ) from exc
        return patient

    def delete_patient(self, actor, patient_id: str) -> None:
        self._require_patient_admin(actor)
        if self.store.load_entity(EntityKind.PATIENT, patient_id) is None:
            raise UnknownPatient(f"no patient {patient_id!r}")
        # HasDependents propagates when scans still reference the patient.
        self.store.commit([
            Delete(EntityKind.PATIENT, patient_id),
            self.auth._audit_put(actor.user_id, f"delete patient: {patient_id}"),
        ])

    def get_patient(self, actor, patient_id: str) -> PatientRecord:
        self.auth.require_privilege(actor, PrivilegeName.PATIENTS)
        rec = self.store.load_entity(EntityKind.PATIENT, patient_id)
        if rec is None:
            raise UnknownPatient(f"no patient {patient_id!r}")
        return PatientRecord.from_record(rec)

    def find_patient_by_card(self, card_number: str) -> PatientRecord | None:
        rows = self.store.query_entities(
            EntityKind.PATIENT, {"card_number": card_number}
        )
        return PatientRecord.from_record(rows[0]) if rows else None

    # --- categories ---------------------------------------------------------------

    def create_scan_category(self, actor, name: str, description: str = "") -> ScanCategory:
        self.auth.require_privilege(actor, PrivilegeName.PATIENT_IMAGES)
        name = name.strip()
        if not name:
            raise FieldErrors(["category_name"])
        category_id = self.store.reserve_id(EntityKind.SCAN_CATEGORY)
        record = {
            "category_id": category_id,
            "category_name": name,
            "category_description": description.strip(),
        }
        try:
            self.store.commit([
                Put(EntityKind.SCAN_CATEGORY, category_id, record),
                self.auth._audit_put(actor.user_id, f"create category: {category_id}"),
            ])
        except UniqueViolation as exc:
            raise DuplicateCategory(f"category {name!r} already exists") from exc
        return ScanCategory.from_record(record)

    def update_scan_category(self, actor, category_id: str, name: str | None = None,
                             description: str | None = None) -> ScanCategory:
        self.auth.require_privilege(actor, PrivilegeName.PATIENT_IMAGES)
        current = self.store.load_entity(EntityKind.SCAN_CATEGORY, category_id)
        if current is None:
            raise UnknownCategory(f"no category {category_id!r}")
        record = dict(current)
        if name is not None:
            name = name.strip()
            if not name:
                raise FieldErrors(["category_name"])
            record["category_name"] = name
        if description is not None:
            record["category_description"] = description.strip()
        try:
            self.store.commit([
                Put(EntityKind.SCAN_CATEGORY, category_id, record),
                self.auth._audit_put(actor.user_id, f"update category: {category_id}"),
            ])
        except UniqueViolation as exc:
            raise DuplicateCategory(
                f"category {record['category_name']!r} already exists"
            ) from exc
        return ScanCategory.from_record(record)

    def list_scan_categories(self, actor) -> list[ScanCategory]:
        del actor  # any authenticated caller may list
        categories = [
            ScanCategory.from_record(rec)
            for rec in self.store.query_entities(EntityKind.SCAN_CATEGORY)
        ]
        categories.sort(key=lambda c: c.category_name.casefold())
        return categories

    # --- scans --------------------------------------------------------------------

    def upload_scan(self, actor, req: ScanUploadRequest) -> str:
        """Store blob, scan record and audit entry as one transaction."""
        self.auth.require_privilege(actor, PrivilegeName.PATIENT_IMAGES)
        card = validate_card_number(req.card_number)
        patient = self.find_patient_by_card(card)
        if patient is None:
            raise UnknownPatientCard(f"card number {card!r} is not registered")
        if self.store.load_entity(EntityKind.SCAN_CATEGORY, req.scan_category_id) is None:
            raise UnknownCategory(f"no category {req.scan_category_id!r}")
        bad = []
        if not req.image_bytes:
            bad.append("image_bytes")
        if req.image_media_type not in ACCEPTED_MEDIA_TYPES:
            bad.append("image_media_type")
        if req.expiry is not None and req.expiry <= req.scan_date:
            bad.append("expiry")
        if bad:
            raise FieldErrors(bad)
        ref = self.store.put_blob(req.image_bytes, req.image_media_type)
        scan_id = self.store.reserve_id(EntityKind.SCAN)
        scan = ScanRecord(
            scan_id=scan_id,
            patient_id=patient.patient_id,
            scan_category_id=req.scan_category_id,
            radiographer=req.radiographer.strip(),
            scan_image=ref,
            scan_timestamp=req.scan_date,
            expiry=req.expiry,
            scan_details=req.scan_details.strip(),
            comments=req.findings.strip(),
        )
        self.store.commit([
            Put(EntityKind.SCAN, scan_id, scan.to_record()),
            self.auth._audit_put(actor.user_id, f"upload scan: {scan_id}"),
        ])
        return scan_id

    def _load_scan(self, scan_id: str) -> ScanRecord:
        rec = self.store.load_entity(EntityKind.SCAN, scan_id)
        if rec is None:
            raise UnknownScan(f"no scan {scan_id!r}")
        return ScanRecord.from_record(rec)

    def scan_view(self, scan: ScanRecord) -> ScanView:
        category = self.store.load_entity(
            EntityKind.SCAN_CATEGORY, scan.scan_category_id
        )
        patient = self.store.load_entity(EntityKind.PATIENT, scan.patient_id)
        name = ""
        card = ""
        if patient is not None:
            name = f"{patient['first_name']} {patient['last_name']}".strip()
            card = patient["card_number"]
        return ScanView(
            scan_id=scan.scan_id,
            patient_id=scan.patient_id,
            patient_name=name,
            card_number=card,
            scan_category_id=scan.scan_category_id,
            category_name="" if category is None else category["category_name"],
            radiographer=scan.radiographer,
            scan_timestamp=scan.scan_timestamp,
            expiry=scan.expiry,
            scan_details=scan.scan_details,
            comments=scan.comments,
            image=scan.scan_image,
        )

    def get_scan(self, actor, scan_id: str) -> ScanView:
        self.auth.require_privilege(actor, PrivilegeName.PATIENT_IMAGES)
        return self.scan_view(self._load_scan(scan_id))

    def get_scan_image(self, actor, scan_id: str) -> tuple[bytes, str]:
        """Image access is the sensitive event: every successful read is
        audited, and so is every denied attempt."""
        if not self.auth.check_privilege(actor, PrivilegeName.PATIENT_IMAGES):
            self.auth.append_audit(actor.user_id, f"denied image access: {scan_id}")
            raise Forbidden(PrivilegeName.PATIENT_IMAGES.wire)
        scan = self._load_scan(scan_id)
        data = self.store.get_blob(scan.scan_image)
        self.auth.append_audit(actor.user_id, f"view image: {scan_id}")
        return data, scan.scan_image.media_type

    def list_scans_for_patient(self, actor, patient_id: str) -> list[ScanView]:
        self.auth.require_privilege(actor, PrivilegeName.PATIENT_IMAGES)
        if self.store.load_entity(EntityKind.PATIENT, patient_id) is None:
            raise UnknownPatient(f"no patient {patient_id!r}")
        scans = [
            ScanRecord.from_record(rec)
            for rec in self.store.query_entities(EntityKind.SCAN, {"patient_id": patient_id})
        ]
        scans.sort(key=lambda s: (s.scan_timestamp, s.scan_id), reverse=True)
        return [self.scan_view(s) for s in scans]

    # --- retention ------------------------------------------------------------------

    def purge_expired_scans(self, actor, now: datetime | None = None) -> list[str]:
        """Delete every scan whose retention horizon has passed, one audit
        entry per scan; blobs go too once nothing references them."""
        self.auth.require_privilege(actor, PrivilegeName.MANAGE_USERS)
        self.auth.require_administrator(actor)
        now = now or utc_now()
        expired = []
        for rec in self.store.query_entities(EntityKind.SCAN):
            if rec["expiry"] is None:
                continue
            scan = ScanRecord.from_record(rec)
            if scan.expiry < now:
                expired.append(scan)
        if not expired:
            return []
        ops: list = [Delete(EntityKind.SCAN, s.scan_id) for s in expired]
        ops.extend(
            self.auth._audit_put(actor.user_id, f"purge scan: {s.scan_id}")
            for s in expired
        )
        self.store.commit(ops)
        self._drop_unreferenced_blobs({s.scan_image.digest for s in expired})
        return [s.scan_id for s in expired]

    def _drop_unreferenced_blobs(self, candidates: set[str]) -> None:
        still_referenced = set()
        for rec in self.store.query_entities(EntityKind.SCAN):
            still_referenced.add(rec["scan_image"]["digest"])
        for kind in (EntityKind.PATIENT, EntityKind.USER_ACCOUNT):
            for rec in self.store.query_entities(kind):
                if rec["photo"] is not None:
                    still_referenced.add(rec["photo"]["digest"])
        for digest in candidates - still_referenced:
            self.store.delete_blob(digest)
