"""First-run seeding: the built-in administrator, the four privileges, the
three modality categories, and deterministic demo data for rehearsing the
search workflows."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from .archive import ArchiveService, ScanUploadRequest
from .auth import (
    ADMINISTRATOR_ROLE_NAME,
    AuthService,
    PrivilegeName,
    SYSTEM_ACTOR,
    hash_password,
)
from .model import (
    AccountStatus,
    EnabledStatus,
    PatientRecord,
    Sex,
    UserAccount,
    format_instant,
    utc_now,
)
from .storage import EntityKind, Put, Store

SEED_CATEGORIES = [
    ("X-ray", "Plain radiography images"),
    ("CT scan", "Computed tomography images"),
    ("Mammography", "Breast imaging studies"),
]

_FIRST_NAMES = [
    "Adaeze", "Bola", "Chinedu", "Emeka", "Funke", "Ibrahim",
    "Kemi", "Ngozi", "Olu", "Sade", "Tunde", "Uche", "Yemi", "Zainab",
]
_LAST_NAMES = [
    "Akpan", "Adeyemi", "Balogun", "Bello", "Chukwu", "Eze",
    "Mohammed", "Nwosu", "Obi", "Okafor", "Okoro", "Olawale",
]
_RADIOGRAPHERS = [
    "Dr. Akpan", "Dr. Bello", "T. Okoro", "A. Eze", "Nurse Amadi",
]
_SCAN_DETAILS = [
    "chest pa view", "left wrist lateral", "skull ap", "abdominal series",
    "right knee oblique", "thoracic spine", "pelvis ap", "cervical spine",
]
_FINDINGS = [
    "no acute abnormality", "hairline fracture suspected",
    "soft tissue swelling", "follow-up advised", "degenerative changes",
    "clear lung fields",
]
_MEDIA_TYPES = ["image/png", "image/jpeg", "application/octet-stream"]

_DEMO_EPOCH = datetime(2021, 1, 1, tzinfo=timezone.utc)


def bootstrap_store(store: Store, admin_user_id: str, password: str,
                    now: datetime | None = None) -> None:
    """Create privileges, the Administrator role, the three scan categories
    and the first account, all in one transaction attributed to "system"."""
    now = now or utc_now()
    stamp = format_instant(now)
    ops: list[Put] = []
    events: list[str] = []

    privilege_ids = []
    for name in PrivilegeName:
        privilege_id = store.reserve_id(EntityKind.PRIVILEGE)
        privilege_ids.append(privilege_id)
        ops.append(Put(EntityKind.PRIVILEGE, privilege_id, {
            "privilege_id": privilege_id,
            "privilege_description": name.value,
            "status": EnabledStatus.ENABLED.value,
        }))
        events.append(f"create privilege: {privilege_id}")

    role_id = store.reserve_id(EntityKind.ROLE)
    ops.append(Put(EntityKind.ROLE, role_id, {
        "role_id": role_id,
        "role_name": ADMINISTRATOR_ROLE_NAME,
        "status": EnabledStatus.ENABLED.value,
    }))
    events.append(f"create role: {role_id}")
    ops.extend(
        Put(EntityKind.ROLE_PRIVILEGE, None,
            {"sn": None, "role_id": role_id, "privilege_id": pid})
        for pid in privilege_ids
    )

    for name, description in SEED_CATEGORIES:
        category_id = store.reserve_id(EntityKind.SCAN_CATEGORY)
        ops.append(Put(EntityKind.SCAN_CATEGORY, category_id, {
            "category_id": category_id,
            "category_name": name,
            "category_description": description,
        }))
        events.append(f"create category: {category_id}")

    admin = UserAccount(
        user_id=admin_user_id,
        password_digest=hash_password(password),
        title="Administrator",
        account_status=AccountStatus.ACTIVE,
        role_id=role_id,
    )
    ops.append(Put(EntityKind.USER_ACCOUNT, admin.user_id, admin.to_record()))
    events.append(f"user created: {admin_user_id}")

    ops.extend(
        Put(EntityKind.AUDIT_ENTRY, None, {
            "log_id": None,
            "user_id": SYSTEM_ACTOR,
            "event_description": event,
            "event_timestamp": stamp,
        })
        for event in events
    )
    store.commit(ops)


def system_actor(auth: AuthService) -> UserAccount:
    """Synthetic account for CLI-driven workflows; holds the Administrator
    role but is never persisted, so audit entries read "system"."""
    role = auth.find_role_by_name(ADMINISTRATOR_ROLE_NAME)
    if role is None:
        raise ValueError("store has no Administrator role; run init-admin first")
    return UserAccount(
        user_id=SYSTEM_ACTOR,
        password_digest="!",
        account_status=AccountStatus.ACTIVE,
        role_id=role.role_id,
    )


def seed_demo(store: Store, n_patients: int, n_scans: int, seed: int) -> None:
    """Deterministic synthetic patients and scans: the same seed produces
    byte-identical patient/scan/category records run after run."""
    if n_scans > 0 and n_patients < 1:
        raise ValueError("cannot seed scans without patients")
    rng = random.Random(seed)
    auth = AuthService(store)
    archive = ArchiveService(store, auth)
    actor = system_actor(auth)

    categories = sorted(
        archive.list_scan_categories(actor), key=lambda c: c.category_id
    )
    if not categories:
        raise ValueError("store has no scan categories; run init-admin first")

    cards = []
    for i in range(1, n_patients + 1):
        first = _FIRST_NAMES[rng.randrange(len(_FIRST_NAMES))]
        last = _LAST_NAMES[rng.randrange(len(_LAST_NAMES))]
        card = f"CN-{i:06d}"
        archive.register_patient(actor, PatientRecord(
            patient_id="",
            first_name=first,
            last_name=last,
            address=f"{rng.randrange(1, 200)} {last} Street, Ota",
            phone="+234 80" + "".join(rng.choice("0123456789") for _ in range(8)),
            email=f"{first}.{last}.{i}@example.org".lower(),
            sex=rng.choice((Sex.FEMALE, Sex.MALE, Sex.UNSPECIFIED)),
            card_number=card,
        ))
        cards.append(card)

    for j in range(n_scans):
        scan_date = _DEMO_EPOCH + timedelta(minutes=rng.randrange(525_600))
        expiry = None
        if rng.random() < 0.25:
            expiry = scan_date + timedelta(days=rng.randrange(30, 3650))
        archive.upload_scan(actor, ScanUploadRequest(
            card_number=cards[rng.randrange(len(cards))],
            scan_category_id=categories[j % len(categories)].category_id,
            radiographer=_RADIOGRAPHERS[j % len(_RADIOGRAPHERS)],
            image_bytes=rng.randbytes(rng.randint(256, 2048)),
            image_media_type=_MEDIA_TYPES[j % len(_MEDIA_TYPES)],
            scan_date=scan_date,
            scan_details=_SCAN_DETAILS[rng.randrange(len(_SCAN_DETAILS))],
            findings=_FINDINGS[rng.randrange(len(_FINDINGS))],
            expiry=expiry,
        ))
