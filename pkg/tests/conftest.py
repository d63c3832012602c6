import os
import sys
from datetime import datetime, timezone
from types import SimpleNamespace

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from archivist.archive import ArchiveService, ScanUploadRequest
from archivist.auth import AuthService, Credentials, PrivilegeName
from archivist.bootstrap import bootstrap_store
from archivist.model import PatientRecord, Sex
from archivist.search import SearchService
from archivist.storage import open_store

ADMIN_PASSWORD = "correct horse battery"
T0 = datetime(2024, 6, 1, 12, 0, 0, tzinfo=timezone.utc)


@pytest.fixture
def store(tmp_path):
    s = open_store(tmp_path / "data")
    yield s
    s.close()


@pytest.fixture
def env(tmp_path):
    """Bootstrapped store plus wired services and the admin account."""
    s = open_store(tmp_path / "data", max_image_bytes=1 << 20)
    bootstrap_store(s, "admin", ADMIN_PASSWORD)
    auth = AuthService(s)
    archive = ArchiveService(s, auth)
    search = SearchService(s, auth, archive)
    ns = SimpleNamespace(
        store=s,
        auth=auth,
        archive=archive,
        search=search,
        admin=auth.get_user("admin"),
    )
    yield ns
    s.close()


def make_role_user(env, user_id, privileges, role_name=None):
    """Create a role holding the given privileges and a user in it."""
    role = env.auth.create_or_update_role(
        env.admin, role_name or f"{user_id}-role", "", set(privileges)
    )
    env.auth.create_user(
        env.admin,
        {"user_id": user_id, "first_name": user_id.title(), "last_name": "User",
         "role_id": role.role_id},
        "password-123",
    )
    return env.auth.get_user(user_id)


def make_patient(env, card="C-1001", first="Ada", last="Akpan", **extra):
    candidate = PatientRecord(
        patient_id="",
        first_name=first,
        last_name=last,
        address=extra.get("address", "1 Hospital Rd"),
        phone=extra.get("phone", "+234 800 000 0000"),
        email=extra.get("email", f"{first}.{last}@example.org".lower()),
        sex=extra.get("sex", Sex.FEMALE),
        card_number=card,
    )
    return env.archive.register_patient(env.admin, candidate)


def upload_request(card, category_id, *, data=b"fake image bytes", when=T0, **kw):
    return ScanUploadRequest(
        card_number=card,
        scan_category_id=category_id,
        radiographer=kw.get("radiographer", "Dr. Akpan"),
        image_bytes=data,
        image_media_type=kw.get("media_type", "image/png"),
        scan_date=when,
        scan_details=kw.get("details", "chest pa view"),
        findings=kw.get("findings", "no acute abnormality"),
        expiry=kw.get("expiry"),
    )


def category_id_by_name(env, name):
    for cat in env.archive.list_scan_categories(env.admin):
        if cat.category_name == name:
            return cat.category_id
    raise AssertionError(f"no category {name!r}")


def login(env, user_id, password):
    return env.auth.login(Credentials(user_id=user_id, password=password))


__all__ = [
    "ADMIN_PASSWORD", "T0", "make_role_user", "make_patient",
    "upload_request", "category_id_by_name", "login", "PrivilegeName",
]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and report.when == "call":
        number, description = marker.args
        status = "PASS" if report.passed else "FAIL"
        reporter = item.config.pluginmanager.get_plugin("terminalreporter")
        if reporter is not None:
            reporter.write_line(f"ACCEPTANCE {number} {status}: {description}")
