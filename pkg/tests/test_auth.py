"""Account lifecycle, uniform login failures, sessions, RBAC and the audit
trail."""

import time
from concurrent.futures import ThreadPoolExecutor
from datetime import timedelta

import pytest

from archivist.auth import (
    ADMINISTRATOR_ROLE_NAME,
    AuthService,
    Credentials,
    PrivilegeName,
    hash_password,
    verify_password,
)
from archivist.errors import (
    CannotModifyAdministrator,
    DuplicateUserId,
    EmptyDescription,
    FieldErrors,
    Forbidden,
    InvalidSession,
    LOGIN_ERROR_MESSAGE,
    LoginError,
    UnknownRole,
    UnknownUser,
    WeakPassword,
)
from archivist.model import AccountStatus, EnabledStatus
from archivist.storage import EntityKind

from conftest import ADMIN_PASSWORD, T0, login, make_role_user


class TestPasswordDigest:
    def test_accepts_exactly_the_original(self):
        digest = hash_password("open sesame", iterations=2000)
        assert verify_password("open sesame", digest)
        assert not verify_password("open sesamE", digest)
        assert not verify_password("open sesame ", digest)

    def test_digest_is_not_plaintext(self):
        digest = hash_password("hunter2hunter2")
        assert "hunter2hunter2" not in digest
        assert digest.startswith("pbkdf2_sha256$")

    def test_salted(self):
        assert hash_password("same") != hash_password("same")

    def test_garbage_digest_rejected(self):
        assert not verify_password("x", "not-a-digest")

    def test_wrong_password_timing_constant(self):
        # Smoke test only: equal-length wrong guesses should verify in about
        # the same time because the KDF dominates.
        digest = hash_password("a" * 16, iterations=5000)

        def measure(guess):
            samples = []
            for _ in range(5):
                start = time.perf_counter()
                verify_password(guess, digest)
                samples.append(time.perf_counter() - start)
            return sorted(samples)[len(samples) // 2]

        t1 = measure("b" * 16)
        t2 = measure("c" * 16)
        assert max(t1, t2) / min(t1, t2) < 3


class TestCreateUser:
    def test_admin_creates_doctor(self, env):
        doctors = env.auth.create_or_update_role(
            env.admin, "Doctors", "clinical staff",
            {PrivilegeName.PATIENTS, PrivilegeName.PATIENT_IMAGES, PrivilegeName.NEWS},
        )
        before = env.store.count_entities(EntityKind.AUDIT_ENTRY)
        env.auth.create_user(
            env.admin,
            {"user_id": "dr_akpan", "first_name": "Imo", "last_name": "Akpan",
             "role_id": doctors.role_id},
            "rounds-of-eight",
        )
        assert env.store.count_entities(EntityKind.AUDIT_ENTRY) == before + 1
        entries = env.auth.query_audit(env.admin)
        assert entries[-1].event_description == "user created: dr_akpan"
        assert entries[-1].user_id == "admin"

    def test_actor_without_manage_users_forbidden(self, env):
        doctor = make_role_user(
            env, "doc", {PrivilegeName.PATIENTS, PrivilegeName.PATIENT_IMAGES}
        )
        with pytest.raises(Forbidden):
            env.auth.create_user(doctor, {"user_id": "other"}, "long-enough-pw")

    def test_short_password_rejected(self, env):
        with pytest.raises(WeakPassword):
            env.auth.create_user(env.admin, {"user_id": "u1"}, "short")

    def test_duplicate_user_id(self, env):
        env.auth.create_user(env.admin, {"user_id": "u1"}, "password-123")
        with pytest.raises(DuplicateUserId):
            env.auth.create_user(env.admin, {"user_id": "u1"}, "password-456")

    def test_unsafe_user_id_rejected(self, env):
        with pytest.raises(FieldErrors):
            env.auth.create_user(env.admin, {"user_id": "a/b"}, "password-123")

    def test_plaintext_never_persisted(self, env, tmp_path):
        env.auth.create_user(env.admin, {"user_id": "u1"}, "very secret password")
        hits = []
        for path in env.store.data_dir.rglob("*"):
            if path.is_file() and b"very secret password" in path.read_bytes():
                hits.append(path)
        assert hits == []


class TestUpdateUser:
    def test_disable_blocks_next_login(self, env):
        env.auth.create_user(env.admin, {"user_id": "u1"}, "password-123")
        env.auth.update_user(env.admin, "u1", {"account_status": "Disabled"})
        with pytest.raises(LoginError):
            login(env, "u1", "password-123")

    def test_non_admin_forbidden(self, env):
        doctor = make_role_user(env, "doc", {PrivilegeName.PATIENTS})
        with pytest.raises(Forbidden):
            env.auth.update_user(doctor, "admin", {"title": "X"})

    def test_unknown_user(self, env):
        with pytest.raises(UnknownUser):
            env.auth.update_user(env.admin, "ghost", {"title": "X"})

    def test_password_change_redigests(self, env):
        env.auth.create_user(env.admin, {"user_id": "u1"}, "password-123")
        old = env.auth.get_user("u1").password_digest
        env.auth.update_user(env.admin, "u1", {"password": "password-456"})
        assert env.auth.get_user("u1").password_digest != old
        login(env, "u1", "password-456")
        with pytest.raises(LoginError):
            login(env, "u1", "password-123")


class TestLogin:
    def test_success_resolves_to_user(self, env):
        session = login(env, "admin", ADMIN_PASSWORD)
        assert env.auth.resolve_session(session.token).user_id == "admin"

    def test_uniform_failure_payloads(self, env):
        env.auth.create_user(env.admin, {"user_id": "sleepy"}, "password-123")
        env.auth.update_user(env.admin, "sleepy", {"account_status": "Disabled"})
        failures = []
        for user_id, password in [
            ("admin", "wrong-password"),     # wrong password
            ("never-created", "whatever-1"), # unknown user
            ("sleepy", "password-123"),      # disabled account, right password
        ]:
            with pytest.raises(LoginError) as exc:
                login(env, user_id, password)
            failures.append(str(exc.value))
        assert failures == [LOGIN_ERROR_MESSAGE] * 3
        assert len({f.encode() for f in failures}) == 1  # byte-identical

    def test_login_audited(self, env):
        before = env.store.count_entities(EntityKind.AUDIT_ENTRY)
        login(env, "admin", ADMIN_PASSWORD)
        entries = env.auth.query_audit(env.admin)
        assert env.store.count_entities(EntityKind.AUDIT_ENTRY) == before + 1
        assert entries[-1].event_description == "login: admin"


class TestSessions:
    def test_expiry_boundary(self, env):
        session = env.auth.login(
            Credentials(user_id="admin", password=ADMIN_PASSWORD), now=T0
        )
        ttl = env.auth.session_ttl
        assert env.auth.resolve_session(
            session.token, now=T0 + ttl - timedelta(seconds=1)
        ).user_id == "admin"
        with pytest.raises(InvalidSession):
            env.auth.resolve_session(session.token, now=T0 + ttl)

    def test_expires_at_is_issue_plus_ttl(self, env):
        session = env.auth.login(
            Credentials(user_id="admin", password=ADMIN_PASSWORD), now=T0
        )
        assert session.expires_at == T0 + env.auth.session_ttl

    def test_disabled_after_login_invalidates(self, env):
        env.auth.create_user(env.admin, {"user_id": "u1"}, "password-123")
        session = login(env, "u1", "password-123")
        env.auth.update_user(env.admin, "u1", {"account_status": "Disabled"})
        with pytest.raises(InvalidSession):
            env.auth.resolve_session(session.token)

    def test_logout_invalidates_and_is_idempotent(self, env):
        session = login(env, "admin", ADMIN_PASSWORD)
        count_before = env.store.count_entities(EntityKind.AUDIT_ENTRY)
        env.auth.logout(session.token)
        with pytest.raises(InvalidSession):
            env.auth.resolve_session(session.token)
        env.auth.logout(session.token)  # second time: no-op
        env.auth.logout("garbage-token")
        assert env.store.count_entities(EntityKind.AUDIT_ENTRY) == count_before + 1

    def test_tokens_never_repeat(self, env):
        tokens = {login(env, "admin", ADMIN_PASSWORD).token for _ in range(50)}
        assert len(tokens) == 50


class TestRoles:
    def test_doctors_role_privilege_set(self, env):
        doctors = env.auth.create_or_update_role(
            env.admin, "Doctors", "clinical staff",
            {PrivilegeName.PATIENTS, PrivilegeName.PATIENT_IMAGES, PrivilegeName.NEWS},
        )
        env.auth.create_user(
            env.admin, {"user_id": "dr_a", "role_id": doctors.role_id}, "password-123"
        )
        doctor = env.auth.get_user("dr_a")
        assert env.auth.check_privilege(doctor, PrivilegeName.PATIENTS)
        assert env.auth.check_privilege(doctor, PrivilegeName.PATIENT_IMAGES)
        assert env.auth.check_privilege(doctor, PrivilegeName.NEWS)
        assert not env.auth.check_privilege(doctor, PrivilegeName.MANAGE_USERS)

    def test_administrator_allows_all(self, env):
        for privilege in PrivilegeName:
            assert env.auth.check_privilege(env.admin, privilege)

    def test_no_role_denies_all(self, env):
        env.auth.create_user(env.admin, {"user_id": "norole"}, "password-123")
        user = env.auth.get_user("norole")
        for privilege in PrivilegeName:
            assert not env.auth.check_privilege(user, privilege)

    def test_disabled_privilege_record_denies(self, env):
        rec = env.auth.find_privilege(PrivilegeName.PATIENTS)
        row = rec.to_record()
        row["status"] = EnabledStatus.DISABLED.value
        env.store.save_entity(EntityKind.PRIVILEGE, row)
        assert not env.auth.check_privilege(env.admin, PrivilegeName.PATIENTS)
        assert env.auth.check_privilege(env.admin, PrivilegeName.NEWS)

    def test_disabled_role_denies(self, env):
        doctor = make_role_user(env, "doc", {PrivilegeName.PATIENTS})
        role_row = env.store.load_entity(EntityKind.ROLE, doctor.role_id)
        role_row["status"] = EnabledStatus.DISABLED.value
        env.store.save_entity(EntityKind.ROLE, role_row)
        assert not env.auth.check_privilege(doctor, PrivilegeName.PATIENTS)

    def test_cannot_modify_administrator(self, env):
        admin_role = env.auth.find_role_by_name(ADMINISTRATOR_ROLE_NAME)
        with pytest.raises(CannotModifyAdministrator):
            env.auth.create_or_update_role(
                env.admin, "Administrator", "", set(), role_id=admin_role.role_id
            )
        with pytest.raises(CannotModifyAdministrator):
            env.auth.create_or_update_role(env.admin, "Administrator", "", set())

    def test_empty_privilege_set_role(self, env):
        bare = env.auth.create_or_update_role(env.admin, "Visitors", "", set())
        env.auth.create_user(
            env.admin, {"user_id": "v1", "role_id": bare.role_id}, "password-123"
        )
        user = env.auth.get_user("v1")
        login(env, "v1", "password-123")  # login still works
        for privilege in PrivilegeName:
            assert not env.auth.check_privilege(user, privilege)

    def test_update_role_replaces_privilege_set(self, env):
        role = env.auth.create_or_update_role(
            env.admin, "Techs", "", {PrivilegeName.PATIENTS}
        )
        updated = env.auth.create_or_update_role(
            env.admin, "Techs", "", {PrivilegeName.PATIENT_IMAGES},
            role_id=role.role_id,
        )
        images = env.auth.find_privilege(PrivilegeName.PATIENT_IMAGES)
        assert updated.privilege_ids == frozenset({images.privilege_id})
        joins = env.store.query_entities(
            EntityKind.ROLE_PRIVILEGE, {"role_id": role.role_id}
        )
        assert len(joins) == 1

    def test_role_description_not_persisted(self, env):
        role = env.auth.create_or_update_role(
            env.admin, "Doctors", "long description", {PrivilegeName.NEWS}
        )
        row = env.store.load_entity(EntityKind.ROLE, role.role_id)
        assert set(row) == {"role_id", "role_name", "status"}


class TestAssignRole:
    def test_takes_effect_immediately(self, env):
        manager = env.auth.create_or_update_role(
            env.admin, "Managers", "", {PrivilegeName.MANAGE_USERS}
        )
        doctors = env.auth.create_or_update_role(
            env.admin, "Doctors", "",
            {PrivilegeName.PATIENTS, PrivilegeName.PATIENT_IMAGES, PrivilegeName.NEWS},
        )
        env.auth.create_user(
            env.admin, {"user_id": "flip", "role_id": manager.role_id}, "password-123"
        )
        session = login(env, "flip", "password-123")
        actor = env.auth.resolve_session(session.token)
        assert env.auth.check_privilege(actor, PrivilegeName.MANAGE_USERS)
        env.auth.assign_role(env.admin, "flip", doctors.role_id)
        actor = env.auth.resolve_session(session.token)  # same live session
        assert not env.auth.check_privilege(actor, PrivilegeName.MANAGE_USERS)

    def test_non_admin_forbidden(self, env):
        doctor = make_role_user(env, "doc", {PrivilegeName.PATIENTS})
        with pytest.raises(Forbidden):
            env.auth.assign_role(doctor, "admin", doctor.role_id)

    def test_unknown_role(self, env):
        with pytest.raises(UnknownRole):
            env.auth.assign_role(env.admin, "admin", "rol-999999")

    def test_unknown_user(self, env):
        role = env.auth.find_role_by_name(ADMINISTRATOR_ROLE_NAME)
        with pytest.raises(UnknownUser):
            env.auth.assign_role(env.admin, "ghost", role.role_id)


class TestAudit:
    def test_appends_strictly_increasing(self, env):
        entries = [env.auth.append_audit("admin", f"event {i}") for i in range(3)]
        ids = [e.log_id for e in entries]
        assert ids == sorted(ids) and len(set(ids)) == 3

    def test_empty_description(self, env):
        with pytest.raises(EmptyDescription):
            env.auth.append_audit("admin", "")

    def test_concurrent_appends_all_distinct(self, env):
        def worker(k):
            return [env.auth.append_audit("admin", f"w{k} e{i}").log_id
                    for i in range(125)]

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(worker, range(8)))
        all_ids = [i for chunk in results for i in chunk]
        assert len(all_ids) == 1000
        assert len(set(all_ids)) == 1000
        stored = env.store.query_entities(EntityKind.AUDIT_ENTRY)
        assert len([r for r in stored if r["event_description"].startswith("w")]) == 1000

    def test_query_filter_matches_linear_oracle(self, env):
        for i in range(30):
            env.auth.append_audit("dr_akpan" if i % 3 == 0 else "admin", f"event {i}")
        full = env.auth.query_audit(env.admin)
        oracle = [e for e in full if e.user_id == "dr_akpan"]
        assert env.auth.query_audit(env.admin, user_id="dr_akpan") == oracle

    def test_time_range_filter(self, env):
        early = env.auth.append_audit("admin", "early", now=T0)
        late = env.auth.append_audit("admin", "late", now=T0 + timedelta(hours=2))
        got = env.auth.query_audit(
            env.admin, time_from=T0 + timedelta(hours=1)
        )
        assert late.log_id in {e.log_id for e in got}
        assert early.log_id not in {e.log_id for e in got}

    def test_non_admin_forbidden(self, env):
        doctor = make_role_user(
            env, "doc", {PrivilegeName.PATIENTS, PrivilegeName.PATIENT_IMAGES}
        )
        with pytest.raises(Forbidden):
            env.auth.query_audit(doctor)

    def test_mutating_workload_appends_exactly_n(self, env):
        import random
        rng = random.Random(7)
        before = env.store.count_entities(EntityKind.AUDIT_ENTRY)
        n = 0
        created = []
        for i in range(40):
            choice = rng.random()
            if choice < 0.4 or not created:
                env.auth.create_user(env.admin, {"user_id": f"u{i}"}, "password-123")
                created.append(f"u{i}")
            elif choice < 0.7:
                env.auth.update_user(env.admin, rng.choice(created), {"title": "T"})
            else:
                env.auth.create_or_update_role(env.admin, f"role-{i}", "", set())
            n += 1
        after = env.store.count_entities(EntityKind.AUDIT_ENTRY)
        assert after - before == n
        stamps = [e.event_timestamp for e in env.auth.query_audit(env.admin)]
        assert stamps == sorted(stamps)
