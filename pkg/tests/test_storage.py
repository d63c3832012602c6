"""Store contract tests: locking, durability, content addressing, constraint
enforcement, and crash-fault atomicity via a write-interposing harness."""

import hashlib
import json
import os
import random
import subprocess
import sys
import textwrap

import pytest

from archivist.errors import (
    AlreadyLocked,
    BlobNotFound,
    BlobTooLarge,
    CorruptStore,
    ForeignKeyViolation,
    HasDependents,
    ImmutableKind,
    IntegrityFailure,
    IoFailure,
    UniqueViolation,
    UnknownField,
)
from archivist.storage import (
    Delete,
    ENTITY_FIELDS,
    EntityKind,
    Put,
    Store,
    open_store,
)


def patient_record(i, card=None, last_name=None):
    return {
        "patient_id": None,
        "first_name": f"First{i}",
        "last_name": last_name or f"Last{i}",
        "address": "",
        "phone": "",
        "email": "",
        "sex": "U",
        "card_number": card or f"C-{i:05d}",
        "photo": None,
    }


def audit_record(description, user_id="system"):
    return {
        "log_id": None,
        "user_id": user_id,
        "event_description": description,
        "event_timestamp": "2024-01-01T00:00:00.000000Z",
    }


class TestOpen:
    def test_fresh_dir_has_eight_empty_collections(self, tmp_path):
        with open_store(tmp_path / "data") as store:
            assert len(EntityKind) == 8
            for kind in EntityKind:
                assert store.query_entities(kind) == []
                assert (tmp_path / "data" / "entities" / kind.value).is_dir()

    def test_double_open_rejected(self, tmp_path):
        with open_store(tmp_path / "data"):
            with pytest.raises(AlreadyLocked):
                open_store(tmp_path / "data")

    def test_reopen_after_close(self, tmp_path):
        open_store(tmp_path / "data").close()
        open_store(tmp_path / "data").close()

    def test_missing_dir_without_create(self, tmp_path):
        with pytest.raises(IoFailure):
            open_store(tmp_path / "nope", create_if_missing=False)

    def test_nonempty_dir_without_manifest(self, tmp_path):
        target = tmp_path / "data"
        target.mkdir()
        (target / "junk.txt").write_text("junk")
        with pytest.raises(CorruptStore):
            open_store(target)

    def test_bad_manifest(self, tmp_path):
        with open_store(tmp_path / "data"):
            pass
        (tmp_path / "data" / "manifest").write_text("format_version=99\n")
        with pytest.raises(CorruptStore):
            open_store(tmp_path / "data")

    def test_stale_lock_from_dead_process_reclaimed(self, tmp_path):
        # A subprocess opens the store and dies without closing it.
        code = textwrap.dedent("""
            import sys
            from archivist.storage import open_store
            store = open_store(sys.argv[1])
            print("opened", flush=True)
            import os
            os._exit(0)  # no close, lock file left behind
        """)
        proc = subprocess.run(
            [sys.executable, "-c", code, str(tmp_path / "data")],
            capture_output=True, text=True, timeout=30,
        )
        assert proc.stdout.strip() == "opened"
        assert (tmp_path / "data" / "lock").exists()
        with open_store(tmp_path / "data") as store:
            assert store.is_open

    def test_durability_across_reopen(self, tmp_path):
        expected = {}
        with open_store(tmp_path / "data") as store:
            for i in range(3):
                rec = patient_record(i)
                rid = store.save_entity(EntityKind.PATIENT, rec)
                rec["patient_id"] = rid
                expected[rid] = rec
        with open_store(tmp_path / "data") as store:
            loaded = store.query_entities(EntityKind.PATIENT)
            assert {r["patient_id"]: r for r in loaded} == expected


class TestBlobs:
    def test_empty_blob_digest_matches_reference_hash(self, store):
        ref = store.put_blob(b"", "application/octet-stream")
        assert ref.size_bytes == 0
        assert ref.digest == hashlib.sha256(b"").hexdigest()

    def test_identical_bytes_same_ref(self, store):
        data = random.Random(1).randbytes(1 << 20)
        first = store.put_blob(data, "image/png")
        second = store.put_blob(data, "image/png")
        assert first == second

    def test_size_boundary(self, tmp_path):
        with open_store(tmp_path / "data", max_image_bytes=1024) as store:
            store.put_blob(b"x" * 1024, "image/png")
            with pytest.raises(BlobTooLarge):
                store.put_blob(b"x" * 1025, "image/png")

    def test_roundtrip(self, store):
        data = random.Random(2).randbytes(4096)
        ref = store.put_blob(data, "image/jpeg")
        assert store.get_blob(ref) == data

    def test_unknown_digest(self, store):
        with pytest.raises(BlobNotFound):
            store.get_blob("0" * 64)

    def test_tamper_detected(self, store):
        data = random.Random(3).randbytes(2048)
        ref = store.put_blob(data, "image/png")
        path = store._blob_path(ref.digest)
        raw = bytearray(path.read_bytes())
        raw[100] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(IntegrityFailure):
            store.get_blob(ref)

    def test_distinct_content_distinct_digest(self, store):
        r1 = store.put_blob(b"one", "image/png")
        r2 = store.put_blob(b"two", "image/png")
        assert r1.digest != r2.digest


class TestEntities:
    def test_unique_card_number(self, store):
        store.save_entity(EntityKind.PATIENT, patient_record(1, card="C-1"))
        with pytest.raises(UniqueViolation) as exc:
            store.save_entity(EntityKind.PATIENT, patient_record(2, card="C-1"))
        assert exc.value.field == "card_number"

    def test_category_uniqueness_case_insensitive(self, store):
        store.save_entity(EntityKind.SCAN_CATEGORY, {
            "category_id": None, "category_name": "X-ray", "category_description": "",
        })
        with pytest.raises(UniqueViolation):
            store.save_entity(EntityKind.SCAN_CATEGORY, {
                "category_id": None, "category_name": "x-RAY", "category_description": "",
            })

    def test_scan_foreign_keys(self, store):
        with pytest.raises(ForeignKeyViolation):
            store.save_entity(EntityKind.SCAN, {
                "scan_id": None, "patient_id": "pat-999999",
                "scan_category_id": "cat-999999", "radiographer": "",
                "scan_image": {"digest": "0" * 64, "size_bytes": 1, "media_type": "image/png"},
                "scan_timestamp": "2024-01-01T00:00:00.000000Z",
                "expiry": None, "scan_details": "", "comments": "",
            })

    def test_audit_update_rejected(self, store):
        log_id = store.save_entity(EntityKind.AUDIT_ENTRY, audit_record("event one"))
        tampered = audit_record("rewritten")
        tampered["log_id"] = log_id
        with pytest.raises(ImmutableKind):
            store.save_entity(EntityKind.AUDIT_ENTRY, tampered)
        with pytest.raises(ImmutableKind):
            store.delete_entity(EntityKind.AUDIT_ENTRY, log_id)

    def test_load_roundtrip_and_absent(self, store):
        rec = patient_record(5)
        rid = store.save_entity(EntityKind.PATIENT, rec)
        loaded = store.load_entity(EntityKind.PATIENT, rid)
        rec["patient_id"] = rid
        assert loaded == rec
        assert store.load_entity(EntityKind.PATIENT, "pat-424242") is None
        store.delete_entity(EntityKind.PATIENT, rid)
        assert store.load_entity(EntityKind.PATIENT, rid) is None

    def test_update_in_place_keeps_id(self, store):
        rid = store.save_entity(EntityKind.PATIENT, patient_record(7))
        updated = patient_record(7, card="C-NEW")
        updated["patient_id"] = rid
        assert store.save_entity(EntityKind.PATIENT, updated) == rid
        assert store.load_entity(EntityKind.PATIENT, rid)["card_number"] == "C-NEW"

    def test_query_unknown_field(self, store):
        with pytest.raises(UnknownField):
            store.query_entities(EntityKind.PATIENT, {"nope": "x"})

    def test_query_contains_matches_linear_oracle(self, store):
        rng = random.Random(42)
        mirror = []
        for i in range(1000):
            rec = patient_record(
                i, last_name=rng.choice(["Akpan", "Bello", "Anand", "Okoro", "Chan"])
            )
            rid = store.save_entity(EntityKind.PATIENT, rec)
            rec["patient_id"] = rid
            mirror.append(rec)
        got = store.query_entities(
            EntityKind.PATIENT, {"last_name": {"contains": "an"}}
        )
        expected = [r for r in mirror if "an" in r["last_name"]]
        assert got == expected  # same records, same insertion order

    def test_query_insertion_order_stable(self, store):
        ids = [store.save_entity(EntityKind.PATIENT, patient_record(i)) for i in range(20)]
        listed = [r["patient_id"] for r in store.query_entities(EntityKind.PATIENT)]
        assert listed == ids

    def test_delete_with_dependents_refused(self, store):
        pid = store.save_entity(EntityKind.PATIENT, patient_record(1))
        cid = store.save_entity(EntityKind.SCAN_CATEGORY, {
            "category_id": None, "category_name": "X-ray", "category_description": "",
        })
        for _ in range(2):
            store.save_entity(EntityKind.SCAN, {
                "scan_id": None, "patient_id": pid, "scan_category_id": cid,
                "radiographer": "", "scan_image": {
                    "digest": "0" * 64, "size_bytes": 1, "media_type": "image/png",
                },
                "scan_timestamp": "2024-01-01T00:00:00.000000Z",
                "expiry": None, "scan_details": "", "comments": "",
            })
        with pytest.raises(HasDependents) as exc:
            store.delete_entity(EntityKind.PATIENT, pid)
        assert exc.value.count == 2

    def test_delete_idempotent(self, store):
        rid = store.save_entity(EntityKind.PATIENT, patient_record(1))
        assert store.delete_entity(EntityKind.PATIENT, rid) is True
        assert store.delete_entity(EntityKind.PATIENT, rid) is False

    def test_audit_log_ids_strictly_increase(self, store):
        ids = [
            store.save_entity(EntityKind.AUDIT_ENTRY, audit_record(f"e{i}"))
            for i in range(5)
        ]
        assert ids == sorted(ids)
        assert len(set(ids)) == 5


class TestAtomicity:
    """Crash-fault harness: kill the apply loop mid-commit, then reopen."""

    def _multi_op(self, store):
        pid = store.save_entity(EntityKind.PATIENT, patient_record(1))
        cid = store.save_entity(EntityKind.SCAN_CATEGORY, {
            "category_id": None, "category_name": "X-ray", "category_description": "",
        })
        scan_id = store.reserve_id(EntityKind.SCAN)
        return [
            Put(EntityKind.SCAN, scan_id, {
                "scan_id": scan_id, "patient_id": pid, "scan_category_id": cid,
                "radiographer": "Dr. Akpan", "scan_image": {
                    "digest": hashlib.sha256(b"img").hexdigest(),
                    "size_bytes": 3, "media_type": "image/png",
                },
                "scan_timestamp": "2024-01-01T00:00:00.000000Z",
                "expiry": None, "scan_details": "", "comments": "",
            }),
            Put(EntityKind.AUDIT_ENTRY, None, audit_record(f"upload scan: {scan_id}")),
        ]

    def test_crash_during_apply_rolls_forward(self, tmp_path, monkeypatch):
        store = open_store(tmp_path / "data")
        ops = self._multi_op(store)
        real_write = Store._write_entity_file
        calls = {"n": 0}

        def failing_write(self, kind, rid, payload):
            calls["n"] += 1
            if calls["n"] > 1:  # scan record lands, crash before the audit entry
                raise OSError("simulated crash")
            real_write(self, kind, rid, payload)

        monkeypatch.setattr(Store, "_write_entity_file", failing_write)
        with pytest.raises(OSError):
            store.commit(ops)
        monkeypatch.setattr(Store, "_write_entity_file", real_write)
        assert not store.is_open  # handle poisoned, must reopen
        store.close()

        with open_store(tmp_path / "data") as reopened:
            scans = reopened.query_entities(EntityKind.SCAN)
            audits = reopened.query_entities(EntityKind.AUDIT_ENTRY)
            # journal was complete: the whole commit exists after recovery
            assert len(scans) == 1
            assert len(audits) == 1
            assert audits[0]["event_description"] == f"upload scan: {scans[0]['scan_id']}"
            assert not list((tmp_path / "data" / "journal").glob("*.json"))

    def test_torn_journal_rolls_back(self, tmp_path):
        store = open_store(tmp_path / "data")
        self._multi_op(store)  # leaves patient + category committed
        # Simulate a crash halfway through writing the journal itself.
        journal = tmp_path / "data" / "journal" / "torn.json"
        journal.write_text('{"ops": [{"op": "put", "kind": "patient", ')
        store.close()
        with open_store(tmp_path / "data") as reopened:
            assert len(reopened.query_entities(EntityKind.PATIENT)) == 1
            assert not journal.exists()

    def test_failed_validation_changes_nothing(self, store):
        before = store.query_entities(EntityKind.PATIENT)
        with pytest.raises(UniqueViolation):
            store.commit([
                Put(EntityKind.PATIENT, None, patient_record(1, card="C-1")),
                Put(EntityKind.PATIENT, None, patient_record(2, card="C-1")),
            ])
        assert store.query_entities(EntityKind.PATIENT) == before


def test_model_based_durability(tmp_path):
    """Random save/delete workload against a dict model; close-and-reopen
    must agree with the model exactly."""
    rng = random.Random(2024)
    model = {}
    store = open_store(tmp_path / "data")
    for step in range(200):
        if model and rng.random() < 0.3:
            rid = rng.choice(sorted(model))
            store.delete_entity(EntityKind.PATIENT, rid)
            del model[rid]
        elif model and rng.random() < 0.3:
            rid = rng.choice(sorted(model))
            rec = dict(model[rid])
            rec["address"] = f"addr {step}"
            store.save_entity(EntityKind.PATIENT, rec)
            model[rid] = rec
        else:
            rec = patient_record(step)
            rid = store.save_entity(EntityKind.PATIENT, rec)
            rec["patient_id"] = rid
            model[rid] = rec
        if step % 50 == 49:
            store.close()
            store = open_store(tmp_path / "data")
            live = {r["patient_id"]: r for r in store.query_entities(EntityKind.PATIENT)}
            assert live == model
    store.close()


def test_entity_files_match_schema_on_disk(tmp_path):
    with open_store(tmp_path / "data") as store:
        rid = store.save_entity(EntityKind.PATIENT, patient_record(1))
        path = tmp_path / "data" / "entities" / "patient" / f"{rid}.json"
        payload = json.loads(path.read_text("utf-8"))
        assert set(payload) == set(ENTITY_FIELDS[EntityKind.PATIENT]) | {"_seq"}


def test_export_entities_writes_one_file_per_kind(tmp_path, store):
    store.save_entity(EntityKind.PATIENT, patient_record(1))
    out = tmp_path / "export"
    written = store.export_entities(out)
    assert sorted(p.name for p in written) == sorted(
        f"{k.value}.jsonl" for k in EntityKind
    )
    lines = (out / "patient.jsonl").read_text().splitlines()
    assert len(lines) == 1
    assert "_seq" not in json.loads(lines[0])


def test_closed_store_rejects_operations(tmp_path):
    store = open_store(tmp_path / "data")
    store.close()
    with pytest.raises(IoFailure):
        store.query_entities(EntityKind.PATIENT)
