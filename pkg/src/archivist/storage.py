"""Durable persistence: eight entity collections stored as one JSON file per
record, a content-addressed blob area for image bytes, and journaled commits
so multi-entity writes are all-or-nothing.

On-disk layout:
    data_dir/manifest               key=value lines (format version, hash name)
    data_dir/lock                   single-writer lock (pid)
    data_dir/journal/<txid>.json    pending transaction (redo log)
    data_dir/entities/<kind>/<id>.json
    data_dir/blobs/<first-2-hex>/<digest>
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import uuid
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import (
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
from .model import BlobRef, canonical_json

FORMAT_VERSION = "1"
HASH_ALGORITHM = "sha256"
DEFAULT_MAX_IMAGE_BYTES = 25 * 1024 * 1024

_SAFE_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.\-]*$")


class EntityKind(Enum):
    PATIENT = "patient"
    SCAN = "scan"
    SCAN_CATEGORY = "scan_category"
    USER_ACCOUNT = "user_account"
    ROLE = "role"
    PRIVILEGE = "privilege"
    ROLE_PRIVILEGE = "role_privilege"
    AUDIT_ENTRY = "audit_entry"


ENTITY_FIELDS: dict[EntityKind, tuple[str, ...]] = {
    EntityKind.PATIENT: (
        "patient_id", "first_name", "last_name", "address", "phone",
        "email", "sex", "card_number", "photo",
    ),
    EntityKind.SCAN: (
        "scan_id", "patient_id", "scan_category_id", "radiographer",
        "scan_image", "scan_timestamp", "expiry", "scan_details", "comments",
    ),
    EntityKind.SCAN_CATEGORY: (
        "category_id", "category_name", "category_description",
    ),
    EntityKind.USER_ACCOUNT: (
        "user_id", "password_digest", "title", "first_name", "last_name",
        "sex", "phone", "email", "address", "photo", "user_profession",
        "account_status", "role_id",
    ),
    EntityKind.ROLE: ("role_id", "role_name", "status"),
    EntityKind.PRIVILEGE: ("privilege_id", "privilege_description", "status"),
    EntityKind.ROLE_PRIVILEGE: ("sn", "role_id", "privilege_id"),
    EntityKind.AUDIT_ENTRY: (
        "log_id", "user_id", "event_description", "event_timestamp",
    ),
}

KEY_FIELD: dict[EntityKind, str] = {
    EntityKind.PATIENT: "patient_id",
    EntityKind.SCAN: "scan_id",
    EntityKind.SCAN_CATEGORY: "category_id",
    EntityKind.USER_ACCOUNT: "user_id",
    EntityKind.ROLE: "role_id",
    EntityKind.PRIVILEGE: "privilege_id",
    EntityKind.ROLE_PRIVILEGE: "sn",
    EntityKind.AUDIT_ENTRY: "log_id",
}

_ID_PREFIX: dict[EntityKind, str] = {
    EntityKind.PATIENT: "pat",
    EntityKind.SCAN: "scn",
    EntityKind.SCAN_CATEGORY: "cat",
    EntityKind.ROLE: "rol",
    EntityKind.PRIVILEGE: "prv",
}

# Kinds keyed by an integer serial instead of a prefixed string id.
_SERIAL_KINDS = (EntityKind.ROLE_PRIVILEGE, EntityKind.AUDIT_ENTRY)

# (field, case_insensitive) pairs that must be unique within a kind.
_UNIQUE_FIELDS: dict[EntityKind, tuple[tuple[str, bool], ...]] = {
    EntityKind.PATIENT: (("card_number", False),),
    EntityKind.ROLE: (("role_name", False),),
    EntityKind.SCAN_CATEGORY: (("category_name", True),),
}

# child kind, child field -> parent kind; save checks existence, delete refusal.
_FOREIGN_KEYS: dict[EntityKind, tuple[tuple[str, EntityKind], ...]] = {
    EntityKind.SCAN: (
        ("patient_id", EntityKind.PATIENT),
        ("scan_category_id", EntityKind.SCAN_CATEGORY),
    ),
    EntityKind.USER_ACCOUNT: (("role_id", EntityKind.ROLE),),
    EntityKind.ROLE_PRIVILEGE: (
        ("role_id", EntityKind.ROLE),
        ("privilege_id", EntityKind.PRIVILEGE),
    ),
}


@dataclass(frozen=True)
class Put:
    kind: EntityKind
    id: object  # str, int, or None to have the store assign one
    record: dict


@dataclass(frozen=True)
class Delete:
    kind: EntityKind
    id: object


# Directories opened by this process; a second open of the same path must be
# rejected even though the pid in the lock file is our own.
_OPEN_DIRS: set[str] = set()
_OPEN_DIRS_GUARD = threading.Lock()


def _pid_alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True


class Store:
    """Handle on one data directory. Single writer per directory, enforced by
    a pid lock file; stale locks from dead processes are reclaimed."""

    def __init__(self, data_dir, *, create_if_missing: bool = True,
                 max_image_bytes: int = DEFAULT_MAX_IMAGE_BYTES):
        self.data_dir = Path(data_dir).resolve()
        self.max_image_bytes = max_image_bytes
        self.is_open = False
        self._poisoned = False
        self._lock = threading.RLock()
        self._cache: dict[EntityKind, dict[object, dict]] = {}
        self._seq: dict[EntityKind, dict[object, int]] = {}
        self._next_seq = 1
        self._next_num: dict[EntityKind, int] = {}
        self._next_log_id = 1
        self._next_sn = 1

        self._init_layout(create_if_missing)
        self._acquire_lock()
        try:
            self._recover_journal()
            self._load_all()
        except Exception:
            self._release_lock()
            raise
        self.is_open = True

    # --- lifecycle -----------------------------------------------------------

    def _init_layout(self, create_if_missing: bool) -> None:
        manifest = self.data_dir / "manifest"
        if manifest.exists():
            self._check_manifest(manifest)
            return
        if self.data_dir.exists() and any(self.data_dir.iterdir()):
            raise CorruptStore(f"{self.data_dir} has no manifest but is not empty")
        if not self.data_dir.exists() and not create_if_missing:
            raise IoFailure(f"{self.data_dir} does not exist")
        try:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            (self.data_dir / "journal").mkdir(exist_ok=True)
            (self.data_dir / "blobs").mkdir(exist_ok=True)
            entities = self.data_dir / "entities"
            entities.mkdir(exist_ok=True)
            for kind in EntityKind:
                (entities / kind.value).mkdir(exist_ok=True)
            body = f"format_version={FORMAT_VERSION}\nhash_algorithm={HASH_ALGORITHM}\n"
            self._write_file_atomic(manifest, body.encode("utf-8"), fsync=True)
        except OSError as exc:
            raise IoFailure(f"cannot initialize store at {self.data_dir}: {exc}") from exc

    def _check_manifest(self, manifest: Path) -> None:
        try:
            lines = manifest.read_text("utf-8").splitlines()
            entries = dict(line.split("=", 1) for line in lines if line.strip())
        except (OSError, ValueError) as exc:
            raise CorruptStore(f"unreadable manifest: {exc}") from exc
        if entries.get("format_version") != FORMAT_VERSION:
            raise CorruptStore(
                f"unsupported format_version {entries.get('format_version')!r}"
            )
        if entries.get("hash_algorithm") != HASH_ALGORITHM:
            raise CorruptStore(
                f"unsupported hash_algorithm {entries.get('hash_algorithm')!r}"
            )

    def _acquire_lock(self) -> None:
        key = str(self.data_dir)
        lock_path = self.data_dir / "lock"
        with _OPEN_DIRS_GUARD:
            if key in _OPEN_DIRS:
                raise AlreadyLocked(f"{self.data_dir} is already open in this process")
            for _ in range(2):
                try:
                    fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
                except FileExistsError:
                    try:
                        pid = int(lock_path.read_text("utf-8").strip().split("=")[-1])
                    except (OSError, ValueError):
                        pid = -1
                    if pid > 0 and pid != os.getpid() and _pid_alive(pid):
                        raise AlreadyLocked(
                            f"{self.data_dir} is locked by live process {pid}"
                        )
                    # Dead owner (or our own pid left by a previous life of it):
                    # the lock is stale, reclaim it.
                    lock_path.unlink(missing_ok=True)
                    continue
                with os.fdopen(fd, "w") as fh:
                    fh.write(f"pid={os.getpid()}\n")
                _OPEN_DIRS.add(key)
                return
            raise AlreadyLocked(f"could not acquire lock on {self.data_dir}")

    def _release_lock(self) -> None:
        with _OPEN_DIRS_GUARD:
            _OPEN_DIRS.discard(str(self.data_dir))
        (self.data_dir / "lock").unlink(missing_ok=True)

    def close(self) -> None:
        if not self.is_open and not self._poisoned:
            return
        self.is_open = False
        self._poisoned = False
        self._release_lock()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _require_open(self) -> None:
        if not self.is_open:
            raise IoFailure("store is closed")

    # --- journal and recovery ---------------------------------------------------

    def _recover_journal(self) -> None:
        journal_dir = self.data_dir / "journal"
        if not journal_dir.exists():
            raise CorruptStore("missing journal directory")
        for path in sorted(journal_dir.glob("*.json")):
            try:
                tx = json.loads(path.read_text("utf-8"))
                ops = tx["ops"]
            except (OSError, ValueError, KeyError):
                # Crash while writing the journal: the transaction never
                # committed, discard it.
                path.unlink(missing_ok=True)
                continue
            for op in ops:  # fully journaled: roll forward (idempotent)
                kind = EntityKind(op["kind"])
                if op["op"] == "put":
                    self._write_entity_file(kind, op["id"], op["payload"])
                else:
                    self._remove_entity_file(kind, op["id"])
            path.unlink(missing_ok=True)
        # Tmp files from interrupted writes are harmless; sweep them.
        for leftover in (self.data_dir / "entities").rglob("*.tmp"):
            leftover.unlink(missing_ok=True)

    def _load_all(self) -> None:
        for kind in EntityKind:
            kind_dir = self.data_dir / "entities" / kind.value
            if not kind_dir.is_dir():
                raise CorruptStore(f"missing collection directory {kind.value}")
            loaded: list[tuple[int, object, dict]] = []
            for path in kind_dir.glob("*.json"):
                try:
                    payload = json.loads(path.read_text("utf-8"))
                    seq = payload.pop("_seq")
                    rid = payload[KEY_FIELD[kind]]
                except (OSError, ValueError, KeyError) as exc:
                    raise CorruptStore(f"unreadable record {path}: {exc}") from exc
                loaded.append((seq, rid, payload))
            loaded.sort(key=lambda item: item[0])
            self._cache[kind] = {rid: rec for _, rid, rec in loaded}
            self._seq[kind] = {rid: seq for seq, rid, _ in loaded}
            for seq, _, _ in loaded:
                self._next_seq = max(self._next_seq, seq + 1)
            if kind in _ID_PREFIX:
                prefix = _ID_PREFIX[kind]
                top = 0
                for rid in self._cache[kind]:
                    text = str(rid)
                    if text.startswith(prefix + "-"):
                        try:
                            top = max(top, int(text.split("-", 1)[1]))
                        except ValueError:
                            pass
                self._next_num[kind] = top + 1
        if self._cache[EntityKind.AUDIT_ENTRY]:
            self._next_log_id = max(self._cache[EntityKind.AUDIT_ENTRY]) + 1
        if self._cache[EntityKind.ROLE_PRIVILEGE]:
            self._next_sn = max(self._cache[EntityKind.ROLE_PRIVILEGE]) + 1

    # --- low-level file ops (single points for fault injection in tests) --------

    def _write_file_atomic(self, path: Path, data: bytes, *, fsync: bool = False) -> None:
        tmp = path.with_name(path.name + f".{uuid.uuid4().hex[:8]}.tmp")
        try:
            with open(tmp, "wb") as fh:
                fh.write(data)
                if fsync:
                    fh.flush()
                    os.fsync(fh.fileno())
            os.replace(tmp, path)
        except OSError as exc:
            tmp.unlink(missing_ok=True)
            raise IoFailure(f"write failed for {path}: {exc}") from exc

    def _entity_path(self, kind: EntityKind, rid) -> Path:
        name = f"{rid:012d}" if kind is EntityKind.AUDIT_ENTRY else str(rid)
        return self.data_dir / "entities" / kind.value / f"{name}.json"

    def _write_entity_file(self, kind: EntityKind, rid, payload: dict) -> None:
        body = canonical_json(payload).encode("utf-8")
        self._write_file_atomic(self._entity_path(kind, rid), body)

    def _remove_entity_file(self, kind: EntityKind, rid) -> None:
        self._entity_path(kind, rid).unlink(missing_ok=True)

    def _fsync_dir(self, path: Path) -> None:
        try:
            fd = os.open(path, os.O_RDONLY)
        except OSError:
            return
        try:
            os.fsync(fd)
        finally:
            os.close(fd)

    # --- commit -------------------------------------------------------------------

    def _generate_id(self, kind: EntityKind):
        if kind is EntityKind.AUDIT_ENTRY:
            rid = self._next_log_id
            self._next_log_id += 1
            return rid
        if kind is EntityKind.ROLE_PRIVILEGE:
            sn = self._next_sn
            self._next_sn = sn + 1
            return sn
        prefix = _ID_PREFIX[kind]
        num = self._next_num.get(kind, 1)
        self._next_num[kind] = num + 1
        return f"{prefix}-{num:06d}"

    def commit(self, ops: list) -> dict:
        """Apply puts and deletes atomically. Returns {index: assigned id}
        for ops whose id the store generated."""
        self._require_open()
        with self._lock:
            resolved: list = []
            assigned: dict[int, object] = {}
            for i, op in enumerate(ops):
                if isinstance(op, Put) and op.id is None:
                    rid = self._generate_id(op.kind)
                    record = dict(op.record)
                    record[KEY_FIELD[op.kind]] = rid
                    resolved.append(Put(op.kind, rid, record))
                    assigned[i] = rid
                else:
                    resolved.append(op)
            self._check_ops(resolved)
            self._apply(resolved)
            return assigned

    def _check_ops(self, ops: list) -> None:
        touched: set[tuple[EntityKind, object]] = set()
        deletes: set[tuple[EntityKind, object]] = set()
        puts: dict[tuple[EntityKind, object], dict] = {}
        for op in ops:
            key = (op.kind, op.id)
            if key in touched:
                raise ValueError(f"duplicate op for {op.kind.value} id {op.id!r}")
            touched.add(key)
            if isinstance(op, Delete):
                deletes.add(key)
            else:
                puts[key] = op.record

        def exists_after(kind: EntityKind, rid) -> bool:
            if (kind, rid) in deletes:
                return False
            return (kind, rid) in puts or rid in self._cache[kind]

        for op in ops:
            if isinstance(op, Delete):
                if op.kind is EntityKind.AUDIT_ENTRY:
                    raise ImmutableKind("audit entries are append-only")
                if op.id not in self._cache[op.kind]:
                    raise ValueError(f"delete of absent {op.kind.value} {op.id!r}")
                self._check_dependents(op.kind, op.id, deletes)
                continue

            kind, rid, record = op.kind, op.id, op.record
            if set(record) != set(ENTITY_FIELDS[kind]):
                raise ValueError(
                    f"record fields {sorted(record)} do not match schema of {kind.value}"
                )
            if record[KEY_FIELD[kind]] != rid:
                raise ValueError("record key does not match op id")
            if kind is EntityKind.AUDIT_ENTRY:
                if rid in self._cache[kind]:
                    raise ImmutableKind("audit entries cannot be updated")
            elif not _SAFE_ID_RE.fullmatch(str(rid)):
                raise ValueError(f"unsafe id {rid!r}")
            for field_name, fold in _UNIQUE_FIELDS.get(kind, ()):
                value = record[field_name]
                needle = value.casefold() if fold else value
                for other_id, other in self._cache[kind].items():
                    if other_id == rid or (kind, other_id) in deletes:
                        continue
                    if (kind, other_id) in puts:
                        continue  # compared against its new version below
                    other_value = other[field_name]
                    if (other_value.casefold() if fold else other_value) == needle:
                        raise UniqueViolation(field_name)
                for (other_kind, other_id), other in puts.items():
                    if other_kind is not kind or other_id == rid:
                        continue
                    other_value = other[field_name]
                    if (other_value.casefold() if fold else other_value) == needle:
                        raise UniqueViolation(field_name)
            for field_name, parent in _FOREIGN_KEYS.get(kind, ()):
                ref = record[field_name]
                if ref is None:
                    continue
                if not exists_after(parent, ref):
                    raise ForeignKeyViolation(
                        f"{kind.value}.{field_name} references missing {parent.value} {ref!r}"
                    )

    def _check_dependents(self, kind: EntityKind, rid, batch_deletes) -> None:
        count = 0
        for child_kind, fks in _FOREIGN_KEYS.items():
            for field_name, parent in fks:
                if parent is not kind:
                    continue
                for child_id, child in self._cache[child_kind].items():
                    if (child_kind, child_id) in batch_deletes:
                        continue
                    if child[field_name] == rid:
                        count += 1
        if count:
            raise HasDependents(count)

    def _apply(self, ops: list) -> None:
        journal_ops = []
        payloads: dict[tuple[EntityKind, object], dict] = {}
        for op in ops:
            if isinstance(op, Put):
                seq = self._seq[op.kind].get(op.id)
                if seq is None:
                    seq = self._next_seq
                    self._next_seq += 1
                payload = dict(op.record)
                payload["_seq"] = seq
                payloads[(op.kind, op.id)] = payload
                journal_ops.append(
                    {"op": "put", "kind": op.kind.value, "id": op.id, "payload": payload}
                )
            else:
                journal_ops.append({"op": "delete", "kind": op.kind.value, "id": op.id})

        journal_dir = self.data_dir / "journal"
        journal_path = journal_dir / f"{uuid.uuid4().hex}.json"
        body = json.dumps({"ops": journal_ops}).encode("utf-8")
        # The completed journal file is the commit point; fsync it so a torn
        # transaction can never be mistaken for a committed one.
        self._write_file_atomic(journal_path, body, fsync=True)
        self._fsync_dir(journal_dir)
        try:
            for op in ops:
                if isinstance(op, Put):
                    self._write_entity_file(op.kind, op.id, payloads[(op.kind, op.id)])
                else:
                    self._remove_entity_file(op.kind, op.id)
        except BaseException:
            # The fsynced journal survives, so reopening rolls this commit
            # forward. Poison the handle: further writes could race the
            # pending journal replay.
            self.is_open = False
            self._poisoned = True
            raise
        journal_path.unlink(missing_ok=True)
        self._apply_to_cache(ops, payloads)

    def _apply_to_cache(self, ops: list, payloads: dict) -> None:
        for op in ops:
            if isinstance(op, Put):
                payload = payloads[(op.kind, op.id)]
                self._seq[op.kind][op.id] = payload["_seq"]
                record = dict(payload)
                del record["_seq"]
                self._cache[op.kind][op.id] = record
            else:
                self._cache[op.kind].pop(op.id, None)
                self._seq[op.kind].pop(op.id, None)

    # --- entity API ------------------------------------------------------------

    def save_entity(self, kind: EntityKind, record: dict):
        """Insert or update one record; returns its id (generated when the
        record carries none)."""
        self._require_open()
        rec = dict(record)
        rid = rec.get(KEY_FIELD[kind])
        if rid in (None, ""):
            assigned = self.commit([Put(kind, None, rec)])
            return assigned[0]
        self.commit([Put(kind, rid, rec)])
        return rid

    def load_entity(self, kind: EntityKind, rid):
        """Returns the record dict, or None when absent."""
        self._require_open()
        with self._lock:
            rec = self._cache[kind].get(rid)
            return None if rec is None else _copy_record(rec)

    def query_entities(self, kind: EntityKind, predicate: dict | None = None) -> list[dict]:
        """Records matching a field-level filter, in stable insertion order.

        Filter values are matched by equality, or by raw substring when given
        as {"contains": text}.
        """
        self._require_open()
        predicate = predicate or {}
        schema = set(ENTITY_FIELDS[kind])
        for field_name in predicate:
            if field_name not in schema:
                raise UnknownField(f"{kind.value} has no field {field_name!r}")
        with self._lock:
            items = sorted(
                self._cache[kind].items(), key=lambda kv: self._seq[kind][kv[0]]
            )
            out = []
            for _, rec in items:
                if all(_matches(rec[f], cond) for f, cond in predicate.items()):
                    out.append(_copy_record(rec))
            return out

    def count_entities(self, kind: EntityKind) -> int:
        self._require_open()
        with self._lock:
            return len(self._cache[kind])

    def delete_entity(self, kind: EntityKind, rid) -> bool:
        """Delete one record; False when it was already absent."""
        self._require_open()
        if kind is EntityKind.AUDIT_ENTRY:
            raise ImmutableKind("audit entries are append-only")
        with self._lock:
            if rid not in self._cache[kind]:
                return False
            self.commit([Delete(kind, rid)])
            return True

    def next_audit_log_id(self) -> int:
        with self._lock:
            return self._next_log_id

    def reserve_id(self, kind: EntityKind) -> str:
        """Hand out the next generated id ahead of a commit, e.g. so an audit
        entry in the same transaction can name it. Unused ids leave gaps."""
        self._require_open()
        if kind is EntityKind.AUDIT_ENTRY or kind not in _ID_PREFIX:
            raise ValueError(f"ids of {kind.value} cannot be reserved")
        with self._lock:
            return self._generate_id(kind)

    # --- blobs -------------------------------------------------------------------

    def _blob_path(self, digest: str) -> Path:
        return self.data_dir / "blobs" / digest[:2] / digest

    def put_blob(self, data: bytes, media_type: str) -> BlobRef:
        """Store bytes under their digest; identical content is stored once."""
        self._require_open()
        if len(data) > self.max_image_bytes:
            raise BlobTooLarge(
                f"blob of {len(data)} bytes exceeds limit {self.max_image_bytes}"
            )
        digest = hashlib.sha256(data).hexdigest()
        path = self._blob_path(digest)
        if not path.exists():
            try:
                path.parent.mkdir(exist_ok=True)
            except OSError as exc:
                raise IoFailure(str(exc)) from exc
            self._write_file_atomic(path, data, fsync=True)
        return BlobRef(digest=digest, size_bytes=len(data), media_type=media_type)

    def get_blob(self, ref: BlobRef | str) -> bytes:
        """Read bytes back, verifying they still hash to the digest."""
        self._require_open()
        digest = ref.digest if isinstance(ref, BlobRef) else ref
        path = self._blob_path(digest)
        try:
            data = path.read_bytes()
        except FileNotFoundError:
            raise BlobNotFound(f"no blob {digest}") from None
        except OSError as exc:
            raise IoFailure(str(exc)) from exc
        if hashlib.sha256(data).hexdigest() != digest:
            raise IntegrityFailure(f"stored bytes no longer match digest {digest}")
        return data

    def blob_exists(self, digest: str) -> bool:
        self._require_open()
        return self._blob_path(digest).exists()

    def delete_blob(self, digest: str) -> bool:
        self._require_open()
        path = self._blob_path(digest)
        if not path.exists():
            return False
        path.unlink()
        return True

    # --- export --------------------------------------------------------------------

    def export_entities(self, out_dir) -> list[Path]:
        """One JSON-lines file per entity kind, records in insertion order."""
        self._require_open()
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for kind in EntityKind:
            path = out / f"{kind.value}.jsonl"
            records = self.query_entities(kind)
            with open(path, "w", encoding="utf-8") as fh:
                for rec in records:
                    fh.write(canonical_json(rec) + "\n")
            written.append(path)
        return written


def _copy_record(rec: dict) -> dict:
    return {k: (dict(v) if isinstance(v, dict) else v) for k, v in rec.items()}


def _matches(value, cond) -> bool:
    if isinstance(cond, dict) and "contains" in cond:
        return value is not None and cond["contains"] in str(value)
    return value == cond


def open_store(data_dir, create_if_missing: bool = True,
               max_image_bytes: int = DEFAULT_MAX_IMAGE_BYTES) -> Store:
    return Store(
        data_dir,
        create_if_missing=create_if_missing,
        max_image_bytes=max_image_bytes,
    )
