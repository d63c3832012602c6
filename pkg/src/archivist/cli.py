"""Operator CLI: first-run bootstrap, serving the API, demo seeding and
audit export.

Exit codes are stable for scripting: 2 already initialized, 3 weak password,
4 store not initialized, 5 port in use, 6 output write failure.
"""

from __future__ import annotations

import os
import socket
import sys

import click
import uvicorn

from .api import build_app
from .auth import MIN_PASSWORD_LEN
from .bootstrap import bootstrap_store, seed_demo
from .config import load_config
from .errors import AlreadyLocked, ArchivistError, ConfigParseError, CorruptStore, IoFailure
from .model import USER_ID_RE, canonical_json, parse_instant
from .storage import EntityKind, Store, open_store

EXIT_ALREADY_INITIALIZED = 2
EXIT_WEAK_PASSWORD = 3
EXIT_NOT_INITIALIZED = 4
EXIT_PORT_IN_USE = 5
EXIT_IO_FAILURE = 6

PASSWORD_ENV_VAR = "ARCHIVIST_ADMIN_PASSWORD"


@click.group()
def main():
    """Self-hostable medical image archive."""


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _open_initialized(data_dir: str, max_image_bytes: int | None = None) -> Store:
    kwargs = {} if max_image_bytes is None else {"max_image_bytes": max_image_bytes}
    try:
        store = open_store(data_dir, create_if_missing=False, **kwargs)
    except (IoFailure, CorruptStore) as exc:
        _fail(f"store not initialized: {exc}", EXIT_NOT_INITIALIZED)
    except AlreadyLocked as exc:
        _fail(str(exc), 1)
    if store.count_entities(EntityKind.USER_ACCOUNT) == 0:
        store.close()
        _fail("store has no accounts; run init-admin first", EXIT_NOT_INITIALIZED)
    return store


@main.command("init-admin")
@click.option("--data-dir", required=True, help="Store directory (created if missing).")
@click.option("--user-id", default="admin", show_default=True,
              help="Login name for the first administrator.")
def init_admin(data_dir: str, user_id: str):
    """Create the Administrator role, seed privileges and categories, and the
    first account. Password comes from $ARCHIVIST_ADMIN_PASSWORD or a prompt."""
    if not USER_ID_RE.fullmatch(user_id):
        raise click.UsageError(f"invalid --user-id {user_id!r}")
    password = os.environ.get(PASSWORD_ENV_VAR)
    if password is None:
        password = click.prompt(
            "Administrator password", hide_input=True, confirmation_prompt=True
        )
    if len(password) < MIN_PASSWORD_LEN:
        _fail(
            f"password must be at least {MIN_PASSWORD_LEN} characters",
            EXIT_WEAK_PASSWORD,
        )
    try:
        store = open_store(data_dir)
    except (ArchivistError, OSError) as exc:
        _fail(str(exc), 1)
    try:
        if store.count_entities(EntityKind.USER_ACCOUNT) > 0:
            _fail("store already initialized", EXIT_ALREADY_INITIALIZED)
        bootstrap_store(store, user_id, password)
    finally:
        store.close()
    click.echo(f"initialized {data_dir}: administrator {user_id!r} ready")


@main.command()
@click.option("--config", "config_path", default=None,
              help="Path to a key=value config file.")
def serve(config_path: str | None):
    """Run the HTTP service until terminated; shuts down gracefully and
    releases the store lock."""
    try:
        cfg = load_config(config_path)
    except ConfigParseError as exc:
        _fail(exc.message, 1)
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind(("0.0.0.0", cfg.listen_port))
    except OSError:
        _fail(f"port {cfg.listen_port} is already in use", EXIT_PORT_IN_USE)
    finally:
        probe.close()
    store = _open_initialized(cfg.data_dir, cfg.max_image_bytes)
    app = build_app(store, cfg)
    click.echo(f"{cfg.bootstrap_banner}: listening on :{cfg.listen_port}")
    try:
        uvicorn.run(app, host="0.0.0.0", port=cfg.listen_port, log_level="warning")
    finally:
        store.close()


@main.command("seed-demo")
@click.option("--data-dir", required=True)
@click.option("--patients", "n_patients", default=0, type=int, show_default=True)
@click.option("--scans", "n_scans", default=0, type=int, show_default=True)
@click.option("--seed", default=42, type=int, show_default=True)
def seed_demo_command(data_dir: str, n_patients: int, n_scans: int, seed: int):
    """Generate deterministic synthetic patients and scans for demos and
    acceptance runs."""
    if n_patients < 0 or n_scans < 0:
        raise click.UsageError("--patients and --scans must be non-negative")
    if n_scans > 0 and n_patients == 0:
        raise click.UsageError("cannot seed scans without patients")
    store = _open_initialized(data_dir)
    try:
        seed_demo(store, n_patients, n_scans, seed)
    finally:
        store.close()
    click.echo(f"seeded {n_patients} patients and {n_scans} scans (seed={seed})")


@main.command("export-audit")
@click.option("--data-dir", required=True)
@click.option("--out", "out_path", required=True)
@click.option("--from", "time_from", default=None, help="Inclusive RFC 3339 lower bound.")
@click.option("--to", "time_to", default=None, help="Inclusive RFC 3339 upper bound.")
def export_audit(data_dir: str, out_path: str, time_from: str | None, time_to: str | None):
    """Write audit entries in log id order, one canonical JSON record per
    line. An empty range still produces the (empty) output file."""
    try:
        lower = parse_instant(time_from) if time_from else None
        upper = parse_instant(time_to) if time_to else None
    except ValueError as exc:
        raise click.UsageError(f"bad timestamp: {exc}")
    store = _open_initialized(data_dir)
    try:
        entries = store.query_entities(EntityKind.AUDIT_ENTRY)
    finally:
        store.close()
    entries.sort(key=lambda rec: rec["log_id"])
    lines = []
    for rec in entries:
        stamp = parse_instant(rec["event_timestamp"])
        if lower is not None and stamp < lower:
            continue
        if upper is not None and stamp > upper:
            continue
        lines.append(canonical_json(rec))
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")
    except OSError as exc:
        _fail(f"cannot write {out_path}: {exc}", EXIT_IO_FAILURE)
    click.echo(f"exported {len(lines)} audit entries to {out_path}")


if __name__ == "__main__":
    main()
