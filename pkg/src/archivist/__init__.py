"""Self-hostable electronic medical image archive: storage, RBAC, audit
trail, search, HTTP API and operator CLI."""

__version__ = "0.1.0"
