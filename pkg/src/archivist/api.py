"""HTTP surface: every workflow behind session auth and the privilege
matrix, JSON bodies in the canonical serialized form, uniform error
envelopes with stable machine codes."""

from __future__ import annotations

import uuid
from contextlib import asynccontextmanager
from datetime import timedelta

from fastapi import Body, FastAPI, File, Form, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import errors as err
from .archive import ArchiveService, ScanUploadRequest
from .auth import AuthService, Credentials, PrivilegeName
from .config import ServiceConfig
from .errors import ArchivistError
from .model import PatientRecord, Sex, format_instant, parse_instant
from .search import ScanSearchCriterion, SearchService
from .storage import Store

# Method, path template, required privilege (None = public, "any" = any
# authenticated user), administrator-only flag. The acceptance sweep walks
# this table, so it must list every route the app serves.
ROUTE_TABLE = [
    ("POST", "/api/login", None, False),
    ("POST", "/api/logout", "session", False),
    ("GET", "/api/health", None, False),
    ("GET", "/api/patients", PrivilegeName.PATIENTS, False),
    ("POST", "/api/patients", PrivilegeName.PATIENTS, True),
    ("PUT", "/api/patients/{patient_id}", PrivilegeName.PATIENTS, True),
    ("DELETE", "/api/patients/{patient_id}", PrivilegeName.PATIENTS, True),
    ("GET", "/api/patients/{patient_id}/scans", PrivilegeName.PATIENT_IMAGES, False),
    ("GET", "/api/categories", "any", False),
    ("POST", "/api/categories", PrivilegeName.PATIENT_IMAGES, False),
    ("PUT", "/api/categories/{category_id}", PrivilegeName.PATIENT_IMAGES, False),
    ("POST", "/api/scans", PrivilegeName.PATIENT_IMAGES, False),
    ("GET", "/api/scans/search", PrivilegeName.PATIENT_IMAGES, False),
    ("GET", "/api/scans/{scan_id}", PrivilegeName.PATIENT_IMAGES, False),
    ("GET", "/api/scans/{scan_id}/image", PrivilegeName.PATIENT_IMAGES, False),
    ("GET", "/api/users", PrivilegeName.MANAGE_USERS, False),
    ("POST", "/api/users", PrivilegeName.MANAGE_USERS, False),
    ("PUT", "/api/users/{user_id}", PrivilegeName.MANAGE_USERS, False),
    ("GET", "/api/roles", PrivilegeName.MANAGE_USERS, False),
    ("POST", "/api/roles", PrivilegeName.MANAGE_USERS, False),
    ("PUT", "/api/roles/{role_id}", PrivilegeName.MANAGE_USERS, False),
    ("POST", "/api/roles/{role_id}/assign/{user_id}", PrivilegeName.MANAGE_USERS, False),
    ("GET", "/api/audit", PrivilegeName.MANAGE_USERS, False),
    ("POST", "/api/admin/purge-expired", PrivilegeName.MANAGE_USERS, True),
]

# Total mapping from module error to HTTP status; anything unlisted is a 500.
_STATUS_BY_TYPE: dict[type, int] = {
    err.LoginError: 401,
    err.InvalidSession: 401,
    err.Forbidden: 403,
    err.FieldErrors: 400,
    err.BadEmail: 400,
    err.BadPhone: 400,
    err.EmptyCardNumber: 400,
    err.CardNumberTooLong: 400,
    err.EmptyTerm: 400,
    err.BadPaging: 400,
    err.EmptyDescription: 400,
    err.WeakPassword: 400,
    err.UnknownField: 400,
    err.ConfigParseError: 400,
    err.UnknownUser: 404,
    err.UnknownRole: 404,
    err.UnknownPatient: 404,
    err.UnknownPatientCard: 404,
    err.UnknownCategory: 404,
    err.UnknownScan: 404,
    err.BlobNotFound: 404,
    err.DuplicateCardNumber: 409,
    err.DuplicateCategory: 409,
    err.DuplicateUserId: 409,
    err.UniqueViolation: 409,
    err.HasDependents: 409,
    err.ImmutableKind: 409,
    err.ForeignKeyViolation: 409,
    err.CannotModifyAdministrator: 409,
    err.BlobTooLarge: 413,
    err.AlreadyLocked: 503,
    err.IntegrityFailure: 500,
    err.CorruptStore: 500,
    err.IoFailure: 500,
}


def map_error(exc: Exception) -> tuple[int, str, str]:
    """(status, code, public message). Server-side failures keep their code
    but never leak internal detail."""
    if isinstance(exc, ArchivistError):
        for klass in type(exc).__mro__:
            status = _STATUS_BY_TYPE.get(klass)
            if status is not None:
                break
        else:
            status = 500
        message = exc.message if status < 500 else "internal error"
        return status, exc.code, message
    return 500, "internal", "internal error"


def _envelope(request: Request, status: int, code: str, message: str) -> JSONResponse:
    request_id = getattr(request.state, "request_id", "unknown")
    return JSONResponse(
        status_code=status,
        content={"error": message, "code": code, "request_id": request_id},
        headers={"X-Request-Id": request_id},
    )


def build_app(store: Store, config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    auth = AuthService(store, timedelta(minutes=config.session_ttl_minutes))
    archive = ArchiveService(store, auth)
    search = SearchService(store, auth, archive)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        store.close()

    app = FastAPI(lifespan=lifespan, docs_url=None, redoc_url=None, openapi_url=None)
    app.state.store = store
    app.state.auth = auth
    app.state.archive = archive
    app.state.search = search
    app.state.config = config

    _PUBLIC_ROUTES = {("POST", "/api/login"), ("GET", "/api/health")}

    @app.middleware("http")
    async def session_gate(request: Request, call_next):
        # Sessions are checked before any body parsing so an unauthenticated
        # caller sees 401 on every route, never a validation error.
        key = (request.method, request.url.path)
        if request.url.path.startswith("/api") and key not in _PUBLIC_ROUTES:
            try:
                token = bearer_token(request)
                if key != ("POST", "/api/logout"):
                    auth.resolve_session(token)
            except Exception as exc:  # noqa: BLE001 - total error boundary
                status, code, message = map_error(exc)
                return _envelope(request, status, code, message)
        return await call_next(request)

    @app.middleware("http")
    async def request_id_middleware(request: Request, call_next):
        request.state.request_id = uuid.uuid4().hex[:12]
        response = await call_next(request)
        response.headers.setdefault("X-Request-Id", request.state.request_id)
        return response

    @app.exception_handler(ArchivistError)
    async def on_domain_error(request: Request, exc: ArchivistError):
        status, code, message = map_error(exc)
        return _envelope(request, status, code, message)

    @app.exception_handler(RequestValidationError)
    async def on_bad_request(request: Request, exc: RequestValidationError):
        return _envelope(request, 400, "bad_request", "malformed request")

    @app.exception_handler(StarletteHTTPException)
    async def on_http_error(request: Request, exc: StarletteHTTPException):
        code = "not_found" if exc.status_code == 404 else "http_error"
        return _envelope(request, exc.status_code, code, str(exc.detail))

    @app.exception_handler(Exception)
    async def on_unhandled(request: Request, exc: Exception):
        return _envelope(request, 500, "internal", "internal error")

    # --- auth helpers -------------------------------------------------------

    def bearer_token(request: Request) -> str:
        header = request.headers.get("authorization", "")
        scheme, _, token = header.partition(" ")
        if scheme.lower() != "bearer" or not token.strip():
            raise err.InvalidSession("missing bearer credential")
        return token.strip()

    def authorize(request: Request, privilege: PrivilegeName | str | None,
                  admin_only: bool = False):
        """Resolve the session, then check the route's privilege; privilege
        denials are themselves audited."""
        actor = auth.resolve_session(bearer_token(request))
        denied = False
        if isinstance(privilege, PrivilegeName):
            denied = not auth.check_privilege(actor, privilege)
        if not denied and admin_only:
            denied = not auth.is_administrator(actor)
        if denied:
            auth.append_audit(
                actor.user_id, f"denied {request.method} {request.url.path}"
            )
            raise err.Forbidden(
                privilege.wire if isinstance(privilege, PrivilegeName) else "administrator"
            )
        return actor

    def parse_page(offset: str, limit: str) -> tuple[int, int]:
        try:
            return int(offset), int(limit)
        except ValueError:
            raise err.BadPaging("offset and limit must be integers") from None

    def role_record(role) -> dict:
        privileges = sorted(
            p.wire
            for p in PrivilegeName
            if (rec := auth.find_privilege(p)) and rec.privilege_id in role.privilege_ids
        )
        record = role.to_record()
        record["privileges"] = privileges
        return record

    # --- public routes ---------------------------------------------------------

    @app.get("/api/health")
    def health():
        return {"status": "ok", "banner": config.bootstrap_banner}

    @app.post("/api/login")
    def login(payload: dict = Body(...)):
        user_id = payload.get("user_id")
        password = payload.get("password")
        if not isinstance(user_id, str) or not isinstance(password, str):
            raise err.LoginError()
        session = auth.login(Credentials(user_id=user_id, password=password))
        user = auth.get_user(session.user_id)
        role = auth.get_role(user.role_id) if user.role_id else None
        return {
            "token": session.token,
            "user_id": user.user_id,
            "display_name": user.display_name,
            "role_name": role.role_name if role else None,
            "privileges": [p.wire for p in auth.granted_privileges(user)],
            "expires_at": format_instant(session.expires_at),
        }

    @app.post("/api/logout")
    def logout(request: Request):
        auth.logout(bearer_token(request))
        return {"ok": True}

    # --- patients -------------------------------------------------------------

    @app.get("/api/patients")
    def patients_search(request: Request, term: str = "",
                        offset: str = "0", limit: str = "50"):
        actor = authorize(request, PrivilegeName.PATIENTS)
        off, lim = parse_page(offset, limit)
        page = search.search_patients(actor, term, off, lim)
        return {
            "items": [p.to_record() for p in page.items],
            "total_matches": page.total_matches,
            "offset": page.offset,
            "limit": page.limit,
        }

    def patient_candidate(body: dict) -> PatientRecord:
        try:
            sex = Sex(body.get("sex", "U"))
        except ValueError:
            raise err.FieldErrors(["sex"]) from None
        return PatientRecord(
            patient_id="",
            first_name=str(body.get("first_name", "")),
            last_name=str(body.get("last_name", "")),
            address=str(body.get("address", "")),
            phone=str(body.get("phone", "")),
            email=str(body.get("email", "")),
            sex=sex,
            card_number=str(body.get("card_number", "")),
            photo=None,
        )

    @app.post("/api/patients", status_code=201)
    def patients_create(request: Request, body: dict = Body(...)):
        actor = authorize(request, PrivilegeName.PATIENTS, admin_only=True)
        patient_id = archive.register_patient(actor, patient_candidate(body))
        return {"patient_id": patient_id}

    @app.put("/api/patients/{patient_id}")
    def patients_update(request: Request, patient_id: str, body: dict = Body(...)):
        actor = authorize(request, PrivilegeName.PATIENTS, admin_only=True)
        updated = archive.update_patient(actor, patient_id, body)
        return updated.to_record()

    @app.delete("/api/patients/{patient_id}")
    def patients_delete(request: Request, patient_id: str):
        actor = authorize(request, PrivilegeName.PATIENTS, admin_only=True)
        archive.delete_patient(actor, patient_id)
        return {"deleted": True}

    @app.get("/api/patients/{patient_id}/scans")
    def patient_scans(request: Request, patient_id: str):
        actor = authorize(request, PrivilegeName.PATIENT_IMAGES)
        views = archive.list_scans_for_patient(actor, patient_id)
        return {"items": [v.to_record() for v in views]}

    # --- categories -------------------------------------------------------------

    @app.get("/api/categories")
    def categories_list(request: Request):
        actor = authorize(request, "any")
        return {
            "items": [c.to_record() for c in archive.list_scan_categories(actor)]
        }

    @app.post("/api/categories", status_code=201)
    def categories_create(request: Request, body: dict = Body(...)):
        actor = authorize(request, PrivilegeName.PATIENT_IMAGES)
        category = archive.create_scan_category(
            actor,
            str(body.get("category_name", "")),
            str(body.get("category_description", "")),
        )
        return category.to_record()

    @app.put("/api/categories/{category_id}")
    def categories_update(request: Request, category_id: str, body: dict = Body(...)):
        actor = authorize(request, PrivilegeName.PATIENT_IMAGES)
        category = archive.update_scan_category(
            actor,
            category_id,
            body.get("category_name"),
            body.get("category_description"),
        )
        return category.to_record()

    # --- scans ---------------------------------------------------------------------

    @app.post("/api/scans", status_code=201)
    def scans_upload(
        request: Request,
        card_number: str = Form(...),
        scan_category_id: str = Form(...),
        scan_date: str = Form(...),
        radiographer: str = Form(""),
        scan_details: str = Form(""),
        findings: str = Form(""),
        expiry: str = Form(""),
        image: UploadFile = File(...),
    ):
        actor = authorize(request, PrivilegeName.PATIENT_IMAGES)
        try:
            scan_at = parse_instant(scan_date)
        except ValueError:
            raise err.FieldErrors(["scan_date"]) from None
        expires_at = None
        if expiry.strip():
            try:
                expires_at = parse_instant(expiry)
            except ValueError:
                raise err.FieldErrors(["expiry"]) from None
        data = image.file.read()
        media_type = image.content_type or "application/octet-stream"
        scan_id = archive.upload_scan(actor, ScanUploadRequest(
            card_number=card_number,
            scan_category_id=scan_category_id,
            radiographer=radiographer,
            image_bytes=data,
            image_media_type=media_type,
            scan_date=scan_at,
            scan_details=scan_details,
            findings=findings,
            expiry=expires_at,
        ))
        return {"scan_id": scan_id}

    @app.get("/api/scans/search")
    def scans_search(request: Request, by: str = "", term: str = "",
                     offset: str = "0", limit: str = "50"):
        actor = authorize(request, PrivilegeName.PATIENT_IMAGES)
        try:
            criterion = ScanSearchCriterion(by)
        except ValueError:
            raise err.FieldErrors(["by"]) from None
        off, lim = parse_page(offset, limit)
        page = search.search_scans(actor, criterion, term, off, lim)
        return {
            "items": [v.to_record() for v in page.items],
            "total_matches": page.total_matches,
            "offset": page.offset,
            "limit": page.limit,
        }

    @app.get("/api/scans/{scan_id}")
    def scans_get(request: Request, scan_id: str):
        actor = authorize(request, PrivilegeName.PATIENT_IMAGES)
        return archive.get_scan(actor, scan_id).to_record()

    @app.get("/api/scans/{scan_id}/image")
    def scans_get_image(request: Request, scan_id: str):
        actor = authorize(request, PrivilegeName.PATIENT_IMAGES)
        data, media_type = archive.get_scan_image(actor, scan_id)
        return Response(content=data, media_type=media_type)

    # --- users and roles --------------------------------------------------------------

    @app.get("/api/users")
    def users_list(request: Request):
        authorize(request, PrivilegeName.MANAGE_USERS)
        return {"items": [u.to_public_record() for u in auth.list_users()]}

    @app.post("/api/users", status_code=201)
    def users_create(request: Request, body: dict = Body(...)):
        actor = authorize(request, PrivilegeName.MANAGE_USERS)
        password = body.get("password")
        user_id = auth.create_user(
            actor,
            {k: v for k, v in body.items() if k != "password"},
            password if isinstance(password, str) else "",
        )
        return {"user_id": user_id}

    @app.put("/api/users/{user_id}")
    def users_update(request: Request, user_id: str, body: dict = Body(...)):
        actor = authorize(request, PrivilegeName.MANAGE_USERS)
        updated = auth.update_user(actor, user_id, body)
        return updated.to_public_record()

    @app.get("/api/roles")
    def roles_list(request: Request):
        authorize(request, PrivilegeName.MANAGE_USERS)
        return {"items": [role_record(r) for r in auth.list_roles()]}

    def parse_privileges(body: dict) -> set[PrivilegeName]:
        names = body.get("privileges", [])
        if not isinstance(names, list):
            raise err.FieldErrors(["privileges"])
        try:
            return {PrivilegeName.from_wire(str(n)) for n in names}
        except ValueError:
            raise err.FieldErrors(["privileges"]) from None

    @app.post("/api/roles", status_code=201)
    def roles_create(request: Request, body: dict = Body(...)):
        actor = authorize(request, PrivilegeName.MANAGE_USERS)
        role = auth.create_or_update_role(
            actor,
            str(body.get("role_name", "")),
            str(body.get("description", "")),
            parse_privileges(body),
        )
        return role_record(role)

    @app.put("/api/roles/{role_id}")
    def roles_update(request: Request, role_id: str, body: dict = Body(...)):
        actor = authorize(request, PrivilegeName.MANAGE_USERS)
        role = auth.create_or_update_role(
            actor,
            str(body.get("role_name", "")),
            str(body.get("description", "")),
            parse_privileges(body),
            role_id=role_id,
        )
        return role_record(role)

    @app.post("/api/roles/{role_id}/assign/{user_id}")
    def roles_assign(request: Request, role_id: str, user_id: str):
        actor = authorize(request, PrivilegeName.MANAGE_USERS)
        auth.assign_role(actor, user_id, role_id)
        return {"ok": True}

    # --- audit and admin ----------------------------------------------------------------

    @app.get("/api/audit")
    def audit_query(request: Request, user_id: str = ""):
        actor = authorize(request, PrivilegeName.MANAGE_USERS)
        params = request.query_params
        time_from = time_to = None
        try:
            if params.get("from"):
                time_from = parse_instant(params["from"])
        except ValueError:
            raise err.FieldErrors(["from"]) from None
        try:
            if params.get("to"):
                time_to = parse_instant(params["to"])
        except ValueError:
            raise err.FieldErrors(["to"]) from None
        entries = auth.query_audit(
            actor, user_id or None, time_from, time_to
        )
        return {"items": [e.to_record() for e in entries]}

    @app.post("/api/admin/purge-expired")
    def purge_expired(request: Request, body: dict | None = Body(None)):
        actor = authorize(request, PrivilegeName.MANAGE_USERS, admin_only=True)
        now = None
        if body and body.get("now"):
            try:
                now = parse_instant(str(body["now"]))
            except ValueError:
                raise err.FieldErrors(["now"]) from None
        purged = archive.purge_expired_scans(actor, now)
        return {"purged": purged}

    return app
