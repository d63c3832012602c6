/** Typed client for the archive's JSON/multipart API. The bearer token lives
 * in memory only; a 401 from any route funnels into `onUnauthorized` so the
 * shell can bounce to the login page. */

export interface ErrorEnvelope {
  error: string;
  code: string;
  request_id: string;
}

export class ApiError extends Error {
  constructor(public status: number, public envelope: ErrorEnvelope) {
    super(envelope.error);
  }
}

/** Thrown when the server could not be reached at all (distinct from an API
 * error so the login page can show a retry message instead). */
export class NetworkError extends Error {
  constructor() {
    super("network error, please retry");
  }
}

export interface LoginResponse {
  token: string;
  user_id: string;
  display_name: string;
  role_name: string | null;
  privileges: string[];
  expires_at: string;
}

export interface PatientRecord {
  patient_id: string;
  first_name: string;
  last_name: string;
  address: string;
  phone: string;
  email: string;
  sex: string;
  card_number: string;
}

export interface ScanView {
  scan_id: string;
  patient_id: string;
  patient_name: string;
  card_number: string;
  scan_category_id: string;
  category_name: string;
  radiographer: string;
  scan_timestamp: string;
  expiry: string | null;
  scan_details: string;
  comments: string;
  image: { digest: string; size_bytes: number; media_type: string };
}

export interface ResultPage<T> {
  items: T[];
  total_matches: number;
  offset: number;
  limit: number;
}

export interface Category {
  category_id: string;
  category_name: string;
  category_description: string;
}

export interface UserRecord {
  user_id: string;
  title: string;
  first_name: string;
  last_name: string;
  sex: string;
  phone: string;
  email: string;
  address: string;
  user_profession: string;
  account_status: string;
  role_id: string | null;
}

export interface RoleRecord {
  role_id: string;
  role_name: string;
  status: string;
  privileges: string[];
}

export interface AuditRecord {
  log_id: number;
  user_id: string;
  event_description: string;
  event_timestamp: string;
}

export interface ScanUploadForm {
  card_number: string;
  scan_category_id: string;
  radiographer: string;
  scan_date: string;
  scan_details: string;
  findings: string;
  expiry?: string;
  image: Blob;
  imageName: string;
}

type FetchLike = typeof fetch;

export class ApiClient {
  token: string | null = null;
  onUnauthorized: (() => void) | null = null;

  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (...args) => globalThis.fetch(...args),
  ) {}

  private async request(
    method: string,
    path: string,
    init: { json?: unknown; form?: FormData; raw?: boolean } = {},
  ): Promise<any> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    let body: BodyInit | undefined;
    if (init.json !== undefined) {
      headers["Content-Type"] = "application/json";
      body = JSON.stringify(init.json);
    } else if (init.form) {
      body = init.form; // browser sets the multipart boundary itself
    }
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, { method, headers, body });
    } catch {
      throw new NetworkError();
    }
    if (!response.ok) {
      let envelope: ErrorEnvelope;
      try {
        envelope = await response.json();
      } catch {
        envelope = { error: response.statusText, code: "http_error", request_id: "" };
      }
      if (response.status === 401 && path !== "/api/login" && this.onUnauthorized) {
        this.onUnauthorized();
      }
      throw new ApiError(response.status, envelope);
    }
    return init.raw ? response.blob() : response.json();
  }

  async login(userId: string, password: string): Promise<LoginResponse> {
    const out = await this.request("POST", "/api/login", {
      json: { user_id: userId, password },
    });
    this.token = out.token;
    return out;
  }

  async logout(): Promise<void> {
    try {
      await this.request("POST", "/api/logout", {});
    } finally {
      this.token = null;
    }
  }

  searchPatients(term: string, offset = 0, limit = 25): Promise<ResultPage<PatientRecord>> {
    const params = new URLSearchParams({ term, offset: String(offset), limit: String(limit) });
    return this.request("GET", `/api/patients?${params}`);
  }

  registerPatient(fields: Partial<PatientRecord>): Promise<{ patient_id: string }> {
    return this.request("POST", "/api/patients", { json: fields });
  }

  patientScans(patientId: string): Promise<{ items: ScanView[] }> {
    return this.request("GET", `/api/patients/${patientId}/scans`);
  }

  categories(): Promise<{ items: Category[] }> {
    return this.request("GET", "/api/categories");
  }

  createCategory(name: string, description: string): Promise<Category> {
    return this.request("POST", "/api/categories", {
      json: { category_name: name, category_description: description },
    });
  }

  updateCategory(id: string, fields: Partial<Category>): Promise<Category> {
    return this.request("PUT", `/api/categories/${id}`, { json: fields });
  }

  uploadScan(form: ScanUploadForm): Promise<{ scan_id: string }> {
    const data = new FormData();
    data.set("card_number", form.card_number);
    data.set("scan_category_id", form.scan_category_id);
    data.set("radiographer", form.radiographer);
    data.set("scan_date", form.scan_date);
    data.set("scan_details", form.scan_details);
    data.set("findings", form.findings);
    if (form.expiry) data.set("expiry", form.expiry);
    data.set("image", form.image, form.imageName);
    return this.request("POST", "/api/scans", { form: data });
  }

  searchScans(by: string, term: string, offset = 0, limit = 25): Promise<ResultPage<ScanView>> {
    const params = new URLSearchParams({
      by, term, offset: String(offset), limit: String(limit),
    });
    return this.request("GET", `/api/scans/search?${params}`);
  }

  getScan(scanId: string): Promise<ScanView> {
    return this.request("GET", `/api/scans/${scanId}`);
  }

  fetchImage(scanId: string): Promise<Blob> {
    return this.request("GET", `/api/scans/${scanId}/image`, { raw: true });
  }

  users(): Promise<{ items: UserRecord[] }> {
    return this.request("GET", "/api/users");
  }

  createUser(body: Partial<UserRecord> & { password: string }): Promise<{ user_id: string }> {
    return this.request("POST", "/api/users", { json: body });
  }

  updateUser(userId: string, changes: Record<string, unknown>): Promise<UserRecord> {
    return this.request("PUT", `/api/users/${userId}`, { json: changes });
  }

  roles(): Promise<{ items: RoleRecord[] }> {
    return this.request("GET", "/api/roles");
  }

  createRole(name: string, description: string, privileges: string[]): Promise<RoleRecord> {
    return this.request("POST", "/api/roles", {
      json: { role_name: name, description, privileges },
    });
  }

  updateRole(roleId: string, name: string, description: string,
             privileges: string[]): Promise<RoleRecord> {
    return this.request("PUT", `/api/roles/${roleId}`, {
      json: { role_name: name, description, privileges },
    });
  }

  assignRole(roleId: string, userId: string): Promise<{ ok: boolean }> {
    return this.request("POST", `/api/roles/${roleId}/assign/${userId}`, {});
  }

  audit(filter: { user_id?: string; from?: string; to?: string } = {}): Promise<{ items: AuditRecord[] }> {
    const params = new URLSearchParams();
    if (filter.user_id) params.set("user_id", filter.user_id);
    if (filter.from) params.set("from", filter.from);
    if (filter.to) params.set("to", filter.to);
    const suffix = params.size ? `?${params}` : "";
    return this.request("GET", `/api/audit${suffix}`);
  }

  purgeExpired(): Promise<{ purged: string[] }> {
    return this.request("POST", "/api/admin/purge-expired", { json: {} });
  }
}
