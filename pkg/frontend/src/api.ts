// Typed client for the platform's public JSON API. The UI never computes
// scores or ranks; it renders exactly what these calls return.

export interface PhaseView {
  phase_id: string;
  opens_at: string;
  closes_at: string;
}

export interface CompetitionView {
  competition_id: string;
  title: string;
  description: string;
  primary_metric: string;
  direction: string;
  secondary_metrics: string[];
  phases: PhaseView[];
  daily_quota: number;
  hidden_dataset: string;
  public_dataset: string | null;
  reward_text: string;
  current_phase?: string;
  remaining_submissions?: number | null;
}

export interface LeaderboardRow {
  rank: number;
  team_id: string;
  best_score: number;
  submission_count: number;
  best_at: string;
}

export interface SubmissionView {
  eval_id: string;
  bundle_id: string;
  dataset_id: string;
  status: string;
  error_class: string;
  metrics: Record<string, number>;
  wall_time_s: number;
  log_ref: string | null;
  started_at: string | null;
  finished_at: string | null;
  created_at: string;
  log_tail?: string | null;
}

export interface ServiceView {
  model_name: string;
  version: number;
  route: string;
  api_doc_ref: string;
  status: string;
  started_at: string | null;
}

export interface ModelRow {
  model_name: string;
  version: number;
  source_bundle_id: string;
  binary_ref: string;
  stage: string;
  hyper_parameters: Record<string, string>;
  metrics: Record<string, Record<string, number>>;
  gate_report_ref: string | null;
  created_at: string;
}

export interface GateFinding {
  rule_id: string;
  severity: string;
  path: string;
  line?: number;
  excerpt: string;
}

export interface GateReportView {
  bundle_id: string;
  ruleset_digest: string;
  verdict: string;
  scanned_at: string;
  findings: GateFinding[];
}

export interface ModelDetail extends ModelRow {
  gate_report: GateReportView | null;
  metrics_history: {
    dataset_id: string;
    metrics: Record<string, number>;
    at: string;
  }[];
  transitions: {
    from_stage: string;
    to_stage: string;
    actor: string;
    at: string;
  }[];
  service: ServiceView | null;
}

export interface DashboardRow {
  service: ServiceView;
  metrics: Record<string, Record<string, number>>;
}

export interface Identity {
  principal_id: string;
  display_name: string;
  role: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

const TOKEN_KEY = "forge.token";
const BASE_KEY = "forge.apiBase";

export function getToken(): string | null {
  return localStorage.getItem(TOKEN_KEY);
}

export function setToken(token: string | null): void {
  if (token) localStorage.setItem(TOKEN_KEY, token);
  else localStorage.removeItem(TOKEN_KEY);
}

export function apiBase(): string {
  return localStorage.getItem(BASE_KEY) ?? "";
}

function headers(): Record<string, string> {
  const token = getToken();
  return token ? { Authorization: `Bearer ${token}` } : {};
}

async function parseError(response: Response): Promise<ApiError> {
  let code = `HTTP_${response.status}`;
  let message = response.statusText;
  try {
    const body = await response.json();
    if (body?.error?.code) {
      code = body.error.code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the HTTP fallback
  }
  return new ApiError(response.status, code, message);
}

export async function request<T>(path: string, init: RequestInit = {}): Promise<T> {
  const response = await fetch(`${apiBase()}/api/v1${path}`, {
    ...init,
    headers: { ...headers(), ...(init.headers ?? {}) },
  });
  if (!response.ok) throw await parseError(response);
  return (await response.json()) as T;
}

export const api = {
  me: () => request<Identity>("/me"),
  competitions: () => request<CompetitionView[]>("/competitions"),
  competition: (id: string) =>
    request<CompetitionView>(`/competitions/${encodeURIComponent(id)}`),
  leaderboard: (id: string) =>
    request<LeaderboardRow[]>(`/competitions/${encodeURIComponent(id)}/leaderboard`),
  submission: (id: string) =>
    request<SubmissionView>(`/submissions/${encodeURIComponent(id)}`),
  models: () => request<ModelRow[]>("/models"),
  dashboard: () => request<DashboardRow[]>("/dashboard"),
  modelDetail: (name: string, version: number) =>
    request<ModelDetail>(`/models/${name}/${version}`),
  harvest: (bundleId: string) =>
    request<ModelRow>(`/harvest/${encodeURIComponent(bundleId)}`, { method: "POST" }),
  promote: (name: string, version: number, toStage: string) =>
    request<ModelRow>(`/models/${name}/${version}/promote`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ to_stage: toStage }),
    }),
  serve: (name: string, version: number) =>
    request<ServiceView>(`/models/${name}/${version}/serve`, { method: "POST" }),
  reevaluate: (name: string, version: number, datasetId: string) =>
    request<SubmissionView>(`/models/${name}/${version}/evaluate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ dataset_id: datasetId }),
    }),
  predict: (name: string, version: number, input: unknown) =>
    request<{ output: unknown }>(`/models/${name}/${version}/predict`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ input }),
    }),
  health: (name: string, version: number) =>
    request<{ status: string }>(`/models/${name}/${version}/health`),
};

export function templateUrl(competitionId: string): string {
  return `${apiBase()}/api/v1/competitions/${encodeURIComponent(competitionId)}/template`;
}

/** Multipart upload with progress; resolves to the queued submission. */
export function uploadBundle(
  competitionId: string,
  file: File,
  onProgress: (fraction: number) => void,
): Promise<SubmissionView> {
  return new Promise((resolve, reject) => {
    const xhr = new XMLHttpRequest();
    xhr.open(
      "POST",
      `${apiBase()}/api/v1/competitions/${encodeURIComponent(competitionId)}/submissions`,
    );
    const token = getToken();
    if (token) xhr.setRequestHeader("Authorization", `Bearer ${token}`);
    xhr.upload.onprogress = (event) => {
      if (event.lengthComputable) onProgress(event.loaded / event.total);
    };
    xhr.onerror = () => reject(new ApiError(0, "NETWORK", "upload failed"));
    xhr.onabort = () => reject(new ApiError(0, "ABORTED", "upload cancelled"));
    xhr.onload = () => {
      let body: unknown = null;
      try {
        body = JSON.parse(xhr.responseText);
      } catch {
        // fall through to the generic error below
      }
      if (xhr.status >= 200 && xhr.status < 300) {
        resolve(body as SubmissionView);
      } else {
        const envelope = body as { error?: { code?: string; message?: string } } | null;
        reject(
          new ApiError(
            xhr.status,
            envelope?.error?.code ?? `HTTP_${xhr.status}`,
            envelope?.error?.message ?? "upload rejected",
          ),
        );
      }
    };
    const form = new FormData();
    form.append("bundle", file);
    xhr.send(form);
  });
}
