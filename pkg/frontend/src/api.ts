// Typed client for the evalsynth JSON API. The UI computes nothing itself:
// every score, flag and queue entry shown on screen comes from these calls.

export type DimensionName = "FACTUALITY" | "ACTIONABILITY" | "APPROPRIATENESS";

export const DIMENSIONS: DimensionName[] = [
  "FACTUALITY",
  "ACTIONABILITY",
  "APPROPRIATENESS",
];

export interface RunInfo {
  run_id: string;
  course_count: number;
  report_count: number;
}

export interface ReportSummary {
  report_id: string;
  course_id: string;
  format: string;
  item_count: number;
  factuality_score: number | null;
  actionability_score: number | null;
  flag_kinds: string[];
}

export interface QualityFlag {
  kind: string;
  detail: string;
  item_ordinal: number | null;
}

export interface ItemSupport {
  ordinal: number;
  support: number;
  best_response_id: string | null;
}

export interface Quality {
  factuality_score: number;
  unsupported_item_ordinals: number[];
  actionability_score: number;
  flags: QualityFlag[];
  per_item_support: ItemSupport[];
}

export interface FeedbackItem {
  ordinal: number;
  kind: "OBSERVATION" | "ACTION";
  title: string | null;
  body: string;
  source_span: [number, number];
}

export interface Report {
  course_id: string;
  format: string;
  items: FeedbackItem[];
  raw_text: string;
  preamble: string | null;
  closing: string | null;
  quality: Quality | null;
}

export interface SourceResponse {
  response_id: string;
  text: string;
  language_hint: string;
}

export interface EffectiveRating {
  rater_id: string;
  dimension: DimensionName;
  score: number;
  comment: string | null;
  sequence: number;
}

export interface ReportPayload {
  report_id: string;
  report: Report;
  source_responses: SourceResponse[];
  roster_available: boolean;
  ratings: EffectiveRating[];
}

export interface RatingReceipt {
  sequence: number;
  report_id: string;
}

export interface AgreementStats {
  n_reports: number;
  n_raters: number;
  exact_agreement_rate: number;
  mean_abs_diff: number;
  krippendorff_alpha_ordinal: number;
}

export type AgreementMap = Record<DimensionName, AgreementStats | null>;

export interface DivergenceEntry {
  report_id: string;
  dimension: DimensionName;
  scores: { rater_id: string; score: number }[];
  range: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError(0, `network failure: ${String(err)}`);
  }
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    // non-JSON body; fall through to the status check
  }
  if (!response.ok) {
    const detail =
      body && typeof body === "object" && "error" in body
        ? String((body as { error: unknown }).error)
        : response.statusText;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  async listRuns(): Promise<RunInfo[]> {
    const data = await request<{ runs: RunInfo[] }>(this.url("/api/runs"));
    return data.runs;
  }

  async listReports(runId: string): Promise<ReportSummary[]> {
    const data = await request<{ reports: ReportSummary[] }>(
      this.url(`/api/runs/${encodeURIComponent(runId)}/reports`),
    );
    return data.reports;
  }

  async getReport(reportId: string): Promise<ReportPayload> {
    return request<ReportPayload>(
      this.url(`/api/reports/${encodeURIComponent(reportId)}`),
    );
  }

  async submitRating(
    reportId: string,
    rating: {
      rater_id: string;
      dimension: DimensionName;
      score: number;
      comment?: string;
    },
  ): Promise<RatingReceipt> {
    if (!Number.isInteger(rating.score) || rating.score < 1 || rating.score > 5) {
      throw new ApiError(0, `score must be an integer in [1, 5], got ${rating.score}`);
    }
    const data = await request<{ receipt: RatingReceipt }>(
      this.url(`/api/reports/${encodeURIComponent(reportId)}/ratings`),
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(rating),
      },
    );
    return data.receipt;
  }

  async agreement(): Promise<AgreementMap> {
    const data = await request<{ agreement: AgreementMap }>(
      this.url("/api/agreement"),
    );
    return data.agreement;
  }

  async divergence(minRange = 2): Promise<DivergenceEntry[]> {
    const data = await request<{ divergence: DivergenceEntry[] }>(
      this.url(`/api/divergence?min_range=${minRange}`),
    );
    return data.divergence;
  }
}
