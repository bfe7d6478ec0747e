// DOM builders. Pure functions from server payloads (plus session state) to
// elements; user-supplied text always goes through textContent.

import {
  AgreementMap,
  DIMENSIONS,
  DimensionName,
  DivergenceEntry,
  FeedbackItem,
  QualityFlag,
  ReportPayload,
  ReportSummary,
  RunInfo,
} from "./api.js";
import { ReviewSession } from "./session.js";

export const SPARSE_BANNER_TEXT =
  "single/low-response course: treat specifics with caution";
export const DENSE_BANNER_TEXT =
  "high-volume course: prioritisation of feedback may be unreliable";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function badge(text: string, kind: string): HTMLElement {
  const span = el("span", `badge badge-${kind.toLowerCase()}`, text);
  span.dataset.flag = kind;
  return span;
}

export function renderRunList(runs: RunInfo[], onOpen: (runId: string) => void): HTMLElement {
  const section = el("section", "run-list");
  section.append(el("h2", "", "Runs"));
  const list = el("ul");
  for (const run of runs) {
    const item = el("li");
    const link = el("a", "run-link", `${run.run_id} (${run.report_count} reports)`);
    link.href = `#/run/${run.run_id}`;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      onOpen(run.run_id);
    });
    item.append(link);
    list.append(item);
  }
  section.append(list);
  return section;
}

export function renderReportList(
  runId: string,
  reports: ReportSummary[],
  onOpen: (reportId: string) => void,
): HTMLElement {
  const section = el("section", "report-list");
  section.append(el("h2", "", `Reports in ${runId}`));
  const table = el("table");
  const head = el("tr");
  for (const label of ["course", "format", "items", "factuality", "actionability", "flags"]) {
    head.append(el("th", "", label));
  }
  table.append(head);
  for (const report of reports) {
    const row = el("tr", "report-row");
    row.dataset.reportId = report.report_id;
    const courseCell = el("td");
    const link = el("a", "report-link", report.course_id);
    link.href = `#/report/${report.report_id}`;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      onOpen(report.report_id);
    });
    courseCell.append(link);
    row.append(courseCell);
    row.append(el("td", "", report.format));
    row.append(el("td", "", String(report.item_count)));
    row.append(el("td", "", report.factuality_score?.toFixed(2) ?? "-"));
    row.append(el("td", "", report.actionability_score?.toFixed(2) ?? "-"));
    const flags = el("td", "flag-cell");
    for (const kind of report.flag_kinds) flags.append(badge(kind, kind));
    row.append(flags);
    table.append(row);
  }
  section.append(table);
  return section;
}

function reportBanners(flags: QualityFlag[]): HTMLElement[] {
  const banners: HTMLElement[] = [];
  if (flags.some((f) => f.kind === "SPARSE_INPUT")) {
    const banner = el("div", "banner banner-sparse", SPARSE_BANNER_TEXT);
    banner.dataset.flag = "SPARSE_INPUT";
    banners.push(banner);
  }
  if (flags.some((f) => f.kind === "DENSE_INPUT")) {
    const banner = el("div", "banner banner-dense", DENSE_BANNER_TEXT);
    banner.dataset.flag = "DENSE_INPUT";
    banners.push(banner);
  }
  return banners;
}

function itemBadges(item: FeedbackItem, flags: QualityFlag[]): HTMLElement[] {
  const badges: HTMLElement[] = [badge(item.kind, item.kind)];
  for (const flag of flags) {
    if (flag.item_ordinal !== item.ordinal) continue;
    if (flag.kind === "UNSUPPORTED_ITEM") badges.push(badge("unsupported", flag.kind));
    else badges.push(badge(flag.kind.toLowerCase().replace(/_/g, " "), flag.kind));
  }
  return badges;
}

export interface RatingHandlers {
  onRate: (dimension: DimensionName, score: number) => void;
  onSkip: (dimension: DimensionName) => void;
}

export function renderRatingControls(
  reportId: string,
  session: ReviewSession,
  handlers: RatingHandlers,
): HTMLElement {
  const panel = el("div", "rating-panel");
  panel.append(el("h3", "", "Your ratings"));
  const state = session.state(reportId);
  for (const dimension of DIMENSIONS) {
    const row = el("div", "rating-row");
    row.dataset.dimension = dimension;
    const label = dimension.charAt(0) + dimension.slice(1).toLowerCase();
    row.append(el("span", "rating-label", label));
    for (let score = 1; score <= 5; score += 1) {
      const button = el("button", "score-button", String(score));
      button.type = "button";
      button.dataset.score = String(score);
      if (state[dimension].score === score && state[dimension].status !== "unrated") {
        button.classList.add("selected");
      }
      button.addEventListener("click", () => handlers.onRate(dimension, score));
      row.append(button);
    }
    const skip = el("button", "skip-button", state[dimension].status === "skipped" ? "skipped" : "skip");
    skip.type = "button";
    skip.addEventListener("click", () => handlers.onSkip(dimension));
    row.append(skip);
    const status = el("span", `rating-status status-${state[dimension].status}`);
    status.textContent =
      state[dimension].status === "failed" && state[dimension].message
        ? `failed: ${state[dimension].message}`
        : state[dimension].status;
    row.append(status);
    panel.append(row);
  }
  const completeness = el(
    "div",
    "completeness",
    session.isComplete(reportId)
      ? "all dimensions rated or skipped"
      : "rate or skip every dimension to finish this report",
  );
  completeness.dataset.complete = String(session.isComplete(reportId));
  panel.append(completeness);
  return panel;
}

export function renderReportView(
  payload: ReportPayload,
  session: ReviewSession,
  handlers: RatingHandlers,
): HTMLElement {
  const section = el("section", "report-view");
  section.dataset.reportId = payload.report_id;
  section.append(el("h2", "", `Course ${payload.report.course_id}`));

  const quality = payload.report.quality;
  const flags = quality ? quality.flags : [];
  for (const banner of reportBanners(flags)) section.append(banner);
  if (!payload.roster_available) {
    section.append(
      el("div", "banner banner-roster", "no roster on file: redaction coverage unverifiable"),
    );
  }

  const columns = el("div", "columns");

  const sources = el("div", "column sources");
  sources.append(el("h3", "", `Source responses (${payload.source_responses.length})`));
  for (const source of payload.source_responses) {
    const card = el("div", "source-card");
    card.append(el("div", "source-meta", `${source.response_id} · ${source.language_hint}`));
    card.append(el("p", "source-text", source.text));
    sources.append(card);
  }
  columns.append(sources);

  const feedback = el("div", "column feedback");
  feedback.append(el("h3", "", `Generated feedback (${payload.report.format})`));
  if (quality) {
    feedback.append(
      el(
        "div",
        "scores",
        `factuality ${quality.factuality_score.toFixed(2)} · ` +
          `actionability ${quality.actionability_score.toFixed(2)}`,
      ),
    );
  }
  if (payload.report.preamble) {
    feedback.append(el("p", "preamble", payload.report.preamble));
  }
  for (const item of payload.report.items) {
    const card = el("div", "item-card");
    card.dataset.ordinal = String(item.ordinal);
    const header = el("div", "item-header");
    header.append(el("span", "item-ordinal", `${item.ordinal}.`));
    if (item.title) header.append(el("strong", "item-title", item.title));
    for (const b of itemBadges(item, flags)) header.append(b);
    card.append(header);
    card.append(el("p", "item-body", item.body));
    feedback.append(card);
  }
  if (payload.report.closing) {
    feedback.append(el("p", "closing", payload.report.closing));
  }
  columns.append(feedback);
  section.append(columns);

  section.append(renderRatingControls(payload.report_id, session, handlers));
  return section;
}

export function renderDivergence(
  entries: DivergenceEntry[],
  onOpen: (reportId: string) => void,
): HTMLElement {
  const section = el("section", "divergence-view");
  section.append(el("h2", "", "Divergence queue"));
  if (entries.length === 0) {
    section.append(el("p", "empty-state", "no divergences"));
    return section;
  }
  const table = el("table");
  const head = el("tr");
  for (const label of ["report", "dimension", "range", "scores"]) {
    head.append(el("th", "", label));
  }
  table.append(head);
  for (const entry of entries) {
    const row = el("tr", "divergence-row");
    row.dataset.reportId = entry.report_id;
    row.dataset.dimension = entry.dimension;
    const reportCell = el("td");
    const link = el("a", "divergence-link", entry.report_id);
    link.href = `#/report/${entry.report_id}`;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      onOpen(entry.report_id);
    });
    reportCell.append(link);
    row.append(reportCell);
    row.append(el("td", "", entry.dimension));
    row.append(el("td", "", String(entry.range)));
    row.append(
      el(
        "td",
        "divergence-scores",
        entry.scores.map((s) => `${s.rater_id}=${s.score}`).join(", "),
      ),
    );
    table.append(row);
  }
  section.append(table);
  return section;
}

export function renderAgreement(map: AgreementMap): HTMLElement {
  const section = el("section", "agreement-view");
  section.append(el("h2", "", "Inter-rater agreement"));
  const table = el("table");
  const head = el("tr");
  for (const label of ["dimension", "reports", "raters", "exact", "mean |diff|", "alpha (ordinal)"]) {
    head.append(el("th", "", label));
  }
  table.append(head);
  for (const dimension of DIMENSIONS) {
    const stats = map[dimension];
    const row = el("tr");
    row.dataset.dimension = dimension;
    row.append(el("td", "", dimension));
    if (stats) {
      row.append(el("td", "", String(stats.n_reports)));
      row.append(el("td", "", String(stats.n_raters)));
      row.append(el("td", "", stats.exact_agreement_rate.toFixed(3)));
      row.append(el("td", "", stats.mean_abs_diff.toFixed(3)));
      row.append(el("td", "", stats.krippendorff_alpha_ordinal.toFixed(4)));
    } else {
      const cell = el("td", "", "not enough raters yet");
      cell.colSpan = 5;
      row.append(cell);
    }
    table.append(row);
  }
  section.append(table);
  return section;
}

export function renderError(message: string, onRetry: () => void): HTMLElement {
  const banner = el("div", "banner banner-error");
  banner.append(el("span", "", message));
  const retry = el("button", "retry-button", "retry");
  retry.type = "button";
  retry.addEventListener("click", onRetry);
  banner.append(retry);
  return banner;
}

export function renderNotFound(reportId: string): HTMLElement {
  const section = el("section", "not-found");
  section.append(el("h2", "", "Report not found"));
  section.append(el("p", "", `No report with id ${reportId} is available on this server.`));
  return section;
}
