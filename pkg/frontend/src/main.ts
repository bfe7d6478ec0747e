// Application shell: hash routing, data loading, and rating submission with
// optimistic updates (rolled back when the server refuses).

import { ApiClient, ApiError, DimensionName } from "./api.js";
import {
  el,
  renderAgreement,
  renderDivergence,
  renderError,
  renderNotFound,
  renderReportList,
  renderReportView,
  renderRunList,
} from "./render.js";
import { ReviewSession } from "./session.js";

export class App {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient = new ApiClient(),
    private readonly session: ReviewSession = new ReviewSession(),
  ) {}

  start(): void {
    window.addEventListener("hashchange", () => void this.route());
    void this.route();
  }

  private navigate(hash: string): void {
    if (window.location.hash === hash) {
      void this.route();
    } else {
      window.location.hash = hash;
    }
  }

  async route(): Promise<void> {
    if (!this.session.hasRater) {
      this.showRaterGate();
      return;
    }
    const hash = window.location.hash || "#/";
    try {
      if (hash.startsWith("#/report/")) {
        await this.showReport(decodeURIComponent(hash.slice("#/report/".length)));
      } else if (hash.startsWith("#/run/")) {
        await this.showRun(decodeURIComponent(hash.slice("#/run/".length)));
      } else if (hash === "#/divergence") {
        await this.showDivergence();
      } else if (hash === "#/agreement") {
        await this.showAgreement();
      } else {
        await this.showHome();
      }
    } catch (err) {
      this.root.replaceChildren(
        this.chrome(),
        renderError(err instanceof Error ? err.message : String(err), () => void this.route()),
      );
    }
  }

  private chrome(): HTMLElement {
    const nav = el("nav", "top-nav");
    const title = el("span", "brand", "evalsynth review");
    nav.append(title);
    for (const [label, hash] of [
      ["runs", "#/"],
      ["divergence", "#/divergence"],
      ["agreement", "#/agreement"],
    ] as const) {
      const link = el("a", "nav-link", label);
      link.href = hash;
      nav.append(link);
    }
    nav.append(el("span", "rater-chip", `rater: ${this.session.raterId}`));
    return nav;
  }

  private showRaterGate(): void {
    const section = el("section", "rater-gate");
    section.append(el("h2", "", "Who is rating?"));
    const input = el("input", "rater-input");
    input.placeholder = "your rater id";
    input.id = "rater-input";
    const button = el("button", "rater-submit", "start reviewing");
    button.type = "button";
    button.addEventListener("click", () => {
      if (input.value.trim()) {
        this.session.raterId = input.value;
        void this.route();
      }
    });
    section.append(input, button);
    this.root.replaceChildren(section);
  }

  private async showHome(): Promise<void> {
    const runs = await this.api.listRuns();
    const body = renderRunList(runs, (runId) => this.navigate(`#/run/${runId}`));
    this.root.replaceChildren(this.chrome(), body);
  }

  private async showRun(runId: string): Promise<void> {
    const reports = await this.api.listReports(runId);
    const body = renderReportList(runId, reports, (reportId) =>
      this.navigate(`#/report/${encodeURIComponent(reportId)}`),
    );
    this.root.replaceChildren(this.chrome(), body);
  }

  async showReport(reportId: string): Promise<void> {
    let payload;
    try {
      payload = await this.api.getReport(reportId);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.root.replaceChildren(this.chrome(), renderNotFound(reportId));
        return;
      }
      throw err;
    }
    this.session.syncFromServer(reportId, payload.ratings);
    const view = renderReportView(payload, this.session, {
      onRate: (dimension, score) => void this.submit(reportId, dimension, score),
      onSkip: (dimension) => {
        this.session.toggleSkip(reportId, dimension);
        void this.showReport(reportId);
      },
    });
    this.root.replaceChildren(this.chrome(), view);
  }

  async submit(reportId: string, dimension: DimensionName, score: number): Promise<void> {
    const previous = { ...this.session.state(reportId)[dimension] };
    this.session.markSaving(reportId, dimension, score);
    try {
      await this.api.submitRating(reportId, {
        rater_id: this.session.raterId,
        dimension,
        score,
      });
      this.session.markSaved(reportId, dimension, score);
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      this.session.markFailed(reportId, dimension, previous, message);
    }
    await this.showReport(reportId);
  }

  private async showDivergence(): Promise<void> {
    const entries = await this.api.divergence();
    const body = renderDivergence(entries, (reportId) =>
      this.navigate(`#/report/${encodeURIComponent(reportId)}`),
    );
    this.root.replaceChildren(this.chrome(), body);
  }

  private async showAgreement(): Promise<void> {
    const map = await this.api.agreement();
    this.root.replaceChildren(this.chrome(), renderAgreement(map));
  }
}

const mount = document.getElementById("app");
if (mount) {
  new App(mount).start();
}
