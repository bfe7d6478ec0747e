// Client-side review state. Only the rater id and unsaved cursor live here;
// everything else is server-derived, so a hard refresh loses nothing more.

import { DIMENSIONS, DimensionName } from "./api.js";

const RATER_KEY = "evalsynth.rater";

export type DimensionStatus = "unrated" | "saving" | "saved" | "skipped" | "failed";

export interface DimensionState {
  status: DimensionStatus;
  score: number | null;
  message: string | null;
}

export type ReportRatingState = Record<DimensionName, DimensionState>;

function freshState(): ReportRatingState {
  const state = {} as ReportRatingState;
  for (const dimension of DIMENSIONS) {
    state[dimension] = { status: "unrated", score: null, message: null };
  }
  return state;
}

export class ReviewSession {
  private states = new Map<string, ReportRatingState>();

  constructor(private readonly storage: Storage = window.localStorage) {}

  get raterId(): string {
    return this.storage.getItem(RATER_KEY) ?? "";
  }

  set raterId(value: string) {
    this.storage.setItem(RATER_KEY, value.trim());
  }

  get hasRater(): boolean {
    return this.raterId.length > 0;
  }

  state(reportId: string): ReportRatingState {
    let state = this.states.get(reportId);
    if (!state) {
      state = freshState();
      this.states.set(reportId, state);
    }
    return state;
  }

  /** Seed dimension states from the server's effective ratings for this rater. */
  syncFromServer(
    reportId: string,
    ratings: { rater_id: string; dimension: DimensionName; score: number }[],
  ): void {
    const state = this.state(reportId);
    for (const rating of ratings) {
      if (rating.rater_id === this.raterId) {
        state[rating.dimension] = {
          status: "saved",
          score: rating.score,
          message: null,
        };
      }
    }
  }

  markSaving(reportId: string, dimension: DimensionName, score: number): void {
    this.state(reportId)[dimension] = { status: "saving", score, message: null };
  }

  markSaved(reportId: string, dimension: DimensionName, score: number): void {
    this.state(reportId)[dimension] = { status: "saved", score, message: null };
  }

  markFailed(
    reportId: string,
    dimension: DimensionName,
    previous: DimensionState,
    message: string,
  ): void {
    // rollback to what the server last confirmed, keeping the error visible
    this.state(reportId)[dimension] = {
      status: previous.status === "saved" ? "saved" : "failed",
      score: previous.status === "saved" ? previous.score : null,
      message,
    };
  }

  toggleSkip(reportId: string, dimension: DimensionName): void {
    const current = this.state(reportId)[dimension];
    if (current.status === "skipped") {
      this.state(reportId)[dimension] = { status: "unrated", score: null, message: null };
    } else if (current.status !== "saved") {
      this.state(reportId)[dimension] = { status: "skipped", score: null, message: null };
    }
  }

  /** A report is complete once every dimension is scored or explicitly skipped. */
  isComplete(reportId: string): boolean {
    const state = this.state(reportId);
    return DIMENSIONS.every(
      (dimension) =>
        state[dimension].status === "saved" || state[dimension].status === "skipped",
    );
  }
}
