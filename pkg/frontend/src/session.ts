/** Workbench session: the annotator's state machine over the service API.
 *
 * Holds the ranked passage list, the selected passage, the draft under
 * construction (m1, m2, answer, question), the latest server validation, and
 * the running count toward the session target. Accept only goes through when
 * the *server* said the current draft passes, so the UI never submits a pair
 * the service would reject.
 */

import { ApiClient } from "./api.js";
import { preValidate, spanText, type PreValidation } from "./spans.js";
import type {
  DraftPair,
  PairRecord,
  PassageDetail,
  PassageScore,
  Span,
  ValidateResponse,
} from "./types.js";

export class WorkbenchSession {
  passages: PassageScore[] = [];
  detail: PassageDetail | null = null;
  question = "";
  m1: Span | null = null;
  m2: Span | null = null;
  lastResponse: ValidateResponse | null = null;
  /** True when lastResponse still describes the current draft. */
  validationCurrent = false;
  pairs: PairRecord[] = [];
  acceptedCount = 0;
  readonly sessionTarget: number;

  constructor(
    private readonly api: ApiClient,
    options: { sessionTarget?: number } = {},
  ) {
    this.sessionTarget = options.sessionTarget ?? 200;
  }

  async loadPassages(): Promise<PassageScore[]> {
    this.passages = await this.api.listPassages("score");
    return this.passages;
  }

  async selectPassage(passageId: string): Promise<PassageDetail> {
    this.detail = await this.api.getPassage(passageId);
    this.question = "";
    this.m1 = null;
    this.m2 = null;
    this.invalidate();
    return this.detail;
  }

  setQuestion(question: string): void {
    this.question = question;
    this.invalidate();
  }

  setM1(span: Span): void {
    this.m1 = span;
    this.invalidate();
  }

  /** Selecting m2 also fixes the answer: the guideline requires answer = m2. */
  setM2(span: Span): void {
    this.m2 = span;
    this.invalidate();
  }

  private invalidate(): void {
    this.validationCurrent = false;
  }

  get answer(): { text: string; answer_start: number } | null {
    if (!this.detail || !this.m2) {
      return null;
    }
    return { text: spanText(this.detail.text, this.m2), answer_start: this.m2.start };
  }

  draft(): DraftPair {
    if (!this.detail || !this.m1 || !this.m2) {
      throw new Error("draft needs a passage, m1, and m2");
    }
    const answer = this.answer;
    if (!answer) {
      throw new Error("draft needs an answer span");
    }
    return {
      passage_id: this.detail.passage_id,
      question: this.question,
      answer,
      m1: this.m1,
      m2: this.m2,
    };
  }

  get draftReady(): boolean {
    return Boolean(this.detail && this.m1 && this.m2);
  }

  /** Instant client-side advisory check of the current draft. */
  precheck(): PreValidation | null {
    if (!this.draftReady || !this.detail) {
      return null;
    }
    return preValidate(this.draft(), this.detail);
  }

  /** Server validation of the current draft (the live-feedback call). */
  async validate(): Promise<ValidateResponse> {
    this.lastResponse = await this.api.validate(this.draft());
    this.validationCurrent = true;
    return this.lastResponse;
  }

  get canAccept(): boolean {
    return Boolean(this.validationCurrent && this.lastResponse?.validation.passed);
  }

  /**
   * Accept the current draft. Re-validates first when the draft changed
   * since the last validation; refuses locally when validation fails.
   */
  async accept(): Promise<PairRecord> {
    if (!this.validationCurrent) {
      await this.validate();
    }
    if (!this.canAccept) {
      throw new Error("draft does not pass validation; fix it before accepting");
    }
    const record = await this.api.acceptPair(this.draft());
    this.acceptedCount += 1;
    this.pairs.push(record);
    this.invalidate();
    return record;
  }

  async refreshPairs(): Promise<PairRecord[]> {
    this.pairs = await this.api.listPairs();
    this.acceptedCount = this.pairs.filter((p) => p.status === "accepted").length;
    return this.pairs;
  }

  progressLabel(): string {
    return `${this.acceptedCount} / ${this.sessionTarget} pairs`;
  }
}
