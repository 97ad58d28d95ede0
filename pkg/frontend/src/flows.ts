/** View controllers for the annotator and reviewer screens.
 *
 * Both classes are plain state machines over the REST client, free of any
 * DOM dependency, so they can be driven headlessly in tests and bound to
 * whatever rendering layer hosts them. Service rejections never throw out
 * of a flow method: they land in `error` with the user's typed input kept
 * intact. Throwing is reserved for caller bugs such as submitting while
 * `canSubmit` is false.
 */

import { ApiError, Client, GoldenSet, ReviewTask, Submission, Task } from "./api.js";

/** The normalization the service applies before comparing texts. */
export function normalizeText(text: string): string {
  return text.normalize("NFC").trim();
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) return err.detail;
  return err instanceof Error ? err.message : String(err);
}

export type AnnotatePhase = "idle" | "loading" | "ready" | "submitting" | "drained";

export class AnnotateFlow {
  private task_: Task | null = null;
  private draft_ = "";
  private errorFree_ = false;
  private needContext_ = false;
  private error_: string | null = null;
  private phase_: AnnotatePhase = "idle";

  constructor(
    private readonly client: Client,
    readonly annotatorId: string,
  ) {
    if (normalizeText(annotatorId) === "") {
      throw new Error("annotator id must not be empty");
    }
  }

  get task(): Task | null {
    return this.task_;
  }

  get draft(): string {
    return this.draft_;
  }

  get errorFree(): boolean {
    return this.errorFree_;
  }

  get needContext(): boolean {
    return this.needContext_;
  }

  get error(): string | null {
    return this.error_;
  }

  get phase(): AnnotatePhase {
    return this.phase_;
  }

  /** True when the text box holds a genuine, non-empty rewrite. */
  get edited(): boolean {
    if (this.task_ === null) return false;
    const draft = normalizeText(this.draft_);
    return draft !== "" && draft !== normalizeText(this.task_.sentence);
  }

  /** Submit is available iff exactly one of (edited text, error-free) holds. */
  get canSubmit(): boolean {
    return this.phase_ === "ready" && this.edited !== this.errorFree_;
  }

  /** Fetch and lock the next task; resets the draft to its sentence. */
  async loadNext(): Promise<Task | null> {
    this.phase_ = "loading";
    this.error_ = null;
    try {
      const task = await this.client.nextTask(this.annotatorId);
      this.task_ = task;
      this.draft_ = task === null ? "" : task.sentence;
      this.errorFree_ = false;
      this.needContext_ = false;
      this.phase_ = task === null ? "drained" : "ready";
      return task;
    } catch (err) {
      this.error_ = describeError(err);
      this.phase_ = this.task_ === null ? "idle" : "ready";
      return null;
    }
  }

  setDraft(text: string): void {
    this.draft_ = text;
  }

  setErrorFree(on: boolean): void {
    this.errorFree_ = on;
  }

  setNeedContext(on: boolean): void {
    this.needContext_ = on;
  }

  /** Post the verdict, then advance to the next task. */
  async submit(): Promise<Submission | null> {
    const task = this.task_;
    if (!this.canSubmit || task === null) {
      throw new Error("submit called while unavailable");
    }
    this.phase_ = "submitting";
    this.error_ = null;
    const payload = this.errorFree_
      ? {
          task_id: task.task_id,
          annotator_id: this.annotatorId,
          error_free: true,
          need_context: this.needContext_,
        }
      : {
          task_id: task.task_id,
          annotator_id: this.annotatorId,
          corrected_text: this.draft_,
          need_context: this.needContext_,
        };
    try {
      const submission = await this.client.submit(payload);
      await this.loadNext();
      return submission;
    } catch (err) {
      // Keep the typed text and flags; only surface the message.
      this.error_ = describeError(err);
      this.phase_ = "ready";
      return null;
    }
  }
}

export class ReviewFlow {
  private queue_: ReviewTask[] = [];
  private index_ = 0;
  private checked_ = new Set<string>();
  private added_: string[] = [];
  private error_: string | null = null;
  private lastGolden_: GoldenSet | null = null;
  private busy_ = false;

  constructor(
    private readonly client: Client,
    readonly reviewerId: string,
  ) {
    if (normalizeText(reviewerId) === "") {
      throw new Error("reviewer id must not be empty");
    }
  }

  get queueLength(): number {
    return this.queue_.length;
  }

  get position(): number {
    return this.queue_.length === 0 ? -1 : this.index_;
  }

  get current(): ReviewTask | null {
    return this.queue_[this.index_] ?? null;
  }

  get error(): string | null {
    return this.error_;
  }

  get lastGolden(): GoldenSet | null {
    return this.lastGolden_;
  }

  /** Accepted ids, in the display order of the current task's submissions. */
  get checkedIds(): string[] {
    const task = this.current;
    if (task === null) return [];
    return task.submissions
      .map((s) => s.submission_id)
      .filter((id) => this.checked_.has(id));
  }

  isChecked(submissionId: string): boolean {
    return this.checked_.has(submissionId);
  }

  get added(): readonly string[] {
    return this.added_;
  }

  async loadQueue(): Promise<void> {
    try {
      this.queue_ = await this.client.reviewQueue();
      this.index_ = 0;
      this.resetDraft();
      this.error_ = null;
    } catch (err) {
      this.error_ = describeError(err);
    }
  }

  private resetDraft(): void {
    this.checked_.clear();
    this.added_ = [];
  }

  /** Queue-ordered navigation; moving resets the in-progress verdict. */
  next(): void {
    if (this.index_ + 1 < this.queue_.length) {
      this.index_ += 1;
      this.resetDraft();
    }
  }

  previous(): void {
    if (this.index_ > 0) {
      this.index_ -= 1;
      this.resetDraft();
    }
  }

  toggleAccept(submissionId: string): void {
    const task = this.current;
    if (task === null) return;
    if (!task.submissions.some((s) => s.submission_id === submissionId)) return;
    if (this.checked_.has(submissionId)) {
      this.checked_.delete(submissionId);
    } else {
      this.checked_.add(submissionId);
    }
  }

  /** Append a new-correction input; returns its index. */
  addReferenceField(): number {
    this.added_.push("");
    return this.added_.length - 1;
  }

  setAddedReference(index: number, text: string): void {
    if (index >= 0 && index < this.added_.length) {
      this.added_[index] = text;
    }
  }

  removeReferenceField(index: number): void {
    if (index >= 0 && index < this.added_.length) {
      this.added_.splice(index, 1);
    }
  }

  /** Checking nothing is a valid rejection; empty added texts are not. */
  get canSubmit(): boolean {
    return (
      this.current !== null &&
      !this.busy_ &&
      this.added_.every((text) => normalizeText(text) !== "")
    );
  }

  /** Post the verdict: exactly the checked ids plus the added texts. */
  async submitReview(): Promise<GoldenSet | null> {
    const task = this.current;
    if (!this.canSubmit || task === null) {
      throw new Error("submitReview called while unavailable");
    }
    this.busy_ = true;
    this.error_ = null;
    try {
      const golden = await this.client.postReview({
        task_id: task.task_id,
        reviewer_id: this.reviewerId,
        accepted_submission_ids: this.checkedIds,
        added_references: [...this.added_],
      });
      this.lastGolden_ = golden;
      this.queue_.splice(this.index_, 1);
      if (this.index_ >= this.queue_.length) {
        this.index_ = Math.max(0, this.queue_.length - 1);
      }
      this.resetDraft();
      return golden;
    } catch (err) {
      if (err instanceof ApiError && err.code === "state_error") {
        // Someone else closed this task; resync and tell the reviewer.
        await this.loadQueue();
        this.error_ = `Task changed on the server, queue refreshed (${err.detail})`;
      } else {
        this.error_ = describeError(err);
      }
      return null;
    } finally {
      this.busy_ = false;
    }
  }
}
