/** Typed REST client for the annotation service.
 *
 * Every method maps 1:1 onto a service endpoint; the UI holds no state the
 * service cannot reproduce. Non-2xx responses become ApiError carrying the
 * service's `{error, detail}` envelope.
 */

export type TaskStatus = "open" | "annotating" | "in_review" | "done";

export interface Task {
  task_id: string;
  sentence: string;
  context: string | null;
  domain: string;
  status: TaskStatus;
}

export interface Submission {
  submission_id: string;
  task_id: string;
  annotator_id: string;
  corrected_text: string | null;
  error_free: boolean;
  need_context: boolean;
  created_at: number;
}

/** A task in the review queue, with the submissions awaiting a verdict. */
export interface ReviewTask extends Task {
  submissions: Submission[];
}

export interface TaskIn {
  id?: string;
  sentence: string;
  context?: string | null;
}

export interface ImportRequest {
  domain?: string;
  tasks?: TaskIn[];
  sentences?: string[];
}

export interface ImportResult {
  created: number;
  task_ids: string[];
}

export interface SubmissionRequest {
  task_id: string;
  annotator_id: string;
  corrected_text?: string;
  error_free?: boolean;
  need_context?: boolean;
}

export interface ReviewRequest {
  task_id: string;
  reviewer_id: string;
  accepted_submission_ids: string[];
  added_references: string[];
}

export interface GoldenSet {
  task_id: string;
  references: string[];
}

export interface ExportedSample {
  id: string;
  source: string;
  references: string[];
  domain: string;
  need_context?: boolean;
}

export interface AnnotatorStats {
  per_annotator: Record<string, { accuracy: number; correct: number; total: number }>;
  mean: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Client {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    // Wrap the global so the browser sees it invoked on globalThis.
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  get baseUrl(): string {
    return this.base;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const res = await this.fetchFn(this.base + path, init);
    if (!res.ok) {
      let code = "http_error";
      let detail = `HTTP ${res.status}`;
      try {
        const body: unknown = await res.json();
        if (body && typeof body === "object") {
          const env = body as { error?: unknown; detail?: unknown };
          if (typeof env.error === "string") code = env.error;
          if (env.detail !== undefined) detail = String(env.detail);
        }
      } catch {
        // non-JSON error body; keep the HTTP status as the detail
      }
      throw new ApiError(res.status, code, detail);
    }
    return res;
  }

  private post(path: string, body: unknown): Promise<Response> {
    return this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async importTasks(req: ImportRequest): Promise<ImportResult> {
    const res = await this.post("/tasks", req);
    return (await res.json()) as ImportResult;
  }

  async nextTask(annotatorId: string): Promise<Task | null> {
    const res = await this.request(`/tasks/next?annotator=${encodeURIComponent(annotatorId)}`);
    const body = (await res.json()) as { task: Task | null };
    return body.task;
  }

  async submit(req: SubmissionRequest): Promise<Submission> {
    const res = await this.post("/submissions", req);
    const body = (await res.json()) as { submission: Submission };
    return body.submission;
  }

  async reviewQueue(): Promise<ReviewTask[]> {
    const res = await this.request("/review/queue");
    const body = (await res.json()) as { tasks: ReviewTask[] };
    return body.tasks;
  }

  async postReview(req: ReviewRequest): Promise<GoldenSet> {
    const res = await this.post("/reviews", req);
    const body = (await res.json()) as { golden: GoldenSet };
    return body.golden;
  }

  async exportDataset(domain?: string): Promise<ExportedSample[]> {
    const query = domain ? `?domain=${encodeURIComponent(domain)}` : "";
    const res = await this.request(`/export${query}`);
    const text = await res.text();
    return text
      .split("\n")
      .filter((line) => line.trim() !== "")
      .map((line) => JSON.parse(line) as ExportedSample);
  }

  async annotatorStats(): Promise<AnnotatorStats> {
    const res = await this.request("/stats/annotators");
    return (await res.json()) as AnnotatorStats;
  }
}
