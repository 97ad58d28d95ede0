/** End-to-end tests: both view flows driven against a live service.
 *
 * A real server process is booted once for the file with a fresh event log;
 * every piece of state the flows display is then read back through the REST
 * API, including the final golden-reference export.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { createServer } from "node:net";

import { ApiError, Client, type ReviewTask } from "../src/api.js";
import { AnnotateFlow, ReviewFlow, normalizeText } from "../src/flows.js";

let proc: ChildProcess | null = null;
let logDir = "";
let client: Client;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.listen(0, "127.0.0.1", () => {
      const addr = srv.address();
      if (addr === null || typeof addr === "string") {
        reject(new Error("could not allocate a port"));
        return;
      }
      const port = addr.port;
      srv.close(() => resolve(port));
    });
    srv.on("error", reject);
  });
}

async function waitReady(base: string, timeoutMs = 20000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError = "";
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${base}/review/queue`);
      if (res.ok) return;
      lastError = `HTTP ${res.status}`;
    } catch (err) {
      lastError = err instanceof Error ? err.message : String(err);
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error(`service did not come up: ${lastError}`);
}

let sweepCounter = 0;

/** Submit error-free on every open task so later tests start from a known pool.
 *
 * submit() advances to the next task by itself, so the loop drives on
 * flow.task instead of calling loadNext again (which would abandon the
 * freshly assigned task).
 */
async function drainOpenTasks(): Promise<void> {
  sweepCounter += 1;
  const sweeper = new AnnotateFlow(client, `sweeper-${sweepCounter}`);
  await sweeper.loadNext();
  while (sweeper.task !== null) {
    sweeper.setErrorFree(true);
    const stored = await sweeper.submit();
    if (stored === null) throw new Error(`sweep failed: ${sweeper.error}`);
  }
}

/** Point the review flow at one specific task in its queue. */
async function seekTask(flow: ReviewFlow, taskId: string): Promise<ReviewTask> {
  await flow.loadQueue();
  for (let hops = 0; hops < flow.queueLength; hops += 1) {
    const cur = flow.current;
    if (cur !== null && cur.task_id === taskId) return cur;
    flow.next();
  }
  throw new Error(`task ${taskId} not in review queue (${flow.queueLength} entries)`);
}

beforeAll(async () => {
  const port = await freePort();
  logDir = mkdtempSync(join(tmpdir(), "annoweb-test-"));
  proc = spawn(
    "python3",
    [
      "-m",
      "geclab.cli",
      "serve",
      "--log",
      join(logDir, "events.jsonl"),
      "--addr",
      `127.0.0.1:${port}`,
      "--seed",
      "7",
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  proc.stderr?.on("data", (chunk: Buffer) => {
    stderr += chunk.toString();
  });
  proc.on("exit", (code) => {
    if (code !== null && code !== 0) {
      console.error(`service exited with ${code}\n${stderr}`);
    }
  });
  const base = `http://127.0.0.1:${port}`;
  await waitReady(base);
  client = new Client(base);
});

afterAll(() => {
  proc?.kill("SIGTERM");
  if (logDir !== "") rmSync(logDir, { recursive: true, force: true });
});

describe("normalizeText", () => {
  it("applies NFC and trims, like the service", () => {
    expect(normalizeText("  天气很好 ")).toBe("天气很好");
    expect(normalizeText("café")).toBe("café");
    expect(normalizeText(" \t ")).toBe("");
  });
});

describe("annotate flow", () => {
  it("pre-fills the draft and enables Submit on exactly one verdict", async () => {
    await drainOpenTasks();
    await client.importTasks({
      domain: "w-xor",
      tasks: [{ id: "w-xor-1", sentence: "天汽很好", context: "聊天记录" }],
    });
    const flow = new AnnotateFlow(client, "ann-xor");
    const task = await flow.loadNext();
    expect(task?.task_id).toBe("w-xor-1");
    expect(task?.context).toBe("聊天记录");
    expect(flow.draft).toBe("天汽很好");

    // untouched draft, no error-free: nothing to submit
    expect(flow.canSubmit).toBe(false);
    // a genuine rewrite alone enables it
    flow.setDraft("天气很好");
    expect(flow.canSubmit).toBe(true);
    // rewrite + error-free is two verdicts: disabled again
    flow.setErrorFree(true);
    expect(flow.canSubmit).toBe(false);
    // error-free alone re-enables
    flow.setDraft("天汽很好");
    expect(flow.canSubmit).toBe(true);
    // whitespace-only edits do not count as a rewrite
    flow.setErrorFree(false);
    flow.setDraft("  天汽很好 ");
    expect(flow.canSubmit).toBe(false);
    // an emptied text box is not a rewrite either
    flow.setDraft("");
    expect(flow.canSubmit).toBe(false);

    flow.setDraft("天气很好");
    const stored = await flow.submit();
    expect(stored?.corrected_text).toBe("天气很好");
    expect(stored?.error_free).toBe(false);
    expect(flow.phase).toBe("drained"); // advanced, pool is empty

    const queue = await client.reviewQueue();
    const entry = queue.find((t) => t.task_id === "w-xor-1");
    expect(entry?.submissions.map((s) => s.corrected_text)).toEqual(["天气很好"]);
  });

  it("posts the error-free marker and the need-context flag", async () => {
    await drainOpenTasks();
    await client.importTasks({ domain: "w-flags", tasks: [{ id: "w-flags-1", sentence: "他去公园" }] });
    const flow = new AnnotateFlow(client, "ann-flags");
    await flow.loadNext();
    flow.setErrorFree(true);
    flow.setNeedContext(true);
    expect(flow.canSubmit).toBe(true);
    const stored = await flow.submit();
    expect(stored?.corrected_text).toBeNull();
    expect(stored?.error_free).toBe(true);
    expect(stored?.need_context).toBe(true);
  });

  it("surfaces a service rejection inline and keeps the typed text", async () => {
    await drainOpenTasks();
    await client.importTasks({ domain: "w-err", tasks: [{ id: "w-err-1", sentence: "学生写论文" }] });
    const flow = new AnnotateFlow(client, "ann-err");
    await flow.loadNext();
    flow.setDraft("学生写了论文");
    // The same annotator races the flow from another tab: task leaves
    // the annotating state before the flow's own submit arrives.
    await client.submit({ task_id: "w-err-1", annotator_id: "ann-err", corrected_text: "学生写好论文" });

    const stored = await flow.submit();
    expect(stored).toBeNull();
    expect(flow.error).toMatch(/w-err-1/);
    expect(flow.phase).toBe("ready");
    expect(flow.draft).toBe("学生写了论文"); // typed text survives the error
    expect(flow.task?.task_id).toBe("w-err-1");
  });

  it("reports a drained pool as such", async () => {
    await drainOpenTasks();
    const flow = new AnnotateFlow(client, "ann-drained");
    const task = await flow.loadNext();
    expect(task).toBeNull();
    expect(flow.phase).toBe("drained");
    expect(flow.canSubmit).toBe(false);
  });
});

describe("review flow", () => {
  it("accepts a checked submission plus an added reference", async () => {
    await drainOpenTasks();
    await client.importTasks({ domain: "w-rev", tasks: [{ id: "w-rev-1", sentence: "天汽很好" }] });
    const ann = new AnnotateFlow(client, "ann-rev");
    await ann.loadNext();
    ann.setDraft("天气很好");
    await ann.submit();

    const flow = new ReviewFlow(client, "rev-1");
    const task = await seekTask(flow, "w-rev-1");
    expect(task.submissions).toHaveLength(1);
    const sid = task.submissions[0]!.submission_id;

    flow.toggleAccept(sid);
    expect(flow.checkedIds).toEqual([sid]);
    // an id not on the task is ignored
    flow.toggleAccept("s-999999");
    expect(flow.checkedIds).toEqual([sid]);

    // empty added reference blocks Submit client-side
    const idx = flow.addReferenceField();
    expect(flow.canSubmit).toBe(false);
    flow.setAddedReference(idx, "   ");
    expect(flow.canSubmit).toBe(false);
    flow.setAddedReference(idx, "天气真好");
    expect(flow.canSubmit).toBe(true);

    const golden = await flow.submitReview();
    expect(golden?.references).toEqual(["天气很好", "天气真好"]);

    const rows = await client.exportDataset("w-rev");
    expect(rows).toEqual([
      { id: "w-rev-1", source: "天汽很好", references: ["天气很好", "天气真好"], domain: "w-rev" },
    ]);
  });

  it("treats an all-unchecked review as a rejection", async () => {
    await drainOpenTasks();
    await client.importTasks({ domain: "w-rej", tasks: [{ id: "w-rej-1", sentence: "他说话开心" }] });
    const ann = new AnnotateFlow(client, "ann-rej");
    await ann.loadNext();
    ann.setDraft("他说话很开心");
    await ann.submit();

    const flow = new ReviewFlow(client, "rev-rej");
    await seekTask(flow, "w-rej-1");
    expect(flow.canSubmit).toBe(true); // checking none is a valid rejection
    const golden = await flow.submitReview();
    expect(golden?.references).toEqual([]);

    const rows = await client.exportDataset("w-rej");
    expect(rows).toEqual([]); // rejected tasks never reach the dataset
  });

  it("refreshes the queue when the task was closed elsewhere", async () => {
    await drainOpenTasks();
    await client.importTasks({ domain: "w-stale", tasks: [{ id: "w-stale-1", sentence: "朋友去海边" }] });
    const ann = new AnnotateFlow(client, "ann-stale");
    await ann.loadNext();
    ann.setErrorFree(true);
    await ann.submit();

    const first = new ReviewFlow(client, "rev-a");
    const second = new ReviewFlow(client, "rev-b");
    const task = await seekTask(first, "w-stale-1");
    await seekTask(second, "w-stale-1");

    const winner = await first.submitReview();
    expect(winner).not.toBeNull();

    second.toggleAccept(task.submissions[0]!.submission_id);
    const loser = await second.submitReview();
    expect(loser).toBeNull();
    expect(second.error).toMatch(/queue refreshed/);
    // the stale task is gone after the automatic reload
    const remaining: string[] = [];
    for (let i = 0; i < second.queueLength; i += 1) {
      const cur = second.current;
      if (cur !== null) remaining.push(cur.task_id);
      second.next();
    }
    expect(remaining).not.toContain("w-stale-1");
  });

  it("navigates the queue in order and resets the verdict on move", async () => {
    await drainOpenTasks();
    await client.importTasks({
      domain: "w-nav",
      tasks: [
        { id: "w-nav-1", sentence: "工作时间很长" },
        { id: "w-nav-2", sentence: "问题不知道" },
      ],
    });
    const ann = new AnnotateFlow(client, "ann-nav");
    await ann.loadNext();
    while (ann.task !== null) {
      ann.setErrorFree(true);
      const stored = await ann.submit();
      if (stored === null) throw new Error(`submit failed: ${ann.error}`);
    }

    const flow = new ReviewFlow(client, "rev-nav");
    const task = await seekTask(flow, "w-nav-1");
    flow.toggleAccept(task.submissions[0]!.submission_id);
    flow.addReferenceField();
    expect(flow.checkedIds).toHaveLength(1);
    flow.next();
    // moving to another task abandons the half-built verdict
    expect(flow.checkedIds).toEqual([]);
    expect(flow.added).toEqual([]);
    flow.previous();
    expect(flow.current?.task_id).toBe("w-nav-1");
  });
});

describe("end to end", () => {
  it("exports exactly the golden references built through both flows", async () => {
    await drainOpenTasks();
    await client.importTasks({
      domain: "w-e2e",
      tasks: [
        { id: "w-e2e-1", sentence: "天汽很好", context: "上文：昨天下雨" },
        { id: "w-e2e-2", sentence: "他去了公园" },
      ],
    });

    // Annotator drains both tasks: one rewrite, one error-free + need-context.
    const ann = new AnnotateFlow(client, "ann-e2e");
    await ann.loadNext();
    while (ann.task !== null) {
      if (ann.task.task_id === "w-e2e-1") {
        ann.setDraft("天气很好");
      } else {
        ann.setErrorFree(true);
        ann.setNeedContext(true);
      }
      const stored = await ann.submit();
      if (stored === null) throw new Error(`submit failed: ${ann.error}`);
    }

    // Reviewer accepts everything and supplements one correction.
    const rev = new ReviewFlow(client, "rev-e2e");
    const first = await seekTask(rev, "w-e2e-1");
    rev.toggleAccept(first.submissions[0]!.submission_id);
    rev.setAddedReference(rev.addReferenceField(), "天气真好");
    const goldenFirst = await rev.submitReview();
    expect(goldenFirst?.references).toEqual(["天气很好", "天气真好"]);

    const second = await seekTask(rev, "w-e2e-2");
    rev.toggleAccept(second.submissions[0]!.submission_id);
    const goldenSecond = await rev.submitReview();
    // accepting an error-free submission endorses the original sentence
    expect(goldenSecond?.references).toEqual(["他去了公园"]);

    const rows = await client.exportDataset("w-e2e");
    rows.sort((a, b) => a.id.localeCompare(b.id));
    expect(rows).toEqual([
      {
        id: "w-e2e-1",
        source: "天汽很好",
        references: ["天气很好", "天气真好"],
        domain: "w-e2e",
      },
      {
        id: "w-e2e-2",
        source: "他去了公园",
        references: ["他去了公园"],
        domain: "w-e2e",
        need_context: true,
      },
    ]);

    const stats = await client.annotatorStats();
    expect(stats.per_annotator["ann-e2e"]).toBeDefined();
    expect(stats.per_annotator["ann-e2e"]!.total).toBe(2);
    expect(stats.per_annotator["ann-e2e"]!.accuracy).toBe(1.0);
    expect(stats.mean).toBeGreaterThan(0);
  });
});

describe("api client", () => {
  it("unwraps the service error envelope into ApiError", async () => {
    await expect(client.importTasks({ domain: "w-apierr" })).rejects.toMatchObject({
      name: "ApiError",
      status: 400,
      code: "validation_error",
    });
    try {
      await client.importTasks({ domain: "w-apierr" });
      expect.unreachable("import of nothing must fail");
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).detail).toMatch(/no tasks/);
    }
  });
});
