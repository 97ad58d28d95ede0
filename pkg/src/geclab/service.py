"""Event-sourced annotation and review workflow behind a small REST API.

Every mutation appends one JSON event line to the log and then applies it to
the in-memory state, all under a single lock.  Rebuilding the store from the
log therefore reproduces the exact state, which is what makes restarts safe.
"""

from __future__ import annotations

import json
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Sequence

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .datafiles import Sample, sample_to_dict
from .metrics import AccuracyReport, annotator_accuracy
from .tokenizer import normalize_text


class TaskStatus(Enum):
    OPEN = "open"
    ANNOTATING = "annotating"
    IN_REVIEW = "in_review"
    DONE = "done"


@dataclass
class Task:
    task_id: str
    sentence: str
    context: str | None
    domain: str
    status: TaskStatus = TaskStatus.OPEN


@dataclass
class Submission:
    submission_id: str
    task_id: str
    annotator_id: str
    corrected_text: str | None
    error_free: bool
    need_context: bool
    created_at: float


@dataclass
class Review:
    review_id: str
    task_id: str
    reviewer_id: str
    accepted_submission_ids: list[str]
    added_references: list[str]
    created_at: float


@dataclass
class GoldenReferenceSet:
    task_id: str
    references: list[str]


class WorkflowError(Exception):
    code = "workflow_error"
    status = 400


class ValidationFailure(WorkflowError):
    code = "validation_error"
    status = 400


class DuplicateId(WorkflowError):
    code = "duplicate_id"
    status = 409


class NotFound(WorkflowError):
    code = "not_found"
    status = 404


class StateError(WorkflowError):
    code = "state_error"
    status = 409


_ID_PATTERNS = {
    "task": re.compile(r"t-(\d+)"),
    "submission": re.compile(r"s-(\d+)"),
    "review": re.compile(r"r-(\d+)"),
}
_ID_PREFIX = {"task": "t", "submission": "s", "review": "r"}


class AnnotationStore:
    """Workflow state rebuilt from an append-only JSON-lines event log."""

    def __init__(self, log_path: str | os.PathLike, seed: int = 0):
        self._lock = threading.Lock()
        self._log_path = Path(log_path)
        self._rng = random.Random(seed)
        self._tasks: dict[str, Task] = {}
        self._submissions: dict[str, Submission] = {}
        self._task_submissions: dict[str, list[str]] = {}
        self._assigned: dict[str, set[str]] = {}  # annotator -> tasks ever assigned
        self._reviews: dict[str, Review] = {}  # task id -> review
        self._golden: dict[str, GoldenReferenceSet] = {}
        self._counters = {"task": 0, "submission": 0, "review": 0}
        self._replay()
        self._log_path.parent.mkdir(parents=True, exist_ok=True)
        self._log = open(self._log_path, "a", encoding="utf-8")

    # -- event plumbing ----------------------------------------------------

    def _replay(self) -> None:
        if not self._log_path.exists():
            return
        with open(self._log_path, encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line:
                    continue
                try:
                    event = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{self._log_path}: line {line_no}: bad event: {exc}") from None
                self._apply(event)

    def _append(self, event: dict) -> None:
        self._log.write(json.dumps(event, ensure_ascii=False) + "\n")
        self._log.flush()

    def _record(self, event: dict) -> None:
        self._append(event)
        self._apply(event)

    def _apply(self, event: dict) -> None:
        kind = event["event"]
        if kind == "task_created":
            task_id = event["task_id"]
            self._tasks[task_id] = Task(
                task_id=task_id,
                sentence=event["sentence"],
                context=event.get("context"),
                domain=event.get("domain", ""),
            )
            self._task_submissions.setdefault(task_id, [])
            self._bump_counter("task", task_id)
        elif kind == "task_assigned":
            task = self._tasks[event["task_id"]]
            task.status = TaskStatus.ANNOTATING
            self._assigned.setdefault(event["annotator_id"], set()).add(task.task_id)
        elif kind == "submission_added":
            sub = Submission(
                submission_id=event["submission_id"],
                task_id=event["task_id"],
                annotator_id=event["annotator_id"],
                corrected_text=event.get("corrected_text"),
                error_free=bool(event.get("error_free", False)),
                need_context=bool(event.get("need_context", False)),
                created_at=event.get("created_at", 0.0),
            )
            self._submissions[sub.submission_id] = sub
            self._task_submissions.setdefault(sub.task_id, []).append(sub.submission_id)
            self._tasks[sub.task_id].status = TaskStatus.IN_REVIEW
            self._bump_counter("submission", sub.submission_id)
        elif kind == "review_added":
            review = Review(
                review_id=event["review_id"],
                task_id=event["task_id"],
                reviewer_id=event["reviewer_id"],
                accepted_submission_ids=list(event.get("accepted_submission_ids", [])),
                added_references=list(event.get("added_references", [])),
                created_at=event.get("created_at", 0.0),
            )
            task = self._tasks[review.task_id]
            self._reviews[review.task_id] = review
            self._golden[review.task_id] = self._build_golden(task, review)
            task.status = TaskStatus.DONE
            self._bump_counter("review", review.review_id)
        else:
            raise ValueError(f"unknown event kind {kind!r}")

    def _build_golden(self, task: Task, review: Review) -> GoldenReferenceSet:
        texts = []
        for sid in review.accepted_submission_ids:
            sub = self._submissions[sid]
            # An accepted error-free submission endorses the sentence itself.
            texts.append(sub.corrected_text if sub.corrected_text is not None else task.sentence)
        texts.extend(review.added_references)
        seen: set[str] = set()
        references = []
        for text in texts:
            key = normalize_text(text)
            if key not in seen:
                seen.add(key)
                references.append(text)
        return GoldenReferenceSet(task_id=task.task_id, references=references)

    def _bump_counter(self, kind: str, value: str) -> None:
        m = _ID_PATTERNS[kind].fullmatch(value)
        if m:
            self._counters[kind] = max(self._counters[kind], int(m.group(1)))

    def _next_id(self, kind: str, taken) -> str:
        while True:
            self._counters[kind] += 1
            candidate = f"{_ID_PREFIX[kind]}-{self._counters[kind]}"
            if candidate not in taken:
                return candidate

    # -- mutations ----------------------------------------------------------

    def import_tasks(self, items: Sequence[dict], domain: str = "") -> list[str]:
        """Create tasks from {"sentence": ..., "id"?: ..., "context"?: ...} items."""
        with self._lock:
            offered: list[str | None] = []
            for item in items:
                sentence = item.get("sentence")
                if not isinstance(sentence, str) or not sentence.strip():
                    raise ValidationFailure("every task needs a non-empty sentence")
                offered.append(item.get("id"))
            explicit = [tid for tid in offered if tid]
            dupes = sorted(
                {tid for tid in explicit if tid in self._tasks or explicit.count(tid) > 1}
            )
            if dupes:
                raise DuplicateId(f"duplicate task ids: {', '.join(dupes)}")
            created = []
            for item, tid in zip(items, offered):
                task_id = tid or self._next_id("task", self._tasks)
                self._record(
                    {
                        "event": "task_created",
                        "task_id": task_id,
                        "sentence": item["sentence"],
                        "context": item.get("context"),
                        "domain": domain,
                    }
                )
                created.append(task_id)
            return created

    def next_task(self, annotator_id: str) -> Task | None:
        """Assign a random open task never before given to this annotator."""
        if not annotator_id:
            raise ValidationFailure("annotator id is required")
        with self._lock:
            seen = self._assigned.get(annotator_id, set())
            candidates = [
                t
                for t in self._tasks.values()
                if t.status is TaskStatus.OPEN and t.task_id not in seen
            ]
            if not candidates:
                return None
            task = candidates[self._rng.randrange(len(candidates))]
            self._record(
                {"event": "task_assigned", "task_id": task.task_id, "annotator_id": annotator_id}
            )
            return replace(task)

    def submit(
        self,
        task_id: str,
        annotator_id: str,
        corrected_text: str | None = None,
        error_free: bool = False,
        need_context: bool = False,
    ) -> Submission:
        """Store one annotator's verdict on a task and move it to review."""
        with self._lock:
            task = self._tasks.get(task_id)
            if task is None:
                raise NotFound(f"unknown task {task_id!r}")
            if task.status is not TaskStatus.ANNOTATING:
                raise StateError(
                    f"task {task_id} is {task.status.value}, submissions need an annotating task"
                )
            if task_id not in self._assigned.get(annotator_id, set()):
                raise StateError(f"task {task_id} is not assigned to annotator {annotator_id!r}")
            if (corrected_text is not None) == error_free:
                raise ValidationFailure("provide exactly one of corrected_text or error_free")
            if corrected_text is not None:
                if not corrected_text.strip():
                    raise ValidationFailure("corrected_text must not be empty")
                if normalize_text(corrected_text) == normalize_text(task.sentence):
                    raise ValidationFailure(
                        "corrected_text equals the sentence; use error_free instead"
                    )
            if any(
                self._submissions[sid].annotator_id == annotator_id
                for sid in self._task_submissions.get(task_id, [])
            ):
                raise StateError(f"annotator {annotator_id!r} already submitted for {task_id}")
            sid = self._next_id("submission", self._submissions)
            self._record(
                {
                    "event": "submission_added",
                    "submission_id": sid,
                    "task_id": task_id,
                    "annotator_id": annotator_id,
                    "corrected_text": corrected_text,
                    "error_free": error_free,
                    "need_context": need_context,
                    "created_at": time.time(),
                }
            )
            return replace(self._submissions[sid])

    def review(
        self,
        task_id: str,
        reviewer_id: str,
        accepted_submission_ids: Sequence[str] = (),
        added_references: Sequence[str] = (),
    ) -> GoldenReferenceSet:
        """Close a task: accept submissions, add references, build the golden set."""
        with self._lock:
            task = self._tasks.get(task_id)
            if task is None:
                raise NotFound(f"unknown task {task_id!r}")
            if task.status is not TaskStatus.IN_REVIEW:
                raise StateError(f"task {task_id} is {task.status.value}, expected in_review")
            on_task = set(self._task_submissions.get(task_id, []))
            unknown = sorted(set(accepted_submission_ids) - on_task)
            if unknown:
                raise ValidationFailure(
                    f"submissions not on task {task_id}: {', '.join(unknown)}"
                )
            if any(not ref.strip() for ref in added_references):
                raise ValidationFailure("added references must not be empty strings")
            rid = self._next_id("review", {r.review_id for r in self._reviews.values()})
            self._record(
                {
                    "event": "review_added",
                    "review_id": rid,
                    "task_id": task_id,
                    "reviewer_id": reviewer_id,
                    "accepted_submission_ids": list(accepted_submission_ids),
                    "added_references": list(added_references),
                    "created_at": time.time(),
                }
            )
            golden = self._golden[task_id]
            return GoldenReferenceSet(golden.task_id, list(golden.references))

    # -- queries -------------------------------------------------------------

    def get_task(self, task_id: str) -> Task:
        with self._lock:
            task = self._tasks.get(task_id)
            if task is None:
                raise NotFound(f"unknown task {task_id!r}")
            return replace(task)

    def review_queue(self) -> list[tuple[Task, list[Submission]]]:
        with self._lock:
            out = []
            for task in self._tasks.values():
                if task.status is not TaskStatus.IN_REVIEW:
                    continue
                subs = [
                    replace(self._submissions[sid])
                    for sid in self._task_submissions.get(task.task_id, [])
                ]
                out.append((replace(task), subs))
            return out

    def export_dataset(self, domain: str | None = None) -> list[Sample]:
        """One sample per reviewed task with a non-empty golden set.

        Tasks rejected wholesale (nothing accepted, nothing added) have no
        usable reference and are skipped.  Tasks whose annotators flagged
        missing context carry need_context=True for consumers to filter.
        """
        with self._lock:
            out = []
            for task in self._tasks.values():
                if task.status is not TaskStatus.DONE:
                    continue
                if domain and task.domain != domain:
                    continue
                golden = self._golden[task.task_id]
                if not golden.references:
                    continue
                need_context = any(
                    self._submissions[sid].need_context
                    for sid in self._task_submissions.get(task.task_id, [])
                )
                out.append(
                    Sample(
                        id=task.task_id,
                        source=task.sentence,
                        references=list(golden.references),
                        domain=task.domain,
                        need_context=need_context,
                    )
                )
            return out

    def annotator_ledger(self) -> dict[str, list[tuple[str, list[str]]]]:
        """Reviewed submissions per annotator, paired with golden references."""
        with self._lock:
            ledger: dict[str, list[tuple[str, list[str]]]] = {}
            for task in self._tasks.values():
                if task.status is not TaskStatus.DONE:
                    continue
                golden = self._golden[task.task_id].references
                if not golden:
                    continue
                for sid in self._task_submissions.get(task.task_id, []):
                    sub = self._submissions[sid]
                    text = (
                        sub.corrected_text if sub.corrected_text is not None else task.sentence
                    )
                    ledger.setdefault(sub.annotator_id, []).append((text, list(golden)))
            return ledger

    def annotator_report(self) -> AccuracyReport:
        return annotator_accuracy(self.annotator_ledger())

    def close(self) -> None:
        self._log.close()


# -- HTTP layer ---------------------------------------------------------------


def _task_dict(task: Task) -> dict:
    return {
        "task_id": task.task_id,
        "sentence": task.sentence,
        "context": task.context,
        "domain": task.domain,
        "status": task.status.value,
    }


def _submission_dict(sub: Submission) -> dict:
    return {
        "submission_id": sub.submission_id,
        "task_id": sub.task_id,
        "annotator_id": sub.annotator_id,
        "corrected_text": sub.corrected_text,
        "error_free": sub.error_free,
        "need_context": sub.need_context,
        "created_at": sub.created_at,
    }


class TaskIn(BaseModel):
    id: str | None = None
    sentence: str
    context: str | None = None


class ImportRequest(BaseModel):
    domain: str = ""
    tasks: list[TaskIn] = []
    sentences: list[str] = []


class SubmissionRequest(BaseModel):
    task_id: str
    annotator_id: str
    corrected_text: str | None = None
    error_free: bool = False
    need_context: bool = False


class ReviewRequest(BaseModel):
    task_id: str
    reviewer_id: str
    accepted_submission_ids: list[str] = []
    added_references: list[str] = []


def create_app(store: AnnotationStore) -> FastAPI:
    """Build the FastAPI app over one store instance."""
    app = FastAPI(title="geclab annotation service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(WorkflowError)
    async def workflow_error(_request, exc: WorkflowError):
        return JSONResponse({"error": exc.code, "detail": str(exc)}, status_code=exc.status)

    @app.exception_handler(RequestValidationError)
    async def bad_request(_request, exc: RequestValidationError):
        return JSONResponse(
            {"error": "validation_error", "detail": str(exc)}, status_code=400
        )

    @app.post("/tasks")
    async def import_tasks(body: ImportRequest):
        items = [t.model_dump() for t in body.tasks]
        items.extend({"sentence": s} for s in body.sentences)
        if not items:
            raise ValidationFailure("no tasks in request")
        created = store.import_tasks(items, body.domain)
        return {"created": len(created), "task_ids": created}

    @app.get("/tasks/next")
    async def next_task(annotator: str = ""):
        task = store.next_task(annotator)
        return {"task": _task_dict(task) if task else None}

    @app.post("/submissions")
    async def add_submission(body: SubmissionRequest):
        sub = store.submit(
            task_id=body.task_id,
            annotator_id=body.annotator_id,
            corrected_text=body.corrected_text,
            error_free=body.error_free,
            need_context=body.need_context,
        )
        return {"submission": _submission_dict(sub)}

    @app.get("/review/queue")
    async def review_queue():
        return {
            "tasks": [
                {**_task_dict(task), "submissions": [_submission_dict(s) for s in subs]}
                for task, subs in store.review_queue()
            ]
        }

    @app.post("/reviews")
    async def add_review(body: ReviewRequest):
        golden = store.review(
            task_id=body.task_id,
            reviewer_id=body.reviewer_id,
            accepted_submission_ids=body.accepted_submission_ids,
            added_references=body.added_references,
        )
        return {"golden": {"task_id": golden.task_id, "references": golden.references}}

    @app.get("/export")
    async def export(domain: str | None = None):
        lines = [
            json.dumps(sample_to_dict(s), ensure_ascii=False)
            for s in store.export_dataset(domain)
        ]
        body = "\n".join(lines) + ("\n" if lines else "")
        return PlainTextResponse(body, media_type="application/x-ndjson")

    @app.get("/stats/annotators")
    async def annotator_stats():
        return store.annotator_report().to_dict()

    return app


def run_server(log_path: str, addr: str = "127.0.0.1:8000", seed: int = 0) -> None:
    """Start the service; ANNO_LOG and ANNO_ADDR provide defaults upstream."""
    import uvicorn

    host, _, port_s = addr.partition(":")
    store = AnnotationStore(log_path, seed=seed)
    app = create_app(store)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port_s or 8000), log_level="warning")
