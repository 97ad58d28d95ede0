/** Single-page UI: #/annotate and #/review over the annotation service.
 *
 * All state lives in the flow controllers; this file only renders them and
 * forwards DOM events. The user id and service URL stick for the browser
 * session.
 */

import { Client } from "./api.js";
import { AnnotateFlow, ReviewFlow } from "./flows.js";

const USER_KEY = "annoweb.user";
const SERVICE_KEY = "annoweb.service";
const DEFAULT_SERVICE = "http://127.0.0.1:8000";

interface AppState {
  client: Client;
  annotate: AnnotateFlow | null;
  review: ReviewFlow | null;
}

const state: AppState = {
  client: new Client(sessionStorage.getItem(SERVICE_KEY) ?? DEFAULT_SERVICE),
  annotate: null,
  review: null,
};

function userId(): string {
  return sessionStorage.getItem(USER_KEY) ?? "";
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function app(): HTMLElement {
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app element");
  return root;
}

function route(): string {
  return location.hash === "#/review" ? "review" : "annotate";
}

// -- header -------------------------------------------------------------------

function renderHeader(): HTMLElement {
  const user = el("input", {
    id: "user-id",
    placeholder: "your id",
    value: userId(),
  });
  user.addEventListener("change", () => {
    sessionStorage.setItem(USER_KEY, user.value.trim());
    state.annotate = null;
    state.review = null;
    render();
  });
  const service = el("input", {
    id: "service-url",
    class: "wide",
    value: state.client.baseUrl,
  });
  service.addEventListener("change", () => {
    const url = service.value.trim() || DEFAULT_SERVICE;
    sessionStorage.setItem(SERVICE_KEY, url);
    state.client = new Client(url);
    state.annotate = null;
    state.review = null;
    render();
  });
  const tab = (hash: string, label: string) =>
    el("a", { href: hash, class: location.hash === hash ? "tab active" : "tab" }, label);
  return el(
    "header",
    {},
    el("nav", {}, tab("#/annotate", "Annotate"), tab("#/review", "Review")),
    el("label", {}, "User ", user),
    el("label", {}, "Service ", service),
  );
}

function needUserNotice(): HTMLElement {
  return el("p", { class: "notice" }, "Enter your id above to start.");
}

function errorLine(message: string | null): HTMLElement {
  return message === null
    ? el("span", { class: "error empty" })
    : el("p", { class: "error", role: "alert" }, message);
}

// -- annotate view --------------------------------------------------------------

function annotateFlow(): AnnotateFlow | null {
  if (userId() === "") return null;
  if (state.annotate === null || state.annotate.annotatorId !== userId()) {
    state.annotate = new AnnotateFlow(state.client, userId());
  }
  return state.annotate;
}

function renderAnnotate(): HTMLElement {
  const flow = annotateFlow();
  const view = el("section", { class: "annotate" });
  if (flow === null) {
    view.append(needUserNotice());
    return view;
  }
  if (flow.phase === "idle") {
    const start = el("button", {}, "Fetch a task");
    start.addEventListener("click", () => {
      void flow.loadNext().then(render);
    });
    view.append(start, errorLine(flow.error));
    return view;
  }
  if (flow.phase === "loading" || flow.phase === "submitting") {
    view.append(el("p", {}, "Working…"));
    return view;
  }
  if (flow.phase === "drained" || flow.task === null) {
    const again = el("button", {}, "Check again");
    again.addEventListener("click", () => {
      void flow.loadNext().then(render);
    });
    view.append(el("p", {}, "No open tasks right now."), again, errorLine(flow.error));
    return view;
  }

  const task = flow.task;
  view.append(el("h2", {}, `Task ${task.task_id}`));
  if (task.context) {
    view.append(el("aside", { class: "context" }, task.context));
  }
  view.append(el("p", { class: "sentence", lang: "zh" }, task.sentence));

  const box = el("textarea", { rows: "3" });
  box.value = flow.draft;
  const submit = el("button", { class: "primary" }, "Submit");
  const syncSubmit = () => {
    submit.disabled = !flow.canSubmit;
  };
  box.addEventListener("input", () => {
    flow.setDraft(box.value);
    syncSubmit();
  });

  const errorFree = el("input", { type: "checkbox" }) as HTMLInputElement;
  errorFree.checked = flow.errorFree;
  errorFree.addEventListener("change", () => {
    flow.setErrorFree(errorFree.checked);
    syncSubmit();
  });
  const needContext = el("input", { type: "checkbox" }) as HTMLInputElement;
  needContext.checked = flow.needContext;
  needContext.addEventListener("change", () => {
    flow.setNeedContext(needContext.checked);
  });

  submit.addEventListener("click", () => {
    void flow.submit().then(render);
  });
  syncSubmit();

  view.append(
    box,
    el("label", { class: "flag" }, errorFree, " Error Free"),
    el("label", { class: "flag" }, needContext, " Need Context"),
    submit,
    errorLine(flow.error),
  );
  return view;
}

// -- review view -----------------------------------------------------------------

function reviewFlow(): ReviewFlow | null {
  if (userId() === "") return null;
  if (state.review === null || state.review.reviewerId !== userId()) {
    state.review = new ReviewFlow(state.client, userId());
  }
  return state.review;
}

function renderReview(): HTMLElement {
  const flow = reviewFlow();
  const view = el("section", { class: "review" });
  if (flow === null) {
    view.append(needUserNotice());
    return view;
  }

  const reload = el("button", {}, "Reload queue");
  reload.addEventListener("click", () => {
    void flow.loadQueue().then(render);
  });
  view.append(reload);

  const task = flow.current;
  if (task === null) {
    view.append(el("p", {}, "Review queue is empty."), errorLine(flow.error));
    if (flow.lastGolden !== null) {
      view.append(goldenSummary(flow));
    }
    return view;
  }

  view.append(
    el(
      "p",
      { class: "progress" },
      `Task ${flow.position + 1} of ${flow.queueLength}: ${task.task_id}`,
    ),
  );
  if (task.context) {
    view.append(el("aside", { class: "context" }, task.context));
  }
  view.append(el("p", { class: "sentence", lang: "zh" }, task.sentence));

  const submit = el("button", { class: "primary" }, "Submit review");
  const syncSubmit = () => {
    submit.disabled = !flow.canSubmit;
  };

  const list = el("ul", { class: "submissions" });
  for (const sub of task.submissions) {
    const box = el("input", { type: "checkbox" }) as HTMLInputElement;
    box.checked = flow.isChecked(sub.submission_id);
    box.addEventListener("change", () => {
      flow.toggleAccept(sub.submission_id);
      syncSubmit();
    });
    const text =
      sub.corrected_text === null ? "Error Free" : sub.corrected_text;
    const flags = sub.need_context ? " (need context)" : "";
    list.append(
      el(
        "li",
        {},
        el("label", {}, box, ` ${sub.annotator_id}: ${text}${flags}`),
      ),
    );
  }
  view.append(list);

  const addedBox = el("div", { class: "added" });
  const renderAdded = () => {
    addedBox.replaceChildren();
    flow.added.forEach((text, i) => {
      const input = el("input", { value: text, placeholder: "new correction" });
      input.addEventListener("input", () => {
        flow.setAddedReference(i, input.value);
        syncSubmit();
      });
      const remove = el("button", { class: "small" }, "×");
      remove.addEventListener("click", () => {
        flow.removeReferenceField(i);
        renderAdded();
        syncSubmit();
      });
      addedBox.append(el("div", { class: "added-row" }, input, remove));
    });
  };
  const add = el("button", {}, "Add");
  add.addEventListener("click", () => {
    flow.addReferenceField();
    renderAdded();
    syncSubmit();
  });
  renderAdded();

  const prev = el("button", {}, "Previous");
  prev.addEventListener("click", () => {
    flow.previous();
    render();
  });
  const next = el("button", {}, "Next");
  next.addEventListener("click", () => {
    flow.next();
    render();
  });
  submit.addEventListener("click", () => {
    void flow.submitReview().then(render);
  });
  syncSubmit();

  view.append(add, addedBox, el("div", { class: "nav" }, prev, next, submit));
  view.append(errorLine(flow.error));
  if (flow.lastGolden !== null) {
    view.append(goldenSummary(flow));
  }
  return view;
}

function goldenSummary(flow: ReviewFlow): HTMLElement {
  const golden = flow.lastGolden;
  if (golden === null) return el("span", { class: "empty" });
  const refs = golden.references.length === 0
    ? "rejected (no references)"
    : golden.references.join(" | ");
  return el(
    "p",
    { class: "golden" },
    `Saved ${golden.task_id}: ${refs}`,
  );
}

// -- router ---------------------------------------------------------------------

function render(): void {
  const body = route() === "review" ? renderReview() : renderAnnotate();
  app().replaceChildren(renderHeader(), body);
}

window.addEventListener("hashchange", render);
window.addEventListener("DOMContentLoaded", () => {
  if (location.hash !== "#/annotate" && location.hash !== "#/review") {
    location.hash = "#/annotate";
  }
  render();
});
