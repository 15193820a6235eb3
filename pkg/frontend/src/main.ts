/** Browser bootstrap: wires the session to the DOM.
 *
 * Span selection: the annotator drags over the passage text and clicks
 * "set m1" / "set m2"; the selection is converted to character offsets by
 * walking the text nodes of the passage container.
 */

import { ApiClient } from "./api.js";
import {
  renderBiasPreview,
  renderPassageList,
  renderPassageText,
  renderPairs,
  renderPrecheck,
  renderProgress,
  renderValidation,
} from "./render.js";
import { WorkbenchSession } from "./session.js";
import type { Span } from "./types.js";

const api = new ApiClient(
  new URLSearchParams(window.location.search).get("api") ?? "",
);
const session = new WorkbenchSession(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

/** Character offsets of the current selection inside the passage container. */
function selectionOffsets(container: HTMLElement): Span | null {
  const selection = window.getSelection();
  if (!selection || selection.rangeCount === 0 || selection.isCollapsed) {
    return null;
  }
  const range = selection.getRangeAt(0);
  if (!container.contains(range.commonAncestorContainer)) {
    return null;
  }
  const measure = (node: Node, offset: number): number => {
    const probe = range.cloneRange();
    probe.selectNodeContents(container);
    probe.setEnd(node, offset);
    return probe.toString().length;
  };
  const start = measure(range.startContainer, range.startOffset);
  const end = measure(range.endContainer, range.endOffset);
  return start < end ? { start, end } : null;
}

function redrawPassage(): void {
  if (!session.detail) {
    return;
  }
  el("passage-text").innerHTML = renderPassageText(session.detail, {
    m1: session.m1,
    m2: session.m2,
  });
  el("answer-preview").textContent = session.answer
    ? `answer = ${JSON.stringify(session.answer.text)} @ ${session.answer.answer_start}`
    : "answer follows m2";
  el("precheck").innerHTML = renderPrecheck(session.precheck());
}

async function liveValidate(): Promise<void> {
  if (!session.draftReady) {
    return;
  }
  try {
    const response = await session.validate();
    el("validation").innerHTML = renderValidation(response.validation);
    el("bias").innerHTML = renderBiasPreview(response.bias_preview);
    (el<HTMLButtonElement>("accept")).disabled = !session.canAccept;
  } catch (error) {
    el("validation").textContent = `validation request failed: ${String(error)}`;
  }
}

async function refreshPairs(): Promise<void> {
  await session.refreshPairs();
  el("pairs").innerHTML = renderPairs(session.pairs);
  el("progress").innerHTML = renderProgress(session.acceptedCount, session.sessionTarget);
}

async function boot(): Promise<void> {
  await session.loadPassages();
  const list = el("passage-list");
  list.innerHTML = renderPassageList(session.passages);
  list.addEventListener("click", async (event) => {
    const row = (event.target as HTMLElement).closest<HTMLElement>("[data-passage-id]");
    if (!row?.dataset.passageId) {
      return;
    }
    await session.selectPassage(row.dataset.passageId);
    list.innerHTML = renderPassageList(session.passages, row.dataset.passageId);
    el("validation").innerHTML = renderValidation(null);
    el("bias").innerHTML = "";
    (el<HTMLInputElement>("question")).value = "";
    redrawPassage();
  });

  const passageText = el("passage-text");
  el("set-m1").addEventListener("click", () => {
    const span = selectionOffsets(passageText);
    if (span) {
      session.setM1(span);
      redrawPassage();
      void liveValidate();
    }
  });
  el("set-m2").addEventListener("click", () => {
    const span = selectionOffsets(passageText);
    if (span) {
      session.setM2(span);
      redrawPassage();
      void liveValidate();
    }
  });

  el<HTMLInputElement>("question").addEventListener("input", (event) => {
    session.setQuestion((event.target as HTMLInputElement).value);
    (el<HTMLButtonElement>("accept")).disabled = true;
    void liveValidate();
  });

  el<HTMLButtonElement>("accept").addEventListener("click", async () => {
    try {
      await session.accept();
      el("validation").innerHTML = renderValidation(null);
      el("bias").innerHTML = "";
      await refreshPairs();
    } catch (error) {
      el("validation").textContent = String(error);
    }
  });

  await refreshPairs();
}

void boot();
