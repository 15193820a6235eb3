/** Pure HTML renderers for the workbench views.
 *
 * Every function returns an HTML string from plain data so the rendering
 * logic is testable without a DOM; main.ts assigns the strings and wires
 * events.
 */

import type { PreValidation } from "./spans.js";
import type {
  BiasPreview,
  PairRecord,
  PassageDetail,
  PassageScore,
  RuleResult,
  Span,
  ValidationReport,
} from "./types.js";

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderPassageList(scores: PassageScore[], selectedId?: string): string {
  const rows = scores
    .map((score) => {
      const selected = score.passage_id === selectedId ? " selected" : "";
      return (
        `<li class="passage-row${selected}" data-passage-id="${escapeHtml(score.passage_id)}">` +
        `<span class="pid">${escapeHtml(score.passage_id)}</span>` +
        `<span class="counts">${score.distinct_entity_count} entities · ` +
        `${score.pronoun_count} pronouns</span></li>`
      );
    })
    .join("");
  return `<ul class="passage-list">${rows}</ul>`;
}

interface Mark {
  span: Span;
  cls: string;
}

/**
 * Passage text with non-overlapping highlight marks. Entity and pronoun
 * highlights show mention classes; m1/m2 marks show the current selection.
 * Overlapping marks are resolved by priority: selection > entity > pronoun.
 */
export function renderPassageText(
  detail: PassageDetail,
  selection: { m1?: Span | null; m2?: Span | null } = {},
): string {
  const marks: Mark[] = [];
  if (selection.m1) {
    marks.push({ span: selection.m1, cls: "m1" });
  }
  if (selection.m2) {
    marks.push({ span: selection.m2, cls: "m2" });
  }
  for (const entity of detail.entities) {
    marks.push({ span: entity, cls: "entity" });
  }
  for (const pronoun of detail.pronoun_spans) {
    marks.push({ span: pronoun, cls: "pronoun" });
  }

  const taken: Span[] = [];
  const kept: Mark[] = [];
  for (const mark of marks) {
    if (taken.some((t) => mark.span.start < t.end && t.start < mark.span.end)) {
      continue;
    }
    taken.push(mark.span);
    kept.push(mark);
  }
  kept.sort((a, b) => a.span.start - b.span.start);

  let html = "";
  let cursor = 0;
  for (const mark of kept) {
    html += escapeHtml(detail.text.slice(cursor, mark.span.start));
    const body = escapeHtml(detail.text.slice(mark.span.start, mark.span.end));
    html += `<mark class="${mark.cls}" data-start="${mark.span.start}" data-end="${mark.span.end}">${body}</mark>`;
    cursor = mark.span.end;
  }
  html += escapeHtml(detail.text.slice(cursor));
  return html;
}

const RULE_LABELS: Record<string, string> = {
  different_sentence: "m1 and m2 in different sentences",
  informativeness: "m2 more informative than m1",
  answer_in_passage: "answer matches its offset",
  answer_equals_m2: "answer equals m2",
  non_duplicate: "not a duplicate pair",
};

function badge(name: string, result: RuleResult): string {
  const cls = result.passed ? "pass" : "fail";
  const label = RULE_LABELS[name] ?? name;
  return (
    `<li class="rule ${cls}" data-rule="${escapeHtml(name)}">` +
    `<span class="verdict">${result.passed ? "PASS" : "FAIL"}</span> ` +
    `${escapeHtml(label)}<span class="detail">${escapeHtml(result.message)}</span></li>`
  );
}

export function renderValidation(report: ValidationReport | null): string {
  if (!report) {
    return `<p class="hint">Select m1 and m2, write a question, then validate.</p>`;
  }
  const rows = Object.entries(report.rules)
    .map(([name, result]) => badge(name, result))
    .join("");
  const overall = report.passed
    ? `<p class="overall pass">All rules pass: ready to accept.</p>`
    : `<p class="overall fail">Fix the failing rules before accepting.</p>`;
  return `<ul class="rules">${rows}</ul>${overall}`;
}

export function renderPrecheck(pre: PreValidation | null): string {
  if (!pre) {
    return "";
  }
  const item = (ok: boolean, label: string) =>
    `<li class="rule ${ok ? "pass" : "fail"}">${ok ? "PASS" : "FAIL"} ${escapeHtml(label)}</li>`;
  return (
    `<ul class="rules advisory">` +
    item(pre.differentSentence, "different sentences (advisory)") +
    item(pre.informativeness, "informativeness (advisory)") +
    item(pre.answerEqualsM2, "answer equals m2 (advisory)") +
    `</ul>`
  );
}

export function renderBiasPreview(preview: BiasPreview | null): string {
  if (!preview) {
    return "";
  }
  if (!preview.answer_in_most_similar) {
    return `<p class="bias ok">Answer is outside the most question-similar sentence.</p>`;
  }
  return (
    `<p class="bias warn">Semantic-overlap risk: the answer sits in the sentence most ` +
    `similar to the question (#${preview.sentence_index}: ` +
    `${escapeHtml(preview.most_similar_sentence)}). Consider rephrasing.</p>`
  );
}

export function renderPairs(pairs: PairRecord[]): string {
  if (pairs.length === 0) {
    return `<p class="hint">No accepted pairs yet.</p>`;
  }
  const rows = pairs
    .map(
      (pair) =>
        `<li class="pair" data-pair-id="${pair.id}">` +
        `<span class="pid">#${pair.id} ${escapeHtml(pair.passage_id)}</span> ` +
        `<span class="q">${escapeHtml(pair.question)}</span> → ` +
        `<span class="a">${escapeHtml(pair.answer.text)}</span></li>`,
    )
    .join("");
  return `<ul class="pairs">${rows}</ul>`;
}

export function renderProgress(accepted: number, target: number): string {
  return `<span class="progress">${accepted} / ${target} pairs</span>`;
}
