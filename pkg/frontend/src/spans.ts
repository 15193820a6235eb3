/** Span arithmetic and the client-side advisory mirror of the guideline.
 *
 * The server remains authoritative: these checks exist so the UI can show
 * instant feedback and refuse to submit a pair the server would reject.
 */

import type { DraftPair, PassageDetail, Span } from "./types.js";

export function spanText(text: string, span: Span): string {
  return text.slice(span.start, span.end);
}

export function spansOverlap(a: Span, b: Span): boolean {
  return a.start < b.end && b.start < a.end;
}

export function spanValid(span: Span, textLength: number): boolean {
  return span.start >= 0 && span.start < span.end && span.end <= textLength;
}

/** Index of the sentence containing the offset, or -1. */
export function sentenceIndexAt(detail: PassageDetail, offset: number): number {
  for (const sentence of detail.sentences) {
    if (offset >= sentence.start && offset < sentence.start + sentence.text.length) {
      return sentence.index;
    }
  }
  return -1;
}

// Mirrors the service's pronoun lexicon (personal/possessive/reflexive/demonstrative).
export const PRONOUNS = new Set([
  "i", "you", "he", "she", "it", "we", "they",
  "me", "him", "her", "us", "them",
  "my", "your", "his", "hers", "its", "our", "their",
  "mine", "yours", "ours", "theirs",
  "myself", "yourself", "himself", "herself", "itself",
  "ourselves", "yourselves", "themselves",
  "this", "that", "these", "those",
]);

export type MentionClass = "pronoun" | "nominal" | "proper";

const CLASS_ORDER: Record<MentionClass, number> = { pronoun: 0, nominal: 1, proper: 2 };

function stripPunct(token: string): string {
  return token.replace(/^[^\p{L}\p{N}]+|[^\p{L}\p{N}]+$/gu, "");
}

/** Mirror of the server's mention classification. */
export function classifyMention(text: string, sentenceInitial = false): MentionClass {
  const tokens = text.split(/\s+/).filter(Boolean);
  if (tokens.length === 0) {
    return "nominal";
  }
  if (tokens.every((t) => PRONOUNS.has(t.toLowerCase()))) {
    return "pronoun";
  }
  const capitalized = tokens
    .map((t, i) => ({ i, cap: /^[A-Z]/.test(stripPunct(t)) }))
    .filter((x) => x.cap)
    .map((x) => x.i);
  if (capitalized.length > 0 && !(sentenceInitial && capitalized.length === 1 && capitalized[0] === 0)) {
    return "proper";
  }
  return "nominal";
}

export function moreInformative(a: MentionClass, b: MentionClass): boolean {
  return CLASS_ORDER[a] > CLASS_ORDER[b];
}

export interface PreValidation {
  differentSentence: boolean;
  informativeness: boolean;
  answerEqualsM2: boolean;
  spansInRange: boolean;
  ok: boolean;
}

/** Advisory pre-check of a draft against the passage, mirroring the server rules. */
export function preValidate(draft: DraftPair, detail: PassageDetail): PreValidation {
  const length = detail.text.length;
  const spansInRange = spanValid(draft.m1, length) && spanValid(draft.m2, length);
  if (!spansInRange) {
    return {
      differentSentence: false,
      informativeness: false,
      answerEqualsM2: false,
      spansInRange,
      ok: false,
    };
  }
  const s1 = sentenceIndexAt(detail, draft.m1.start);
  const s2 = sentenceIndexAt(detail, draft.m2.start);
  const differentSentence = s1 >= 0 && s2 >= 0 && s1 !== s2;

  const sentenceStarts = new Set(detail.sentences.map((s) => s.start));
  const c1 = classifyMention(spanText(detail.text, draft.m1), sentenceStarts.has(draft.m1.start));
  const c2 = classifyMention(spanText(detail.text, draft.m2), sentenceStarts.has(draft.m2.start));
  const informativeness = moreInformative(c2, c1);

  const answerEqualsM2 =
    draft.answer.answer_start === draft.m2.start &&
    draft.answer.text === spanText(detail.text, draft.m2);

  return {
    differentSentence,
    informativeness,
    answerEqualsM2,
    spansInRange,
    ok: differentSentence && informativeness && answerEqualsM2,
  };
}
