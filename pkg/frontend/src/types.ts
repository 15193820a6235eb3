/** Wire types mirroring the annotation service's JSON contract. */

export interface Span {
  start: number;
  end: number;
}

export interface AnswerSpan {
  text: string;
  answer_start: number;
}

export interface PassageScore {
  passage_id: string;
  distinct_entity_count: number;
  pronoun_count: number;
}

export interface HighlightSpan extends Span {
  text: string;
}

export interface EntitySpan extends HighlightSpan {
  label: string;
}

export interface SentenceSpan {
  index: number;
  start: number;
  text: string;
}

export interface PassageDetail {
  passage_id: string;
  text: string;
  entities: EntitySpan[];
  pronoun_spans: HighlightSpan[];
  sentences: SentenceSpan[];
}

export interface DraftPair {
  passage_id: string;
  question: string;
  answer: AnswerSpan;
  m1: Span;
  m2: Span;
}

export interface RuleResult {
  passed: boolean;
  message: string;
}

export type RuleName =
  | "different_sentence"
  | "informativeness"
  | "answer_in_passage"
  | "answer_equals_m2"
  | "non_duplicate";

export interface ValidationReport {
  passed: boolean;
  rules: Record<RuleName, RuleResult>;
}

export interface BiasPreview {
  most_similar_sentence: string;
  sentence_index: number;
  answer_in_most_similar: boolean;
}

export interface ValidateResponse {
  validation: ValidationReport;
  bias_preview: BiasPreview | null;
}

export interface PairRecord extends DraftPair {
  id: number;
  status: "draft" | "accepted" | "rejected";
  created_at: string;
  validation: ValidationReport;
}

/** SQuAD-schema export payload (shape used by GET /export). */
export interface ExportedDataset {
  version: string;
  data: Array<{
    title: string;
    paragraphs: Array<{
      context: string;
      qas: Array<{
        id: string;
        question: string;
        answers: AnswerSpan[];
        tags?: string[];
      }>;
    }>;
  }>;
}
