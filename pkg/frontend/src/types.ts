/** Shapes exchanged with the review service's JSON API. */

export type Verdict = "match" | "no_match";
export type Decision = "accept" | "reject" | "edit";

/** [start, end) character offsets into plain text, end exclusive. */
export type SpanRange = [number, number];

export interface TaskSummary {
  id: string;
  status: "pending" | "done";
  src_text: string | null;
  tgt_text: string | null;
  annotation_count: number;
}

export interface CandidateView {
  expert_id: string;
  text: string | null;
  valid: boolean;
}

export interface AnnotationEvent {
  type: "annotation";
  sample_id: string;
  annotator_id: string;
  payload: { verdict?: Verdict; spans?: SpanRange[] };
  submitted_at: string;
}

export interface DecisionEvent {
  type: "decision";
  sample_id: string;
  decision: Decision;
  tgt_text?: string;
  submitted_at: string;
}

export interface TaskView {
  id: string;
  status: "pending" | "done";
  src_text: string | null;
  tgt_text: string | null;
  candidates: CandidateView[];
  judge_rationale: string | null;
  annotations: AnnotationEvent[];
  decision: DecisionEvent | null;
  src_audio?: string;
  audio_sec?: number;
  /** Parsed display forms delivered by the server; highlighting uses only these. */
  src_plain?: string;
  src_spans?: SpanRange[];
  tgt_plain?: string;
  tgt_spans?: SpanRange[];
}

export interface AgreementReport {
  accuracy: number;
  precision: number;
  recall: number;
  f1: number;
  tp: number;
  fp: number;
  fn: number;
  tn: number;
  resolved_samples: number;
}

export interface ExportedPaths {
  benchmark: string;
  audit: string;
  annotations: string;
}

export interface MarkupViolation {
  kind: "UnbalancedDelimiter" | "EmptySpan" | "NestedSpan" | "EscapingUnsupported";
  position: number;
  message: string;
}
