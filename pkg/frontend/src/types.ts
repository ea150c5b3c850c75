// Mirrors of the curation service response schemas.

export interface RationaleToken {
  doc_id: string;
  char_start: number;
  char_end: number;
  weight: number;
}

export interface RationaleEntry {
  doc_id: string;
  sentence_index: number;
  char_start: number;
  char_end: number;
  weight: number;
  tokens: RationaleToken[];
}

export interface Rationale {
  k: number;
  entries: RationaleEntry[];
}

export type ItemStatus = "pending" | "accepted" | "corrected";

export interface CurationItem {
  extraction_id: string;
  patient_id: string;
  attribute: string;
  predicted_class: string;
  top5: { label: string; prob: number }[];
  rationale: Rationale;
  status: ItemStatus;
  corrected_class: string | null;
  reviewer_id: string | null;
  reviewed_at: number | null;
}

export interface QueuePage {
  items: CurationItem[];
  page: number;
  page_size: number;
  total: number;
}

export interface PatientDocument {
  doc_id: string;
  kind: string;
  date: number;
  text: string;
}

export interface PatientPayload {
  patient_id: string;
  documents: PatientDocument[];
  registry: { diagnosis_date: number; labels: Record<string, string> } | null;
  extractions: CurationItem[];
}

export interface Stats {
  by_status: Record<ItemStatus, number>;
  by_attribute: Record<string, Record<ItemStatus, number>>;
  correction_rate: number;
  reviewer_throughput: Record<string, number>;
  total_events: number;
}

export type LabelSpaces = Record<string, string[]>;
