// Wire types matching the review service's JSON API.

export const CATEGORIES = [
  'religion',
  'ethnicity',
  'sexual_orientation',
  'gender',
] as const;

export type Category = (typeof CATEGORIES)[number];

export const CATEGORY_NAMES: Record<Category, string> = {
  religion: 'Religion',
  ethnicity: 'Ethnicity',
  sexual_orientation: 'Sexual Orientation',
  gender: 'Gender',
};

export function isCategory(value: unknown): value is Category {
  return (CATEGORIES as readonly string[]).includes(value as string);
}

export interface SpanWire {
  start: number; // code-point offset, inclusive
  end: number; // code-point offset, exclusive
  label: Category | null; // null = untyped mention
}

export interface ProvenanceWire {
  start: number;
  end: number;
  predicted: Category | 'none';
  probability: number;
  sentence_labels: Category[];
}

export interface ReviewItemWire {
  id: string;
  text: string;
  spans: SpanWire[];
  provenance: ProvenanceWire[];
  status: 'pending' | 'decided';
  decision?: DecisionWire;
}

export type Action = 'accept' | 'reject' | 'edit';

export interface DecisionWire {
  action: Action;
  reviewer: string;
  timestamp: string; // ISO-8601 UTC
  edited_spans?: SpanWire[];
}

export interface Progress {
  decided: number;
  total: number;
}

export interface ItemsPage {
  items: ReviewItemWire[];
  total: number;
  offset: number;
  limit: number;
}
