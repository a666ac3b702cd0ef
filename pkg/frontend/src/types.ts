// Wire shapes of the decision service (v1 API).

export interface QualityAttribute {
  id: string;
  name: string;
  higher_is_better: boolean;
}

export interface Pattern {
  id: string;
  name: string;
  category: string;
  summary: string;
  source_anchor: string;
  aliases?: string[];
}

export interface Effect {
  pattern_id: string;
  attribute_id: string;
  direction: "benefit" | "tradeoff";
  note: string;
  source_anchor: string;
  weight?: number;
}

export interface Relation {
  kind: "complements" | "alternative";
  from_pattern: string;
  to_pattern: string;
  scope_attribute: string | null;
  note: string;
}

export interface Constraint {
  pattern_id: string;
  key: string;
  description: string;
}

export interface DecisionModel {
  id: string;
  member_pattern_ids: string[];
  effects: Effect[];
  relations: Relation[];
  constraints: Constraint[];
}

export interface Catalog {
  schema_version: number;
  canonical_content: boolean;
  constraint_keys: string[];
  attributes: QualityAttribute[];
  patterns: Pattern[];
  decision_models: DecisionModel[];
  case_studies: { id: string; pattern_ids: string[] }[];
}

export interface Profile {
  weights: Record<string, number>;
  context_flags: string[];
  forced_in: string[];
  forced_out: string[];
}

export interface SelectionEffect {
  pattern_id: string;
  attribute_id: string;
  direction: "benefit" | "tradeoff";
  weight: number;
  note: string;
  source_anchor: string;
}

export interface Selection {
  decision_model_id: string;
  chosen: string[];
  score: number;
  combined_effects: SelectionEffect[];
}

export interface Recommendation {
  profile: Profile;
  catalog_version: { schema_version: number; content_hash: string };
  models: Record<string, { best: Selection; ranking: Selection[] }>;
}

export interface WhatIfResult {
  before: Recommendation;
  after: Recommendation;
  effect_delta: unknown;
}

export interface RunHandle {
  run_id: string;
  kind: "simulation" | "validation";
  status: "queued" | "running" | "done" | "failed";
  metrics?: SimMetrics;
  report?: unknown;
  error?: string;
}

export interface SimMetrics {
  accuracy_per_round: number[];
  final_accuracy: number;
  bytes_uplink: number;
  bytes_downlink: number;
  simulated_wall_time: number;
  [key: string]: unknown;
}

export interface ApiError {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
