// Payload shapes of the review service API, one interface per endpoint body.

export type Box = [number, number, number, number];

export type AnnotationStatus = "auto" | "accepted" | "edited" | "rejected";

export interface TokenView {
  i: number;
  text: string;
  box: Box;
}

export interface EntityView {
  id: number;
  label: string;
  token_indices: number[];
  text: string;
  box: Box;
}

export interface LinksView {
  pairs: [number, number][];
  dropped_values: number[];
  unlinked_keys: number[];
}

export interface AnnotationView {
  id: string;
  label: string;
  text: string;
  box: Box;
  status: AnnotationStatus;
  confidence: number;
  source: { key_entity: number | null; value_entity: number | null };
}

export interface DocPayload {
  doc_id: string;
  page: { width: number; height: number };
  image_url: string | null;
  tokens: TokenView[];
  entities: EntityView[];
  links: LinksView | null;
  annotations: AnnotationView[];
}

export interface QueueEntry {
  doc_id: string;
  score: number;
  counts: Record<string, number>;
}

export interface SchemaLabel {
  label_id: string;
  display: string;
  raw_variants: string[];
  count: number;
}

export interface ProjectSummary {
  name: string;
  config: Record<string, unknown>;
  schema: { labels: SchemaLabel[] } | null;
  docs: {
    total: number;
    pending_review: number;
    fully_reviewed: number;
    exported: number;
  };
  iterations: number[];
}

export type ActionKind =
  | "accept"
  | "reject"
  | "edit_label"
  | "edit_text"
  | "edit_box"
  | "relink"
  | "add";

export interface ActionRequest {
  kind: ActionKind;
  annotation_id?: string | null;
  payload?: Record<string, unknown>;
  actor?: string;
}

export interface ActionResponse {
  action_id: number;
  doc_id: string;
  kind: string;
  annotation_id: string | null;
  payload: Record<string, unknown>;
  actor: string;
  timestamp: string;
  annotations: AnnotationView[];
}

export interface IterationManifest {
  iteration: number;
  created_at: string;
  export_path: string;
  doc_ids: string[];
  files: Record<string, string>;
  counts: Record<string, number>;
}
