/** Wire shapes of the editing service, mirrored field for field. */

/** One provenance record; `detail` is stage-specific.  Stages that run
 * locally (pose oracle, target view, align, control) have no backend, and
 * only synthesis and inpainting consume the seed, so both are nullable. */
export interface StageRecordWire {
  stage: string;
  backend_id: string | null;
  seed: number | null;
  detail: Record<string, unknown>;
}

export interface FailureWire {
  stage: string;
  error_type: string;
  detail: string;
}

/** Canonical edit result; `output` is a base64 PNG string. */
export interface EditResultWire {
  schema_version: string;
  status: "ok" | "failed";
  output: string;
  provenance: StageRecordWire[];
  failure: FailureWire | null;
  artifacts: Record<string, string>;
}

export interface EditOptionsWire {
  two_stage: boolean;
  inject_view_error_deg: number;
  keep_artifacts: boolean;
}

/** One session history entry, as appended by POST .../edits. */
export interface HistoryEntryWire {
  index: number;
  instruction: string;
  seed: number;
  options: EditOptionsWire;
  requested: string;
  output_file: string;
  result: EditResultWire;
}

/** Session document without inlined images (POST /api/sessions response). */
export interface SessionSummaryWire {
  schema_version: string;
  id: string;
  created: string;
  updated: string;
  has_reference: boolean;
  history: HistoryEntryWire[];
}

/** Full session state (GET /api/sessions/{id}); images are base64 PNG. */
export interface SessionWire extends SessionSummaryWire {
  source_image: string;
  reference_image: string | null;
}

export interface BackendHealthWire {
  endpoint: string;
  reachable: boolean;
}

export interface HealthWire {
  schema_version: string;
  status: "ok" | "degraded";
  backends: Record<string, BackendHealthWire>;
}

/** Body of POST /api/sessions/{id}/edits. */
export interface EditBody {
  instruction: string;
  seed?: number;
  two_stage?: boolean;
  inject_view_error_deg?: number;
}
