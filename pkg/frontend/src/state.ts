/** Pure projection from the service's session document to the view model.
 *
 * The studio renders nothing it did not read back from
 * GET /api/sessions/{id}: POST responses are used only to decide when to
 * refetch.  That makes a page reload trivially equivalent to the live view.
 */

import type { HistoryEntryWire, SessionWire, StageRecordWire } from "./types.js";

export interface ProvenanceLine {
  stage: string;
  backendId: string | null;
  seed: number | null;
}

export interface EditCard {
  index: number;
  instruction: string;
  seed: number;
  status: "ok" | "failed";
  requested: string;
  twoStage: boolean;
  injectedErrorDeg: number;
  outputUrl: string;
  provenance: ProvenanceLine[];
  failure: { stage: string; errorType: string; detail: string } | null;
}

export interface StudioViewModel {
  sessionId: string;
  created: string;
  updated: string;
  hasReference: boolean;
  sourceUrl: string;
  referenceUrl: string | null;
  /** Image the next edit applies to: last output, else the source. */
  currentUrl: string;
  cards: EditCard[];
}

export function pngDataUrl(base64Png: string): string {
  return `data:image/png;base64,${base64Png}`;
}

function projectProvenance(records: StageRecordWire[]): ProvenanceLine[] {
  return records.map((record) => ({
    stage: record.stage,
    backendId: record.backend_id,
    seed: record.seed,
  }));
}

function projectEntry(entry: HistoryEntryWire): EditCard {
  const result = entry.result;
  return {
    index: entry.index,
    instruction: entry.instruction,
    seed: entry.seed,
    status: result.status,
    requested: entry.requested,
    twoStage: entry.options.two_stage,
    injectedErrorDeg: entry.options.inject_view_error_deg,
    outputUrl: pngDataUrl(result.output),
    provenance: projectProvenance(result.provenance),
    failure: result.failure
      ? {
          stage: result.failure.stage,
          errorType: result.failure.error_type,
          detail: result.failure.detail,
        }
      : null,
  };
}

export function project(doc: SessionWire): StudioViewModel {
  const cards = doc.history.map(projectEntry);
  const last = cards[cards.length - 1];
  const sourceUrl = pngDataUrl(doc.source_image);
  return {
    sessionId: doc.id,
    created: doc.created,
    updated: doc.updated,
    hasReference: doc.has_reference,
    sourceUrl,
    referenceUrl: doc.reference_image ? pngDataUrl(doc.reference_image) : null,
    currentUrl: last ? last.outputUrl : sourceUrl,
    cards,
  };
}
