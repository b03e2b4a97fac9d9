import { describe, expect, test } from "vitest";

import { pngDataUrl, project } from "../src/state.js";
import type {
  EditResultWire,
  HistoryEntryWire,
  SessionWire,
} from "../src/types.js";

function okResult(output: string): EditResultWire {
  return {
    schema_version: "1",
    status: "ok",
    output,
    provenance: [
      { stage: "plan", backend_id: "grammar-v1", seed: null, detail: {} },
      { stage: "pose", backend_id: null, seed: null, detail: {} },
      { stage: "inpaint", backend_id: "stub:inpaint", seed: 4, detail: {} },
    ],
    failure: null,
    artifacts: {},
  };
}

function entry(index: number, instruction: string): HistoryEntryWire {
  return {
    index,
    instruction,
    seed: 4,
    options: { two_stage: false, inject_view_error_deg: 0.0, keep_artifacts: false },
    requested: `2026-08-23T12:0${index}:00Z`,
    output_file: `${index}0-output.png`,
    result: okResult(`OUT${index}`),
  };
}

function sampleDoc(history: HistoryEntryWire[]): SessionWire {
  return {
    schema_version: "1",
    id: "abc123",
    created: "2026-08-23T12:00:00Z",
    updated: "2026-08-23T12:02:00Z",
    has_reference: false,
    history,
    source_image: "SRC",
    reference_image: null,
  };
}

describe("session projection", () => {
  test("empty session: current image is the source", () => {
    const vm = project(sampleDoc([]));
    expect(vm.sessionId).toBe("abc123");
    expect(vm.cards).toEqual([]);
    expect(vm.sourceUrl).toBe(pngDataUrl("SRC"));
    expect(vm.currentUrl).toBe(vm.sourceUrl);
    expect(vm.referenceUrl).toBeNull();
  });

  test("cards preserve history order and map provenance fields", () => {
    const vm = project(
      sampleDoc([entry(0, "turn box right 15 degrees"), entry(1, "turn box up 5 degrees")]),
    );
    expect(vm.cards.map((c) => c.index)).toEqual([0, 1]);
    expect(vm.cards[0]!.instruction).toBe("turn box right 15 degrees");
    expect(vm.cards[0]!.provenance.map((p) => p.stage)).toEqual([
      "plan",
      "pose",
      "inpaint",
    ]);
    expect(vm.cards[0]!.provenance[0]).toEqual({
      stage: "plan",
      backendId: "grammar-v1",
      seed: null,
    });
    // local stages have neither a backend nor a seed
    expect(vm.cards[0]!.provenance[1]).toEqual({
      stage: "pose",
      backendId: null,
      seed: null,
    });
    expect(vm.currentUrl).toBe(pngDataUrl("OUT1"));
  });

  test("failed results carry the failure onto the card", () => {
    const failed = entry(0, "turn box right 15 degrees");
    failed.result = {
      ...okResult("SRC"),
      status: "failed",
      failure: { stage: "segment", error_type: "ObjectNotFound", detail: "no box" },
    };
    const vm = project(sampleDoc([failed]));
    expect(vm.cards[0]!.status).toBe("failed");
    expect(vm.cards[0]!.failure).toEqual({
      stage: "segment",
      errorType: "ObjectNotFound",
      detail: "no box",
    });
  });

  test("reference image projects to a data url when present", () => {
    const doc = sampleDoc([]);
    doc.has_reference = true;
    doc.reference_image = "REF";
    const vm = project(doc);
    expect(vm.hasReference).toBe(true);
    expect(vm.referenceUrl).toBe(pngDataUrl("REF"));
  });

  test("projection is pure: same document, same view model, no mutation", () => {
    const doc = sampleDoc([entry(0, "turn box right 15 degrees")]);
    const snapshot = JSON.stringify(doc);
    const first = project(doc);
    const second = project(doc);
    expect(second).toEqual(first);
    expect(JSON.stringify(doc)).toBe(snapshot);
  });

  test("data urls are browser-ready png payloads", () => {
    expect(pngDataUrl("QUJD")).toBe("data:image/png;base64,QUJD");
  });
});
