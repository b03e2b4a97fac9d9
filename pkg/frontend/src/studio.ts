/** Browser controller: DOM glue around the pure modules.
 *
 * Every mutation follows the same loop: submit over HTTP, then refetch the
 * session and re-render from that document alone.  Nothing on screen comes
 * from a POST response or from local bookkeeping.
 */

import { ApiError, StudioApi } from "./api.js";
import { PendingGate, RequestPending } from "./gate.js";
import { compileSliderInstruction, type SliderAxis } from "./instruction.js";
import { project } from "./state.js";
import { renderStudio } from "./render.js";

function mustFind<T extends Element>(root: Document, selector: string): T {
  const el = root.querySelector<T>(selector);
  if (!el) {
    throw new Error(`missing studio element: ${selector}`);
  }
  return el;
}

async function fileToBase64Png(file: File): Promise<string> {
  const dataUrl = await new Promise<string>((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(reader.result as string);
    reader.onerror = () => reject(reader.error);
    reader.readAsDataURL(file);
  });
  const comma = dataUrl.indexOf(",");
  return dataUrl.slice(comma + 1);
}

export class StudioController {
  private sessionId: string | null = null;

  private readonly status: HTMLElement;
  private readonly main: HTMLElement;
  private readonly sourceFile: HTMLInputElement;
  private readonly referenceFile: HTMLInputElement;
  private readonly createButton: HTMLButtonElement;
  private readonly objectLabel: HTMLInputElement;
  private readonly seed: HTMLInputElement;
  private readonly twoStage: HTMLInputElement;
  private readonly sliders: Record<SliderAxis, HTMLInputElement>;

  constructor(
    private readonly api: StudioApi,
    private readonly gate: PendingGate,
    root: Document,
  ) {
    this.status = mustFind(root, "#status");
    this.main = mustFind(root, "#studio");
    this.sourceFile = mustFind(root, "#source-file");
    this.referenceFile = mustFind(root, "#reference-file");
    this.createButton = mustFind(root, "#create-session");
    this.objectLabel = mustFind(root, "#object-label");
    this.seed = mustFind(root, "#seed");
    this.twoStage = mustFind(root, "#two-stage");
    this.sliders = {
      azimuth: mustFind(root, "#azimuth-slider"),
      elevation: mustFind(root, "#elevation-slider"),
    };

    this.createButton.addEventListener("click", () => {
      void this.createSession();
    });
    for (const axis of ["azimuth", "elevation"] as const) {
      // "change" fires on release: one drag = one instruction
      this.sliders[axis].addEventListener("change", () => {
        void this.applySlider(axis);
      });
    }
    this.setEditingEnabled(false);
  }

  private say(text: string): void {
    this.status.textContent = text;
  }

  private setEditingEnabled(enabled: boolean): void {
    this.sliders.azimuth.disabled = !enabled;
    this.sliders.elevation.disabled = !enabled;
  }

  /** Re-derive everything on screen from GET /api/sessions/{id}. */
  private async refresh(): Promise<void> {
    if (!this.sessionId) {
      return;
    }
    const doc = await this.api.getSession(this.sessionId);
    this.main.innerHTML = renderStudio(project(doc));
  }

  async createSession(): Promise<void> {
    const file = this.sourceFile.files?.[0];
    if (!file) {
      this.say("choose a source image first");
      return;
    }
    try {
      const source = await fileToBase64Png(file);
      const referenceUpload = this.referenceFile.files?.[0];
      const reference = referenceUpload
        ? await fileToBase64Png(referenceUpload)
        : null;
      const session = await this.api.createSession(source, reference);
      this.sessionId = session.id;
      await this.refresh();
      this.setEditingEnabled(true);
      this.say(`session ${session.id} ready`);
    } catch (error) {
      this.say(this.describeError(error));
    }
  }

  async applySlider(axis: SliderAxis): Promise<void> {
    const sessionId = this.sessionId;
    if (!sessionId) {
      this.say("create a session first");
      return;
    }
    const movement = Number(this.sliders[axis].value);
    let instruction: string;
    try {
      instruction = compileSliderInstruction(
        this.objectLabel.value,
        axis,
        movement,
      );
    } catch (error) {
      this.say(this.describeError(error));
      return;
    }
    this.setEditingEnabled(false);
    this.say(`editing: ${instruction}`);
    try {
      await this.gate.run(sessionId, () =>
        this.api.appendEdit(sessionId, {
          instruction,
          seed: Number(this.seed.value) || 0,
          two_stage: this.twoStage.checked,
        }),
      );
      this.sliders[axis].value = "0";
      await this.refresh();
      this.say("done");
    } catch (error) {
      this.say(this.describeError(error));
    } finally {
      this.setEditingEnabled(!this.gate.isPending(sessionId));
    }
  }

  private describeError(error: unknown): string {
    if (error instanceof RequestPending) {
      return "an edit is already running; wait for it to finish";
    }
    if (error instanceof ApiError) {
      return `${error.type}: ${error.detail}`;
    }
    return error instanceof Error ? error.message : String(error);
  }
}

export function bootStudio(root: Document): StudioController {
  const params = new URLSearchParams(root.defaultView?.location.search ?? "");
  const base = params.get("api") ?? "";
  return new StudioController(new StudioApi(base), new PendingGate(), root);
}

if (typeof document !== "undefined" && document.querySelector("#studio")) {
  bootStudio(document);
}
