// ViewState and the review workflow around it.
//
// Commit-then-render: nothing in the local state changes until the
// service acknowledges an action, and the acknowledged annotation list
// replaces ours wholesale. Drafts live here only until POST succeeds.

import { ApiError } from "./api.js";
import type {
  ActionKind,
  ActionRequest,
  ActionResponse,
  DocPayload,
  QueueEntry,
} from "./types.js";

export interface ReviewApiLike {
  doc(docId: string): Promise<DocPayload>;
  postAction(docId: string, action: ActionRequest): Promise<ActionResponse>;
  queue(k?: number, strategy?: string): Promise<QueueEntry[]>;
}

export interface Draft {
  kind: ActionKind;
  annotationId: string | null;
  payload: Record<string, unknown>;
}

export interface ViewState {
  doc: DocPayload | null;
  zoom: number;
  panX: number;
  panY: number;
  selectedId: string | null;
  draft: Draft | null;
  queue: QueueEntry[];
  queuePos: number;
  banner: string | null;
  draftError: string | null;
}

const ZOOM_STEP = 1.25;
const ZOOM_MIN = 0.25;
const ZOOM_MAX = 8;

export class ReviewView {
  readonly state: ViewState = {
    doc: null,
    zoom: 1,
    panX: 0,
    panY: 0,
    selectedId: null,
    draft: null,
    queue: [],
    queuePos: 0,
    banner: null,
    draftError: null,
  };

  constructor(private readonly api: ReviewApiLike) {}

  async loadQueue(k?: number, strategy?: string): Promise<void> {
    this.state.queue = await this.api.queue(k, strategy);
    this.state.queuePos = 0;
  }

  /** Load one document; a missing doc banners the error and advances. */
  async openDoc(docId: string): Promise<void> {
    try {
      const doc = await this.api.doc(docId);
      this.state.doc = doc;
      this.state.banner = null;
      this.state.draftError = null;
      this.state.draft = null;
      this.state.zoom = 1;
      this.state.panX = 0;
      this.state.panY = 0;
      const first = doc.annotations[0];
      this.state.selectedId = first ? first.id : null;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.state.doc = null;
        this.state.selectedId = null;
        await this.advance();
        // set after advancing so the next doc's load does not clear it
        this.state.banner = `document ${docId}: ${err.message}`;
        return;
      }
      throw err;
    }
  }

  async openCurrent(): Promise<void> {
    const entry = this.state.queue[this.state.queuePos];
    if (entry) await this.openDoc(entry.doc_id);
  }

  async advance(): Promise<void> {
    if (this.state.queuePos + 1 >= this.state.queue.length) return;
    this.state.queuePos += 1;
    await this.openCurrent();
  }

  async back(): Promise<void> {
    if (this.state.queuePos === 0) return;
    this.state.queuePos -= 1;
    await this.openCurrent();
  }

  /** Selection must point at an annotation of the loaded document. */
  select(annotationId: string | null): void {
    if (annotationId === null) {
      this.state.selectedId = null;
      return;
    }
    const doc = this.state.doc;
    if (!doc || !doc.annotations.some((a) => a.id === annotationId)) {
      throw new Error(`annotation ${annotationId} is not in the loaded document`);
    }
    this.state.selectedId = annotationId;
  }

  selected() {
    const doc = this.state.doc;
    if (!doc || this.state.selectedId === null) return null;
    return doc.annotations.find((a) => a.id === this.state.selectedId) ?? null;
  }

  selectStep(delta: number): void {
    const doc = this.state.doc;
    if (!doc || doc.annotations.length === 0) return;
    const ids = doc.annotations.map((a) => a.id);
    const pos = this.state.selectedId === null ? -1 : ids.indexOf(this.state.selectedId);
    const next = (pos + delta + ids.length) % ids.length;
    this.state.selectedId = ids[next] ?? null;
  }

  beginDraft(kind: ActionKind, annotationId: string | null, payload: Record<string, unknown>): void {
    this.state.draft = { kind, annotationId, payload };
    this.state.draftError = null;
  }

  discardDraft(): void {
    this.state.draft = null;
    this.state.draftError = null;
  }

  /**
   * Commit the pending draft. On success the server's annotation list
   * replaces local state and the draft clears; a conflict reloads the
   * document and re-presents the draft; a validation error keeps the
   * draft with an inline message.
   */
  async submitDraft(): Promise<boolean> {
    const doc = this.state.doc;
    const draft = this.state.draft;
    if (!doc || !draft) return false;
    try {
      const response = await this.api.postAction(doc.doc_id, {
        kind: draft.kind,
        annotation_id: draft.annotationId,
        payload: draft.payload,
      });
      doc.annotations = response.annotations;
      this.state.draft = null;
      this.state.draftError = null;
      if (draft.kind === "add") {
        const added = String(draft.payload["annotation_id"] ?? "");
        if (doc.annotations.some((a) => a.id === added)) this.state.selectedId = added;
      }
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        const fresh = await this.api.doc(doc.doc_id);
        this.state.doc = fresh;
        if (this.state.selectedId !== null
            && !fresh.annotations.some((a) => a.id === this.state.selectedId)) {
          this.state.selectedId = null;
        }
        this.state.banner = `document changed on the server, reloaded: ${err.message}`;
        return false; // draft stays for re-review
      }
      if (err instanceof ApiError) {
        this.state.draftError = err.message;
        return false;
      }
      throw err;
    }
  }

  private async instantAction(kind: ActionKind, annotationId: string): Promise<boolean> {
    this.beginDraft(kind, annotationId, {});
    return this.submitDraft();
  }

  async acceptSelected(): Promise<boolean> {
    const ann = this.selected();
    return ann ? this.instantAction("accept", ann.id) : false;
  }

  async rejectSelected(): Promise<boolean> {
    const ann = this.selected();
    return ann ? this.instantAction("reject", ann.id) : false;
  }

  /** Draft an edit of the selected annotation's text. */
  draftTextEdit(newText: string): void {
    const ann = this.selected();
    if (!ann) return;
    this.beginDraft("edit_text", ann.id, { old: ann.text, new: newText });
  }

  draftLabelEdit(newLabel: string): void {
    const ann = this.selected();
    if (!ann) return;
    this.beginDraft("edit_label", ann.id, { old: ann.label, new: newLabel });
  }

  draftBoxEdit(newBox: [number, number, number, number]): void {
    const ann = this.selected();
    if (!ann) return;
    this.beginDraft("edit_box", ann.id, { old: ann.box, new: newBox });
  }

  zoomIn(): void {
    this.state.zoom = Math.min(ZOOM_MAX, this.state.zoom * ZOOM_STEP);
  }

  zoomOut(): void {
    this.state.zoom = Math.max(ZOOM_MIN, this.state.zoom / ZOOM_STEP);
  }

  resetView(): void {
    this.state.zoom = 1;
    this.state.panX = 0;
    this.state.panY = 0;
  }

  panBy(dx: number, dy: number): void {
    this.state.panX += dx;
    this.state.panY += dy;
  }

  /** Keyboard-first review: returns true when the key did something. */
  async handleKey(key: string): Promise<boolean> {
    switch (key) {
      case "a":
        return this.acceptSelected();
      case "x":
        return this.rejectSelected();
      case "j":
      case "ArrowDown":
        this.selectStep(1);
        return true;
      case "k":
      case "ArrowUp":
        this.selectStep(-1);
        return true;
      case "n":
        await this.advance();
        return true;
      case "p":
        await this.back();
        return true;
      case "+":
      case "=":
        this.zoomIn();
        return true;
      case "-":
        this.zoomOut();
        return true;
      case "0":
        this.resetView();
        return true;
      case "Escape":
        this.discardDraft();
        return true;
      default:
        return false;
    }
  }
}
