/**
 * Editor state machine: a working mirror of the server's trajectory set,
 * selection, frame scrubbing, and an undo stack of serialized documents.
 *
 * Every mutation is validated client-side, sent to the server, and the
 * local mirror is replaced by the server's response, so the two can never
 * drift apart silently.
 */

import { EditorApi, TransformRequest } from "./api.js";
import {
  TrajectoryDoc,
  Violation,
  cloneDoc,
  nextTrackId,
  serializeDoc,
  validateDoc,
} from "./model.js";
import { Sample, resamplePath } from "./resample.js";

export class EditorState {
  doc: TrajectoryDoc;
  selected = new Set<string>();
  scrubFrame = 0;
  overlayOn = false;
  private undoStack: string[] = [];

  constructor(private api: EditorApi, doc: TrajectoryDoc) {
    this.doc = cloneDoc(doc);
  }

  static async load(api: EditorApi): Promise<EditorState> {
    return new EditorState(api, await api.getTrajectories());
  }

  get frameCount(): number {
    return this.doc.frame_count;
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  setScrubFrame(frame: number): void {
    // scrubbing only moves the playhead; the stored set is untouched
    this.scrubFrame = Math.min(Math.max(frame, 0), this.frameCount - 1);
  }

  toggleSelected(trackId: string): void {
    if (this.selected.has(trackId)) {
      this.selected.delete(trackId);
    } else {
      this.selected.add(trackId);
    }
  }

  /** Selected ids when any, otherwise every track (whole-set mode). */
  targetIds(): string[] {
    const ids =
      this.selected.size > 0
        ? [...this.selected]
        : this.doc.tracks.map((track) => track.id);
    return ids;
  }

  exportDoc(): string {
    return serializeDoc(this.doc);
  }

  /**
   * Turn a free-hand pointer path into a new track: resampled to one point
   * per frame by arc length, all visible.  A single click (fewer than two
   * samples) becomes a static point.
   */
  async drawTrajectory(samples: Sample[]): Promise<string> {
    const resampled = resamplePath(samples, this.frameCount);
    const id = nextTrackId(this.doc, "u");
    const proposed = cloneDoc(this.doc);
    proposed.tracks.push({
      id,
      points: resampled.map((p) => ({ x: p.x, y: p.y, visible: true })),
    });
    await this.commit(proposed);
    return id;
  }

  async deleteSelected(): Promise<void> {
    if (this.selected.size === 0) return;
    const proposed = cloneDoc(this.doc);
    proposed.tracks = proposed.tracks.filter(
      (track) => !this.selected.has(track.id)
    );
    this.selected.clear();
    await this.commit(proposed);
  }

  /** Pan or zoom the selected tracks through the server's camera ops. */
  async applyCameraTool(
    kind: "pan" | "zoom",
    params: Record<string, number | number[]>
  ): Promise<void> {
    const request: TransformRequest = {
      type: kind,
      params,
      track_ids: this.targetIds(),
    };
    this.pushUndo();
    this.doc = await this.api.postTransform(request);
  }

  async applyTailDropout(prob: number, seed: number): Promise<void> {
    this.pushUndo();
    this.doc = await this.api.postTailDropout(prob, seed);
  }

  /** Restore and persist the previous document; no-op on an empty stack. */
  async undo(): Promise<boolean> {
    const prior = this.undoStack.pop();
    if (prior === undefined) return false;
    this.doc = await this.api.putTrajectories(prior);
    return true;
  }

  /** Validate locally, push the prior state, PUT, adopt the response. */
  private async commit(proposed: TrajectoryDoc): Promise<void> {
    const violations: Violation[] = validateDoc(proposed);
    if (violations.length > 0) {
      throw new Error(
        `document invalid before save: ${violations
          .map((v) => v.message)
          .join("; ")}`
      );
    }
    this.pushUndo();
    this.doc = await this.api.putTrajectories(serializeDoc(proposed));
  }

  private pushUndo(): void {
    this.undoStack.push(serializeDoc(this.doc));
  }
}
