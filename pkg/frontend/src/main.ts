/**
 * Canvas wiring for the trajectory editor.  Draw with the pointer to add a
 * trajectory (a click adds a static point); click near a start dot to
 * select; pan/zoom tools and tail dropout act on the selection (or the
 * whole set when nothing is selected).  Start dots render green and end
 * dots red, with the end color fading toward orange for tracks whose
 * visible span ends early.
 */

import { EditorApi } from "./api.js";
import { EditorState } from "./editor.js";
import { PointEntry, TrackDoc } from "./model.js";
import { compositeMask } from "./overlay.js";
import { Sample } from "./resample.js";

const api = new EditorApi("");

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

interface MaskData {
  values: Uint8ClampedArray;
  width: number;
  height: number;
}

class EditorView {
  private canvas = byId<HTMLCanvasElement>("canvas");
  private ctx = this.canvas.getContext("2d")!;
  private scrub = byId<HTMLInputElement>("scrub");
  private frameLabel = byId<HTMLSpanElement>("frame-label");
  private status = byId<HTMLSpanElement>("status");
  private drawing: Sample[] | null = null;
  private image = new window.Image();
  private stride = 8;
  private temporalStride = 1;
  private maskCache = new Map<number, MaskData>();

  constructor(private state: EditorState) {}

  async init(): Promise<void> {
    const project = await api.getProject();
    this.stride = project.injector.spatial_stride;
    this.temporalStride = project.injector.temporal_stride;
    this.canvas.width = project.width;
    this.canvas.height = project.height;
    this.scrub.max = String(project.frame_count - 1);

    await new Promise<void>((resolve, reject) => {
      this.image.onload = () => resolve();
      this.image.onerror = () => reject(new Error("image load failed"));
      this.image.src = api.imageUrl();
    });

    this.bindControls();
    this.render();
  }

  private bindControls(): void {
    this.canvas.addEventListener("pointerdown", (ev) => {
      this.canvas.setPointerCapture(ev.pointerId);
      const p = this.canvasPoint(ev);
      const hit = this.hitTrackStart(p);
      if (hit !== null && ev.shiftKey) {
        this.state.toggleSelected(hit);
        this.render();
        return;
      }
      this.drawing = [p];
    });
    this.canvas.addEventListener("pointermove", (ev) => {
      if (!this.drawing) return;
      this.drawing.push(this.canvasPoint(ev));
      this.render();
    });
    this.canvas.addEventListener("pointerup", () => {
      const samples = this.drawing;
      this.drawing = null;
      if (!samples) return;
      this.run(async () => {
        const id = await this.state.drawTrajectory(samples);
        this.report(`added ${id}`);
      });
    });

    this.scrub.addEventListener("input", () => {
      this.state.setScrubFrame(Number(this.scrub.value));
      this.render();
    });
    byId<HTMLInputElement>("overlay-toggle").addEventListener("change", (ev) => {
      this.state.overlayOn = (ev.target as HTMLInputElement).checked;
      this.render();
    });

    byId<HTMLButtonElement>("pan-btn").addEventListener("click", () => {
      const vx = Number(byId<HTMLInputElement>("pan-vx").value);
      const vy = Number(byId<HTMLInputElement>("pan-vy").value);
      this.run(async () => {
        await this.state.applyCameraTool("pan", { vx, vy });
        this.report(`panned at (${vx}, ${vy}) px/frame`);
      });
    });
    byId<HTMLButtonElement>("zoom-btn").addEventListener("click", () => {
      const speed = Number(byId<HTMLInputElement>("zoom-speed").value);
      this.run(async () => {
        await this.state.applyCameraTool("zoom", {
          speed,
          center: [this.canvas.width / 2, this.canvas.height / 2],
        });
        this.report(`zoomed at ${speed} px/frame`);
      });
    });
    byId<HTMLButtonElement>("dropout-btn").addEventListener("click", () => {
      const prob = Number(byId<HTMLInputElement>("dropout-prob").value);
      const seed = Number(byId<HTMLInputElement>("dropout-seed").value);
      this.run(async () => {
        await this.state.applyTailDropout(prob, seed);
        this.report(`tail dropout applied (p=${prob}, seed=${seed})`);
      });
    });
    byId<HTMLButtonElement>("undo-btn").addEventListener("click", () => {
      this.run(async () => {
        const undone = await this.state.undo();
        this.report(undone ? "undid last change" : "nothing to undo");
      });
    });
    byId<HTMLButtonElement>("delete-btn").addEventListener("click", () => {
      this.run(async () => {
        await this.state.deleteSelected();
        this.report("deleted selection");
      });
    });
    byId<HTMLButtonElement>("export-btn").addEventListener("click", () => {
      const blob = new Blob([this.state.exportDoc()], {
        type: "application/json",
      });
      const link = document.createElement("a");
      link.href = URL.createObjectURL(blob);
      link.download = "trajectories.json";
      link.click();
      URL.revokeObjectURL(link.href);
    });
  }

  private run(action: () => Promise<void>): void {
    action()
      .catch((err) => this.report(String(err), true))
      .finally(() => {
        this.maskCache.clear();
        this.render();
      });
  }

  private report(message: string, isError = false): void {
    this.status.textContent = message;
    this.status.className = isError ? "status error" : "status";
  }

  private canvasPoint(ev: PointerEvent): Sample {
    const rect = this.canvas.getBoundingClientRect();
    return {
      x: ((ev.clientX - rect.left) / rect.width) * this.canvas.width,
      y: ((ev.clientY - rect.top) / rect.height) * this.canvas.height,
    };
  }

  private hitTrackStart(p: Sample): string | null {
    for (const track of this.state.doc.tracks) {
      const start = firstVisible(track);
      if (!start) continue;
      if (Math.hypot(start.x - p.x, start.y - p.y) < 6) return track.id;
    }
    return null;
  }

  private render(): void {
    const frame = this.state.scrubFrame;
    this.frameLabel.textContent = `frame ${frame}`;
    this.ctx.drawImage(this.image, 0, 0);

    if (this.state.overlayOn) {
      void this.drawOverlay(frame);
    }
    for (const track of this.state.doc.tracks) {
      this.drawTrack(track, frame);
    }
    if (this.drawing && this.drawing.length > 1) {
      this.drawPolyline(this.drawing, "#00bcd4", 1.5);
    }
  }

  private drawTrack(track: TrackDoc, frame: number): void {
    const visible = track.points.filter(
      (entry): entry is PointEntry => entry !== null && entry.visible
    );
    if (visible.length === 0) return;
    const selected = this.state.selected.has(track.id);
    this.drawPolyline(visible, selected ? "#ffffff" : "#9e9e9e", 1);

    // endpoint color encodes how much of the clip the trajectory spans
    const lastVisibleFrame = track.points.reduce(
      (acc, entry, i) => (entry && entry.visible ? i : acc),
      0
    );
    const span = lastVisibleFrame / Math.max(this.state.frameCount - 1, 1);
    this.drawDot(visible[0], "#2e7d32");
    this.drawDot(visible[visible.length - 1], endColor(span));

    const current = track.points[frame];
    if (current && current.visible) {
      this.drawDot(current, selected ? "#ffeb3b" : "#03a9f4", 4);
    }
  }

  private drawPolyline(points: Sample[], color: string, width: number): void {
    this.ctx.strokeStyle = color;
    this.ctx.lineWidth = width;
    this.ctx.beginPath();
    points.forEach((p, i) =>
      i === 0 ? this.ctx.moveTo(p.x, p.y) : this.ctx.lineTo(p.x, p.y)
    );
    this.ctx.stroke();
  }

  private drawDot(p: Sample, color: string, radius = 3): void {
    this.ctx.fillStyle = color;
    this.ctx.beginPath();
    this.ctx.arc(p.x, p.y, radius, 0, 2 * Math.PI);
    this.ctx.fill();
  }

  private async drawOverlay(frame: number): Promise<void> {
    const latentFrame = Math.floor(frame / this.temporalStride);
    let mask = this.maskCache.get(latentFrame);
    if (!mask) {
      try {
        mask = await fetchMask(api.maskPreviewUrl(latentFrame));
      } catch {
        this.report("mask preview unavailable (stale overlay)", true);
        return;
      }
      this.maskCache.set(latentFrame, mask);
      this.render(); // re-enter with the cache warm
      return;
    }
    const frameData = this.ctx.getImageData(
      0, 0, this.canvas.width, this.canvas.height
    );
    compositeMask(
      frameData.data,
      mask.values,
      this.canvas.width,
      this.canvas.height,
      mask.width,
      mask.height,
      this.stride
    );
    this.ctx.putImageData(frameData, 0, 0);
  }
}

function firstVisible(track: TrackDoc): PointEntry | null {
  for (const entry of track.points) {
    if (entry && entry.visible) return entry;
  }
  return null;
}

function endColor(span: number): string {
  // full-length tracks end pure red; early-terminating ones shade orange
  const green = Math.round(160 * (1 - span));
  return `rgb(229, ${green}, 0)`;
}

async function fetchMask(url: string): Promise<MaskData> {
  const resp = await fetch(url);
  if (!resp.ok) throw new Error(`mask fetch failed: ${resp.status}`);
  const blob = await resp.blob();
  const bitmap = await createImageBitmap(blob);
  const scratch = document.createElement("canvas");
  scratch.width = bitmap.width;
  scratch.height = bitmap.height;
  const ctx = scratch.getContext("2d")!;
  ctx.drawImage(bitmap, 0, 0);
  const data = ctx.getImageData(0, 0, bitmap.width, bitmap.height).data;
  const gray = new Uint8ClampedArray(bitmap.width * bitmap.height);
  for (let i = 0; i < gray.length; i++) {
    gray[i] = data[i * 4];
  }
  return { values: gray, width: bitmap.width, height: bitmap.height };
}

async function boot(): Promise<void> {
  const state = await EditorState.load(api);
  const view = new EditorView(state);
  await view.init();
}

boot().catch((err) => {
  document.body.textContent = `failed to start editor: ${err}`;
});
