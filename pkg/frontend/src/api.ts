/**
 * Typed client for the editor service REST API.  All trajectory mutations
 * go through these endpoints; the server remains the source of truth.
 */

import type { TrajectoryDoc, Violation } from "./model.js";

export interface ProjectInfo {
  id: string;
  width: number;
  height: number;
  frame_count: number;
  latent_channels: number;
  injector: {
    sigma_mode: string;
    sigma: number;
    spatial_stride: number;
    temporal_stride: number;
    composition: string;
    blend: string;
  };
}

export interface TransformRequest {
  type: "pan" | "zoom" | "custom";
  params: Record<string, unknown>;
  track_ids?: string[];
}

export class ValidationRejected extends Error {
  constructor(public violations: Violation[]) {
    super(`server rejected trajectories: ${violations.length} violation(s)`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class EditorApi {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init)
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    if (resp.status === 422) {
      const body = (await resp.json()) as {
        violations?: { message: string; track_id?: string; frame?: number }[];
      };
      throw new ValidationRejected(
        (body.violations ?? []).map((v) => ({
          message: v.message,
          trackId: v.track_id ?? undefined,
          frame: v.frame ?? undefined,
        }))
      );
    }
    if (!resp.ok) {
      throw new Error(`${path} failed: ${resp.status} ${await resp.text()}`);
    }
    return resp;
  }

  async getProject(): Promise<ProjectInfo> {
    const resp = await this.request("/api/project");
    return (await resp.json()) as ProjectInfo;
  }

  async getTrajectories(): Promise<TrajectoryDoc> {
    const resp = await this.request("/api/trajectories");
    return (await resp.json()) as TrajectoryDoc;
  }

  async putTrajectories(body: string): Promise<TrajectoryDoc> {
    const resp = await this.request("/api/trajectories", {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body,
    });
    return (await resp.json()) as TrajectoryDoc;
  }

  async postTransform(req: TransformRequest): Promise<TrajectoryDoc> {
    const resp = await this.request("/api/transform", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
    return (await resp.json()) as TrajectoryDoc;
  }

  async postTailDropout(prob: number, seed: number): Promise<TrajectoryDoc> {
    const resp = await this.request("/api/augment/tail_dropout", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ prob, seed }),
    });
    return (await resp.json()) as TrajectoryDoc;
  }

  imageUrl(): string {
    return `${this.baseUrl}/api/image`;
  }

  maskPreviewUrl(frame: number): string {
    return `${this.baseUrl}/api/preview/mask?frame=${frame}`;
  }
}
