/**
 * Trajectory document model (version 1) mirrored from the service schema,
 * with the client-side validation that gates every PUT.
 */

export interface PointEntry {
  x: number;
  y: number;
  visible: boolean;
}

export interface TrackDoc {
  id: string;
  points: (PointEntry | null)[];
}

export interface TrajectoryDoc {
  version: 1;
  width: number;
  height: number;
  frame_count: number;
  tracks: TrackDoc[];
}

export interface Violation {
  message: string;
  trackId?: string;
  frame?: number;
}

export function emptyDoc(
  width: number,
  height: number,
  frameCount: number
): TrajectoryDoc {
  return { version: 1, width, height, frame_count: frameCount, tracks: [] };
}

/** Every schema/invariant violation; an empty list means the doc is valid. */
export function validateDoc(doc: TrajectoryDoc): Violation[] {
  const violations: Violation[] = [];
  if (doc.version !== 1) {
    violations.push({ message: `unsupported version ${doc.version}` });
  }
  if (!(doc.width >= 1) || !(doc.height >= 1) || !(doc.frame_count >= 1)) {
    violations.push({ message: "dimensions and frame_count must be >= 1" });
  }
  const seen = new Set<string>();
  for (const track of doc.tracks) {
    if (seen.has(track.id)) {
      violations.push({ message: "duplicate track id", trackId: track.id });
    }
    seen.add(track.id);
    if (track.points.length !== doc.frame_count) {
      violations.push({
        message: `track has ${track.points.length} points, expected ${doc.frame_count}`,
        trackId: track.id,
      });
    }
    let anyVisible = false;
    track.points.forEach((entry, frame) => {
      if (entry === null) return;
      if (!Number.isFinite(entry.x) || !Number.isFinite(entry.y)) {
        violations.push({ message: "non-finite position", trackId: track.id, frame });
      }
      if (entry.visible) anyVisible = true;
    });
    if (!anyVisible) {
      violations.push({ message: "track has no visible frame", trackId: track.id });
    }
  }
  return violations;
}

/** Stable serialization used for export and undo-stack snapshots. */
export function serializeDoc(doc: TrajectoryDoc): string {
  const canonical: TrajectoryDoc = {
    version: 1,
    width: doc.width,
    height: doc.height,
    frame_count: doc.frame_count,
    tracks: doc.tracks.map((track) => ({
      id: track.id,
      points: track.points.map((entry) =>
        entry === null
          ? null
          : { x: entry.x, y: entry.y, visible: entry.visible }
      ),
    })),
  };
  return JSON.stringify(canonical, null, 2) + "\n";
}

export function parseDoc(text: string): TrajectoryDoc {
  const doc = JSON.parse(text) as TrajectoryDoc;
  if (doc.version !== 1) {
    throw new Error(`unsupported trajectory version ${doc.version}`);
  }
  return doc;
}

export function cloneDoc(doc: TrajectoryDoc): TrajectoryDoc {
  return parseDoc(serializeDoc(doc));
}

/** Smallest unused id of the form `${prefix}000`. */
export function nextTrackId(doc: TrajectoryDoc, prefix = "u"): string {
  const taken = new Set(doc.tracks.map((track) => track.id));
  for (let i = 0; ; i++) {
    const candidate = `${prefix}${String(i).padStart(3, "0")}`;
    if (!taken.has(candidate)) return candidate;
  }
}
