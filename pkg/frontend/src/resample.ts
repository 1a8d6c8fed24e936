/**
 * Arc-length resampling of free-hand pointer paths, so a drawn trajectory
 * moves at uniform speed along the path regardless of drawing speed.
 */

export interface Sample {
  x: number;
  y: number;
}

/**
 * Resample a pointer path to exactly `frameCount` points spaced uniformly
 * by arc length.  Degenerate inputs (fewer than 2 samples, or zero total
 * length) become a static point repeated every frame.
 */
export function resamplePath(samples: Sample[], frameCount: number): Sample[] {
  if (frameCount < 1) throw new Error("frameCount must be >= 1");
  if (samples.length === 0) throw new Error("need at least one sample");

  const first = samples[0];
  if (samples.length < 2 || frameCount === 1) {
    return fillStatic(first, frameCount);
  }

  const cumulative: number[] = [0];
  for (let i = 1; i < samples.length; i++) {
    const dx = samples[i].x - samples[i - 1].x;
    const dy = samples[i].y - samples[i - 1].y;
    cumulative.push(cumulative[i - 1] + Math.hypot(dx, dy));
  }
  const total = cumulative[cumulative.length - 1];
  if (total === 0) {
    return fillStatic(first, frameCount);
  }

  const out: Sample[] = [];
  let segment = 0;
  for (let frame = 0; frame < frameCount; frame++) {
    const target = (total * frame) / (frameCount - 1);
    while (segment < samples.length - 2 && cumulative[segment + 1] < target) {
      segment++;
    }
    const span = cumulative[segment + 1] - cumulative[segment];
    const t = span === 0 ? 0 : (target - cumulative[segment]) / span;
    const a = samples[segment];
    const b = samples[segment + 1];
    out.push({ x: a.x + t * (b.x - a.x), y: a.y + t * (b.y - a.y) });
  }
  return out;
}

function fillStatic(p: Sample, frameCount: number): Sample[] {
  return Array.from({ length: frameCount }, () => ({ x: p.x, y: p.y }));
}
