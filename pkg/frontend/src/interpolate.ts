// Client-side preview sampling. This mirrors the scheduler's sampling, so
// the hologram the operator watches is the same state the robot will pass
// through; parity against recorded backend samples is tested to 1e-6.

import type { JointTrajectoryMsg, PathMsg, PoseMsg } from "./protocol.js";
import { slerp } from "./transforms.js";

export type IntentKind = "navigation" | "manipulation";

export interface PreviewIntent {
  kind: IntentKind;
  payload: PathMsg | JointTrajectoryMsg;
  previewEpoch: number;
  executeEpoch: number;
}

export class SampleError extends Error {}

export function nativeDurationSeconds(intent: PreviewIntent): number {
  if (intent.kind === "navigation") {
    const poses = (intent.payload as PathMsg).poses;
    if (poses.length < 2) {
      return 0.0;
    }
    return (poses[poses.length - 1]!.header.stamp - poses[0]!.header.stamp) / 1e9;
  }
  const points = (intent.payload as JointTrajectoryMsg).points;
  return points.length > 0 ? points[points.length - 1]!.time_from_start : 0.0;
}

export function previewDurationSeconds(intent: PreviewIntent): number {
  const native = nativeDurationSeconds(intent);
  if (intent.kind === "navigation") {
    const delay = (intent.executeEpoch - intent.previewEpoch) / 1e9;
    return Math.max(delay, native);
  }
  return native;
}

function lerp(a: number, b: number, u: number): number {
  return a + (b - a) * u;
}

function sampleNavigation(intent: PreviewIntent, t: number): PoseMsg {
  const poses = (intent.payload as PathMsg).poses.map((ps) => ps.pose);
  if (poses.length === 0) {
    throw new SampleError("poses: cannot preview an empty path");
  }
  if (poses.length === 1) {
    return poses[0]!;
  }
  const duration = previewDurationSeconds(intent);
  let fraction: number;
  if (t <= 0.0 || duration <= 0.0) {
    fraction = t <= 0.0 ? 0.0 : 1.0;
  } else {
    fraction = Math.min(t / duration, 1.0);
  }
  if (fraction <= 0.0) {
    return poses[0]!;
  }
  if (fraction >= 1.0) {
    return poses[poses.length - 1]!;
  }

  // Constant-speed: walk cumulative arc length over waypoint positions.
  const segLengths: number[] = [];
  for (let j = 0; j < poses.length - 1; j++) {
    const a = poses[j]!.position;
    const b = poses[j + 1]!.position;
    const dx = b.x - a.x;
    const dy = b.y - a.y;
    const dz = b.z - a.z;
    segLengths.push(Math.sqrt(dx * dx + dy * dy + dz * dz));
  }
  let total = 0.0;
  for (const seg of segLengths) {
    total += seg;
  }
  let i: number;
  let u: number;
  if (total <= 0.0) {
    // Degenerate geometry: fall back to uniform progress over waypoints.
    const x = fraction * (poses.length - 1);
    i = Math.min(Math.trunc(x), poses.length - 2);
    u = x - i;
  } else {
    const target = fraction * total;
    let walked = 0.0;
    i = poses.length - 2;
    u = 1.0;
    for (let j = 0; j < segLengths.length; j++) {
      const seg = segLengths[j]!;
      if (seg > 0.0 && target <= walked + seg) {
        i = j;
        u = (target - walked) / seg;
        break;
      }
      walked += seg;
    }
  }
  const a = poses[i]!;
  const b = poses[i + 1]!;
  return {
    position: {
      x: lerp(a.position.x, b.position.x, u),
      y: lerp(a.position.y, b.position.y, u),
      z: lerp(a.position.z, b.position.z, u),
    },
    orientation: slerp(a.orientation, b.orientation, u),
  };
}

function sampleManipulation(
  intent: PreviewIntent,
  t: number,
): Record<string, number> {
  const traj = intent.payload as JointTrajectoryMsg;
  const points = traj.points;
  if (points.length === 0) {
    throw new SampleError("points: cannot preview an empty trajectory");
  }
  const names = traj.joint_names;
  const zip = (positions: number[]): Record<string, number> => {
    const out: Record<string, number> = {};
    names.forEach((name, k) => {
      out[name] = positions[k]!;
    });
    return out;
  };
  if (t <= points[0]!.time_from_start) {
    return zip(points[0]!.positions);
  }
  if (t >= points[points.length - 1]!.time_from_start) {
    return zip(points[points.length - 1]!.positions);
  }
  for (let j = 0; j < points.length - 1; j++) {
    const a = points[j]!;
    const b = points[j + 1]!;
    if (t <= b.time_from_start) {
      const u = (t - a.time_from_start) / (b.time_from_start - a.time_from_start);
      const out: Record<string, number> = {};
      names.forEach((name, k) => {
        out[name] = lerp(a.positions[k]!, b.positions[k]!, u);
      });
      return out;
    }
  }
  return zip(points[points.length - 1]!.positions);
}

// Hologram state t seconds after preview start (clamped beyond the end).
export function samplePreview(
  intent: PreviewIntent,
  t: number,
): PoseMsg | Record<string, number> {
  if (t < 0.0) {
    throw new SampleError("t: must be >= 0");
  }
  if (intent.kind === "navigation") {
    return sampleNavigation(intent, t);
  }
  return sampleManipulation(intent, t);
}
