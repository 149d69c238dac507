// Rigid-transform algebra mirroring the backend: Hamilton quaternions in
// (x, y, z, w) order, compose(a, b) meaning "apply b, then a". Operation
// order is kept identical to the backend so interpolation parity holds to
// double precision, not just tolerance.

import type { Quat, Vec3 } from "./protocol.js";

export interface Transform {
  translation: Vec3;
  rotation: Quat;
}

// Matches the backend constructor: keep bits when the norm is within
// 1e-9 of unit, renormalize otherwise.
const RENORM_EPS = 1e-9;

export function makeQuat(x: number, y: number, z: number, w: number): Quat {
  const norm = Math.sqrt(x * x + y * y + z * z + w * w);
  if (norm === 0) {
    throw new Error("zero-norm quaternion");
  }
  if (Math.abs(norm - 1.0) > RENORM_EPS) {
    return { x: x / norm, y: y / norm, z: z / norm, w: w / norm };
  }
  return { x, y, z, w };
}

export const IDENTITY_QUAT: Quat = { x: 0, y: 0, z: 0, w: 1 };

export function identity(): Transform {
  return { translation: { x: 0, y: 0, z: 0 }, rotation: { ...IDENTITY_QUAT } };
}

export function quatMultiply(a: Quat, b: Quat): Quat {
  return makeQuat(
    a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
    a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
    a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
  );
}

export function quatConjugate(q: Quat): Quat {
  return { x: -q.x, y: -q.y, z: -q.z, w: q.w };
}

export function rotateVector(q: Quat, v: Vec3): Vec3 {
  // v' = v + w*t + q_v x t with t = 2 * (q_v x v)
  const tx = 2.0 * (q.y * v.z - q.z * v.y);
  const ty = 2.0 * (q.z * v.x - q.x * v.z);
  const tz = 2.0 * (q.x * v.y - q.y * v.x);
  return {
    x: v.x + q.w * tx + (q.y * tz - q.z * ty),
    y: v.y + q.w * ty + (q.z * tx - q.x * tz),
    z: v.z + q.w * tz + (q.x * ty - q.y * tx),
  };
}

export function compose(a: Transform, b: Transform): Transform {
  const rotated = rotateVector(a.rotation, b.translation);
  return {
    translation: {
      x: a.translation.x + rotated.x,
      y: a.translation.y + rotated.y,
      z: a.translation.z + rotated.z,
    },
    rotation: quatMultiply(a.rotation, b.rotation),
  };
}

export function inverse(t: Transform): Transform {
  const q = quatConjugate(t.rotation);
  const moved = rotateVector(q, t.translation);
  return {
    translation: { x: -moved.x, y: -moved.y, z: -moved.z },
    rotation: q,
  };
}

export function applyTransform(t: Transform, v: Vec3): Vec3 {
  const rotated = rotateVector(t.rotation, v);
  return {
    x: rotated.x + t.translation.x,
    y: rotated.y + t.translation.y,
    z: rotated.z + t.translation.z,
  };
}

export function slerp(a: Quat, b: Quat, fraction: number): Quat {
  let bx = b.x;
  let by = b.y;
  let bz = b.z;
  let bw = b.w;
  let dot = a.x * bx + a.y * by + a.z * bz + a.w * bw;
  if (dot < 0.0) {
    bx = -bx;
    by = -by;
    bz = -bz;
    bw = -bw;
    dot = -dot;
  }
  if (fraction <= 0.0) {
    return a;
  }
  if (fraction >= 1.0) {
    return makeQuat(bx, by, bz, bw);
  }
  dot = Math.min(dot, 1.0);
  const theta = Math.acos(dot);
  if (theta < 1e-9) {
    // angles this small collapse to nlerp; makeQuat renormalizes
    return makeQuat(
      a.x * (1.0 - fraction) + bx * fraction,
      a.y * (1.0 - fraction) + by * fraction,
      a.z * (1.0 - fraction) + bz * fraction,
      a.w * (1.0 - fraction) + bw * fraction,
    );
  }
  const sinTheta = Math.sin(theta);
  const s0 = Math.sin((1.0 - fraction) * theta) / sinTheta;
  const s1 = Math.sin(fraction * theta) / sinTheta;
  return makeQuat(
    a.x * s0 + bx * s1,
    a.y * s0 + by * s1,
    a.z * s0 + bz * s1,
    a.w * s0 + bw * s1,
  );
}

// Command results carry transforms as {translation: [x,y,z], rotation: [x,y,z,w]}.
export interface WireTransform {
  translation: [number, number, number];
  rotation: [number, number, number, number];
}

export function transformFromWire(w: WireTransform): Transform {
  const [tx, ty, tz] = w.translation;
  const [qx, qy, qz, qw] = w.rotation;
  return {
    translation: { x: tx, y: ty, z: tz },
    rotation: makeQuat(qx, qy, qz, qw),
  };
}

export function transformToWire(t: Transform): WireTransform {
  return {
    translation: [t.translation.x, t.translation.y, t.translation.z],
    rotation: [t.rotation.x, t.rotation.y, t.rotation.z, t.rotation.w],
  };
}
