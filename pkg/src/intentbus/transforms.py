"""SE(3) rigid transforms backed by unit quaternions.

Conventions:
  - Transform T_AB = (translation, rotation) maps points from frame B into
    frame A: p_A = R_AB * p_B + t_AB.
  - compose(a, b) applies b first, then a (standard T_AC = T_AB o T_BC).
  - Quaternions are Hamilton (x, y, z, w), double cover: q and -q denote the
    same rotation and compare equal in rotation_close().
  - rpy follows the URDF convention: fixed-axis X-Y-Z, i.e. qz(yaw) *
    qy(pitch) * qx(roll).

Everything here is pure and immutable, safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .messages import Pose, Quaternion, Vector3


@dataclass(frozen=True)
class Transform:
    translation: Vector3
    rotation: Quaternion

    @classmethod
    def identity(cls) -> "Transform":
        return cls(Vector3(0.0, 0.0, 0.0), Quaternion.identity())

    @classmethod
    def from_xyz(cls, x: float, y: float, z: float) -> "Transform":
        return cls(Vector3(x, y, z), Quaternion.identity())

    def to_pose(self) -> Pose:
        return Pose(self.translation, self.rotation)

    @classmethod
    def from_pose(cls, pose: Pose) -> "Transform":
        return cls(pose.position, pose.orientation)


def quat_multiply(a: Quaternion, b: Quaternion) -> Quaternion:
    return Quaternion(
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
    )


def quat_conjugate(q: Quaternion) -> Quaternion:
    return Quaternion(-q.x, -q.y, -q.z, q.w)


def rotate_vector(q: Quaternion, v: Vector3) -> Vector3:
    # v' = v + 2 * qv x (qv x v + w v), one cross fewer than q * (0,v) * q^-1
    tx = 2.0 * (q.y * v.z - q.z * v.y)
    ty = 2.0 * (q.z * v.x - q.x * v.z)
    tz = 2.0 * (q.x * v.y - q.y * v.x)
    return Vector3(
        v.x + q.w * tx + (q.y * tz - q.z * ty),
        v.y + q.w * ty + (q.z * tx - q.x * tz),
        v.z + q.w * tz + (q.x * ty - q.y * tx),
    )


def compose(a: Transform, b: Transform) -> Transform:
    """a o b: apply b, then a.  Rotation stays unit via lazy renormalization."""
    rotated = rotate_vector(a.rotation, b.translation)
    return Transform(
        Vector3(
            a.translation.x + rotated.x,
            a.translation.y + rotated.y,
            a.translation.z + rotated.z,
        ),
        quat_multiply(a.rotation, b.rotation),
    )


def inverse(t: Transform) -> Transform:
    q_inv = quat_conjugate(t.rotation)
    p = rotate_vector(q_inv, t.translation)
    return Transform(Vector3(-p.x, -p.y, -p.z), q_inv)


def apply(t: Transform, point: Vector3) -> Vector3:
    rotated = rotate_vector(t.rotation, point)
    return Vector3(
        t.translation.x + rotated.x,
        t.translation.y + rotated.y,
        t.translation.z + rotated.z,
    )


def axis_angle(axis: Vector3, angle: float) -> Quaternion:
    """Unit quaternion rotating by ``angle`` radians about ``axis``."""
    n = math.sqrt(axis.x**2 + axis.y**2 + axis.z**2)
    if n == 0.0:
        raise ValueError("axis must be non-zero")
    s = math.sin(angle / 2.0) / n
    return Quaternion(axis.x * s, axis.y * s, axis.z * s, math.cos(angle / 2.0))


def rpy_to_quaternion(roll: float, pitch: float, yaw: float) -> Quaternion:
    """URDF rpy: rotate about fixed X by roll, Y by pitch, Z by yaw."""
    qz = axis_angle(Vector3(0.0, 0.0, 1.0), yaw)
    qy = axis_angle(Vector3(0.0, 1.0, 0.0), pitch)
    qx = axis_angle(Vector3(1.0, 0.0, 0.0), roll)
    return quat_multiply(qz, quat_multiply(qy, qx))


def slerp(a: Quaternion, b: Quaternion, fraction: float) -> Quaternion:
    """Spherical interpolation taking the short arc (double-cover aware)."""
    dot = a.x * b.x + a.y * b.y + a.z * b.z + a.w * b.w
    bx, by, bz, bw = b.x, b.y, b.z, b.w
    if dot < 0.0:
        dot, bx, by, bz, bw = -dot, -bx, -by, -bz, -bw
    if fraction <= 0.0:
        return a
    if fraction >= 1.0:
        return Quaternion(bx, by, bz, bw)
    dot = min(dot, 1.0)
    theta = math.acos(dot)
    if theta < 1e-9:
        # nearly parallel: nlerp, renormalized by the constructor
        return Quaternion(
            a.x + fraction * (bx - a.x),
            a.y + fraction * (by - a.y),
            a.z + fraction * (bz - a.z),
            a.w + fraction * (bw - a.w),
        )
    sin_theta = math.sin(theta)
    ca = math.sin((1.0 - fraction) * theta) / sin_theta
    cb = math.sin(fraction * theta) / sin_theta
    return Quaternion(
        ca * a.x + cb * bx,
        ca * a.y + cb * by,
        ca * a.z + cb * bz,
        ca * a.w + cb * bw,
    )


# -- comparisons (used across modules and tests) -----------------------------

def translation_close(a: Transform, b: Transform, tol: float = 1e-9) -> bool:
    return (
        abs(a.translation.x - b.translation.x) <= tol
        and abs(a.translation.y - b.translation.y) <= tol
        and abs(a.translation.z - b.translation.z) <= tol
    )


def rotation_close(a: Quaternion, b: Quaternion, tol: float = 1e-9) -> bool:
    """Rotations equal up to quaternion sign: |<a, b>| within tol of 1."""
    dot = a.x * b.x + a.y * b.y + a.z * b.z + a.w * b.w
    return abs(abs(dot) - 1.0) <= tol


def transform_close(a: Transform, b: Transform, tol: float = 1e-9) -> bool:
    return translation_close(a, b, tol) and rotation_close(a.rotation, b.rotation, tol)
