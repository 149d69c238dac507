"""Independent reference implementations used to check the package's math.

Everything here is built on numpy 4x4 homogeneous matrices, written from the
standard textbook formulas.  Nothing imports from intentbus except the plain
data it is handed; if the package and this file agree to 1e-9 the package's
quaternion algebra is doing the same geometry by a different route.
"""

from __future__ import annotations

import numpy as np


def quat_to_matrix(x: float, y: float, z: float, w: float) -> np.ndarray:
    """3x3 rotation matrix for a unit quaternion (x, y, z, w)."""
    n = np.sqrt(x * x + y * y + z * z + w * w)
    x, y, z, w = x / n, y / n, z / n, w / n
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(m: np.ndarray) -> tuple[float, float, float, float]:
    """Shepperd's method; returns (x, y, z, w) with w >= 0."""
    t = np.trace(m)
    if t > 0:
        s = np.sqrt(t + 1.0) * 2
        w = 0.25 * s
        x = (m[2, 1] - m[1, 2]) / s
        y = (m[0, 2] - m[2, 0]) / s
        z = (m[1, 0] - m[0, 1]) / s
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
        w = (m[2, 1] - m[1, 2]) / s
        x = 0.25 * s
        y = (m[0, 1] + m[1, 0]) / s
        z = (m[0, 2] + m[2, 0]) / s
    elif m[1, 1] > m[2, 2]:
        s = np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
        w = (m[0, 2] - m[2, 0]) / s
        x = (m[0, 1] + m[1, 0]) / s
        y = 0.25 * s
        z = (m[1, 2] + m[2, 1]) / s
    else:
        s = np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
        w = (m[1, 0] - m[0, 1]) / s
        x = (m[0, 2] + m[2, 0]) / s
        y = (m[1, 2] + m[2, 1]) / s
        z = 0.25 * s
    if w < 0:
        x, y, z, w = -x, -y, -z, -w
    return float(x), float(y), float(z), float(w)


def homogeneous(translation, quaternion) -> np.ndarray:
    """4x4 matrix from a (3,) translation and an (x, y, z, w) quaternion."""
    m = np.eye(4)
    m[:3, :3] = quat_to_matrix(*quaternion)
    m[:3, 3] = translation
    return m


def compose_mat(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b


def inverse_mat(a: np.ndarray) -> np.ndarray:
    return np.linalg.inv(a)


def apply_mat(a: np.ndarray, point) -> np.ndarray:
    p = np.ones(4)
    p[:3] = point
    return (a @ p)[:3]


def axis_angle_matrix(axis, angle: float) -> np.ndarray:
    """Rodrigues' rotation formula, as a 4x4."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    k = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    r = np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)
    m = np.eye(4)
    m[:3, :3] = r
    return m


def translation_matrix(axis, distance: float) -> np.ndarray:
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    m = np.eye(4)
    m[:3, 3] = a * distance
    return m


def rpy_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Fixed-axis XYZ convention: R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    return (
        axis_angle_matrix((0, 0, 1), yaw)
        @ axis_angle_matrix((0, 1, 0), pitch)
        @ axis_angle_matrix((1, 0, 0), roll)
    )


def transform_to_matrix(t) -> np.ndarray:
    """Duck-typed on .translation.{x,y,z} and .rotation.{x,y,z,w} so this
    file never imports the package under test.
    """
    v, q = t.translation, t.rotation
    return homogeneous((v.x, v.y, v.z), (q.x, q.y, q.z, q.w))


def fk_chain(joints, config: dict[str, float]) -> dict[str, np.ndarray]:
    """Forward kinematics over a parent-ordered joint list.

    ``joints`` is a sequence of dicts with keys name, type, parent, child,
    origin (4x4), axis (3,) or None.  Returns link name -> world matrix,
    rooted at the first joint's parent at identity.
    """
    world: dict[str, np.ndarray] = {}
    if joints:
        world[joints[0]["parent"]] = np.eye(4)
    for j in joints:
        base = world[j["parent"]] @ j["origin"]
        if j["type"] == "fixed":
            motion = np.eye(4)
        elif j["type"] == "prismatic":
            motion = translation_matrix(j["axis"], config[j["name"]])
        else:
            motion = axis_angle_matrix(j["axis"], config[j["name"]])
        world[j["child"]] = base @ motion
    return world
