"""Model repository access and kinematic trees.

Robots are described by URDF or SDF documents listed in a JSON manifest
(schema in docs/manifest.md) hosted on a plain file tree or HTTP server.
Both formats normalize into the same KinematicTree so downstream animation
code never cares which one a robot shipped with.  Object meshes (FBX) are
treated as opaque: the manifest carries a name, uri, checksum and bounding
box, and nothing here ever opens the mesh bytes.

Supported joint types: revolute, continuous, prismatic, fixed.  Everything
else (floating, planar, ball...) raises UnsupportedJoint instead of being
silently mangled.  Elements irrelevant to pose animation (collision,
material, transmission, mimic) are skipped with a warning.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import urllib.error
import urllib.parse
import urllib.request
import warnings
import threading
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Callable

from .errors import (
    ConfigError,
    FetchError,
    IntegrityError,
    LimitError,
    NotFound,
    ParseError,
    StructureError,
    UnsupportedJoint,
    ValidationError,
)
from .messages import Vector3
from .transforms import (
    Transform,
    axis_angle,
    compose,
    inverse,
    quat_conjugate,
    rotate_vector,
    rpy_to_quaternion,
)

ENTRY_KINDS = ("robot_urdf", "robot_sdf", "object_fbx")
MOVING_JOINT_TYPES = ("revolute", "continuous", "prismatic")
_SCHEME_RE = re.compile(r"^[a-z][a-z0-9+.-]*://")


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    kind: str
    uri: str
    checksum: str  # "sha256:<hex>"
    bounding_box: tuple[float, float, float] | None = None


@dataclass(frozen=True)
class RepositoryManifest:
    """Parsed resource listing plus the base location entry uris resolve against."""

    repository: str
    base: str
    entries: tuple[ManifestEntry, ...]

    def entry(self, name: str) -> ManifestEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise NotFound(f"no manifest entry named {name!r}")

    def names(self, kind: str | None = None) -> list[str]:
        return [e.name for e in self.entries if kind is None or e.kind == kind]


def _is_http(uri: str) -> bool:
    return uri.startswith(("http://", "https://"))


def _fetch_bytes(uri: str) -> bytes:
    if _is_http(uri):
        try:
            with urllib.request.urlopen(uri, timeout=10) as resp:
                return resp.read()
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise FetchError(f"cannot fetch {uri}: {exc}") from exc
    path = uri[len("file://"):] if uri.startswith("file://") else uri
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise FetchError(f"cannot read {path}: {exc}") from exc


def _resolve_uri(base: str, uri: str) -> str:
    """Entry uris may be absolute or relative to the manifest's directory."""
    if _SCHEME_RE.match(uri) or os.path.isabs(uri):
        return uri
    if _is_http(base):
        return urllib.parse.urljoin(base if base.endswith("/") else base + "/", uri)
    return os.path.join(base, uri)


def _base_of(uri: str) -> str:
    if _is_http(uri):
        return uri.rsplit("/", 1)[0]
    path = uri[len("file://"):] if uri.startswith("file://") else uri
    return os.path.dirname(os.path.abspath(path))


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def verify_checksum(data: bytes, checksum: str) -> None:
    digest = sha256_hex(data)
    expected = checksum[len("sha256:"):]
    if digest != expected:
        raise IntegrityError(f"sha256 {digest} != declared {expected}")


def fetch_manifest(uri: str) -> RepositoryManifest:
    """Fetch and validate a manifest; callers re-fetch at startup to refresh."""
    raw = _fetch_bytes(uri)
    try:
        obj = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"manifest: not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("manifest: top level must be an object")
    repository = obj.get("repository")
    entries_raw = obj.get("entries")
    if not isinstance(repository, str):
        raise ValidationError("manifest.repository: required string")
    if not isinstance(entries_raw, list):
        raise ValidationError("manifest.entries: required list")
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for i, item in enumerate(entries_raw):
        where = f"manifest.entries[{i}]"
        if not isinstance(item, dict):
            raise ValidationError(f"{where}: must be an object")
        for key in ("name", "kind", "uri", "checksum"):
            if not isinstance(item.get(key), str) or not item[key]:
                raise ValidationError(f"{where}.{key}: required non-empty string")
        if item["kind"] not in ENTRY_KINDS:
            raise ValidationError(f"{where}.kind: {item['kind']!r} not one of {ENTRY_KINDS}")
        if not re.fullmatch(r"sha256:[0-9a-f]{64}", item["checksum"]):
            raise ValidationError(f"{where}.checksum: must be sha256:<64 hex digits>")
        if item["name"] in seen:
            raise ValidationError(f"{where}.name: duplicate name {item['name']!r}")
        seen.add(item["name"])
        box = None
        if item["kind"] == "object_fbx":
            raw_box = item.get("bounding_box")
            if (
                not isinstance(raw_box, list)
                or len(raw_box) != 3
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 for v in raw_box)
            ):
                raise ValidationError(f"{where}.bounding_box: required [x,y,z] of positive numbers")
            box = (float(raw_box[0]), float(raw_box[1]), float(raw_box[2]))
        elif "bounding_box" in item:
            raise ValidationError(f"{where}.bounding_box: only valid for object_fbx entries")
        extra = set(item) - {"name", "kind", "uri", "checksum", "bounding_box"}
        if extra:
            raise ValidationError(f"{where}: unknown fields {sorted(extra)}")
        entries.append(
            ManifestEntry(item["name"], item["kind"], item["uri"], item["checksum"], box)
        )
    return RepositoryManifest(repository=repository, base=_base_of(uri), entries=tuple(entries))


@dataclass(frozen=True)
class LinkSpec:
    name: str
    visual_mesh: str | None = None  # mesh filename reference; never opened


@dataclass(frozen=True)
class JointSpec:
    name: str
    type: str
    parent: str
    child: str
    origin: Transform
    axis: Vector3 | None  # unit for moving joints, None for fixed
    limits: tuple[float, float] | None  # (lower, upper) for revolute/prismatic


@dataclass(frozen=True)
class KinematicTree:
    name: str
    links: tuple[LinkSpec, ...]
    joints: tuple[JointSpec, ...]

    @property
    def root(self) -> str:
        children = {j.child for j in self.joints}
        for link in self.links:
            if link.name not in children:
                return link.name
        raise StructureError("cycle: no root link")

    def joint(self, name: str) -> JointSpec:
        for j in self.joints:
            if j.name == name:
                return j
        raise KeyError(name)

    def moving_joint_names(self) -> frozenset[str]:
        return frozenset(j.name for j in self.joints if j.type in MOVING_JOINT_TYPES)


def _check_tree(name: str, links: list[LinkSpec], joints: list[JointSpec]) -> KinematicTree:
    if not links:
        raise StructureError(f"model {name!r}: empty model, no links")
    link_names = [l.name for l in links]
    if len(set(link_names)) != len(link_names):
        dup = sorted({n for n in link_names if link_names.count(n) > 1})
        raise StructureError(f"duplicate link names {dup}")
    joint_names = [j.name for j in joints]
    if len(set(joint_names)) != len(joint_names):
        dup = sorted({n for n in joint_names if joint_names.count(n) > 1})
        raise StructureError(f"duplicate joint names {dup}")
    known = set(link_names)
    parent_of: dict[str, str] = {}
    for j in joints:
        if j.parent not in known:
            raise StructureError(f"joint {j.name}: unknown parent link {j.parent!r}")
        if j.child not in known:
            raise StructureError(f"joint {j.name}: unknown child link {j.child!r}")
        if j.child in parent_of:
            raise StructureError(f"link {j.child!r} is the child of multiple joints")
        if j.parent == j.child:
            raise StructureError(f"cycle: joint {j.name} connects {j.child!r} to itself")
        parent_of[j.child] = j.parent
        if j.limits is not None and j.limits[0] > j.limits[1]:
            raise StructureError(f"joint {j.name}: limits lower {j.limits[0]} > upper {j.limits[1]}")
    roots = [n for n in link_names if n not in parent_of]
    if not roots:
        raise StructureError("cycle: every link is some joint's child")
    if len(roots) > 1:
        raise StructureError(f"multiple roots {sorted(roots)}: links must form one tree")
    for start in link_names:
        seen = {start}
        cur = start
        while cur in parent_of:
            cur = parent_of[cur]
            if cur in seen:
                raise StructureError(f"cycle detected through link {cur!r}")
            seen.add(cur)
    return KinematicTree(name=name, links=tuple(links), joints=tuple(joints))


def _floats(text: str, count: int, what: str) -> list[float]:
    parts = text.split()
    if len(parts) != count:
        raise ParseError(f"{what}: expected {count} numbers, got {len(parts)}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ParseError(f"{what}: {exc}") from exc


def _unit_axis(x: float, y: float, z: float, what: str) -> Vector3:
    norm = math.sqrt(x * x + y * y + z * z)
    if not (norm > 0.0) or not math.isfinite(norm):
        raise ParseError(f"{what}: axis must be a non-zero finite vector")
    return Vector3(x / norm, y / norm, z / norm)


def _xml_root(text: str) -> ET.Element:
    try:
        return ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = getattr(exc, "position", (1, 0))
        offset = sum(len(ln) + 1 for ln in text.splitlines()[: line - 1]) + col
        raise ParseError(f"invalid XML: {exc.msg if hasattr(exc, 'msg') else exc}", offset) from exc


_URDF_IGNORED = ("transmission", "material", "gazebo", "sensor")


def parse_urdf(text: str) -> KinematicTree:
    root = _xml_root(text)
    if root.tag != "robot":
        raise ParseError(f"expected <robot> document, got <{root.tag}>")
    name = root.get("name")
    if not name:
        raise ParseError("<robot> requires a name attribute")
    for tag in _URDF_IGNORED:
        if root.find(tag) is not None:
            warnings.warn(f"urdf {name}: ignoring <{tag}> elements", stacklevel=2)

    links: list[LinkSpec] = []
    for el in root.findall("link"):
        lname = el.get("name")
        if not lname:
            raise ParseError("<link> requires a name attribute")
        if el.find("collision") is not None:
            warnings.warn(f"urdf {name}: ignoring collision geometry on link {lname}", stacklevel=2)
        mesh = el.find("visual/geometry/mesh")
        visual = mesh.get("filename") if mesh is not None else None
        links.append(LinkSpec(name=lname, visual_mesh=visual))

    joints: list[JointSpec] = []
    for el in root.findall("joint"):
        jname = el.get("name")
        jtype = el.get("type")
        if not jname or not jtype:
            raise ParseError("<joint> requires name and type attributes")
        if jtype in ("floating", "planar"):
            raise UnsupportedJoint(f"joint {jname}: type {jtype!r} is not supported")
        if jtype not in ("revolute", "continuous", "prismatic", "fixed"):
            raise ParseError(f"joint {jname}: unknown type {jtype!r}")
        if el.find("mimic") is not None:
            warnings.warn(f"urdf {name}: ignoring <mimic> on joint {jname}", stacklevel=2)
        parent = el.find("parent")
        child = el.find("child")
        if parent is None or child is None or not parent.get("link") or not child.get("link"):
            raise ParseError(f"joint {jname}: requires <parent link=..> and <child link=..>")
        origin_el = el.find("origin")
        origin = Transform.identity()
        if origin_el is not None:
            xyz = _floats(origin_el.get("xyz", "0 0 0"), 3, f"joint {jname} origin xyz")
            rpy = _floats(origin_el.get("rpy", "0 0 0"), 3, f"joint {jname} origin rpy")
            origin = Transform(Vector3(*xyz), rpy_to_quaternion(*rpy))
        axis = None
        limits = None
        if jtype in MOVING_JOINT_TYPES:
            axis_el = el.find("axis")
            vals = _floats(axis_el.get("xyz", "1 0 0"), 3, f"joint {jname} axis") if axis_el is not None else [1.0, 0.0, 0.0]
            axis = _unit_axis(*vals, what=f"joint {jname}")
        if jtype in ("revolute", "prismatic"):
            limit_el = el.find("limit")
            if limit_el is None:
                raise ParseError(f"joint {jname}: {jtype} joints require a <limit> element")
            lower = _floats(limit_el.get("lower", "0"), 1, f"joint {jname} limit lower")[0]
            upper = _floats(limit_el.get("upper", "0"), 1, f"joint {jname} limit upper")[0]
            limits = (lower, upper)
        joints.append(JointSpec(jname, jtype, parent.get("link"), child.get("link"), origin, axis, limits))
    return _check_tree(name, links, joints)


def _sdf_pose(el: ET.Element | None, what: str) -> Transform:
    if el is None or el.text is None or not el.text.strip():
        return Transform.identity()
    vals = _floats(el.text, 6, what)
    return Transform(Vector3(*vals[:3]), rpy_to_quaternion(*vals[3:]))


def _is_identity_pose(t: Transform) -> bool:
    v, q = t.translation, t.rotation
    return (
        v.x == 0.0 and v.y == 0.0 and v.z == 0.0
        and q.x == 0.0 and q.y == 0.0 and q.z == 0.0 and abs(q.w) == 1.0
    )


def parse_sdf(text: str) -> KinematicTree:
    """Normalize an SDF model into the URDF-equivalent KinematicTree.

    SDF states link poses in the model frame; the tree wants each joint's
    origin as child-in-parent, so origin = inverse(model_parent) o model_child.
    Axis vectors default to the joint (child-link) frame; a
    <use_parent_model_frame>true</use_parent_model_frame> axis is rotated
    from the model frame into the child frame.  Joint <pose> offsets are
    out of scope and rejected rather than approximated.
    """
    root = _xml_root(text)
    model = root if root.tag == "model" else root.find("model")
    if model is None:
        raise ParseError(f"expected <sdf><model> or <model> document, got <{root.tag}>")
    name = model.get("name")
    if not name:
        raise ParseError("<model> requires a name attribute")

    links: list[LinkSpec] = []
    link_pose: dict[str, Transform] = {}
    for el in model.findall("link"):
        lname = el.get("name")
        if not lname:
            raise ParseError("<link> requires a name attribute")
        if el.find("collision") is not None:
            warnings.warn(f"sdf {name}: ignoring collision geometry on link {lname}", stacklevel=2)
        mesh_uri = el.find("visual/geometry/mesh/uri")
        visual = mesh_uri.text.strip() if mesh_uri is not None and mesh_uri.text else None
        pose = _sdf_pose(el.find("pose"), f"link {lname} pose")
        if lname in link_pose:
            raise StructureError(f"duplicate link names ['{lname}']")
        link_pose[lname] = pose
        links.append(LinkSpec(name=lname, visual_mesh=visual))

    joints: list[JointSpec] = []
    for el in model.findall("joint"):
        jname = el.get("name")
        jtype = el.get("type")
        if not jname or not jtype:
            raise ParseError("<joint> requires name and type attributes")
        if jtype in ("ball", "universal", "screw", "gearbox", "revolute2", "floating", "planar"):
            raise UnsupportedJoint(f"joint {jname}: type {jtype!r} is not supported")
        if jtype not in ("revolute", "continuous", "prismatic", "fixed"):
            raise ParseError(f"joint {jname}: unknown type {jtype!r}")
        jpose = _sdf_pose(el.find("pose"), f"joint {jname} pose")
        if not _is_identity_pose(jpose):
            raise UnsupportedJoint(f"joint {jname}: joint <pose> offsets are not supported")
        parent_el = el.find("parent")
        child_el = el.find("child")
        parent = parent_el.text.strip() if parent_el is not None and parent_el.text else ""
        child = child_el.text.strip() if child_el is not None and child_el.text else ""
        if not parent or not child:
            raise ParseError(f"joint {jname}: requires <parent> and <child> link names")
        if parent not in link_pose or child not in link_pose:
            raise StructureError(f"joint {jname}: unknown parent or child link")
        origin = compose(inverse(link_pose[parent]), link_pose[child])
        axis = None
        limits = None
        if jtype in MOVING_JOINT_TYPES:
            axis_el = el.find("axis")
            xyz_el = axis_el.find("xyz") if axis_el is not None else None
            vals = _floats(xyz_el.text or "", 3, f"joint {jname} axis") if xyz_el is not None else [1.0, 0.0, 0.0]
            in_model_frame = False
            if axis_el is not None:
                flag = axis_el.find("use_parent_model_frame")
                in_model_frame = flag is not None and (flag.text or "").strip() in ("1", "true")
            axis = _unit_axis(*vals, what=f"joint {jname}")
            if in_model_frame:
                axis = rotate_vector(quat_conjugate(link_pose[child].rotation), axis)
            limit_el = axis_el.find("limit") if axis_el is not None else None
            if jtype in ("revolute", "prismatic"):
                lower_el = limit_el.find("lower") if limit_el is not None else None
                upper_el = limit_el.find("upper") if limit_el is not None else None
                if lower_el is not None and upper_el is not None:
                    lower = _floats(lower_el.text or "", 1, f"joint {jname} lower")[0]
                    upper = _floats(upper_el.text or "", 1, f"joint {jname} upper")[0]
                    limits = (lower, upper)
                elif jtype == "revolute":
                    jtype = "continuous"  # unbounded revolute, URDF's continuous
                else:
                    raise ParseError(f"joint {jname}: prismatic joints require limits")
        joints.append(JointSpec(jname, jtype, parent, child, origin, axis, limits))
    return _check_tree(name, links, joints)


def _joint_motion(joint: JointSpec, position: float) -> Transform:
    if joint.type == "fixed":
        return Transform.identity()
    assert joint.axis is not None
    if joint.type == "prismatic":
        return Transform.from_xyz(
            joint.axis.x * position, joint.axis.y * position, joint.axis.z * position
        )
    return Transform(Vector3(0.0, 0.0, 0.0), axis_angle(joint.axis, position))


def forward_kinematics(tree: KinematicTree, config: dict[str, float]) -> dict[str, Transform]:
    """Pose of every link in the root frame for one joint configuration."""
    moving = tree.moving_joint_names()
    missing = sorted(moving - config.keys())
    if missing:
        raise ConfigError(f"missing positions for joints {missing}")
    extra = sorted(config.keys() - moving)
    if extra:
        raise ConfigError(f"positions given for unknown or fixed joints {extra}")
    for j in tree.joints:
        if j.limits is not None:
            pos = config[j.name]
            if not (j.limits[0] <= pos <= j.limits[1]):
                raise LimitError(
                    f"joint {j.name}: position {pos} outside [{j.limits[0]}, {j.limits[1]}]"
                )
    by_parent: dict[str, list[JointSpec]] = {}
    for j in tree.joints:
        by_parent.setdefault(j.parent, []).append(j)
    poses: dict[str, Transform] = {tree.root: Transform.identity()}
    stack = [tree.root]
    while stack:
        parent = stack.pop()
        for j in by_parent.get(parent, ()):
            motion = _joint_motion(j, config.get(j.name, 0.0))
            poses[j.child] = compose(compose(poses[parent], j.origin), motion)
            stack.append(j.child)
    return poses


class AssetResolver:
    """Fetches, checksum-verifies and parses robots, memoized by (name, checksum)."""

    def __init__(self, manifest: RepositoryManifest, fetch: Callable[[str], bytes] | None = None):
        self._manifest = manifest
        self._fetch = fetch or _fetch_bytes
        self._cache: dict[tuple[str, str], KinematicTree] = {}
        self._lock = threading.Lock()
        self.fetch_count = 0

    @property
    def manifest(self) -> RepositoryManifest:
        return self._manifest

    def resolve_robot(self, name: str) -> KinematicTree:
        entry = self._manifest.entry(name)
        if entry.kind not in ("robot_urdf", "robot_sdf"):
            raise NotFound(f"{name!r} is not a robot entry (kind {entry.kind})")
        key = (entry.name, entry.checksum)
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached
        uri = _resolve_uri(self._manifest.base, entry.uri)
        data = self._fetch(uri)
        with self._lock:
            self.fetch_count += 1
        verify_checksum(data, entry.checksum)
        text = data.decode("utf-8", errors="replace")
        tree = parse_urdf(text) if entry.kind == "robot_urdf" else parse_sdf(text)
        with self._lock:
            self._cache[key] = tree
        return tree


def resolve_robot(name: str, manifest: RepositoryManifest) -> KinematicTree:
    """One-shot resolve without a shared cache; services hold an AssetResolver."""
    return AssetResolver(manifest).resolve_robot(name)
