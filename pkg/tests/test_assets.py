"""Manifest validation, URDF/SDF parsing, tree invariants, FK vs the oracle."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intentbus.assets import (
    AssetResolver,
    JointSpec,
    KinematicTree,
    LinkSpec,
    fetch_manifest,
    forward_kinematics,
    parse_sdf,
    parse_urdf,
    resolve_robot,
    sha256_hex,
    verify_checksum,
    _check_tree,
)
from intentbus.errors import (
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
from intentbus.messages import Vector3
from intentbus.transforms import Transform, axis_angle, transform_close

from conftest import ROBOT_MANIFEST, TESTDATA
from oracles import fk_chain, transform_to_matrix
from strategies import angles

ROBOTS_DIR = TESTDATA / "repo" / "robots"

# Link/joint counts recorded by hand from the fixture files before these
# tests existed; parsers must reproduce them exactly.
FIXTURE_SHAPE = {
    "baxter": (18, 17, 15, "base"),
    "tiago++": (22, 21, 19, "base_footprint"),
    "panda": (11, 10, 9, "panda_link0"),
    "ur5": (8, 7, 6, "base_link"),
    "minimal": (2, 1, 1, "base"),
    "minimal_sdf": (2, 1, 1, "base"),
}


# -- manifest -------------------------------------------------------------------

def test_bundled_robot_manifest_parses(robot_manifest):
    assert robot_manifest.repository
    assert set(robot_manifest.names()) == set(FIXTURE_SHAPE)
    for entry in robot_manifest.entries:
        assert entry.kind in ("robot_urdf", "robot_sdf")
        assert entry.checksum.startswith("sha256:")
        assert entry.bounding_box is None


def test_bundled_object_manifest_has_boxes(object_manifest):
    assert set(object_manifest.names("object_fbx")) == {
        "screwdriver",
        "hammer",
        "water_bottle",
    }
    for entry in object_manifest.entries:
        assert entry.bounding_box is not None
        assert all(v > 0 for v in entry.bounding_box)


def test_manifest_entry_lookup(robot_manifest):
    assert robot_manifest.entry("ur5").kind == "robot_urdf"
    with pytest.raises(NotFound):
        robot_manifest.entry("pr2")


def test_manifest_checksums_match_files(robot_manifest):
    for entry in robot_manifest.entries:
        data = (ROBOTS_DIR / entry.uri).read_bytes()
        verify_checksum(data, entry.checksum)


def _write_manifest(tmp_path, obj):
    p = tmp_path / "manifest.json"
    p.write_text(json.dumps(obj))
    return str(p)


GOOD_ENTRY = {
    "name": "bot",
    "kind": "robot_urdf",
    "uri": "bot.urdf",
    "checksum": "sha256:" + "0" * 64,
}


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda o: o.pop("repository"), "repository"),
        (lambda o: o.update(entries="x"), "entries"),
        (lambda o: o["entries"][0].pop("uri"), "uri"),
        (lambda o: o["entries"][0].update(kind="robot_obj"), "kind"),
        (lambda o: o["entries"][0].update(checksum="md5:abc"), "checksum"),
        (lambda o: o["entries"][0].update(checksum="sha256:XYZ"), "checksum"),
        (lambda o: o["entries"].append(dict(GOOD_ENTRY)), "duplicate"),
        (lambda o: o["entries"][0].update(bounding_box=[1, 1, 1]), "bounding_box"),
        (lambda o: o["entries"][0].update(extra_field=1), "unknown"),
    ],
)
def test_manifest_validation_rejects(tmp_path, mutate, fragment):
    obj = {"repository": "test", "entries": [dict(GOOD_ENTRY)]}
    mutate(obj)
    with pytest.raises(ValidationError, match=fragment):
        fetch_manifest(_write_manifest(tmp_path, obj))


def test_object_entries_require_positive_boxes(tmp_path):
    entry = {
        "name": "cup",
        "kind": "object_fbx",
        "uri": "cup.fbx",
        "checksum": "sha256:" + "0" * 64,
    }
    obj = {"repository": "test", "entries": [entry]}
    with pytest.raises(ValidationError, match="bounding_box"):
        fetch_manifest(_write_manifest(tmp_path, obj))
    entry["bounding_box"] = [0.1, -0.1, 0.1]
    with pytest.raises(ValidationError, match="bounding_box"):
        fetch_manifest(_write_manifest(tmp_path, obj))
    entry["bounding_box"] = [0.1, 0.1, 0.1]
    parsed = fetch_manifest(_write_manifest(tmp_path, obj))
    assert parsed.entry("cup").bounding_box == (0.1, 0.1, 0.1)


def test_manifest_not_json(tmp_path):
    p = tmp_path / "manifest.json"
    p.write_text("{nope")
    with pytest.raises(ValidationError, match="JSON"):
        fetch_manifest(str(p))


def test_manifest_missing_file():
    with pytest.raises(FetchError):
        fetch_manifest("/no/such/file.json")


def test_checksum_mismatch():
    with pytest.raises(IntegrityError):
        verify_checksum(b"data", "sha256:" + "0" * 64)
    verify_checksum(b"data", "sha256:" + sha256_hex(b"data"))


# -- fixture parsing ----------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(FIXTURE_SHAPE))
def test_fixture_robots_have_recorded_shapes(resolver, name):
    tree = resolver.resolve_robot(name)
    links, joints, moving, root = FIXTURE_SHAPE[name]
    assert len(tree.links) == links
    assert len(tree.joints) == joints
    assert len(tree.moving_joint_names()) == moving
    assert tree.root == root


def test_ur5_moving_joints_are_the_six_arm_joints(resolver):
    assert resolver.resolve_robot("ur5").moving_joint_names() == frozenset(
        {
            "shoulder_pan_joint",
            "shoulder_lift_joint",
            "elbow_joint",
            "wrist_1_joint",
            "wrist_2_joint",
            "wrist_3_joint",
        }
    )


def test_urdf_and_sdf_minimal_models_agree(resolver):
    a = resolver.resolve_robot("minimal")
    b = resolver.resolve_robot("minimal_sdf")
    assert [l.name for l in a.links] == [l.name for l in b.links]
    ja, jb = a.joint("swivel"), b.joint("swivel")
    assert (ja.type, ja.parent, ja.child) == (jb.type, jb.parent, jb.child)
    assert transform_close(ja.origin, jb.origin, 1e-9)
    assert abs(ja.axis.x - jb.axis.x) < 1e-12
    assert abs(ja.axis.z - jb.axis.z) < 1e-12
    assert ja.limits == jb.limits


# -- urdf corner cases ----------------------------------------------------------------

def mini_urdf(joint_xml):
    return f"""<robot name="t">
      <link name="a"/><link name="b"/>
      {joint_xml}
    </robot>"""


def test_urdf_defaults_axis_and_origin():
    tree = parse_urdf(
        mini_urdf(
            '<joint name="j" type="continuous"><parent link="a"/><child link="b"/></joint>'
        )
    )
    j = tree.joint("j")
    assert (j.axis.x, j.axis.y, j.axis.z) == (1.0, 0.0, 0.0)
    assert transform_close(j.origin, Transform.identity())
    assert j.limits is None


def test_urdf_axis_is_normalized():
    tree = parse_urdf(
        mini_urdf(
            '<joint name="j" type="continuous"><parent link="a"/><child link="b"/>'
            '<axis xyz="0 0 2"/></joint>'
        )
    )
    assert abs(tree.joint("j").axis.z - 1.0) < 1e-12


def test_urdf_zero_axis_rejected():
    with pytest.raises(ParseError):
        parse_urdf(
            mini_urdf(
                '<joint name="j" type="revolute"><parent link="a"/><child link="b"/>'
                '<axis xyz="0 0 0"/><limit lower="-1" upper="1"/></joint>'
            )
        )


def test_urdf_revolute_requires_limits():
    with pytest.raises(ParseError, match="limit"):
        parse_urdf(
            mini_urdf(
                '<joint name="j" type="revolute"><parent link="a"/><child link="b"/></joint>'
            )
        )


def test_urdf_floating_and_planar_unsupported():
    for jtype in ("floating", "planar"):
        with pytest.raises(UnsupportedJoint):
            parse_urdf(
                mini_urdf(
                    f'<joint name="j" type="{jtype}"><parent link="a"/><child link="b"/></joint>'
                )
            )


def test_urdf_unknown_joint_type_is_parse_error():
    with pytest.raises(ParseError, match="unknown type"):
        parse_urdf(
            mini_urdf(
                '<joint name="j" type="helical"><parent link="a"/><child link="b"/></joint>'
            )
        )


def test_urdf_ignored_elements_warn():
    text = """<robot name="t">
      <transmission name="tr"/>
      <link name="a"/>
    </robot>"""
    with pytest.warns(UserWarning, match="transmission"):
        parse_urdf(text)


def test_urdf_origin_rpy_matches_rotation_convention():
    tree = parse_urdf(
        mini_urdf(
            '<joint name="j" type="fixed"><parent link="a"/><child link="b"/>'
            '<origin xyz="1 2 3" rpy="0 0 1.5707963267948966"/></joint>'
        )
    )
    j = tree.joint("j")
    want = Transform(Vector3(1, 2, 3), axis_angle(Vector3(0, 0, 1), math.pi / 2))
    assert transform_close(j.origin, want, 1e-9)


def test_urdf_malformed_xml_reports_position():
    with pytest.raises(ParseError, match="position"):
        parse_urdf("<robot name='t'><link name='a'>")


def test_urdf_requires_robot_root_and_name():
    with pytest.raises(ParseError):
        parse_urdf("<model name='t'/>")
    with pytest.raises(ParseError):
        parse_urdf("<robot/>")


# -- sdf corner cases ----------------------------------------------------------------

def test_sdf_link_poses_become_relative_joint_origins():
    text = """<sdf version="1.6"><model name="t">
      <link name="a"><pose>1 0 0 0 0 1.5707963267948966</pose></link>
      <link name="b"><pose>1 1 0 0 0 1.5707963267948966</pose></link>
      <joint name="j" type="fixed"><parent>a</parent><child>b</child></joint>
    </model></sdf>"""
    tree = parse_sdf(text)
    # b sits one meter along model-y from a; a's frame is yawed 90 degrees,
    # so in a's frame that offset is +x.
    origin = tree.joint("j").origin
    assert abs(origin.translation.x - 1.0) < 1e-9
    assert abs(origin.translation.y) < 1e-9


def test_sdf_axis_use_parent_model_frame_is_rerotated():
    text = """<sdf version="1.6"><model name="t">
      <link name="a"/>
      <link name="b"><pose>0 0 0 1.5707963267948966 0 0</pose></link>
      <joint name="j" type="continuous"><parent>a</parent><child>b</child>
        <axis><xyz>0 1 0</xyz><use_parent_model_frame>1</use_parent_model_frame></axis>
      </joint>
    </model></sdf>"""
    axis = parse_sdf(text).joint("j").axis
    # model-frame y expressed in a child frame rolled +90 deg about x is -z
    assert abs(axis.x) < 1e-9
    assert abs(axis.y) < 1e-9
    assert abs(axis.z + 1.0) < 1e-9


def test_sdf_revolute_without_limits_becomes_continuous():
    text = """<sdf version="1.6"><model name="t">
      <link name="a"/><link name="b"/>
      <joint name="j" type="revolute"><parent>a</parent><child>b</child>
        <axis><xyz>0 0 1</xyz></axis>
      </joint>
    </model></sdf>"""
    j = parse_sdf(text).joint("j")
    assert j.type == "continuous"
    assert j.limits is None


def test_sdf_prismatic_without_limits_rejected():
    text = """<sdf version="1.6"><model name="t">
      <link name="a"/><link name="b"/>
      <joint name="j" type="prismatic"><parent>a</parent><child>b</child>
        <axis><xyz>0 0 1</xyz></axis>
      </joint>
    </model></sdf>"""
    with pytest.raises(ParseError, match="limits"):
        parse_sdf(text)


def test_sdf_joint_pose_offsets_unsupported():
    text = """<sdf version="1.6"><model name="t">
      <link name="a"/><link name="b"/>
      <joint name="j" type="fixed"><pose>0.1 0 0 0 0 0</pose>
        <parent>a</parent><child>b</child></joint>
    </model></sdf>"""
    with pytest.raises(UnsupportedJoint, match="pose"):
        parse_sdf(text)


def test_sdf_exotic_joint_types_unsupported():
    for jtype in ("ball", "universal", "screw", "gearbox", "revolute2"):
        text = f"""<sdf version="1.6"><model name="t">
          <link name="a"/><link name="b"/>
          <joint name="j" type="{jtype}"><parent>a</parent><child>b</child></joint>
        </model></sdf>"""
        with pytest.raises(UnsupportedJoint):
            parse_sdf(text)


def test_sdf_bare_model_document_accepted():
    tree = parse_sdf('<model name="solo"><link name="only"/></model>')
    assert tree.root == "only"


# -- tree invariants ----------------------------------------------------------------

def J(name, parent, child, jtype="fixed", limits=None, axis=None):
    if jtype != "fixed" and axis is None:
        axis = Vector3(0.0, 0.0, 1.0)
    return JointSpec(name, jtype, parent, child, Transform.identity(), axis, limits)


def test_empty_model_rejected():
    with pytest.raises(StructureError, match="empty"):
        _check_tree("t", [], [])


def test_duplicate_names_rejected():
    with pytest.raises(StructureError, match="duplicate link"):
        _check_tree("t", [LinkSpec("a"), LinkSpec("a")], [])
    with pytest.raises(StructureError, match="duplicate joint"):
        _check_tree(
            "t",
            [LinkSpec("a"), LinkSpec("b"), LinkSpec("c")],
            [J("j", "a", "b"), J("j", "a", "c")],
        )


def test_unknown_endpoints_rejected():
    with pytest.raises(StructureError, match="unknown parent"):
        _check_tree("t", [LinkSpec("a")], [J("j", "ghost", "a")])
    with pytest.raises(StructureError, match="unknown child"):
        _check_tree("t", [LinkSpec("a")], [J("j", "a", "ghost")])


def test_link_with_two_parents_rejected():
    with pytest.raises(StructureError, match="multiple joints"):
        _check_tree(
            "t",
            [LinkSpec("a"), LinkSpec("b"), LinkSpec("c")],
            [J("j1", "a", "c"), J("j2", "b", "c")],
        )


def test_self_loop_rejected():
    with pytest.raises(StructureError, match="cycle"):
        _check_tree("t", [LinkSpec("a")], [J("j", "a", "a")])


def test_rootless_graph_rejected():
    with pytest.raises(StructureError, match="cycle"):
        _check_tree(
            "t",
            [LinkSpec("a"), LinkSpec("b")],
            [J("j1", "a", "b"), J("j2", "b", "a")],
        )


def test_detached_cycle_rejected():
    links = [LinkSpec(n) for n in ("r", "a", "b", "c")]
    joints = [J("j1", "a", "b"), J("j2", "b", "c"), J("j3", "c", "a")]
    with pytest.raises(StructureError, match="cycle"):
        _check_tree("t", links, joints)


def test_forest_rejected():
    with pytest.raises(StructureError, match="multiple roots"):
        _check_tree("t", [LinkSpec("a"), LinkSpec("b")], [])


def test_inverted_limits_rejected():
    with pytest.raises(StructureError, match="limits"):
        _check_tree(
            "t",
            [LinkSpec("a"), LinkSpec("b")],
            [J("j", "a", "b", "revolute", limits=(1.0, -1.0))],
        )


# -- forward kinematics ----------------------------------------------------------------

def test_fk_requires_exact_config(resolver):
    tree = resolver.resolve_robot("minimal")
    with pytest.raises(ConfigError, match="missing"):
        forward_kinematics(tree, {})
    with pytest.raises(ConfigError, match="unknown or fixed"):
        forward_kinematics(tree, {"swivel": 0.0, "bogus": 1.0})


def test_fk_enforces_limits(resolver):
    tree = resolver.resolve_robot("minimal")
    with pytest.raises(LimitError):
        forward_kinematics(tree, {"swivel": 4.0})
    forward_kinematics(tree, {"swivel": 3.14})  # inside


def test_fk_continuous_joint_is_unbounded():
    links = [LinkSpec("a"), LinkSpec("b")]
    tree = _check_tree("t", links, [J("j", "a", "b", "continuous")])
    forward_kinematics(tree, {"j": 123.0})


def test_fk_minimal_by_hand(resolver):
    tree = resolver.resolve_robot("minimal")
    poses = forward_kinematics(tree, {"swivel": math.pi / 2})
    assert transform_close(poses["base"], Transform.identity())
    arm = poses["arm"]
    # origin offset then +90 deg about z
    assert abs(arm.translation.x - 0.1) < 1e-12
    assert abs(arm.translation.z - 0.2) < 1e-12
    want_rot = axis_angle(Vector3(0, 0, 1), math.pi / 2)
    assert transform_close(arm, Transform(arm.translation, want_rot), 1e-9)


@pytest.mark.parametrize("name", ["ur5", "panda", "baxter", "tiago++"])
def test_fk_fixture_robots_match_matrix_oracle(resolver, name):
    tree = resolver.resolve_robot(name)
    rng = np.random.default_rng(hash(name) % 2**32)
    for _ in range(10):
        config = {}
        for j in tree.joints:
            if j.type in ("revolute", "prismatic"):
                lo, hi = j.limits
                config[j.name] = float(rng.uniform(lo, hi))
            elif j.type == "continuous":
                config[j.name] = float(rng.uniform(-math.pi, math.pi))
        got = forward_kinematics(tree, config)
        oracle_joints = [
            {
                "name": j.name,
                "type": j.type,
                "parent": j.parent,
                "child": j.child,
                "origin": transform_to_matrix(j.origin),
                "axis": (j.axis.x, j.axis.y, j.axis.z) if j.axis else None,
            }
            for j in tree.joints
        ]
        want = fk_chain(oracle_joints, config)
        assert set(got) == set(want)
        for link, t in got.items():
            assert np.max(np.abs(transform_to_matrix(t) - want[link])) <= 1e-9, link


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_fk_random_chains_match_matrix_oracle(data):
    depth = data.draw(st.integers(min_value=1, max_value=6))
    types = data.draw(
        st.lists(
            st.sampled_from(["revolute", "continuous", "prismatic", "fixed"]),
            min_size=depth,
            max_size=depth,
        )
    )
    links = [LinkSpec(f"l{i}") for i in range(depth + 1)]
    joints = []
    config = {}
    for i, jtype in enumerate(types):
        xyz = data.draw(st.tuples(*(st.floats(-2, 2) for _ in range(3))))
        rpy = data.draw(st.tuples(angles, angles, angles))
        from intentbus.transforms import rpy_to_quaternion

        origin = Transform(Vector3(*xyz), rpy_to_quaternion(*rpy))
        axis = None
        limits = None
        if jtype != "fixed":
            raw = data.draw(
                st.tuples(*(st.floats(-1, 1) for _ in range(3))).filter(
                    lambda v: sum(x * x for x in v) > 1e-2
                )
            )
            n = math.sqrt(sum(x * x for x in raw))
            axis = Vector3(raw[0] / n, raw[1] / n, raw[2] / n)
            config[f"j{i}"] = data.draw(st.floats(-2.0, 2.0))
            if jtype in ("revolute", "prismatic"):
                limits = (-2.0, 2.0)
        joints.append(
            JointSpec(f"j{i}", jtype, f"l{i}", f"l{i+1}", origin, axis, limits)
        )
    tree = _check_tree("chain", links, joints)
    got = forward_kinematics(tree, config)
    oracle_joints = [
        {
            "name": j.name,
            "type": j.type,
            "parent": j.parent,
            "child": j.child,
            "origin": transform_to_matrix(j.origin),
            "axis": (j.axis.x, j.axis.y, j.axis.z) if j.axis else None,
        }
        for j in joints
    ]
    want = fk_chain(oracle_joints, config)
    for link, t in got.items():
        assert np.max(np.abs(transform_to_matrix(t) - want[link])) <= 1e-9


# -- resolver ----------------------------------------------------------------------

def test_resolver_caches_by_name_and_checksum(robot_manifest):
    calls = []

    def counting_fetch(uri):
        calls.append(uri)
        with open(uri, "rb") as fh:
            return fh.read()

    resolver = AssetResolver(robot_manifest, fetch=counting_fetch)
    t1 = resolver.resolve_robot("ur5")
    t2 = resolver.resolve_robot("ur5")
    assert t1 is t2
    assert len(calls) == 1
    assert resolver.fetch_count == 1
    resolver.resolve_robot("panda")
    assert resolver.fetch_count == 2


def test_resolver_rejects_non_robot_entries(object_manifest):
    resolver = AssetResolver(object_manifest)
    with pytest.raises(NotFound, match="not a robot"):
        resolver.resolve_robot("hammer")


def test_resolver_detects_corruption(robot_manifest):
    resolver = AssetResolver(robot_manifest, fetch=lambda uri: b"tampered")
    with pytest.raises(IntegrityError):
        resolver.resolve_robot("ur5")


def test_one_shot_resolve(robot_manifest):
    tree = resolve_robot("minimal", robot_manifest)
    assert tree.root == "base"


# -- parser robustness -----------------------------------------------------------------

MINIMAL_TEXT = (ROBOTS_DIR / "minimal.urdf").read_text()
ALLOWED = (ParseError, StructureError, UnsupportedJoint, ValidationError)


@given(
    st.integers(min_value=0, max_value=max(0, len(MINIMAL_TEXT) - 1)),
    st.integers(min_value=1, max_value=40),
)
@settings(max_examples=150, deadline=None)
def test_urdf_parser_never_crashes_on_deletions(start, width):
    mutated = MINIMAL_TEXT[:start] + MINIMAL_TEXT[start + width:]
    try:
        parse_urdf(mutated)
    except ALLOWED:
        pass


@given(st.text(max_size=80))
@settings(max_examples=150)
def test_parsers_only_raise_typed_errors_on_noise(text):
    for parser in (parse_urdf, parse_sdf):
        try:
            parser(text)
        except ALLOWED:
            pass
