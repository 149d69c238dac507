"""System facade: pose pump pacing, marker-driven localization, wiring."""

import time

import pytest

from intentbus.clock import LogicalClock, WallClock, seconds_to_ns
from intentbus.config import SystemConfig
from intentbus.errors import (
    ClockError,
    LocalizationUnavailable,
    UnknownJoint,
    ValidationError,
)
from intentbus.intents import EVENTS_TOPIC
from intentbus.messages import (
    Header,
    JointTrajectory,
    JointTrajectoryPoint,
    Path,
    Pose,
    PoseStamped,
    Vector3,
    decode,
)
from intentbus.system import HmdPosePump, System
from intentbus.transforms import Transform, compose, inverse, transform_close

SEC = 1_000_000_000


def mk_system(**cfg) -> System:
    return System(SystemConfig(**cfg), LogicalClock())


def localized_system(**cfg) -> System:
    system = mk_system(**cfg)
    system.register_hmd()
    system.observe_marker(0, "room_qr", Transform.from_xyz(0, 0, 1.0))
    return system


def pose_stamps(system: System, hmd_id: int = 0) -> list[int]:
    return [r.publish_stamp for r in system.broker.fetch(f"/hmd/{hmd_id}/pose", 0)]


# -- pose pump ------------------------------------------------------------------

def test_pump_publishes_first_sample_at_localization():
    system = localized_system()
    assert pose_stamps(system) == [0]


def test_pump_30hz_produces_exact_period_multiples():
    system = localized_system(pose_rate_hz=30.0)
    system.advance_to(1 * SEC)
    stamps = pose_stamps(system)
    period = round(1e9 / 30)
    assert stamps == [i * period for i in range(31)]  # 0 .. 999999990


def test_pump_1hz_over_ten_seconds():
    system = localized_system(pose_rate_hz=1.0)
    system.advance_to(10 * SEC)
    assert pose_stamps(system) == [i * SEC for i in range(11)]


def test_pump_boundary_is_inclusive():
    system = localized_system(pose_rate_hz=1.0)
    system.advance_to(1 * SEC - 1)
    assert len(pose_stamps(system)) == 1
    system.advance_to(1 * SEC)
    assert len(pose_stamps(system)) == 2


def test_pump_rate_change_applies_to_future_periods_only():
    system = localized_system(pose_rate_hz=30.0)
    system.advance_to(1 * SEC)
    system.configure(pose_rate_hz=10.0)
    system.advance_to(3 * SEC)
    stamps = pose_stamps(system)
    period30 = round(1e9 / 30)
    # the first post-change sample still lands on the old schedule
    first_after = 30 * period30 + period30
    later = [s for s in stamps if s >= first_after]
    assert later[0] == first_after
    diffs = {b - a for a, b in zip(later, later[1:])}
    assert diffs == {round(1e9 / 10)}


def test_pump_retrack_updates_pose_without_extra_sample():
    system = localized_system(pose_rate_hz=1.0)
    system.advance_to(int(0.5 * SEC))
    # re-observing the anchor marker from a new vantage updates the pose
    system.observe_marker(0, "room_qr", Transform.from_xyz(0, 0, 2.0))
    assert len(pose_stamps(system)) == 1  # no immediate publish
    system.advance_to(1 * SEC)
    records = system.broker.fetch("/hmd/0/pose", 0)
    assert len(records) == 2
    sample = decode("pose_stamped", records[1].payload)
    assert abs(sample.pose.position.z + 2.0) < 1e-9  # inverse of sighting


def test_pump_rejects_out_of_range_rates():
    anchors = localized_system().anchors
    with pytest.raises(ValidationError):
        HmdPosePump(anchors, 0.5)
    with pytest.raises(ValidationError):
        HmdPosePump(anchors, 31.0)
    pump = HmdPosePump(anchors, 30.0)
    with pytest.raises(ValidationError):
        pump.set_rate(0.9)


def test_system_configure_rejects_out_of_range_rate():
    system = localized_system()
    with pytest.raises(ValidationError):
        system.configure(pose_rate_hz=0.5)
    with pytest.raises(ValidationError):
        system.configure(pose_rate_hz=31.0)
    got = system.configure(pose_rate_hz=10.0)
    assert got.pose_rate_hz == 10.0


def test_two_hmds_have_independent_streams():
    system = mk_system(pose_rate_hz=1.0)
    system.register_hmd()
    system.register_hmd()
    system.observe_marker(0, "qr", Transform.identity())
    system.advance_to(int(2.5 * SEC))
    system.observe_marker(1, "qr", Transform.from_xyz(1, 0, 0))
    system.advance_to(4 * SEC)
    assert pose_stamps(system, 0) == [0, SEC, 2 * SEC, 3 * SEC, 4 * SEC]
    assert pose_stamps(system, 1) == [int(2.5 * SEC), int(3.5 * SEC)]


# -- marker localization ------------------------------------------------------------

def test_first_sighting_localizes_hmd_as_inverse():
    system = mk_system()
    system.register_hmd()
    sighting = Transform.from_xyz(0.3, -0.2, 1.5)
    event = system.observe_marker(0, "qr", sighting)
    assert event.is_primary
    assert transform_close(system.hmd_pose(0), inverse(sighting), 1e-9)


def test_known_marker_relocalizes_observer():
    system = mk_system()
    system.register_hmd()
    system.register_hmd()
    system.observe_marker(0, "qr", Transform.from_xyz(0, 0, 1))
    # second HMD sees the same marker from elsewhere and localizes off it
    sighting = Transform.from_xyz(2.0, 0.0, 1.0)
    system.observe_marker(1, "qr", sighting)
    assert transform_close(system.hmd_pose(1), inverse(sighting), 1e-9)


def test_new_marker_placed_from_localized_hmd():
    system = mk_system()
    system.register_hmd()
    system.observe_marker(0, "origin_qr", Transform.identity())
    sighting = Transform.from_xyz(1.0, 2.0, 0.5)
    event = system.observe_marker(0, "shelf_qr", sighting)
    assert not event.is_primary
    want = compose(system.hmd_pose(0), sighting)
    assert transform_close(event.pose_in_anchor, want, 1e-9)


def test_new_marker_from_unlocalized_hmd_fails():
    system = mk_system()
    system.register_hmd()
    system.register_hmd()
    system.observe_marker(0, "origin_qr", Transform.identity())
    with pytest.raises(LocalizationUnavailable):
        system.observe_marker(1, "other_qr", Transform.identity())


def test_observe_requires_registered_hmd():
    system = mk_system()
    with pytest.raises(ValidationError):
        system.observe_marker(0, "qr", Transform.identity())


# -- robots, objects, intents ----------------------------------------------------------

def test_register_robot_with_model_loads_tree():
    system = mk_system()
    rec = system.register_robot("bench_qr", model="ur5")
    assert rec.id == 0
    assert system.tree_for(0).root == "base_link"
    assert system.tree_for(1) is None


def test_manipulation_validated_against_model():
    system = mk_system()
    system.register_robot("bench_qr", model="ur5")
    traj = JointTrajectory(
        Header(0, "base_link"),
        ("elbow_joint",),
        (JointTrajectoryPoint([0.5], time_from_start=1.0),),
    )
    system.submit_manipulation(0, traj)
    bad = JointTrajectory(
        Header(0, "base_link"),
        ("head_tilt",),
        (JointTrajectoryPoint([0.5], time_from_start=1.0),),
    )
    with pytest.raises(UnknownJoint):
        system.submit_manipulation(0, bad)


def test_intent_lifecycle_through_logical_time():
    system = mk_system()
    system.register_robot("bench_qr")
    plan = Path(
        Header(0, "anchor"),
        (
            PoseStamped(Header(0, "anchor"), Pose.identity()),
            PoseStamped(Header(SEC, "anchor"), Pose(Vector3(1, 0, 0), Pose.identity().orientation)),
        ),
    )
    intent = system.submit_navigation(0, plan)
    assert intent.execute_epoch == 3 * SEC
    system.advance_to(5 * SEC)
    phases = [
        decode("intent_event", r.payload).phase
        for r in system.broker.fetch(EVENTS_TOPIC, 0)
    ]
    assert phases == ["preview_started", "execution_started", "completed"]


def test_publish_object_state_uses_registered_category():
    system = mk_system()
    system.register_object("screwdriver")
    system.advance_to(7 * SEC)
    system.publish_object_state(0, Pose.identity())
    rec = system.broker.fetch("/object/0/state", 0)[0]
    state = decode("object_state", rec.payload)
    assert state.category == "screwdriver"
    assert rec.publish_stamp == 7 * SEC
    with pytest.raises(ValidationError):
        system.publish_object_state(5, Pose.identity())


def test_logical_clock_rejects_regression():
    system = mk_system()
    system.advance_to(2 * SEC)
    with pytest.raises(ClockError):
        system.advance_to(1 * SEC)


def test_wall_clock_ticker_flushes_intents():
    system = System(SystemConfig(delay_seconds=0.05), WallClock())
    try:
        system.start(tick_interval=0.001)
        system.register_robot("m")
        plan = Path(
            Header(0, "anchor"),
            (PoseStamped(Header(0, "anchor"), Pose.identity()),),
        )
        system.submit_navigation(0, plan)
        deadline = time.monotonic() + 2.0
        phases: list[str] = []
        while time.monotonic() < deadline:
            phases = [
                decode("intent_event", r.payload).phase
                for r in system.broker.fetch(EVENTS_TOPIC, 0)
            ]
            if "completed" in phases:
                break
            time.sleep(0.005)
        assert phases == ["preview_started", "execution_started", "completed"]
    finally:
        system.close()


def test_system_config_validation():
    with pytest.raises(Exception):
        System(SystemConfig(delay_seconds=-1.0))
    with pytest.raises(Exception):
        System(SystemConfig(pose_rate_hz=31.0))
