"""Intent scheduling: preview lead, lifecycle events, supersession, sampling."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intentbus.broker import Broker
from intentbus.errors import (
    ClockError,
    RobotNotFound,
    UnknownJoint,
    ValidationError,
)
from intentbus.intents import (
    EVENTS_TOPIC,
    IntentConfig,
    IntentScheduler,
    ScheduledIntent,
    native_duration_seconds,
    preview_duration_seconds,
    sample_preview,
)
from intentbus.messages import (
    Header,
    JointTrajectory,
    JointTrajectoryPoint,
    Path,
    Pose,
    PoseStamped,
    Quaternion,
    Vector3,
    decode,
)
from intentbus.registry import Registry
from intentbus.transforms import axis_angle, rotation_close

SEC = 1_000_000_000


def mk_path(points, t0=0, dt=SEC, frame="anchor"):
    poses = tuple(
        PoseStamped(
            Header(t0 + i * dt, frame),
            Pose(Vector3(*p), Quaternion.identity()),
        )
        for i, p in enumerate(points)
    )
    return Path(Header(t0, frame), poses)


def mk_traj(names, rows, times):
    points = tuple(
        JointTrajectoryPoint(row, time_from_start=t) for row, t in zip(rows, times)
    )
    return JointTrajectory(Header(0, "base"), tuple(names), points)


@pytest.fixture
def setup():
    broker = Broker()
    registry = Registry(broker)
    registry.register_robot("m0")
    registry.register_robot("m1")
    joints = {0: frozenset({"elbow", "wrist"}), 1: frozenset({"elbow"})}
    scheduler = IntentScheduler(
        broker, registry, robot_joints=lambda rid: joints.get(rid)
    )
    return broker, registry, scheduler


# -- config ------------------------------------------------------------------

def test_config_defaults_and_bounds():
    cfg = IntentConfig()
    assert cfg.delay_seconds == 3.0 and cfg.pose_rate_hz == 30.0
    cfg.check()
    IntentConfig(delay_seconds=0.0, pose_rate_hz=1.0).check()
    IntentConfig(pose_rate_hz=30.0).check()
    with pytest.raises(ValidationError):
        IntentConfig(delay_seconds=-0.1).check()
    with pytest.raises(ValidationError):
        IntentConfig(pose_rate_hz=0.5).check()
    with pytest.raises(ValidationError):
        IntentConfig(pose_rate_hz=31.0).check()


def test_scheduler_rejects_bad_config():
    broker = Broker()
    with pytest.raises(ValidationError):
        IntentScheduler(broker, Registry(broker), IntentConfig(pose_rate_hz=0.0))


# -- submission ---------------------------------------------------------------

def test_submit_navigation_publishes_plan_and_preview_event(setup):
    broker, _, scheduler = setup
    plan = mk_path([(0, 0, 0), (1, 0, 0)])
    intent = scheduler.submit_navigation(0, plan, now=10 * SEC)
    assert intent.intent_id == 0
    assert intent.preview_epoch == 10 * SEC
    assert intent.execute_epoch == 13 * SEC  # default 3 s lead, exact in ns
    rec = broker.fetch("/robot/0/navigation_plan", 0)[0]
    assert decode("path", rec.payload) == plan
    assert rec.publish_stamp == 10 * SEC
    ev = decode("intent_event", broker.fetch(EVENTS_TOPIC, 0)[0].payload)
    assert ev.phase == "preview_started"
    assert ev.intent_id == 0 and ev.robot_id == 0 and ev.kind == "navigation"
    assert ev.stamp == 10 * SEC


def test_submit_manipulation_checks_joints(setup):
    _, _, scheduler = setup
    traj = mk_traj(["elbow", "wrist"], [[0.0, 0.0], [1.0, 1.0]], [0.0, 1.0])
    intent = scheduler.submit_manipulation(0, traj, now=0)
    assert intent.kind == "manipulation"
    with pytest.raises(UnknownJoint):
        scheduler.submit_manipulation(1, traj, now=SEC)  # robot 1 lacks "wrist"


def test_submit_manipulation_without_model_is_rejected():
    broker = Broker()
    registry = Registry(broker)
    registry.register_robot("m")
    scheduler = IntentScheduler(broker, registry)  # no robot_joints source
    traj = mk_traj(["elbow"], [[0.0], [1.0]], [0.0, 1.0])
    with pytest.raises(UnknownJoint):
        scheduler.submit_manipulation(0, traj, now=0)


def test_submit_validates_robot_and_payload(setup):
    _, _, scheduler = setup
    with pytest.raises(RobotNotFound):
        scheduler.submit_navigation(9, mk_path([(0, 0, 0)]), now=0)
    with pytest.raises(ValidationError):
        scheduler.submit_navigation(0, Path(Header(0, "anchor")), now=0)
    with pytest.raises(ValidationError):
        scheduler.submit_manipulation(
            0, JointTrajectory(Header(0, "base"), ("elbow",)), now=0
        )
    # structural violations surface as ValidationError too
    bad = Path(
        Header(0, "anchor"),
        (
            PoseStamped(Header(5, "anchor"), Pose.identity()),
            PoseStamped(Header(1, "anchor"), Pose.identity()),
        ),
    )
    with pytest.raises(ValidationError):
        scheduler.submit_navigation(0, bad, now=0)


def test_custom_delay_is_exact_in_nanoseconds(setup):
    broker, registry, _ = setup
    scheduler = IntentScheduler(
        broker, registry, IntentConfig(delay_seconds=0.25), robot_joints=lambda r: None
    )
    intent = scheduler.submit_navigation(0, mk_path([(0, 0, 0), (1, 0, 0)]), now=0)
    assert intent.execute_epoch - intent.preview_epoch == 250_000_000


# -- lifecycle ----------------------------------------------------------------

def test_execution_boundary_is_inclusive(setup):
    _, _, scheduler = setup
    scheduler.submit_navigation(0, mk_path([(0, 0, 0), (1, 0, 0)]), now=0)
    assert scheduler.tick(3 * SEC - 1) == []
    events = scheduler.tick(3 * SEC)
    assert [e.phase for e in events] == ["execution_started"]
    assert events[0].stamp == 3 * SEC


def test_completion_uses_native_duration(setup):
    _, _, scheduler = setup
    # two waypoints one second apart: native duration 1 s
    scheduler.submit_navigation(0, mk_path([(0, 0, 0), (1, 0, 0)]), now=0)
    scheduler.tick(3 * SEC)
    assert scheduler.tick(4 * SEC - 1) == []
    events = scheduler.tick(4 * SEC)
    assert [e.phase for e in events] == ["completed"]
    assert events[0].stamp == 4 * SEC


def test_late_tick_emits_all_due_events_with_due_stamps(setup):
    broker, _, scheduler = setup
    scheduler.submit_manipulation(
        0, mk_traj(["elbow"], [[0.0], [1.0]], [0.0, 1.5]), now=SEC
    )
    events = scheduler.tick(20 * SEC)
    assert [e.phase for e in events] == ["execution_started", "completed"]
    assert [e.stamp for e in events] == [4 * SEC, int(5.5 * SEC)]
    stamps = [r.publish_stamp for r in broker.fetch(EVENTS_TOPIC, 0)]
    assert stamps == sorted(stamps)


def test_supersession_cancels_pending_predecessor(setup):
    broker, _, scheduler = setup
    a = scheduler.submit_navigation(0, mk_path([(0, 0, 0), (1, 0, 0)]), now=0)
    b = scheduler.submit_navigation(0, mk_path([(0, 0, 0), (0, 1, 0)]), now=SEC)
    statuses = dict((i.intent_id, s) for i, s in scheduler.intents())
    assert statuses == {a.intent_id: "superseded", b.intent_id: "pending"}
    scheduler.tick(30 * SEC)
    phases = [
        (decode("intent_event", r.payload).intent_id, decode("intent_event", r.payload).phase)
        for r in broker.fetch(EVENTS_TOPIC, 0)
    ]
    # a never gets execution or completion events
    assert (a.intent_id, "execution_started") not in phases
    assert (a.intent_id, "completed") not in phases
    assert (b.intent_id, "completed") in phases


def test_supersession_is_per_robot(setup):
    _, _, scheduler = setup
    a = scheduler.submit_navigation(0, mk_path([(0, 0, 0), (1, 0, 0)]), now=0)
    b = scheduler.submit_navigation(1, mk_path([(0, 0, 0), (1, 0, 0)]), now=SEC)
    statuses = dict((i.intent_id, s) for i, s in scheduler.intents())
    assert statuses[a.intent_id] == "pending"
    assert statuses[b.intent_id] == "pending"


def test_executing_intent_survives_new_submission(setup):
    _, _, scheduler = setup
    a = scheduler.submit_navigation(0, mk_path([(0, 0, 0), (8, 0, 0)], dt=8 * SEC), now=0)
    scheduler.tick(3 * SEC)  # a starts executing (runs until 11 s)
    b = scheduler.submit_navigation(0, mk_path([(0, 0, 0), (0, 1, 0)]), now=4 * SEC)
    statuses = dict((i.intent_id, s) for i, s in scheduler.intents())
    assert statuses[a.intent_id] == "executing"
    assert statuses[b.intent_id] == "pending"
    scheduler.tick(30 * SEC)
    statuses = dict((i.intent_id, s) for i, s in scheduler.intents())
    assert statuses[a.intent_id] == "completed"
    assert statuses[b.intent_id] == "completed"


def test_predecessor_due_exactly_at_submission_starts_instead_of_superseding(setup):
    broker, _, scheduler = setup
    a = scheduler.submit_navigation(0, mk_path([(0, 0, 0), (1, 0, 0)]), now=0)
    b = scheduler.submit_navigation(0, mk_path([(0, 0, 0), (0, 1, 0)]), now=3 * SEC)
    statuses = dict((i.intent_id, s) for i, s in scheduler.intents())
    assert statuses[a.intent_id] == "executing"
    assert statuses[b.intent_id] == "pending"
    # and a's execution event precedes b's preview event on the topic
    phases = [
        (decode("intent_event", r.payload).intent_id, decode("intent_event", r.payload).phase)
        for r in broker.fetch(EVENTS_TOPIC, 0)
    ]
    assert phases.index((a.intent_id, "execution_started")) < phases.index(
        (b.intent_id, "preview_started")
    )


def test_clock_must_not_regress(setup):
    _, _, scheduler = setup
    scheduler.tick(5 * SEC)
    with pytest.raises(ClockError):
        scheduler.tick(5 * SEC - 1)
    with pytest.raises(ClockError):
        scheduler.submit_navigation(0, mk_path([(0, 0, 0), (1, 0, 0)]), now=4 * SEC)
    scheduler.tick(5 * SEC)  # equal is fine


def test_configure_applies_to_future_submissions_only(setup):
    _, _, scheduler = setup
    a = scheduler.submit_navigation(0, mk_path([(0, 0, 0), (1, 0, 0)]), now=0)
    scheduler.configure(IntentConfig(delay_seconds=1.0))
    b = scheduler.submit_navigation(1, mk_path([(0, 0, 0), (1, 0, 0)]), now=SEC)
    assert a.execute_epoch == 3 * SEC
    assert b.execute_epoch == 2 * SEC
    with pytest.raises(ValidationError):
        scheduler.configure(IntentConfig(delay_seconds=-1.0))


@given(
    st.lists(
        st.tuples(
            st.sampled_from(["submit0", "submit1", "tick"]),
            st.integers(min_value=0, max_value=10 * SEC),
        ),
        max_size=25,
    )
)
@settings(max_examples=60, deadline=None)
def test_event_stamps_never_regress_under_mixed_workloads(ops):
    broker = Broker()
    registry = Registry(broker)
    registry.register_robot("m0")
    registry.register_robot("m1")
    scheduler = IntentScheduler(broker, registry, IntentConfig(delay_seconds=1.5))
    now = 0
    for op, dt in ops:
        now += dt
        if op == "tick":
            scheduler.tick(now)
        else:
            robot = 0 if op == "submit0" else 1
            scheduler.submit_navigation(robot, mk_path([(0, 0, 0), (1, 0, 0)]), now)
    stamps = [r.publish_stamp for r in broker.fetch(EVENTS_TOPIC, 0)]
    assert stamps == sorted(stamps)
    # lifecycle sanity: per intent at most one event per phase, in order
    seen: dict[int, list[str]] = {}
    for r in broker.fetch(EVENTS_TOPIC, 0):
        ev = decode("intent_event", r.payload)
        seen.setdefault(ev.intent_id, []).append(ev.phase)
    order = ["preview_started", "execution_started", "completed"]
    for phases in seen.values():
        assert phases == order[: len(phases)]


# -- preview timing ----------------------------------------------------------------

def test_preview_duration_stretches_to_delay_for_navigation(setup):
    _, _, scheduler = setup
    intent = scheduler.submit_navigation(0, mk_path([(0, 0, 0), (1, 0, 0)]), now=0)
    assert native_duration_seconds(intent) == 1.0
    assert preview_duration_seconds(intent) == 3.0  # max(delay, native)


def test_preview_duration_uses_native_when_longer(setup):
    _, _, scheduler = setup
    intent = scheduler.submit_navigation(
        0, mk_path([(0, 0, 0), (1, 0, 0)], dt=8 * SEC), now=0
    )
    assert preview_duration_seconds(intent) == 8.0


def test_manipulation_preview_keeps_native_timing(setup):
    _, _, scheduler = setup
    intent = scheduler.submit_manipulation(
        0, mk_traj(["elbow"], [[0.0], [1.0]], [0.0, 1.5]), now=0
    )
    assert preview_duration_seconds(intent) == 1.5


# -- preview sampling ----------------------------------------------------------------

def nav_intent(points, delay_s=3.0, dt=SEC):
    plan = mk_path(points, dt=dt)
    return ScheduledIntent(0, 0, "navigation", plan, 0, int(delay_s * SEC))


def test_navigation_sampling_endpoints():
    intent = nav_intent([(0, 0, 0), (2, 0, 0)])
    assert sample_preview(intent, 0.0).position.x == 0.0
    assert sample_preview(intent, 3.0).position.x == 2.0
    assert sample_preview(intent, 99.0).position.x == 2.0  # clamped past the end


def test_navigation_sampling_is_constant_speed_over_arc_length():
    # Segment lengths 1 and 3: half the preview time must cover distance 2.
    intent = nav_intent([(0, 0, 0), (1, 0, 0), (4, 0, 0)])
    p = sample_preview(intent, 1.5)
    assert math.isclose(p.position.x, 2.0, abs_tol=1e-12)
    # a quarter of the time covers distance 1: exactly the first waypoint
    p = sample_preview(intent, 0.75)
    assert math.isclose(p.position.x, 1.0, abs_tol=1e-12)


def test_navigation_sampling_slerps_orientation():
    q0 = Quaternion.identity()
    q1 = axis_angle(Vector3(0, 0, 1), math.pi / 2)
    plan = Path(
        Header(0, "anchor"),
        (
            PoseStamped(Header(0, "anchor"), Pose(Vector3(0, 0, 0), q0)),
            PoseStamped(Header(SEC, "anchor"), Pose(Vector3(1, 0, 0), q1)),
        ),
    )
    intent = ScheduledIntent(0, 0, "navigation", plan, 0, 3 * SEC)
    got = sample_preview(intent, 1.5).orientation
    want = axis_angle(Vector3(0, 0, 1), math.pi / 4)
    assert rotation_close(got, want, 1e-9)


def test_navigation_zero_length_path_falls_back_to_index_interpolation():
    q0 = Quaternion.identity()
    q1 = axis_angle(Vector3(0, 0, 1), math.pi / 2)
    plan = Path(
        Header(0, "anchor"),
        (
            PoseStamped(Header(0, "anchor"), Pose(Vector3(1, 1, 1), q0)),
            PoseStamped(Header(SEC, "anchor"), Pose(Vector3(1, 1, 1), q1)),
        ),
    )
    intent = ScheduledIntent(0, 0, "navigation", plan, 0, 2 * SEC)
    got = sample_preview(intent, 1.0)
    assert got.position.x == 1.0
    assert rotation_close(got.orientation, axis_angle(Vector3(0, 0, 1), math.pi / 4), 1e-9)


def test_navigation_single_pose_path_returns_it():
    intent = nav_intent([(5, 6, 7)])
    for t in (0.0, 1.0, 10.0):
        p = sample_preview(intent, t)
        assert (p.position.x, p.position.y, p.position.z) == (5.0, 6.0, 7.0)


def test_manipulation_sampling_interpolates_and_clamps(setup):
    _, _, scheduler = setup
    traj = mk_traj(
        ["elbow", "wrist"],
        [[0.0, 0.0], [1.0, -1.0], [1.0, -2.0]],
        [0.5, 1.5, 2.5],
    )
    intent = scheduler.submit_manipulation(0, traj, now=0)
    assert sample_preview(intent, 0.0) == {"elbow": 0.0, "wrist": 0.0}
    assert sample_preview(intent, 1.0) == {"elbow": 0.5, "wrist": -0.5}
    assert sample_preview(intent, 1.5) == {"elbow": 1.0, "wrist": -1.0}
    assert sample_preview(intent, 2.0) == {"elbow": 1.0, "wrist": -1.5}
    assert sample_preview(intent, 9.0) == {"elbow": 1.0, "wrist": -2.0}


def test_sampling_rejects_negative_time():
    intent = nav_intent([(0, 0, 0), (1, 0, 0)])
    with pytest.raises(ValidationError):
        sample_preview(intent, -0.1)


def test_sampling_rejects_empty_payloads():
    empty_nav = ScheduledIntent(0, 0, "navigation", Path(Header(0, "a")), 0, SEC)
    with pytest.raises(ValidationError):
        sample_preview(empty_nav, 0.0)
    empty_traj = ScheduledIntent(
        0, 0, "manipulation", JointTrajectory(Header(0, "a"), ("j",)), 0, SEC
    )
    with pytest.raises(ValidationError):
        sample_preview(empty_traj, 0.0)


@given(st.floats(min_value=0.0, max_value=3.0), st.floats(min_value=0.0, max_value=3.0))
@settings(max_examples=100)
def test_navigation_progress_is_monotone(t1, t2):
    intent = nav_intent([(0, 0, 0), (1, 0, 0), (1, 2, 0), (3, 2, 0)])
    lo, hi = sorted((t1, t2))
    def walked(t):
        p = sample_preview(intent, t).position
        # waypoints trace x then y then x again; arc distance from origin
        if p.x <= 1.0 and p.y == 0.0:
            return p.x
        if p.x == 1.0:
            return 1.0 + p.y
        return 3.0 + (p.x - 1.0)
    assert walked(lo) <= walked(hi) + 1e-9
