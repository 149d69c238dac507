"""Record browser-console test fixtures from the primary implementation.

Writes two files under frontend/testdata/:

- preview_parity.json: intents plus sample_preview outputs at fixed
  instants, so the console's client-side interpolation can be checked
  against the engine that actually schedules execution.
- gateway_log.json: a real gateway session (commands and pushed events,
  in socket order) recorded against a live server, for event-sourcing
  replay tests.

Run from the repository root: python3 scripts/record_console_fixtures.py
"""

import json
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from intentbus.clock import WallClock
from intentbus.config import SystemConfig
from intentbus.gateway import GatewayClient, GatewayServer, TransportClosed
from intentbus.intents import ScheduledIntent, sample_preview
from intentbus.messages import (
    Header,
    JointTrajectory,
    JointTrajectoryPoint,
    ObjectState,
    Path,
    Pose,
    PoseStamped,
    Quaternion,
    Vector3,
    encode,
)
from intentbus.system import System

OUT_DIR = pathlib.Path(__file__).resolve().parents[1] / "frontend" / "testdata"

SEC = 1_000_000_000
IDENTITY_Q = Quaternion(0.0, 0.0, 0.0, 1.0)
QUARTER_Z = Quaternion(0.0, 0.0, 0.3826834323650898, 0.9238795325112867)
HALF_Z = Quaternion(0.0, 0.0, 0.7071067811865476, 0.7071067811865476)


def pose(x, y, z, q=IDENTITY_Q):
    return Pose(Vector3(float(x), float(y), float(z)), q)


def nav_intent(points, delay_s=3.0, t0=0, dt=SEC):
    poses = tuple(
        PoseStamped(Header(t0 + i * dt, "anchor"), p) for i, p in enumerate(points)
    )
    path = Path(Header(t0, "anchor"), poses)
    return ScheduledIntent(0, 0, "navigation", path, t0, t0 + round(delay_s * SEC))


def manip_intent(names, rows, times, delay_s=3.0):
    points = tuple(
        JointTrajectoryPoint(tuple(map(float, row)), (), (), float(t))
        for row, t in zip(rows, times)
    )
    traj = JointTrajectory(Header(0, "base_link"), tuple(names), points)
    return ScheduledIntent(0, 0, "manipulation", traj, 0, round(delay_s * SEC))


def record_parity():
    cases = []

    def add(name, intent, instants):
        samples = []
        for t in instants:
            out = sample_preview(intent, t)
            if intent.kind == "navigation":
                samples.append(
                    {
                        "t": t,
                        "pose": {
                            "position": [out.position.x, out.position.y, out.position.z],
                            "orientation": [
                                out.orientation.x,
                                out.orientation.y,
                                out.orientation.z,
                                out.orientation.w,
                            ],
                        },
                    }
                )
            else:
                samples.append({"t": t, "joints": out})
        cases.append(
            {
                "name": name,
                "kind": intent.kind,
                "payload": encode(intent.payload).decode("ascii"),
                "preview_epoch": intent.preview_epoch,
                "execute_epoch": intent.execute_epoch,
                "samples": samples,
            }
        )

    # native 4 s > delay 3 s: duration is the native span; unequal segment
    # lengths exercise the constant-speed walk, rotations exercise slerp
    bent = nav_intent(
        [pose(0, 0, 0), pose(1, 0, 0, QUARTER_Z), pose(1, 3, 0, HALF_Z), pose(1, 3, 2)],
        delay_s=3.0,
        dt=SEC,
    )
    # native span is (4-1)=3 poses * 1 s = 3 s... keep instants off the knots too
    dur = 3.0
    add("nav_bent", bent, [0.0, 0.31, dur / 2, 1.9, dur, dur + 1.0])

    # native 1 s < delay 3 s: preview stretches to the delay
    stretched = nav_intent([pose(0, 0, 0), pose(2, 0, 0)], delay_s=3.0, dt=SEC)
    add("nav_stretched", stretched, [0.0, 1.5, 2.25, 3.0, 9.0])

    # all waypoints coincide: uniform-index fallback
    frozen = nav_intent(
        [pose(1, 1, 1), pose(1, 1, 1, HALF_Z), pose(1, 1, 1)], delay_s=2.0
    )
    add("nav_degenerate", frozen, [0.0, 1.0, 1.3, 2.0])

    # a zero-length middle segment must be stepped over, not divided by
    dogleg = nav_intent(
        [pose(0, 0, 0), pose(1, 0, 0), pose(1, 0, 0), pose(1, 1, 0)], delay_s=3.0
    )
    add("nav_zero_segment", dogleg, [0.0, 1.5, 2.1, 3.0])

    add("nav_single_pose", nav_intent([pose(4, 5, 6, HALF_Z)]), [0.0, 0.5, 99.0])

    arm = manip_intent(
        ["elbow_joint", "wrist_1_joint"],
        [[0.0, 0.0], [0.6, -0.2], [1.0, 0.4]],
        [0.5, 1.0, 2.5],
    )
    add("manip_irregular", arm, [0.0, 0.25, 0.5, 0.75, 1.0, 1.75, 2.5, 4.0])

    add("manip_single_point", manip_intent(["elbow"], [[0.7]], [1.0]), [0.0, 1.0, 2.0])

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    out = OUT_DIR / "preview_parity.json"
    out.write_text(json.dumps({"cases": cases}, indent=1, sort_keys=True) + "\n")
    return len(cases)


def record_gateway_log():
    """Drive a live wall-clock gateway and keep the session in socket order."""
    inputs = []

    system = System(SystemConfig(delay_seconds=0.4, pose_rate_hz=5.0), clock=WallClock())
    system.start()
    server = GatewayServer(system, "127.0.0.1:0")
    host, port = server.start()
    client = GatewayClient(host, port)

    def drain():
        for frame in client.events:
            inputs.append({"type": "event", "topic": frame["topic"], "record": frame["record"]})
        client.events.clear()

    def command(name, /, **args):
        response = client.request("COMMAND", name=name, args=args)
        drain()
        if response["type"] == "ERROR":
            raise RuntimeError(f"{response['error']}: {response['message']}")
        inputs.append(
            {"type": "command_result", "name": name, "args": args, "result": response["result"]}
        )
        return response["result"]

    def subscribe(topic):
        response = client.request("SUBSCRIBE", topic=topic, from_offset=0)
        drain()
        assert response["type"] == "SUBSCRIBE", response

    try:
        command("get_settings")
        command("get_manifest", which="objects")
        subscribe("/system/intent_events")

        command("register_robot", marker="cell_a", model="ur5")
        command("resolve_robot", name="ur5")
        subscribe("/robot/0/navigation_plan")
        subscribe("/robot/0/joint_trajectory")

        command("register_robot", marker="cell_b", model="minimal")
        command("resolve_robot", name="minimal")
        subscribe("/robot/1/navigation_plan")

        command("register_hmd")
        subscribe("/hmd/0/pose")
        command("register_object", category="screwdriver")
        subscribe("/object/0/state")

        command(
            "observe_marker",
            hmd=0,
            marker="cell_a",
            marker_in_hmd={"translation": [0.0, -0.3, 1.5]},
        )
        command(
            "observe_marker",
            hmd=0,
            marker="cell_b",
            marker_in_hmd={"translation": [1.2, 0.0, 1.4]},
        )
        command("adjust_hologram", robot=0, delta={"translation": [0.05, 0.0, 0.0]})
        command("adjust_hologram", robot=0, delta={"translation": [0.0, 0.02, 0.0]})

        # an outside perception source drops in an object state; the console
        # only ever sees the pushed event, so the PUBLISH itself is not logged
        state = ObjectState(
            "screwdriver", pose(0.4, 0.1, 0.02), (), ()
        )
        response = client.request(
            "PUBLISH", topic="/object/0/state", payload=encode(state).decode("ascii")
        )
        drain()
        assert response["type"] == "PUBLISH", response

        command(
            "submit_manipulation",
            robot=0,
            trajectory={
                "joint_names": ["elbow_joint", "wrist_1_joint"],
                "points": [
                    {"positions": [0.0, 0.0], "time_from_start": 0.0},
                    {"positions": [0.8, -0.4], "time_from_start": 0.3},
                ],
            },
        )
        command(
            "submit_navigation",
            robot=1,
            waypoints=[
                {"t": 0.0, "position": [2.0, 0.0, 0.0]},
                {"t": 0.5, "position": [2.0, 1.0, 0.0]},
            ],
        )

        time.sleep(1.6)  # let previews execute and complete, pose pump ticking

        # the pose pump never stops on its own, so drain against a deadline
        deadline = time.monotonic() + 0.8
        while time.monotonic() < deadline:
            try:
                frame = client.next_event(timeout=0.3)
            except (TransportClosed, OSError):
                break
            inputs.append(
                {"type": "event", "topic": frame["topic"], "record": frame["record"]}
            )
    finally:
        client.close()
        server.close()
        system.close()

    out = OUT_DIR / "gateway_log.json"
    out.write_text(json.dumps({"inputs": inputs}, indent=1, sort_keys=True) + "\n")
    return len(inputs)


def main():
    n_cases = record_parity()
    n_inputs = record_gateway_log()
    print(f"wrote {n_cases} parity cases and a {n_inputs}-input gateway log to {OUT_DIR}")


if __name__ == "__main__":
    main()
