"""Command line entry points: run a scenario, serve the gateway, export a log.

Exit codes: 0 success, 1 scenario or runtime error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .clock import WallClock
from .config import SystemConfig, configure_from_file
from .errors import ConfigError, IntentBusError, ScenarioError
from .gateway import GatewayClient, GatewayServer
from .scenario import load_scenario, run_scenario
from .system import System


def _load_config(path: str | None) -> SystemConfig:
    if path is None:
        return SystemConfig()
    return configure_from_file(path)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    script = load_scenario(args.scenario)
    report = run_scenario(script, "wall" if args.wall_clock else "logical", config)
    sys.stdout.write(report.to_json_bytes().decode("ascii") + "\n")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    bind = args.bind or config.bind
    system = System(config, clock=WallClock())
    system.start()
    server = GatewayServer(system, bind)
    host, port = server.start()
    sys.stderr.write(f"gateway listening on {host}:{port}\n")
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        return 0
    finally:
        server.close()
        system.close()


def _cmd_export(args: argparse.Namespace) -> int:
    host, _, port = args.connect.rpartition(":")
    with GatewayClient(host, int(port)) as client:
        records: list[dict] = []
        cursor = 0
        while True:
            response = client.request("FETCH", topic=args.topic, from_offset=cursor)
            if response["type"] == "ERROR":
                raise IntentBusError(f"{response['error']}: {response['message']}")
            batch = response["records"]
            records.extend(batch)
            cursor = response["next_offset"]
            if cursor >= response["end_offset"] and not batch:
                break
    with open(args.path, "w", encoding="ascii") as fh:
        fh.write(f"# intentbus log v1 topic={args.topic}\n")
        for record in records:
            fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
    sys.stderr.write(f"exported {len(records)} records from {args.topic}\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="intentbus",
        description="Offset-log message bus with preview-before-execute intent scheduling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="play a scenario script and print the run report")
    run_p.add_argument("scenario", help="path to a scenario JSON file")
    run_p.add_argument("--wall-clock", action="store_true", help="use real time instead of the logical clock")
    run_p.add_argument("--config", default=None, help="path to a config JSON file")
    run_p.set_defaults(func=_cmd_run)

    serve_p = sub.add_parser("serve", help="serve the framed gateway")
    serve_p.add_argument("--bind", default=None, help="HOST:PORT to listen on (default from config)")
    serve_p.add_argument("--config", default=None, help="path to a config JSON file")
    serve_p.set_defaults(func=_cmd_serve)

    export_p = sub.add_parser("export", help="export a topic's records from a running gateway")
    export_p.add_argument("topic")
    export_p.add_argument("path")
    export_p.add_argument("--connect", default="127.0.0.1:7787", help="gateway HOST:PORT")
    export_p.set_defaults(func=_cmd_export)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except ScenarioError as exc:
        sys.stderr.write(f"scenario error: {exc}\n")
        return 1
    except IntentBusError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
