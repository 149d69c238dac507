#!/usr/bin/env python3
"""Regenerate the bundled repository manifests with fresh sha256 checksums.

Run after editing any file under testdata/repo/:

    python scripts/make_manifest.py
"""

from __future__ import annotations

import hashlib
import json
import os

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

ROBOTS = [
    ("baxter", "robot_urdf", "baxter.urdf"),
    ("tiago++", "robot_urdf", "tiago_pp.urdf"),
    ("panda", "robot_urdf", "panda.urdf"),
    ("ur5", "robot_urdf", "ur5.urdf"),
    ("minimal", "robot_urdf", "minimal.urdf"),
    ("minimal_sdf", "robot_sdf", "minimal.sdf"),
]

OBJECTS = [
    ("screwdriver", "object_fbx", "screwdriver.fbx", [0.03, 0.03, 0.25]),
    ("hammer", "object_fbx", "hammer.fbx", [0.12, 0.03, 0.32]),
    ("water_bottle", "object_fbx", "water_bottle.fbx", [0.07, 0.07, 0.24]),
]


def checksum(path: str) -> str:
    with open(path, "rb") as fh:
        return "sha256:" + hashlib.sha256(fh.read()).hexdigest()


def write_manifest(directory: str, repository: str, entries: list[dict]) -> None:
    path = os.path.join(directory, "manifest.json")
    with open(path, "w", encoding="ascii") as fh:
        json.dump({"repository": repository, "entries": entries}, fh, indent=2)
        fh.write("\n")
    print(f"wrote {path} ({len(entries)} entries)")


def main() -> None:
    robots_dir = os.path.join(ROOT, "testdata", "repo", "robots")
    objects_dir = os.path.join(ROOT, "testdata", "repo", "objects")
    write_manifest(
        robots_dir,
        "bundled-fixture-robots",
        [
            {"name": name, "kind": kind, "uri": uri, "checksum": checksum(os.path.join(robots_dir, uri))}
            for name, kind, uri in ROBOTS
        ],
    )
    write_manifest(
        objects_dir,
        "bundled-fixture-objects",
        [
            {
                "name": name,
                "kind": kind,
                "uri": uri,
                "checksum": checksum(os.path.join(objects_dir, uri)),
                "bounding_box": box,
            }
            for name, kind, uri, box in OBJECTS
        ],
    )


if __name__ == "__main__":
    main()
