#!/usr/bin/env python3
"""Stub-backed editing service for the studio end-to-end tests.

Binds an OS-assigned port, prints one JSON line on stdout with the port and
the built-in demo scene payloads, then serves until killed.  The test runner
reads that line instead of guessing ports or shipping image fixtures.
"""

import argparse
import dataclasses
import json
import socket
import tempfile

import uvicorn

from viewcraft.backends import wire
from viewcraft.evalharness import demo_setup
from viewcraft.pipeline import create_app


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sessions-dir", default=None,
                        help="Session storage root (default: fresh temp dir).")
    args = parser.parse_args()
    sessions_dir = args.sessions_dir or tempfile.mkdtemp(prefix="studio-e2e-")

    config, scenes, orchestrator = demo_setup()
    config = dataclasses.replace(config, sessions_dir=sessions_dir)
    app = create_app(config, orchestrator=orchestrator)

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    ready = {
        "port": sock.getsockname()[1],
        "sessions_dir": sessions_dir,
        "scenes": [
            {
                "name": scene.name,
                "instruction": scene.instruction,
                "seed": scene.seed,
                "source_image": wire.image_to_wire(scene.source_image),
            }
            for scene in scenes
        ],
    }
    print(json.dumps(ready), flush=True)
    uvicorn.Server(uvicorn.Config(app, log_level="warning")).run(sockets=[sock])


if __name__ == "__main__":
    main()
