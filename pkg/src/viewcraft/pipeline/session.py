"""Editing sessions: append-only history with on-disk persistence.

A session pins the images a user is steering and accumulates edits, each one
feeding the previous output back in as the next source.  State lives in one
directory per session (JSON record plus PNG artifacts) so a reload, another
process, or the studio UI reconstructs exactly what happened.
"""

from __future__ import annotations

import json
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path

from ..backends import wire
from ..errors import SessionNotFound
from ..imagebuf import ImageBuffer
from .orchestrator import EditOptions, EditRequest, Orchestrator

SESSION_FILE = "session.json"
SESSION_SCHEMA_VERSION = "1"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


class SessionStore:
    """Sessions under one root directory, serialized per session id.

    Appends to distinct sessions run concurrently; appends to the same
    session queue on its lock, so history indices never collide and each
    entry's source is genuinely the previous entry's output.
    """

    def __init__(self, root: str | Path, orchestrator: Orchestrator):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.orchestrator = orchestrator
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def _dir(self, session_id: str) -> Path:
        return self.root / session_id

    def _load(self, session_id: str) -> dict:
        path = self._dir(session_id) / SESSION_FILE
        if not path.is_file():
            raise SessionNotFound(session_id)
        return json.loads(path.read_text())

    def _write(self, session_id: str, doc: dict) -> None:
        path = self._dir(session_id) / SESSION_FILE
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
        tmp.replace(path)

    # -- public API ----------------------------------------------------------

    def create(self, source_image: ImageBuffer,
               reference_image: ImageBuffer | None = None) -> dict:
        """New empty session; returns its full description."""
        session_id = uuid.uuid4().hex[:12]
        directory = self._dir(session_id)
        directory.mkdir(parents=True)
        (directory / "source.png").write_bytes(source_image.to_png())
        if reference_image is not None:
            (directory / "reference.png").write_bytes(reference_image.to_png())
        now = _now()
        doc = {
            "schema_version": SESSION_SCHEMA_VERSION,
            "id": session_id,
            "created": now,
            "updated": now,
            "has_reference": reference_image is not None,
            "history": [],
        }
        self._write(session_id, doc)
        return self.describe(session_id)

    def list_ids(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir()
                      if (p / SESSION_FILE).is_file())

    def describe(self, session_id: str) -> dict:
        """Full session state with images inlined, ready for the wire."""
        with self._lock(session_id):
            doc = self._load(session_id)
            directory = self._dir(session_id)
            doc["source_image"] = wire.image_to_wire(
                ImageBuffer.from_png((directory / "source.png").read_bytes()))
            ref_path = directory / "reference.png"
            doc["reference_image"] = (
                wire.image_to_wire(ImageBuffer.from_png(ref_path.read_bytes()))
                if ref_path.is_file() else None)
            return doc

    def run_edit(self, session_id: str, instruction: str, seed: int = 0,
                 options: EditOptions | None = None) -> dict:
        """Run one edit against the session's current image; append and return it.

        The session reference image rides along only for replace-style
        instructions; rotations are strictly in place.
        """
        options = options or EditOptions()
        with self._lock(session_id):
            doc = self._load(session_id)
            directory = self._dir(session_id)
            history = doc["history"]
            if history:
                prev = directory / history[-1]["output_file"]
                source = ImageBuffer.from_png(prev.read_bytes())
            else:
                source = ImageBuffer.from_png(
                    (directory / "source.png").read_bytes())
            reference = None
            ref_path = directory / "reference.png"
            if (ref_path.is_file()
                    and instruction.strip().lower().startswith("replace")):
                reference = ImageBuffer.from_png(ref_path.read_bytes())
            request = EditRequest(source_image=source, instruction=instruction,
                                  reference_image=reference, seed=seed,
                                  options=options)
            result = self.orchestrator.run_edit(request)

            index = len(history)
            output_file = f"{index:03d}-output.png"
            (directory / output_file).write_bytes(result.output.to_png())
            entry = {
                "index": index,
                "instruction": instruction,
                "seed": int(seed),
                "options": options.to_json(),
                "requested": _now(),
                "output_file": output_file,
                "result": result.to_json(),
            }
            history.append(entry)
            doc["updated"] = entry["requested"]
            self._write(session_id, doc)
            return entry
