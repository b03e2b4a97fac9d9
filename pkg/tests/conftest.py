"""Shared fixtures: a deterministic stub-backed pipeline with two scenes."""

from __future__ import annotations

from collections import namedtuple

import pytest

from viewcraft.backends.render import render
from viewcraft.geometry import DEFAULT_VIEW
from viewcraft.pipeline.orchestrator import EditRequest

DemoPipeline = namedtuple("DemoPipeline", "config scenes orchestrator")


@pytest.fixture(scope="session")
def demo() -> DemoPipeline:
    """All-stub pipeline over an in-memory registry (box + tower scenes).

    Session scoped because the scene sources get rendered on construction.
    Tests must not mutate the config or registry; a fresh Orchestrator over
    the same config/registry is cheap when isolation matters.
    """
    from viewcraft.evalharness.robustness import demo_setup

    return DemoPipeline(*demo_setup())


@pytest.fixture(scope="session")
def make_request(demo):
    """Factory for EditRequests against a named demo scene."""

    def _make(name: str, **overrides) -> EditRequest:
        scene = next(s for s in demo.scenes if s.name == name)
        kwargs = dict(source_image=scene.source_image,
                      instruction=scene.instruction, seed=scene.seed)
        kwargs.update(overrides)
        return EditRequest(**kwargs)

    return _make


@pytest.fixture(scope="session")
def tower_reference(demo):
    """The tower object rendered from the canonical view, for replace edits."""
    obj = demo.orchestrator.registry.lookup("obj-tower")
    return render(obj.spec, DEFAULT_VIEW, obj.render_size)
