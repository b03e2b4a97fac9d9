"""Deterministic instruction grammar.

Covers two action families over a small keyword vocabulary:

    replace <object phrase> with <object phrase>
    adjust|turn|rotate|move <object phrase> left|right|up|down
        [with|by] [<decimal> degrees]

Object phrases are lower-cased, leading articles dropped, and locative
tails ("on the desk") cut at the first preposition.  A missing magnitude
defaults to 90 degrees.  Signs follow the camera convention: right/left are
+/- azimuth, up/down are +/- elevation.
"""

from __future__ import annotations

import re

from ..errors import EmptyInstruction, UnparsableInstruction
from ..geometry import ViewDelta
from .plan import EditPlan

ROTATE_KEYWORDS = ("adjust", "turn", "rotate", "move")
ACTION_KEYWORDS = ("replace",) + ROTATE_KEYWORDS
ARTICLES = frozenset({"the", "a", "an", "this", "that"})
PREPOSITIONS = frozenset({"on", "in", "at", "under", "above", "beside", "near"})
DIRECTIONS = {
    "right": ("d_azimuth", 1.0),
    "left": ("d_azimuth", -1.0),
    "up": ("d_elevation", 1.0),
    "down": ("d_elevation", -1.0),
}
DEFAULT_MAGNITUDE = 90.0
_NUMBER = re.compile(r"^\d+(\.\d+)?$")

GRAMMAR_BACKEND_ID = "grammar-v1"


def _clean_label(tokens: list[str]) -> str:
    """Noun phrase -> label: drop leading articles, cut locative tails."""
    while tokens and tokens[0] in ARTICLES:
        tokens = tokens[1:]
    for i, tok in enumerate(tokens):
        if tok in PREPOSITIONS:
            tokens = tokens[:i]
            break
    return " ".join(tokens)


def _fail(raw: str, matched: list[str]):
    raise UnparsableInstruction(raw, " ".join(matched))


def parse_instruction(text: str) -> EditPlan:
    """Parse an edit instruction into a plan; pure and total over strings."""
    if text is None or not text.strip():
        raise EmptyInstruction("instruction text is blank")
    normalized = re.sub(r"[.!?]+$", "", text.strip().lower())
    tokens = normalized.split()
    if not tokens:
        raise EmptyInstruction("instruction text is blank")
    action = tokens[0]
    provenance = {"backend_id": GRAMMAR_BACKEND_ID, "retry_count": 0}

    if action == "replace":
        if "with" not in tokens[1:]:
            _fail(text, [action])
        split = tokens.index("with", 1)
        source = _clean_label(tokens[1:split])
        reference = _clean_label(tokens[split + 1:])
        if not source or not reference:
            _fail(text, [action])
        return EditPlan("replace", source, reference_object=reference,
                        raw_instruction=text, provenance=provenance)

    if action not in ROTATE_KEYWORDS:
        _fail(text, [])

    direction_idx = next((i for i, t in enumerate(tokens[1:], start=1)
                          if t in DIRECTIONS), None)
    if direction_idx is None:
        _fail(text, [action])
    source = _clean_label(tokens[1:direction_idx])
    if not source:
        _fail(text, [action])
    matched = tokens[:direction_idx + 1]

    rest = tokens[direction_idx + 1:]
    if rest and rest[0] in ("with", "by"):
        matched.append(rest[0])
        rest = rest[1:]
        if not rest:
            _fail(text, matched)
    if rest:
        if not _NUMBER.match(rest[0]):
            _fail(text, matched)
        magnitude = float(rest[0])
        matched.append(rest[0])
        if len(rest) < 2 or rest[1] not in ("degree", "degrees"):
            _fail(text, matched)
        matched.append(rest[1])
        if len(rest) > 2:
            _fail(text, matched)
    else:
        magnitude = DEFAULT_MAGNITUDE

    axis, sign = DIRECTIONS[tokens[direction_idx]]
    if magnitude == 0.0:
        # Grammatically fine but semantically empty; rotate plans must move.
        _fail(text, matched)
    delta = ViewDelta(**{axis: sign * magnitude})
    return EditPlan("rotate", source, view_delta=delta,
                    raw_instruction=text, provenance=provenance)
