"""Content hashing for pairing runs with the inputs that produced them."""

import hashlib
import json


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, no whitespace, repr-exact floats."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def content_hash(obj) -> str:
    """Hex digest of the canonical JSON form of ``obj``."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def pair_hash(problem_json: dict, schedule_json: dict) -> str:
    """Hash identifying a (problem, schedule) pairing; stored in run artifacts."""
    return content_hash({"problem": problem_json, "schedule": schedule_json})
