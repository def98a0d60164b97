"""Certificate envelopes: versioned, hashed, re-verifiable JSON documents.

Every certificate kind travels as {kind, version, toolversion, seed,
payload, sha256}, where the digest covers the canonical rendering of the
payload (sorted keys, no whitespace). Rationals inside payloads are
{num, den} decimal strings throughout, except box-union geometry which
keeps its own compact [num, den] arrays; floats never appear.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from . import __version__

FORMAT_VERSION = 1
KINDS = ("witness", "cyclic", "union", "tower", "margin", "stage", "pipeline")


def canonical(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def payload_digest(payload: Any) -> str:
    return hashlib.sha256(canonical(payload).encode()).hexdigest()


def envelope(kind: str, payload: dict, seed: int | None = None) -> dict:
    if kind not in KINDS:
        raise ValueError(f"unknown certificate kind {kind!r}")
    return {
        "kind": kind,
        "version": FORMAT_VERSION,
        "toolversion": __version__,
        "seed": seed,
        "payload": payload,
        "sha256": payload_digest(payload),
    }


def open_envelope(data: dict, expect_kind: str | None = None) -> dict:
    """Payload of a checked envelope; digest and version must match."""
    for key in ("kind", "version", "payload", "sha256"):
        if key not in data:
            raise ValueError(f"envelope is missing {key!r}")
    if data["kind"] not in KINDS:
        raise ValueError(f"unknown certificate kind {data['kind']!r}")
    if expect_kind is not None and data["kind"] != expect_kind:
        raise ValueError(f"expected kind {expect_kind!r}, found {data['kind']!r}")
    if data["version"] != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {data['version']}")
    digest = payload_digest(data["payload"])
    if digest != data["sha256"]:
        raise ValueError("payload digest mismatch; the document was altered")
    return data["payload"]


def dump(data: dict) -> str:
    # envelopes are written human-readably; the digest is over the
    # canonical payload form, so pretty-printing does not disturb it
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def load(text: str) -> dict:
    return json.loads(text)
