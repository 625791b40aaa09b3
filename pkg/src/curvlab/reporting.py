"""Run configurations, canonical JSON report bodies, and config-hash file naming.

A report consists of a deterministic body plus a separate metadata wrapper
holding the timestamp.  The body replays byte-identically from the same
RunConfig: randomness is drawn from keyed Philox streams, and aggregation
across sample chunks uses order-independent reductions (min/max and
compensated sums).  Files are keyed by the config hash and never mutated; a
rerun that would produce a different body for the same key raises.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from pathlib import Path


def canonical_json(obj) -> str:
    """Deterministic JSON encoding: sorted keys, no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Parameters of one command invocation; the canonical form is hashed."""

    command: str
    params: dict

    def canonical(self) -> str:
        return canonical_json({"command": self.command, "params": self.params})

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


class ReportMismatch(RuntimeError):
    """A rerun produced a different body for an existing report file."""


def write_report(out_dir: str | Path, config: RunConfig, body: dict) -> Path:
    """Write {config, body} under a config-hash file name; append-only.

    Returns the path.  If the file exists, the stored body must match the new
    one byte-for-byte (determinism contract), otherwise ReportMismatch is
    raised.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{config.command}-{config.digest()}.json"
    body_text = canonical_json(body)
    if path.exists():
        stored = json.loads(path.read_text())
        if canonical_json(stored["body"]) != body_text:
            raise ReportMismatch(f"report body changed for {path}")
        return path
    doc = {
        "config": json.loads(config.canonical()),
        "config_hash": config.digest(),
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "body": json.loads(body_text),
    }
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    return path


def report_body_bytes(body: dict) -> bytes:
    return canonical_json(body).encode()
