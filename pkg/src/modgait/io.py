"""File formats: archive JSON, per-generation CSV, trace CSV, reports.

All writers are deterministic for identical inputs (sorted keys, no
timestamps), so re-running a seeded command reproduces byte-identical files.
"""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .analysis import ArchiveEntry, ParetoArchive
from .errors import ConfigError
from .evaluator import trace_to_csv_rows

FORMAT_VERSION = 1


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def canonical_json(data):
    return json.dumps(_plain(data), sort_keys=True, separators=(",", ":"))


def config_hash(config_dict):
    return hashlib.sha256(canonical_json(config_dict).encode()).hexdigest()[:16]


def write_archive(path, archive):
    doc = {
        "format_version": FORMAT_VERSION,
        "metadata": _plain(archive.metadata),
        "entries": [
            {
                "genome": _plain(e.genome),
                "objectives": _plain(e.objectives),
                "violation": float(e.violation),
                "summary": _plain(e.summary),
            }
            for e in archive.entries
        ],
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def read_archive(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed archive JSON at {path}: {exc}") from exc
    if "entries" not in doc or "metadata" not in doc:
        raise ConfigError(f"{path} is not an archive file (missing entries/metadata)")
    entries = [
        ArchiveEntry(
            genome=np.array(e["genome"], dtype=float),
            objectives=np.array(e["objectives"], dtype=float),
            violation=float(e.get("violation", 0.0)),
            summary=e.get("summary", {}),
        )
        for e in doc["entries"]
    ]
    return ParetoArchive(entries=entries, metadata=doc["metadata"])


def write_generations_csv(path, history):
    if not history:
        Path(path).write_text("")
        return
    fields = list(history[0].keys())
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fields)
        w.writeheader()
        for row in history:
            w.writerow(row)


def write_trace_csv(path, trace):
    header, rows = trace_to_csv_rows(trace)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def write_json(path, data):
    Path(path).write_text(json.dumps(_plain(data), sort_keys=True, indent=1) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at {path}: {exc}") from exc
