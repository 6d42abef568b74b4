"""
Run manifests and table output.

Every output file carries the parameters that produced it: CSV files get a
<stem>.manifest.json sidecar, JSON outputs embed the manifest. Rerunning
with the same manifest gives byte-identical tables.
"""

import csv
import json
import logging
import math
import os
import platform
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

TOOL_NAME = "bbqlab"
TOOL_VERSION = "0.4.0"

logger = logging.getLogger(__name__)


@dataclass
class RunManifest:
    command: str
    parameters: Dict[str, Any]
    seeds: List[int] = field(default_factory=list)
    tool_version: str = f"{TOOL_NAME} {TOOL_VERSION}"
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc)
                           .isoformat(timespec="seconds"))
    python: str = field(default_factory=platform.python_version)
    numpy: str = np.__version__

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def format_value(value: Any) -> str:
    """Locale-free text for one CSV cell; floats keep 12 significant digits."""
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return format(float(value), ".12g")
    return str(value)


def _json_safe(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def sidecar_path(path: str) -> str:
    stem, _ = os.path.splitext(path)
    return f"{stem}.manifest.json"


def write_table(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]],
                manifest: Optional[RunManifest] = None) -> str:
    """Write a CSV table. path "-" means stdout and gets no sidecar."""
    if path == "-":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[format_value(v) for v in row] for row in rows])
        sys.stdout.flush()
        return path
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[format_value(v) for v in row] for row in rows])
    logger.info("wrote %d rows to %s", len(rows), path)
    if manifest is not None:
        write_json(sidecar_path(path), manifest.to_dict())
    return path


def write_json(path: str, payload: Dict[str, Any]) -> str:
    text = json.dumps(_json_safe(payload), indent=2)
    if path == "-":
        sys.stdout.write(text + "\n")
        sys.stdout.flush()
        return path
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    logger.info("wrote %s", path)
    return path
