# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Deterministic JSON/CSV output, data fingerprints and the run manifest."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from datetime import UTC, datetime
from pathlib import Path
from types import TracebackType
from typing import Any

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from phillips_lf import __version__
from phillips_lf.exceptions import OutputError
from phillips_lf.series_core import AnnualSeries

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def clean_record(value: Any) -> Any:
    """Replace non-finite floats by ``None`` so records are strict JSON."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): clean_record(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [clean_record(v) for v in value]
    if isinstance(value, BaseModel):
        return clean_record(value.model_dump(mode="json"))
    return value


def canonical_json(record: Any) -> str:
    return json.dumps(clean_record(record), sort_keys=True, indent=2, allow_nan=False) + "\n"


def series_fingerprint(series: AnnualSeries) -> str:
    """SHA-256 of the series record (years, values, unit, label)."""
    return hashlib.sha256(series.model_dump_json().encode("utf-8")).hexdigest()


def fingerprint(*series: AnnualSeries) -> str:
    digest = hashlib.sha256()
    for item in series:
        digest.update(series_fingerprint(item).encode("ascii"))
    return digest.hexdigest()


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_json(path: str | Path, record: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(record), encoding="utf-8", newline="\n")
    return path


def write_table(path: str | Path, frame: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.10g", lineterminator="\n", encoding="utf-8")
    return path


def run_timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = datetime.fromtimestamp(int(epoch), tz=UTC) if epoch else datetime.now(tz=UTC).replace(microsecond=0)
    return moment.isoformat()


class RunManifest(BaseModel):
    config_path: str
    config_sha256: str
    series_sha256: dict[str, str] = Field(default_factory=dict)
    command: str
    flags: dict[str, Any] = Field(default_factory=dict)
    tool_version: str = __version__
    timestamp: str = Field(default_factory=run_timestamp)
    outputs: list[str] = Field(default_factory=list)


class OutputWriter:
    """Collects every artifact of one command and writes the manifest last.

    Used as a context manager: if the body raises, every file written so far is removed so a
    failed run never leaves partial output behind.

    Args:
        out_dir: Destination directory (created on enter).
        manifest: Manifest without ``outputs``; filled in on successful exit.
    """

    def __init__(self, out_dir: str | Path, manifest: RunManifest):
        self.out_dir = Path(out_dir)
        self.manifest = manifest
        self._written: list[str] = []
        self._created_dir = False

    def __enter__(self) -> OutputWriter:
        if not self.out_dir.exists():
            self.out_dir.mkdir(parents=True)
            self._created_dir = True
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        if exc_type is not None:
            self.discard()
            return
        self.manifest = self.manifest.model_copy(update={"outputs": sorted(self._written)})
        write_json(self.out_dir / MANIFEST_NAME, self.manifest)

    def path(self, name: str) -> Path:
        """Register ``name`` (relative to the output dir) and return its absolute path."""
        if name in self._written:
            raise OutputError(f"output {name} written twice", details={"name": name})
        self._written.append(name)
        return self.out_dir / name

    def json(self, name: str, record: Any) -> Path:
        return write_json(self.path(name), record)

    def table(self, name: str, frame: pd.DataFrame) -> Path:
        return write_table(self.path(name), frame)

    @property
    def outputs(self) -> list[str]:
        return list(self._written)

    def discard(self) -> None:
        for name in reversed(self._written):
            target = self.out_dir / name
            if target.exists():
                target.unlink()
        # remove now-empty subdirectories we created
        for name in sorted({str(Path(n).parent) for n in self._written if Path(n).parent != Path(".")}, reverse=True):
            sub = self.out_dir / name
            if sub.is_dir() and not any(sub.iterdir()):
                sub.rmdir()
        if self._created_dir and self.out_dir.is_dir() and not any(self.out_dir.iterdir()):
            self.out_dir.rmdir()
        logger.debug("discarded %d partial outputs in %s", len(self._written), self.out_dir)
        self._written.clear()
