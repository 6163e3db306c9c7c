import functools
import json
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel

from risbeam import __version__
from risbeam.config.config import DEFAULTS_VERSION
from risbeam.errors import ContractViolation
from risbeam.utils.print_utils import print_

MANIFEST_FILE_NAME = "manifest.json"


class RunManifest(BaseModel):
    """Everything needed to reproduce one CLI run."""

    subcommand: str
    config: Dict[str, Any]
    outputs: List[str]
    duration_s: float
    defaults_version: str = DEFAULTS_VERSION
    package_version: str = __version__


def register(func):
    """Decorator: reserve the output name before writing and record it afterwards."""

    @functools.wraps(func)
    def wrapper(self, name, *args, **kwargs):
        path = self._reserve(name)
        func(self, path, *args, **kwargs)
        self.outputs.append(path)
        print_(f"Wrote {path}")
        return path

    return wrapper


class OutputManager:
    """
    Owns the output directory of one CLI run: every file goes through it so
    the manifest lists exactly what was written.

    Names are unique within one run only. Files left in out_dir by an earlier
    run are overwritten, manifest.json included, and files this run does not
    write are left in place but stay out of the new manifest.
    """

    def __init__(self, out_dir, subcommand: str, snapshot: Optional[Dict[str, Any]] = None):
        self.out_dir = Path(out_dir)
        self.subcommand = subcommand
        self.snapshot = dict(snapshot or {})
        self.outputs: List[Path] = []
        self._start = time.perf_counter()
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def _reserve(self, name) -> Path:
        path = self.out_dir / name
        if path in self.outputs or path.name == MANIFEST_FILE_NAME:
            raise ContractViolation(f"duplicate output: {path}")
        return path

    @register
    def write_csv(self, path: Path, frame: pd.DataFrame):
        frame.to_csv(path, index=False, lineterminator="\n")

    @register
    def write_json(self, path: Path, payload):
        if isinstance(payload, BaseModel):
            text = payload.model_dump_json(indent=2)
        else:
            text = json.dumps(payload, indent=2)
        path.write_text(text + "\n", encoding="utf-8")

    def manifest(self) -> RunManifest:
        return RunManifest(
            subcommand=self.subcommand,
            config=self.snapshot,
            outputs=[p.name for p in self.outputs],
            duration_s=time.perf_counter() - self._start,
        )

    def finalize(self) -> Path:
        """Write manifest.json listing every output of the run."""
        path = self.out_dir / MANIFEST_FILE_NAME
        path.write_text(self.manifest().model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path
