# run_manager.py
import hashlib
import json
import os
import time
from dataclasses import dataclass, field

import weave

from .config import TOOL_VERSION
from .report_formatter import emit, write_json


def config_digest(data):
    """sha256 of the canonical JSON form; key order in the source file does not matter."""
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    command: str
    config_digest: str
    seed: int
    sampling: dict
    tool_version: str = TOOL_VERSION
    wall_time: float = 0.0
    passed: int = 0
    failed: int = 0
    outputs: list = field(default_factory=list)

    @property
    def ok(self):
        return self.failed == 0


class RunManager:
    def __init__(self, command, out_dir, digest, seed=0, sampling=None, fmt="csv"):
        self.out_dir = out_dir
        self.fmt = fmt
        self.manifest = RunManifest(command=command, config_digest=digest, seed=seed,
                                    sampling=dict(sampling or {}))
        self._started = time.perf_counter()
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name):
        return os.path.join(self.out_dir, name)

    @weave.op()
    def add_table(self, stem, records, fields=None):
        name = f"{stem}.{self.fmt}"
        emit(records, self.fmt, self.path(name), fields=fields)
        self.manifest.outputs.append(name)
        return name

    def add_csv(self, name, records, fields=None):
        emit(records, "csv", self.path(name), fields=fields)
        self.manifest.outputs.append(name)
        return name

    def add_json(self, name, value):
        write_json(self.path(name), value)
        self.manifest.outputs.append(name)
        return name

    def record(self, passed):
        if passed:
            self.manifest.passed += 1
        else:
            self.manifest.failed += 1

    def finish(self):
        self.manifest.wall_time = time.perf_counter() - self._started
        self.manifest.outputs.append("manifest.json")
        write_json(self.path("manifest.json"), self.manifest)
        return self.manifest
