"""CSV emission and run manifests."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, str)):
        return str(v)
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.17g}"


def write_csv(path: Path, name: str, columns, rows) -> Path:
    """UTF-8, LF, 17 significant digits, with a versioned schema comment first."""
    path = Path(path)
    lines = [f"# pendula-lab {name} v{SCHEMA_VERSION}", ", ".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"{name}: row has {len(row)} values for {len(columns)} columns")
        lines.append(", ".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    scenario: dict
    version: str
    config_hash: str
    started: str
    finished: str = ""
    files: list = field(default_factory=list)
    results: dict = field(default_factory=dict)

    def add(self, path: Path, root: Path):
        self.files.append({"path": str(Path(path).relative_to(root)), "sha256": sha256_file(path)})

    def write(self, root: Path) -> Path:
        out = Path(root) / "manifest.json"
        body = {"scenario": self.scenario, "version": self.version, "config_hash": self.config_hash,
                "started": self.started, "finished": self.finished, "files": self.files,
                "results": self.results}
        out.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
        return out


def verify_manifest(root) -> bool:
    """True when every listed file exists with the recorded digest."""
    root = Path(root)
    body = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    return all(sha256_file(root / f["path"]) == f["sha256"] for f in body["files"])
