"""Per-step run records and their on-disk form."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from .resources import ResourceCount

VERSION = "0.1.0"
FILES = ("config.json", "series.csv", "resources.json", "manifest.json")


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _parse_value(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


@dataclass
class RunRecord:
    """Time series of one run plus the circuit trace used for resource counts."""

    method: str
    columns: list
    rows: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    resources: ResourceCount | None = None
    config: dict = field(default_factory=dict)
    version: str = VERSION
    extras: dict = field(default_factory=dict)

    def append(self, **row) -> None:
        missing = set(self.columns) - set(row)
        if missing:
            raise KeyError(f"row is missing columns {sorted(missing)}")
        self.rows.append({c: row[c] for c in self.columns})

    def column(self, name: str) -> list:
        return [row[name] for row in self.rows]

    @property
    def final(self) -> dict:
        return self.rows[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(row[c]) for c in self.columns])
        return buf.getvalue()

    def manifest(self) -> dict:
        config_text = canonical_json(self.config)
        return {
            "method": self.method,
            "version": self.version,
            "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
            "files": list(FILES),
            "trace": self.trace,
            "extras": self.extras,
        }

    def write(self, directory) -> Path:
        path = Path(directory)
        path.mkdir(parents=True, exist_ok=True)
        (path / "config.json").write_text(canonical_json(self.config), encoding="utf-8")
        (path / "series.csv").write_text(self.to_csv(), encoding="utf-8")
        res = self.resources.to_dict() if self.resources is not None else None
        (path / "resources.json").write_text(canonical_json(res), encoding="utf-8")
        (path / "manifest.json").write_text(canonical_json(self.manifest()), encoding="utf-8")
        return path

    @classmethod
    def load(cls, directory) -> "RunRecord":
        path = Path(directory)
        manifest = json.loads((path / "manifest.json").read_text(encoding="utf-8"))
        config = json.loads((path / "config.json").read_text(encoding="utf-8"))
        res = json.loads((path / "resources.json").read_text(encoding="utf-8"))
        reader = csv.reader(io.StringIO((path / "series.csv").read_text(encoding="utf-8")))
        columns = next(reader)
        rows = [dict(zip(columns, map(_parse_value, line))) for line in reader]
        return cls(
            method=manifest["method"],
            columns=columns,
            rows=rows,
            trace=manifest["trace"],
            resources=ResourceCount.from_dict(res) if res is not None else None,
            config=config,
            version=manifest["version"],
            extras=manifest.get("extras", {}),
        )
