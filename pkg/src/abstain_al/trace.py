"""Per-round record of algorithm internals."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field


@dataclass
class RunTrace:
    rows: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)

    def add(self, **row) -> None:
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def column(self, name, default=None) -> list:
        return [r.get(name, default) for r in self.rows]

    @property
    def columns(self) -> list:
        seen: dict = {}
        for r in self.rows:
            for k in r:
                seen.setdefault(k, None)
        return list(seen)

    def to_csv(self, path) -> None:
        cols = self.columns
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols, restval="")
            w.writeheader()
            w.writerows(self.rows)
