"""Simulated table store with access tracking and smart reset.

Clearing every table between tests is wasteful when a test touches only a
few, so the store tracks which tables each test accessed and resets just
those plus everything reachable over foreign-key links. Tables with seed
data get it re-applied after clearing.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional


@dataclass(frozen=True)
class ResetReport:
    tables: tuple[str, ...]       # tables cleared (and re-seeded where configured)


@dataclass
class SimTableStore:
    tables: dict[str, list[dict]] = field(default_factory=dict)
    foreign_keys: list[tuple[str, str]] = field(default_factory=list)
    init_data: dict[str, list[dict]] = field(default_factory=dict)
    accessed_this_test: set[str] = field(default_factory=set)

    def __post_init__(self):
        # construction lands on the canonical initial state: seed rows applied
        for name, rows in self.init_data.items():
            self.tables[name] = copy.deepcopy(rows)

    # --- table access (every call marks the table as touched) ---

    def create_table(self, name: str) -> None:
        self.tables.setdefault(name, [])

    def add_foreign_key(self, table: str, linked: str) -> None:
        self.foreign_keys.append((table, linked))

    def insert(self, table: str, row: dict) -> None:
        self.accessed_this_test.add(table)
        self.tables.setdefault(table, []).append(dict(row))

    def delete(self, table: str, **where: Any) -> int:
        self.accessed_this_test.add(table)
        rows = self.tables.setdefault(table, [])
        keep = [r for r in rows if not _matches(r, where)]
        removed = len(rows) - len(keep)
        self.tables[table] = keep
        return removed

    def rows(self, table: str) -> list[dict]:
        self.accessed_this_test.add(table)
        return list(self.tables.get(table, []))

    def find(self, table: str, **where: Any) -> list[dict]:
        self.accessed_this_test.add(table)
        return [r for r in self.tables.get(table, []) if _matches(r, where)]

    # --- reset machinery ---

    def fk_closure(self, seeds: Iterable[str]) -> set[str]:
        """Transitive closure over foreign-key edges, in both directions."""
        adjacency: dict[str, set[str]] = {}
        for a, b in self.foreign_keys:
            adjacency.setdefault(a, set()).add(b)
            adjacency.setdefault(b, set()).add(a)
        todo = [s for s in seeds if s in self.tables]
        closed: set[str] = set(todo)
        while todo:
            node = todo.pop()
            for neighbor in adjacency.get(node, ()):
                if neighbor in self.tables and neighbor not in closed:
                    closed.add(neighbor)
                    todo.append(neighbor)
        return closed

    def smart_reset(self) -> ResetReport:
        """Clear accessed tables plus their linked closure, re-seed, forget
        the access set. Untouched tables are left exactly as they were."""
        to_reset = self.fk_closure(self.accessed_this_test)
        for name in to_reset:
            self.tables[name] = copy.deepcopy(self.init_data.get(name, []))
        self.accessed_this_test = set()
        return ResetReport(tuple(sorted(to_reset)))

    def full_reset(self) -> None:
        for name in self.tables:
            self.tables[name] = copy.deepcopy(self.init_data.get(name, []))
        self.accessed_this_test = set()

    def load_init_data(self, data: dict[str, list[dict]]) -> None:
        """Install seed rows and apply them immediately."""
        for name, rows in data.items():
            self.init_data[name] = copy.deepcopy(rows)
            self.tables[name] = copy.deepcopy(rows)

    def state_hash(self) -> str:
        canonical = json.dumps(self.tables, sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode()).hexdigest()


def _matches(row: dict, where: dict) -> bool:
    return all(row.get(k) == v for k, v in where.items())
