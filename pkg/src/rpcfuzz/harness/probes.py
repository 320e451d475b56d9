"""Branch probes: explicit instrumentation points inside harness services.

A probe evaluates one predicate and records how close each side came to
being taken. Raw distances use the usual k=1 offsets (e.g. for a < b the
true-distance is a - b + 1 when the branch is missed) and are normalized
with d / (d + 1), so values live in [0, 1) and 0 means "taken".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


def normalize(raw: float) -> float:
    return raw / (raw + 1.0)


def numeric_branch_distances(lhs: float, rhs: float, op: str) -> tuple[float, float]:
    """Raw (d_true, d_false) for a numeric comparison."""
    diff = lhs - rhs
    if op == "==":
        return abs(diff), (1.0 if diff == 0 else 0.0)
    if op == "!=":
        return (1.0 if diff == 0 else 0.0), abs(diff)
    if op == "<":
        return (0.0 if lhs < rhs else diff + 1), (rhs - lhs if lhs < rhs else 0.0)
    if op == "<=":
        return (0.0 if lhs <= rhs else diff), (rhs - lhs + 1 if lhs <= rhs else 0.0)
    if op == ">":
        return (0.0 if lhs > rhs else rhs - lhs + 1), (diff if lhs > rhs else 0.0)
    if op == ">=":
        return (0.0 if lhs >= rhs else rhs - lhs), (diff + 1 if lhs >= rhs else 0.0)
    raise ValueError(f"unknown comparison operator {op!r}")


def string_branch_distances(lhs: str, rhs: str) -> tuple[float, float]:
    """Raw (d_true, d_false) for string equality: length delta plus
    per-position codepoint deltas over the aligned prefix."""
    if lhs == rhs:
        return 0.0, 1.0
    raw = float(abs(len(lhs) - len(rhs)))
    for a, b in zip(lhs, rhs):
        raw += abs(ord(a) - ord(b))
    return raw, 0.0


@dataclass
class BranchProbe:
    probe_id: str
    last_distance_true: Optional[float] = None    # normalized, most recent evaluation
    last_distance_false: Optional[float] = None
    covered_true: bool = False
    covered_false: bool = False


@dataclass
class ProbeRegistry:
    """Probe state for one service instance, with a per-test window.

    The window keeps the minimum normalized distance per side since the last
    begin_window(), which is what fitness evaluation reads: the best any
    evaluation inside the test came to flipping each branch.
    """

    probes: dict[str, BranchProbe] = field(default_factory=dict)
    _window: dict[str, list[float]] = field(default_factory=dict)

    def begin_window(self) -> None:
        self._window = {}

    def _record(self, probe_id: str, raw_true: float, raw_false: float) -> None:
        d_true = normalize(raw_true)
        d_false = normalize(raw_false)
        probe = self.probes.get(probe_id)
        if probe is None:
            probe = BranchProbe(probe_id)
            self.probes[probe_id] = probe
        probe.last_distance_true = d_true
        probe.last_distance_false = d_false
        probe.covered_true = probe.covered_true or d_true == 0.0
        probe.covered_false = probe.covered_false or d_false == 0.0
        window = self._window.get(probe_id)
        if window is None:
            self._window[probe_id] = [d_true, d_false]
        else:
            window[0] = min(window[0], d_true)
            window[1] = min(window[1], d_false)

    def cmp_num(self, probe_id: str, lhs: float, rhs: float, op: str) -> bool:
        raw_true, raw_false = numeric_branch_distances(lhs, rhs, op)
        self._record(probe_id, raw_true, raw_false)
        return raw_true == 0.0

    def cmp_str(self, probe_id: str, lhs: str, rhs: str) -> bool:
        raw_true, raw_false = string_branch_distances(lhs, rhs)
        self._record(probe_id, raw_true, raw_false)
        return raw_true == 0.0

    def window_distances(self) -> dict[str, tuple[float, float]]:
        """Minimum (d_true, d_false) per probe executed since begin_window()."""
        return {pid: (d[0], d[1]) for pid, d in self._window.items()}


def probe_cmp_numeric(registry: ProbeRegistry, probe_id: str,
                      lhs: float, rhs: float, op: str) -> bool:
    return registry.cmp_num(probe_id, lhs, rhs, op)


def probe_cmp_string(registry: ProbeRegistry, probe_id: str,
                     lhs: str, rhs: str) -> bool:
    return registry.cmp_str(probe_id, lhs, rhs)
