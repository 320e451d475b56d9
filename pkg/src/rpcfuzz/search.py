"""Evolutionary search over RPC call sequences.

The main loop keeps one small population per testing target: freshly
sampled tests go in while the random-sampling probability decays, mutated
copies of archived tests chase uncovered targets, and the first cover of a
target freezes a champion (shorter tests replace longer ones). The random
baseline shares sampling, evaluation and archiving but never mutates from
the archive, which makes it a grey-box comparison point.

The budget is counted in executed RPC calls. A candidate that would
overshoot the remaining budget is trimmed to fit before execution, so no
evaluation is ever cut off mid-test.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import TransportUnavailable
from .execution import Executor, Transport, extract_response_flags
from .fitness import (
    Categorizer,
    Classification,
    TargetKind,
    TargetRegistry,
    classify_execution,
    fault_distinguisher,
    fitness_for_result,
    target_stats_rows,
)
from .genes.core import Gene
from .genes.factory import GeneFactory
from .schema.model import COLLECTION_KINDS, AuthSpec, FunctionSpec, RpcSchema


@dataclass
class RpcAction:
    fn: FunctionSpec
    genes: list[Gene]
    auth_enabled: bool = False

    def copy(self) -> "RpcAction":
        return RpcAction(self.fn, [g.copy() for g in self.genes], self.auth_enabled)


@dataclass
class TestCase:
    """One individual: environment seeding plus an ordered call sequence."""

    __test__ = False        # keep pytest collection away from this name

    id: str
    actions: list[RpcAction]
    env_setup: list[dict] = field(default_factory=list)

    def copy(self, new_id: str) -> "TestCase":
        return TestCase(new_id, [a.copy() for a in self.actions],
                        [dict(c) for c in self.env_setup])

    def truncated(self, new_id: str, max_actions: int) -> "TestCase":
        clone = self.copy(new_id)
        clone.actions = clone.actions[:max_actions]
        return clone


class Algorithm:
    MIO = "mio"
    RANDOM = "random"


@dataclass
class SearchConfig:
    budget_actions: int
    algorithm: str = Algorithm.MIO
    seed: int = 42
    p_random_sampling: float = 0.5
    focused_start_fraction: float = 0.5
    archive_capacity: int = 10
    p_auth_enabled: float = 0.95
    max_actions: int = 10
    p_structure: float = 0.1
    auth_settings: Optional[int] = None   # derived from the schema when None

    def validate(self) -> None:
        if self.budget_actions < 0:
            raise ValueError("budget must be non-negative")
        if not 0.0 <= self.focused_start_fraction <= 1.0:
            raise ValueError("focused start fraction must be in [0, 1]")
        if self.algorithm not in (Algorithm.MIO, Algorithm.RANDOM):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.max_actions < 1:
            raise ValueError("max actions must be at least 1")


def resolved_auth_settings(schema: RpcSchema, config: SearchConfig) -> int:
    if config.auth_settings is not None:
        return config.auth_settings
    has_auth = schema.auth is not None or \
        any(fn.auth_setup is not None for fn in schema.all_functions())
    return 2 if has_auth else 1


# --- sampling and mutation -----------------------------------------------------------

def sample_adhoc_tests(schema: RpcSchema, factory: GeneFactory,
                       rng: random.Random, config: SearchConfig) -> list[TestCase]:
    """The deterministic first k = a*n single-call tests: every function under
    every auth setting, evaluated before any random sampling."""
    settings = [False, True][:resolved_auth_settings(schema, config)]
    tests = []
    for fn in schema.all_functions():
        for auth_enabled in settings:
            action = RpcAction(fn, factory.build_params(fn, rng), auth_enabled)
            tests.append(TestCase("", [action]))
    return tests


def _random_action(schema: RpcSchema, factory: GeneFactory,
                   rng: random.Random, config: SearchConfig) -> RpcAction:
    functions = list(schema.all_functions())
    fn = rng.choice(functions)
    return RpcAction(fn, factory.build_params(fn, rng),
                     rng.random() < config.p_auth_enabled)


def sample_random_test(schema: RpcSchema, factory: GeneFactory,
                       rng: random.Random, config: SearchConfig) -> TestCase:
    count = rng.randint(1, config.max_actions)
    actions = [_random_action(schema, factory, rng, config) for _ in range(count)]
    return TestCase("", actions)


def mutate_test(test: TestCase, rng: random.Random, factory: GeneFactory,
                schema: RpcSchema, config: SearchConfig) -> TestCase:
    """Structure mutation (add/remove one action) with small probability,
    otherwise value mutation on one action's genes at rate 1/m."""
    if rng.random() < config.p_structure:
        can_add = len(test.actions) < config.max_actions
        can_remove = len(test.actions) > 1
        # removal-biased: the budget is counted in calls, so leaner tests
        # buy more evaluations
        if can_add and (not can_remove or rng.random() < 0.4):
            position = rng.randint(0, len(test.actions))
            test.actions.insert(position,
                                _random_action(schema, factory, rng, config))
            return test
        if can_remove:
            del test.actions[rng.randrange(len(test.actions))]
            return test

    mutable_actions = [a for a in test.actions
                       if any(g.mutable for g in a.genes)]
    if not mutable_actions:
        # nothing value-mutable; fall back to a structural change
        if len(test.actions) < config.max_actions:
            test.actions.append(_random_action(schema, factory, rng, config))
        elif len(test.actions) > 1:
            del test.actions[rng.randrange(len(test.actions))]
        return test
    action = rng.choice(mutable_actions)
    genes = [g for g in action.genes if g.mutable]
    rate = 1.0 / len(genes)
    changed = False
    for gene in genes:
        if rng.random() < rate:
            changed = gene.mutate(rng) or changed
    if not changed:
        rng.choice(genes).mutate(rng)
    return test


# --- archive --------------------------------------------------------------------------

@dataclass
class EvaluatedTest:
    test: TestCase
    classifications: list[Classification]
    responses: list[Any]
    calls_used: int


@dataclass
class _BufferEntry:
    h: float
    size: int
    seq: int
    record: EvaluatedTest


@dataclass
class Champion:
    record: EvaluatedTest
    h: float = 1.0


class Archive:
    """Per-target buffers of partially-good tests plus one champion per
    covered target. A target's best heuristic value never decreases.

    Target selection is feedback-directed: targets whose best value improved
    recently are preferred over targets that keep absorbing picks without
    progress."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.buffers: dict[str, list[_BufferEntry]] = {}
        self.covered: dict[str, Champion] = {}
        self.best: dict[str, float] = {}
        self._stale: dict[str, int] = {}    # picks since last improvement

    def update(self, record: EvaluatedTest, vector: dict[str, float],
               seq: int) -> None:
        for target_id, h in vector.items():
            if h <= 0.0:
                continue
            if h > self.best.get(target_id, 0.0):
                self.best[target_id] = h
                self._stale[target_id] = 0
            if h >= 1.0:
                self._cover(target_id, record)
            elif target_id not in self.covered:
                self._buffer(target_id, h, record, seq)

    def _cover(self, target_id: str, record: EvaluatedTest) -> None:
        current = self.covered.get(target_id)
        if current is None or len(record.test.actions) < len(current.record.test.actions):
            self.covered[target_id] = Champion(record)
        self.buffers.pop(target_id, None)
        self._stale.pop(target_id, None)

    def _buffer(self, target_id: str, h: float, record: EvaluatedTest,
                seq: int) -> None:
        entries = self.buffers.setdefault(target_id, [])
        entries.append(_BufferEntry(h, len(record.test.actions), seq, record))
        entries.sort(key=lambda e: (-e.h, e.size, e.seq))
        del entries[self.capacity:]

    def shrink(self, capacity: int) -> None:
        self.capacity = capacity
        for entries in self.buffers.values():
            del entries[capacity:]

    def eligible_targets(self) -> list[str]:
        return sorted(tid for tid, entries in self.buffers.items() if entries)

    def pick_target(self, rng: random.Random) -> Optional[str]:
        """Uncovered target with a non-empty buffer, freshest progress first."""
        eligible = self.eligible_targets()
        if not eligible:
            return None
        lowest = min(self._stale.get(t, 0) for t in eligible)
        pool = [t for t in eligible if self._stale.get(t, 0) == lowest]
        target_id = rng.choice(pool)
        self._stale[target_id] = self._stale.get(target_id, 0) + 1
        return target_id


# --- search result types ----------------------------------------------------------------

@dataclass
class SuiteTest:
    id: str
    record: EvaluatedTest
    covered_targets: tuple[str, ...]


@dataclass
class TestSuite:
    __test__ = False

    tests: list[SuiteTest] = field(default_factory=list)


@dataclass
class TargetStats:
    total_targets: int = 0
    covered: int = 0
    reached: int = 0
    faults_flagged: int = 0
    calls_executed: int = 0
    rows: list[tuple[str, str, float, str]] = field(default_factory=list)
    curve: list[tuple[int, int]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


# --- the search loop ---------------------------------------------------------------------

def run_search(schema: RpcSchema, transport: Transport, config: SearchConfig,
               probes=None, categorizer: Optional[Categorizer] = None,
               auth_spec: Optional[AuthSpec] = None,
               seeds: Optional[dict[str, list[Any]]] = None,
               ) -> tuple[TestSuite, TargetStats]:
    """Run MIO or the random baseline until the call budget is spent."""
    config.validate()
    rng = random.Random(config.seed)
    factory = GeneFactory(schema, seeds=seeds or {})
    registry = TargetRegistry()
    for fn in schema.all_functions():
        registry.register_targets_for_function(fn, categorizer is not None)
    executor = Executor(schema, transport, auth_spec=auth_spec)
    archive = Archive(config.archive_capacity)
    stats = TargetStats()

    budget = config.budget_actions
    calls = 0
    evals = 0
    mark_step = max(1, budget // 20)
    next_mark = mark_step

    collection_response = {
        fn.qualified_name: fn.response_type is not None
        and fn.response_type.kind in COLLECTION_KINDS
        for fn in schema.all_functions()
    }

    def evaluate(test: TestCase) -> bool:
        """Execute, score and archive one candidate; False ends the search."""
        nonlocal calls, evals, next_mark
        remaining = budget - calls
        if remaining <= 0:
            return False
        if executor.estimate_cost(test) > remaining:
            while test.actions and executor.estimate_cost(test) > remaining:
                test.actions.pop()
            if not test.actions:
                return False
        evals += 1
        test.id = f"t{evals}"

        if probes is not None:
            probes.begin_window()
        execution = executor.execute_test(test)
        calls += execution.calls_used

        vector: dict[str, float] = {}
        classifications = []
        for action, response in zip(test.actions, execution.responses):
            classification = classify_execution(response, action.fn, categorizer)
            classifications.append(classification)
            targets = registry.targets_for(action.fn)
            action_vector, is_fault = fitness_for_result(
                classification.er_class, classification.result_code,
                response.response_phenotype, targets,
                collection_response[action.fn.qualified_name])
            if is_fault:
                fault = registry.register_fault_target(
                    action.fn, fault_distinguisher(classification, response))
                action_vector[fault.id] = 1.0
            for tid, h in action_vector.items():
                if h > vector.get(tid, 0.0):
                    vector[tid] = h
        if probes is not None:
            for probe_id, (d_true, d_false) in probes.window_distances().items():
                t_true, t_false = registry.ensure_branch_targets(probe_id)
                for target, distance in ((t_true, d_true), (t_false, d_false)):
                    h = 1.0 - distance
                    if h > vector.get(target.id, 0.0):
                        vector[target.id] = h

        record = EvaluatedTest(test, classifications, execution.responses,
                               execution.calls_used)
        archive.update(record, vector, evals)
        while calls >= next_mark:
            stats.curve.append((next_mark, len(archive.covered)))
            next_mark += mark_step
        return True

    in_focused_phase = False
    pending = list(sample_adhoc_tests(schema, factory, rng, config))
    pending.reverse()    # consumed with pop() in original order

    try:
        while calls < budget:
            if pending:
                candidate = pending.pop()
            elif config.algorithm == Algorithm.RANDOM:
                candidate = sample_random_test(schema, factory, rng, config)
            else:
                progress = calls / budget if budget else 1.0
                fraction = config.focused_start_fraction
                if progress >= fraction and not in_focused_phase:
                    in_focused_phase = True
                    archive.shrink(1)
                p_random = 0.0 if in_focused_phase else \
                    config.p_random_sampling * (1.0 - progress / fraction)
                target_id = None if rng.random() < p_random \
                    else archive.pick_target(rng)
                if target_id is None:
                    candidate = sample_random_test(schema, factory, rng, config)
                else:
                    entries = archive.buffers[target_id]
                    # exploit the front of the buffer half the time; it holds
                    # the best-then-shortest candidates
                    entry = entries[0] if rng.random() < 0.5 \
                        else rng.choice(entries)
                    candidate = entry.record.test.copy("")
                    mutate_test(candidate, rng, factory, schema, config)
            if not evaluate(candidate):
                break
    except TransportUnavailable as exc:
        stats.diagnostics.append(f"transport unavailable: {exc}")

    suite = _assemble_suite(archive)
    champion_by_target = {}
    suite_id_by_record = {st.record.test.id: st.id for st in suite.tests}
    for target_id, champion in archive.covered.items():
        champion_by_target[target_id] = suite_id_by_record.get(
            champion.record.test.id, "")

    stats.total_targets = len(registry)
    stats.covered = len(archive.covered)
    stats.reached = sum(1 for h in archive.best.values() if h > 0.0)
    stats.faults_flagged = registry.count_kind(TargetKind.FAULT)
    stats.calls_executed = calls
    stats.rows = target_stats_rows(registry, archive.best, champion_by_target)
    return suite, stats


def _assemble_suite(archive: Archive) -> TestSuite:
    by_record: dict[str, list[str]] = {}
    order: list[EvaluatedTest] = []
    seen: dict[str, EvaluatedTest] = {}
    for target_id in sorted(archive.covered):
        record = archive.covered[target_id].record
        if record.test.id not in seen:
            seen[record.test.id] = record
            order.append(record)
        by_record.setdefault(record.test.id, []).append(target_id)
    suite = TestSuite()
    for index, record in enumerate(order, start=1):
        suite.tests.append(SuiteTest(
            id=f"test_{index}",
            record=record,
            covered_targets=tuple(sorted(by_record[record.test.id])),
        ))
    return suite
