"""Suite output: a replayable machine format plus rendered test text.

The machine format is "rpcfuzz-suite/1": metadata (seed, schema hash,
budget), then one entry per test with its env setup, actions (rendered
args, auth flag) and expected outcome (per-action result classes and the
generated assertions). Rendered text goes through a pluggable template;
the default emits framework-neutral pseudo-test text with scaffolding
hooks for starting, resetting and stopping the SUT.

Assertions that smell flaky (field name, declared type or string value
matching a keyword like date/token/time) are kept but commented out.
Large collections get a size assertion plus a small sampled subset of
element assertions.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import random
from dataclasses import dataclass, replace
from typing import Any, Optional

from .execution import Executor
from .fitness import ExecutionResultClass, classify_execution
from .schema.jsonio import decode_phenotype, encode_phenotype
from .schema.model import RpcSchema, SupportedDataType, TypeSpec
from .search import SuiteTest, TargetStats, TestSuite

SUITE_FORMAT_TAG = "rpcfuzz-suite/1"

DEFAULT_FLAKY_KEYWORDS = ("date", "time", "token", "timestamp", "random", "uuid")

EXCEPTIONAL_CLASSES = frozenset({
    ExecutionResultClass.ER1_INTERNAL_ERROR,
    ExecutionResultClass.ER4_OTHER_EXCEPTION,
    ExecutionResultClass.ER5_DECLARED_EXCEPTION,
    ExecutionResultClass.ER6_UNEXPECTED_EXCEPTION,
})

FLOAT_REL_TOLERANCE = 1e-9


@dataclass
class Assertion:
    action: int
    path: str
    op: str                      # eq | approx | size | is_null | raises
    value: Any = None
    tolerance: Optional[float] = None
    type_hint: str = ""
    masked: bool = False
    mask_reason: Optional[str] = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"action": self.action, "path": self.path,
                               "op": self.op}
        if self.value is not None:
            out["value"] = encode_phenotype(self.value)
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        if self.masked:
            out["masked"] = True
            out["maskReason"] = self.mask_reason
        return out


@dataclass
class WriterConfig:
    seed: int = 0
    collection_sample_n: int = 2
    flaky_keywords: tuple[str, ...] = DEFAULT_FLAKY_KEYWORDS
    template: Optional["SuiteTemplate"] = None


@dataclass
class RenderedSuite:
    files: dict[str, str]
    machine: dict


def _derive_rng(seed: int, label: str) -> random.Random:
    digest = hashlib.sha256(f"{label}:{seed}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


# --- assertion generation ------------------------------------------------------------

class _AssertionBuilder:
    def __init__(self, schema: RpcSchema, config: WriterConfig):
        self._schema = schema
        self._n = config.collection_sample_n
        self._rng = _derive_rng(config.seed, "writer")

    def for_test(self, suite_test: SuiteTest) -> list[Assertion]:
        out: list[Assertion] = []
        record = suite_test.record
        for index, (classification, response) in enumerate(
                zip(record.classifications, record.responses)):
            if response.exception_info is not None:
                out.append(Assertion(index, "", "raises",
                                     response.exception_info.exception_name))
                continue
            fn = record.test.actions[index].fn
            self._value(out, index, "", response.response_phenotype,
                        fn.response_type)
        return out

    def _value(self, out: list[Assertion], action: int, path: str,
               value: Any, ts: Optional[TypeSpec]) -> None:
        hint = self._hint(ts)
        if value is None:
            out.append(Assertion(action, path, "is_null", type_hint=hint))
            return
        if isinstance(value, bool) or isinstance(value, int):
            out.append(Assertion(action, path, "eq", value, type_hint=hint))
            return
        if isinstance(value, float):
            out.append(Assertion(action, path, "approx", value,
                                 tolerance=FLOAT_REL_TOLERANCE, type_hint=hint))
            return
        if isinstance(value, str):
            out.append(Assertion(action, path, "eq", value, type_hint=hint))
            return
        if isinstance(value, list):
            out.append(Assertion(action, path, "size", len(value), type_hint=hint))
            element_ts = ts.example if ts is not None else None
            for i in self._sample_indices(len(value)):
                self._value(out, action, f"{path}[{i}]", value[i], element_ts)
            return
        if isinstance(value, dict):
            if ts is not None and ts.kind is SupportedDataType.MAP:
                out.append(Assertion(action, path, "size", len(value),
                                     type_hint=hint))
                keys = sorted(value.keys(), key=str)
                for i in self._sample_indices(len(keys)):
                    key = keys[i]
                    self._value(out, action, f"{path}[{key!r}]", value[key],
                                ts.value_type)
                return
            fields = self._object_fields(ts)
            for key in value:
                child_ts = fields.get(key)
                prefix = f"{path}.{key}" if path else key
                self._value(out, action, prefix, value[key], child_ts)
            return
        out.append(Assertion(action, path, "eq", str(value), type_hint=hint))

    def _sample_indices(self, length: int) -> list[int]:
        if length <= self._n:
            return list(range(length))
        return sorted(self._rng.sample(range(length), self._n))

    def _hint(self, ts: Optional[TypeSpec]) -> str:
        if ts is None:
            return ""
        return f"{ts.kind.value} {ts.type_name}"

    def _object_fields(self, ts: Optional[TypeSpec]) -> dict[str, TypeSpec]:
        if ts is None:
            return {}
        resolved = self._schema.resolve(ts)
        return {f.name: f.type for f in resolved.fields or []}


def sample_collection_assertions(values: list, n: int, seed: int) -> list[int]:
    """Deterministic choice of which collection elements get assertions."""
    rng = _derive_rng(seed, "writer")
    if len(values) <= n:
        return list(range(len(values)))
    return sorted(rng.sample(range(len(values)), n))


def mask_flaky_assertions(assertions: list[Assertion],
                          keywords: tuple[str, ...] = DEFAULT_FLAKY_KEYWORDS,
                          ) -> list[Assertion]:
    """Non-destructive masking: a matching assertion is marked, not dropped."""
    out = []
    for assertion in assertions:
        reason = _flaky_reason(assertion, keywords)
        if reason is not None:
            out.append(replace(assertion, masked=True, mask_reason=reason))
        else:
            out.append(assertion)
    return out


def _flaky_reason(assertion: Assertion, keywords: tuple[str, ...]) -> Optional[str]:
    path = assertion.path.lower()
    hint = assertion.type_hint.lower()
    value = assertion.value.lower() if isinstance(assertion.value, str) else ""
    for keyword in keywords:
        if keyword in path:
            return f"field name matches keyword '{keyword}'"
        if keyword in hint:
            return f"declared type matches keyword '{keyword}'"
        if keyword in value:
            return f"string value matches keyword '{keyword}'"
    return None


# --- machine suite -------------------------------------------------------------------

def build_machine_suite(suite: TestSuite, schema: RpcSchema, meta: dict,
                        config: WriterConfig) -> dict:
    builder = _AssertionBuilder(schema, config)
    tests = []
    for suite_test in suite.tests:
        record = suite_test.record
        assertions = mask_flaky_assertions(builder.for_test(suite_test),
                                           config.flaky_keywords)
        action_results = [c.er_class.value for c in record.classifications]
        tests.append({
            "id": suite_test.id,
            "env": list(record.test.env_setup),
            "actions": [{
                "interfaceId": action.fn.interface_id,
                "actionName": action.fn.action_name,
                "args": [encode_phenotype(g.render()) for g in action.genes],
                "authEnabled": action.auth_enabled,
            } for action in record.test.actions],
            "expected": {
                "erClass": action_results[-1] if action_results else None,
                "actionResults": action_results,
                "assertions": [a.to_json() for a in assertions],
            },
            "coveredTargets": list(suite_test.covered_targets),
        })
    return {"format": SUITE_FORMAT_TAG, "meta": dict(meta), "tests": tests}


def split_suite_by_outcome(tests: list[dict]) -> tuple[list[dict], list[dict]]:
    """Exception-expecting tests go to the exceptional partition."""
    main, exceptional = [], []
    codes = {er.value for er in EXCEPTIONAL_CLASSES}
    for test in tests:
        results = test.get("expected", {}).get("actionResults", [])
        (exceptional if any(r in codes for r in results) else main).append(test)
    return main, exceptional


# --- rendered text -------------------------------------------------------------------

class SuiteTemplate:
    """Extension point for framework-specific output; subclass and override."""

    def render_suite(self, tests: list[dict], title: str) -> str:
        raise NotImplementedError


class PlainTextTemplate(SuiteTemplate):
    """Framework-neutral pseudo-test text."""

    SCAFFOLD = (
        "scaffold:\n"
        "  before_all: start_sut()\n"
        "  before_each: reset_sut_state()\n"
        "  after_all: stop_sut()\n"
    )

    def render_suite(self, tests, title):
        parts = [f"# {title}", "", self.SCAFFOLD]
        for test in tests:
            parts.append(self._render_test(test))
        return "\n".join(parts) + "\n"

    def _render_test(self, test: dict) -> str:
        lines = [f"test {test['id']}:"]
        for command in test.get("env", []):
            lines.append(f"  seed_row({command.get('table')!r}, "
                         f"{json.dumps(command.get('row'), sort_keys=True)})")
        raises_by_action = {}
        for assertion in test["expected"]["assertions"]:
            if assertion["op"] == "raises":
                raises_by_action[assertion["action"]] = assertion["value"]
        for index, action in enumerate(test["actions"]):
            args = ", ".join(json.dumps(a, sort_keys=True) for a in action["args"])
            call = f"{action['interfaceId']}.{action['actionName']}({args})"
            suffix = "  [auth]" if action.get("authEnabled") else ""
            if index in raises_by_action:
                lines.append(f"  expect_raises {raises_by_action[index]}: "
                             f"{call}{suffix}")
            else:
                lines.append(f"  res_{index} = {call}{suffix}")
        for assertion in test["expected"]["assertions"]:
            if assertion["op"] == "raises":
                continue
            lines.append(self._render_assertion(assertion))
        return "\n".join(lines) + "\n"

    def _render_assertion(self, assertion: dict) -> str:
        subject = f"res_{assertion['action']}"
        if assertion["path"]:
            separator = "" if assertion["path"].startswith("[") else "."
            subject = f"{subject}{separator}{assertion['path']}"
        op = assertion["op"]
        if op == "is_null":
            text = f"assert {subject} is null"
        elif op == "size":
            text = f"assert size({subject}) == {assertion['value']}"
        elif op == "approx":
            text = (f"assert approx({subject}, {json.dumps(assertion['value'])}, "
                    f"rel={assertion['tolerance']:g})")
        else:
            text = f"assert {subject} == {json.dumps(assertion.get('value'))}"
        if assertion.get("masked"):
            return f"  # {text}  (masked: {assertion.get('maskReason')})"
        return f"  {text}"


# --- stats + top-level write ----------------------------------------------------------

def stats_csv(stats: TargetStats) -> str:
    buffer = io.StringIO()
    out = csv.writer(buffer, lineterminator="\n")
    out.writerow(["target_id", "kind", "best_h", "covered", "champion_test"])
    for target_id, kind, best_h, champion in stats.rows:
        out.writerow([target_id, kind, f"{best_h:.6f}",
                      "yes" if best_h >= 1.0 else "no", champion])
    return buffer.getvalue()


def write_suite(suite: TestSuite, schema: RpcSchema, stats: TargetStats,
                meta: dict, config: Optional[WriterConfig] = None) -> RenderedSuite:
    config = config or WriterConfig()
    template = config.template or PlainTextTemplate()
    machine = build_machine_suite(suite, schema, meta, config)
    main, exceptional = split_suite_by_outcome(machine["tests"])
    files = {
        "suite.json": json.dumps(machine, indent=2, sort_keys=True) + "\n",
        "tests_main.txt": template.render_suite(main, "generated tests"),
        "tests_exceptional.txt": template.render_suite(
            exceptional, "generated tests (exception outcomes)"),
        "stats.csv": stats_csv(stats),
    }
    return RenderedSuite(files=files, machine=machine)


# --- replay ---------------------------------------------------------------------------

@dataclass
class ReplayMismatch:
    test_id: str
    action_index: int
    expected: str
    actual: str

    def __str__(self) -> str:
        return (f"{self.test_id} action {self.action_index}: "
                f"expected {self.expected}, observed {self.actual}")


def replay_suite(machine: dict, schema: RpcSchema, executor: Executor,
                 categorizer=None) -> list[ReplayMismatch]:
    """Re-execute a machine suite and report every action whose result class
    differs from the recorded expectation."""
    if machine.get("format") != SUITE_FORMAT_TAG:
        raise ValueError(f"not a {SUITE_FORMAT_TAG} document")
    mismatches = []
    for test in machine.get("tests", []):
        items = []
        for action in test["actions"]:
            fn = schema.function(action["interfaceId"], action["actionName"])
            if fn is None:
                raise ValueError(f"unknown function "
                                 f"{action['interfaceId']}.{action['actionName']}")
            args = [decode_phenotype(a) for a in action["args"]]
            items.append((fn, args, bool(action.get("authEnabled"))))
        execution = executor.execute_items(test.get("env", []), items)
        expected = test["expected"]["actionResults"]
        for index, ((fn, _, _), response) in enumerate(zip(items, execution.responses)):
            observed = classify_execution(response, fn, categorizer).er_class.value
            if index < len(expected) and observed != expected[index]:
                mismatches.append(ReplayMismatch(test["id"], index,
                                                 expected[index], observed))
    return mismatches
