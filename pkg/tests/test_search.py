"""Search loop: sampling, mutation, archive, budget accounting, determinism."""

import random

import pytest

from rpcfuzz.execution import Executor, InProcessTransport
from rpcfuzz.genes.factory import GeneFactory
from rpcfuzz.harness.services import build_authdemo, build_ncs_analog, build_scs_analog
from rpcfuzz.schema.model import (
    FunctionSpec,
    InterfaceSchema,
    ParamSpec,
    RpcSchema,
    SupportedDataType,
    TypeSpec,
)
from rpcfuzz.search import (
    Archive,
    EvaluatedTest,
    SearchConfig,
    TestCase,
    mutate_test,
    run_search,
    sample_adhoc_tests,
    sample_random_test,
)

D = SupportedDataType


def _toy_schema(function_count: int) -> RpcSchema:
    functions = [
        FunctionSpec("Toy", f"fn{i}", request_params=[
            ParamSpec("x", TypeSpec(D.INT, "i32"), min_value=0, max_value=9)])
        for i in range(function_count)
    ]
    return RpcSchema(interfaces=[InterfaceSchema("Toy", functions=functions)])


# --- adhoc and random sampling -----------------------------------------------------

@pytest.mark.parametrize("n,a", [(6, 2), (1, 1), (4, 1), (3, 2)])
def test_adhoc_tests_cover_every_function_auth_pair(n, a):
    schema = _toy_schema(n)
    config = SearchConfig(budget_actions=100, auth_settings=a)
    tests = sample_adhoc_tests(schema, GeneFactory(schema), random.Random(0),
                               config)
    assert len(tests) == a * n
    assert all(len(t.actions) == 1 for t in tests)
    pairs = {(t.actions[0].fn.action_name, t.actions[0].auth_enabled)
             for t in tests}
    assert len(pairs) == a * n
    names = {fn for fn, _ in pairs}
    assert names == {f"fn{i}" for i in range(n)}


def test_adhoc_property_over_random_schemas():
    rng = random.Random(1)
    for _ in range(25):
        n = rng.randint(1, 8)
        a = rng.choice([1, 2])
        schema = _toy_schema(n)
        config = SearchConfig(budget_actions=10, auth_settings=a)
        tests = sample_adhoc_tests(schema, GeneFactory(schema),
                                   random.Random(0), config)
        assert len(tests) == a * n
        assert all(len(t.actions) == 1 for t in tests)


def test_random_test_structure_and_auth_rate():
    schema = _toy_schema(3)
    config = SearchConfig(budget_actions=10, max_actions=7)
    rng = random.Random(2)
    factory = GeneFactory(schema)
    auth_flags = 0
    action_total = 0
    for _ in range(2000):
        test = sample_random_test(schema, factory, rng, config)
        assert 1 <= len(test.actions) <= 7
        for action in test.actions:
            action_total += 1
            auth_flags += action.auth_enabled
    rate = auth_flags / action_total
    assert 0.93 <= rate <= 0.97


def test_single_function_schema_always_samples_it():
    schema = _toy_schema(1)
    config = SearchConfig(budget_actions=10)
    test = sample_random_test(schema, GeneFactory(schema), random.Random(3),
                              config)
    assert {a.fn.action_name for a in test.actions} == {"fn0"}


# --- test mutation -------------------------------------------------------------------

def _make_test(schema, rng, config, count):
    factory = GeneFactory(schema)
    while True:
        test = sample_random_test(schema, factory, rng, config)
        if len(test.actions) == count:
            return test


def test_mutations_preserve_test_invariants():
    schema = _toy_schema(4)
    config = SearchConfig(budget_actions=10, max_actions=5)
    rng = random.Random(4)
    factory = GeneFactory(schema)
    test = sample_random_test(schema, factory, rng, config)
    for _ in range(1000):
        mutate_test(test, rng, factory, schema, config)
        assert 1 <= len(test.actions) <= 5
        for action in test.actions:
            value = action.genes[0].render()
            assert 0 <= value <= 9


def test_structure_mutation_respects_bounds():
    schema = _toy_schema(2)
    config = SearchConfig(budget_actions=10, max_actions=3, p_structure=1.0)
    rng = random.Random(5)
    factory = GeneFactory(schema)
    at_max = _make_test(schema, random.Random(6), config, 3)
    for _ in range(100):
        mutate_test(at_max, rng, factory, schema, config)
        assert len(at_max.actions) <= 3
    single = _make_test(schema, random.Random(7), config, 1)
    for _ in range(100):
        mutate_test(single, rng, factory, schema, config)
        assert len(single.actions) >= 1


# --- archive --------------------------------------------------------------------------

def _record(test_id: str, action_count: int) -> EvaluatedTest:
    actions = [None] * action_count
    return EvaluatedTest(TestCase(test_id, actions), [], [], action_count)


def test_archive_best_is_monotone_and_champion_prefers_short():
    archive = Archive(capacity=3)
    archive.update(_record("a", 5), {"t": 0.4}, 1)
    archive.update(_record("b", 2), {"t": 0.2}, 2)
    assert archive.best["t"] == 0.4
    archive.update(_record("c", 4), {"t": 1.0}, 3)
    assert archive.best["t"] == 1.0
    assert "t" not in archive.buffers
    # longer covering test does not displace the champion
    archive.update(_record("d", 6), {"t": 1.0}, 4)
    assert archive.covered["t"].record.test.id == "c"
    # strictly shorter one does
    archive.update(_record("e", 1), {"t": 1.0}, 5)
    assert archive.covered["t"].record.test.id == "e"
    # re-evaluating an equal-length champion keeps the existing one
    archive.update(_record("f", 1), {"t": 1.0}, 6)
    assert archive.covered["t"].record.test.id == "e"


def test_archive_buffer_capacity_and_ordering():
    archive = Archive(capacity=2)
    archive.update(_record("a", 3), {"t": 0.3}, 1)
    archive.update(_record("b", 1), {"t": 0.5}, 2)
    archive.update(_record("c", 2), {"t": 0.4}, 3)
    entries = archive.buffers["t"]
    assert [e.record.test.id for e in entries] == ["b", "c"]
    archive.shrink(1)
    assert [e.record.test.id for e in archive.buffers["t"]] == ["b"]


def test_zero_heuristic_never_buffered():
    archive = Archive(capacity=2)
    archive.update(_record("a", 1), {"t": 0.0}, 1)
    assert "t" not in archive.buffers and "t" not in archive.best


# --- full runs ------------------------------------------------------------------------

def test_budget_zero_yields_empty_suite():
    service = build_ncs_analog()
    suite, stats = run_search(service.schema, InProcessTransport(service),
                              SearchConfig(budget_actions=0, seed=1),
                              probes=service.probes)
    assert suite.tests == []
    assert stats.calls_executed == 0


def test_budget_is_exact_and_tests_never_truncated_midway():
    for budget in (1, 7, 50, 333):
        service = build_scs_analog()
        transport = InProcessTransport(service)
        lengths = []
        original = transport.call

        def counting(interface_id, action, args, auth):
            lengths.append(action)
            return original(interface_id, action, args, auth)

        transport.call = counting
        _, stats = run_search(service.schema, transport,
                              SearchConfig(budget_actions=budget, seed=2),
                              probes=service.probes)
        assert stats.calls_executed == len(lengths) == budget


def test_first_evaluations_are_the_adhoc_tests():
    service = build_authdemo()
    transport = InProcessTransport(service)
    called = []
    original = transport.call

    def spy(interface_id, action, args, auth):
        called.append(action)
        return original(interface_id, action, args, auth)

    transport.call = spy
    config = SearchConfig(budget_actions=16, seed=3)
    run_search(service.schema, transport, config,
               probes=service.probes, auth_spec=service.default_auth)
    # a=2 (auth configured): every function twice, in schema order, one
    # action per test; in-scope auth-enabled actions get a login call first
    expected = ["login",                  # login, auth off
                "login",                  # login, auth on (out of auth scope)
                "getSecret",              # auth off
                "login", "getSecret",     # auth on -> dynamic login first
                "setFlag",
                "login", "setFlag",
                "revokeAll",
                "login", "revokeAll"]
    assert called[:len(expected)] == expected


def test_search_is_deterministic_per_seed():
    def run_once():
        service = build_ncs_analog()
        suite, stats = run_search(service.schema, InProcessTransport(service),
                                  SearchConfig(budget_actions=800, seed=11),
                                  probes=service.probes)
        return ([(t.id, t.covered_targets,
                  [c.er_class.value for c in t.record.classifications])
                 for t in suite.tests],
                stats.rows)

    assert run_once() == run_once()


def test_random_algorithm_still_collects_champions():
    service = build_ncs_analog()
    suite, stats = run_search(service.schema, InProcessTransport(service),
                              SearchConfig(budget_actions=600, seed=4,
                                           algorithm="random"),
                              probes=service.probes)
    assert stats.covered > 0
    assert suite.tests


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(budget_actions=-1).validate()
    with pytest.raises(ValueError):
        SearchConfig(budget_actions=1, algorithm="annealing").validate()
    with pytest.raises(ValueError):
        SearchConfig(budget_actions=1, max_actions=0).validate()
