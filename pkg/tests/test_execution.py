"""Executor behavior: response shape, auth flows, resets, response flags."""

import random

import pytest

from rpcfuzz.execution import (
    ActionResponse,
    ExceptionInfo,
    Executor,
    InProcessTransport,
    extract_response_flags,
)
from rpcfuzz.fitness import ExceptionCategory, ExceptionType
from rpcfuzz.genes.factory import GeneFactory
from rpcfuzz.harness.services import build_authdemo, build_ncs_analog, build_scs_analog
from rpcfuzz.schema.model import FunctionSpec, SupportedDataType, TypeSpec
from rpcfuzz.search import RpcAction, TestCase


def _test_for(schema, factory, rng, names, auth=False):
    actions = []
    for name in names:
        fn = next(f for f in schema.all_functions() if f.action_name == name)
        actions.append(RpcAction(fn, factory.build_params(fn, rng), auth))
    return TestCase("t", actions)


def test_response_exclusivity_is_enforced():
    with pytest.raises(ValueError):
        ActionResponse(
            exception_info=ExceptionInfo("X", "", ExceptionType.UNEXPECTED_EXCEPTION),
            response_phenotype=5)


def test_exception_info_category_derived_from_type():
    info = ExceptionInfo("X", "", ExceptionType.TRANSPORT_TIMED_OUT)
    assert info.category is ExceptionCategory.TRANSPORT
    with pytest.raises(ValueError):
        ExceptionInfo("X", "", ExceptionType.APP_INTERNAL_ERROR,
                      category=ExceptionCategory.USER)


def test_declared_exception_surfaces_with_name_and_unclassified_type():
    service = build_ncs_analog()
    executor = Executor(service.schema, InProcessTransport(service))
    rng = random.Random(0)
    factory = GeneFactory(service.schema)
    fn = service.schema.function("NcsService", "expint")
    response = executor.execute_items([], [(fn, [-5, 1.0], False)]).responses[0]
    info = response.exception_info
    assert info.exception_name == "BadInput"
    assert info.type is ExceptionType.CUSTOMIZED_EXCEPTION
    assert info.category is ExceptionCategory.UNCLASSIFIED


def test_wrapped_exception_is_unwrapped_once():
    service = build_scs_analog()
    executor = Executor(service.schema, InProcessTransport(service))
    fn = service.schema.function("ScsService", "zipCheck")
    response = executor.execute_items([], [(fn, ["99999"], False)]).responses[0]
    info = response.exception_info
    assert info.is_wrapped is True
    assert info.exception_name == "RuntimeError"
    assert info.type is ExceptionType.UNEXPECTED_EXCEPTION


def test_unexpected_python_exception_maps_to_er6_material():
    service = build_ncs_analog()
    executor = Executor(service.schema, InProcessTransport(service))
    fn = service.schema.function("NcsService", "remainder")
    response = executor.execute_items([], [(fn, [3, 0], False)]).responses[0]
    assert response.exception_info.exception_name == "ZeroDivisionError"
    assert response.exception_info.site is not None


def test_dynamic_auth_runs_login_first_and_injects_token():
    service = build_authdemo()
    calls = []
    original = service.invoke

    def spy(action, args, auth):
        calls.append((action, dict(auth)))
        return original(action, args, auth)

    service.invoke = spy
    executor = Executor(service.schema, InProcessTransport(service),
                        auth_spec=service.default_auth)
    rng = random.Random(1)
    factory = GeneFactory(service.schema)
    test = _test_for(service.schema, factory, rng,
                     ["getSecret", "revokeAll"], auth=True)
    execution = executor.execute_test(test)

    assert [c[0] for c in calls] == ["login", "getSecret", "revokeAll"]
    assert calls[0][1] == {}
    assert calls[1][1] == {"token": "tok-admin"}
    assert calls[2][1] == {"token": "tok-admin"}
    assert execution.calls_used == 3
    assert execution.login_response is not None


def test_auth_disabled_actions_get_no_fields():
    service = build_authdemo()
    executor = Executor(service.schema, InProcessTransport(service),
                        auth_spec=service.default_auth)
    fn = service.schema.function("AuthDemoService", "getSecret")
    execution = executor.execute_items([], [(fn, ["flag"], False)])
    assert execution.calls_used == 1            # no login needed
    assert execution.responses[0].exception_info.exception_name == "AuthError"


def test_estimate_cost_matches_actual_calls():
    service = build_authdemo()
    executor = Executor(service.schema, InProcessTransport(service),
                        auth_spec=service.default_auth)
    rng = random.Random(3)
    factory = GeneFactory(service.schema)
    with_auth = _test_for(service.schema, factory, rng,
                          ["getSecret", "setFlag"], auth=True)
    without = _test_for(service.schema, factory, rng, ["setFlag"], auth=False)
    for test in (with_auth, without):
        assert executor.estimate_cost(test) == \
            executor.execute_test(test).calls_used


def test_reset_before_test_restores_state_hash():
    service = build_scs_analog(
        init_data={"vault_pins": [{"user": "u", "pin": "1"}]})
    executor = Executor(service.schema, InProcessTransport(service))
    fn = service.schema.function("ScsService", "vaultOpen")
    baseline = service.store.state_hash()
    executor.execute_items([], [(fn, ["u", "1"], False)])
    executor.execute_items([], [(fn, ["u", "2"], False)])
    assert service.store.state_hash() == baseline


def test_env_setup_rows_visible_to_first_action():
    service = build_scs_analog()
    executor = Executor(service.schema, InProcessTransport(service))
    fn = service.schema.function("ScsService", "vaultOpen")
    env = [{"op": "insert", "table": "vault_pins",
            "row": {"user": "env", "pin": "7"}}]
    response = executor.execute_items(env, [(fn, ["env", "7"], False)]).responses[0]
    assert response.response_phenotype == "open"


def test_rendering_is_idempotent_under_auth():
    # auth fields travel beside the args, so re-rendering a test never
    # changes the genes
    service = build_authdemo()
    executor = Executor(service.schema, InProcessTransport(service),
                        auth_spec=service.default_auth)
    rng = random.Random(4)
    factory = GeneFactory(service.schema)
    test = _test_for(service.schema, factory, rng, ["getSecret"], auth=True)
    rendered_before = [g.render() for g in test.actions[0].genes]
    executor.execute_test(test)
    assert [g.render() for g in test.actions[0].genes] == rendered_before


def test_same_test_twice_gives_identical_outcomes():
    service = build_ncs_analog()
    executor = Executor(service.schema, InProcessTransport(service))
    rng = random.Random(5)
    factory = GeneFactory(service.schema)
    test = _test_for(service.schema, factory, rng,
                     ["bessj", "triangle", "gammq"])
    first = executor.execute_test(test)
    second = executor.execute_test(test)
    for a, b in zip(first.responses, second.responses):
        assert a.response_phenotype == b.response_phenotype
        assert (a.exception_info is None) == (b.exception_info is None)


def test_response_flags():
    list_fn = FunctionSpec("S", "xs", response_type=TypeSpec(
        SupportedDataType.LIST, "list",
        example=TypeSpec(SupportedDataType.INT, "i32")))
    map_fn = FunctionSpec("S", "m", response_type=TypeSpec(
        SupportedDataType.MAP, "map",
        key_type=TypeSpec(SupportedDataType.STRING, "string"),
        value_type=TypeSpec(SupportedDataType.INT, "i32")))
    scalar_fn = FunctionSpec("S", "n", response_type=TypeSpec(
        SupportedDataType.INT, "i32"))

    assert extract_response_flags(ActionResponse(response_phenotype=None),
                                  list_fn) == (True, None)
    assert extract_response_flags(ActionResponse(response_phenotype=[1, 2, 3]),
                                  list_fn) == (False, False)
    assert extract_response_flags(ActionResponse(response_phenotype={}),
                                  map_fn) == (False, True)
    assert extract_response_flags(ActionResponse(response_phenotype=7),
                                  scalar_fn) == (False, None)
