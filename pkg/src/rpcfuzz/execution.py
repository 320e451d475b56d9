"""Test execution over a pluggable transport.

Two transports exist: IN_PROCESS drives a simulated service directly and
HTTP_JSON speaks the "rpcfuzz-wire/1" format (POST {interfaceId, actionName,
args, auth} -> {ok, result | error}) to an adapter deployed next to a real
SUT. Either way, every call produces one ActionResponse; failures never
escape as raw exceptions except TransportUnavailable when the SUT is
unreachable before a test's first call.
"""

from __future__ import annotations

import json
import logging
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import TransportUnavailable
from .fitness import ExceptionCategory, ExceptionType
from .schema.jsonio import decode_phenotype, encode_phenotype
from .schema.model import (
    COLLECTION_KINDS,
    AuthMode,
    AuthSpec,
    FunctionSpec,
    RpcSchema,
)

logger = logging.getLogger(__name__)

WIRE_FORMAT_TAG = "rpcfuzz-wire/1"


@dataclass
class ExceptionInfo:
    """Normalized description of a thrown exception."""

    exception_name: str
    exception_message: str
    type: ExceptionType
    category: Optional[ExceptionCategory] = None  # derived from type when omitted
    is_wrapped: bool = False
    payload: Any = None
    site: Optional[str] = None          # innermost frame, for fault dedup

    def __post_init__(self):
        derived = self.type.category
        if self.category is None:
            self.category = derived
        elif self.category is not derived:
            raise ValueError(
                f"category {self.category} does not match type {self.type}")


@dataclass
class ActionResponse:
    """Outcome of one call: an exception or a value, never both."""

    exception_info: Optional[ExceptionInfo] = None
    response_phenotype: Any = None
    latency_ms: float = 0.0
    transport_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.exception_info is not None and self.response_phenotype is not None:
            raise ValueError("response carries both an exception and a value")


# --- fault carriers raised by simulated SUT bodies --------------------------------

class ServiceFault(Exception):
    """A named, possibly declared, application exception."""

    def __init__(self, name: str, message: str = "", payload: Any = None):
        super().__init__(message or name)
        self.name = name
        self.message = message
        self.payload = payload


_FRAMEWORK_FAULT_NAMES = {
    ExceptionCategory.APPLICATION: "ApplicationError",
    ExceptionCategory.USER: "ProtocolError",
    ExceptionCategory.TRANSPORT: "TransportError",
    ExceptionCategory.UNCLASSIFIED: "FrameworkError",
}


class FrameworkFault(Exception):
    """An RPC-framework-level exception with an explicit type."""

    def __init__(self, ex_type: ExceptionType, message: str = ""):
        super().__init__(message or ex_type.value)
        self.ex_type = ex_type
        self.message = message

    @property
    def name(self) -> str:
        return _FRAMEWORK_FAULT_NAMES[self.ex_type.category]


class WrappedFault(Exception):
    """Proxy-style wrapper; the executor surfaces the inner exception."""

    def __init__(self, inner: Exception):
        super().__init__(f"wrapped: {inner!r}")
        self.inner = inner


class RawCallError(Exception):
    """Transport-normalized failure of one call."""

    def __init__(self, name: str, message: str = "",
                 type_name: Optional[str] = None, wrapped: bool = False,
                 payload: Any = None, site: Optional[str] = None):
        super().__init__(f"{name}: {message}")
        self.name = name
        self.message = message
        self.type_name = type_name
        self.wrapped = wrapped
        self.payload = payload
        self.site = site

    def to_wire(self) -> dict:
        out: dict[str, Any] = {"name": self.name, "message": self.message}
        if self.type_name:
            out["type"] = self.type_name
        if self.wrapped:
            out["wrapped"] = True
        if self.payload is not None:
            out["payload"] = encode_phenotype(self.payload)
        if self.site:
            out["site"] = self.site
        return out


def _raise_site(exc: Exception) -> Optional[str]:
    tb = exc.__traceback__
    if tb is None:
        return None
    while tb.tb_next is not None:
        tb = tb.tb_next
    return tb.tb_frame.f_code.co_name


def normalize_exception(exc: Exception, wrapped: bool = False) -> RawCallError:
    """Collapse a raised SUT exception into the transport-neutral form."""
    if isinstance(exc, WrappedFault):
        return normalize_exception(exc.inner, wrapped=True)
    if isinstance(exc, ServiceFault):
        return RawCallError(exc.name, exc.message, wrapped=wrapped,
                            payload=exc.payload, site=_raise_site(exc))
    if isinstance(exc, FrameworkFault):
        return RawCallError(exc.name, exc.message,
                            type_name=exc.ex_type.value, wrapped=wrapped,
                            site=_raise_site(exc))
    return RawCallError(type(exc).__name__, str(exc), wrapped=wrapped,
                        site=_raise_site(exc))


# --- transports --------------------------------------------------------------------

class Transport:
    """Contract: one callable endpoint plus optional state reset."""

    supports_reset = False

    def call(self, interface_id: str, action_name: str, args: list,
             auth: dict) -> Any:
        """Return the call's value or raise RawCallError / TransportUnavailable."""
        raise NotImplementedError

    def reset(self) -> bool:
        return False

    def apply_env(self, commands: list) -> bool:
        """Apply test environment setup (store seeding); False if unsupported."""
        return False


class InProcessTransport(Transport):
    supports_reset = True

    def __init__(self, service):
        self.service = service

    def call(self, interface_id, action_name, args, auth):
        try:
            return self.service.invoke(action_name, args, auth)
        except Exception as exc:              # noqa: BLE001 - SUT faults become data
            raise normalize_exception(exc) from exc

    def reset(self) -> bool:
        self.service.reset_state()
        return True

    def apply_env(self, commands) -> bool:
        for command in commands:
            if command.get("op") == "insert":
                self.service.store.insert(command["table"], command["row"])
        return True


class HttpJsonTransport(Transport):
    """Client side of the rpcfuzz-wire/1 adapter protocol."""

    supports_reset = True

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self._warned_reset = False

    def call(self, interface_id, action_name, args, auth):
        body = json.dumps({
            "format": WIRE_FORMAT_TAG,
            "interfaceId": interface_id,
            "actionName": action_name,
            "args": [encode_phenotype(a) for a in args],
            "auth": auth,
        }).encode()
        request = urllib.request.Request(
            self.endpoint + "/call", data=body,
            headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode())
        except TimeoutError as exc:
            raise RawCallError("Timeout", str(exc),
                               type_name=ExceptionType.TRANSPORT_TIMED_OUT.value) from exc
        except urllib.error.HTTPError as exc:
            raise RawCallError("HttpError", f"status {exc.code}",
                               type_name=ExceptionType.TRANSPORT_CORRUPTED_DATA.value) from exc
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, TimeoutError):
                raise RawCallError("Timeout", str(exc.reason),
                                   type_name=ExceptionType.TRANSPORT_TIMED_OUT.value) from exc
            raise TransportUnavailable(str(exc.reason)) from exc
        if payload.get("ok"):
            return decode_phenotype(payload.get("result"))
        error = payload.get("error") or {}
        raise RawCallError(
            name=error.get("name", "UnknownError"),
            message=error.get("message", ""),
            type_name=error.get("type"),
            wrapped=bool(error.get("wrapped", False)),
            payload=decode_phenotype(error.get("payload")),
            site=error.get("site"),
        )

    def reset(self) -> bool:
        request = urllib.request.Request(self.endpoint + "/reset", data=b"",
                                         method="POST")
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as resp:
                return resp.status == 204
        except (urllib.error.URLError, TimeoutError):
            if not self._warned_reset:
                logger.warning("remote reset hook unavailable; "
                               "tests may be order-dependent")
                self._warned_reset = True
            return False


# --- executor ----------------------------------------------------------------------

@dataclass
class TestExecution:
    responses: list[ActionResponse]
    calls_used: int
    login_response: Optional[ActionResponse] = None


class Executor:
    """Runs tests action by action: reset, env setup, auth, calls."""

    def __init__(self, schema: RpcSchema, transport: Transport,
                 auth_spec: Optional[AuthSpec] = None):
        self.schema = schema
        self.transport = transport
        self.auth_spec = auth_spec if auth_spec is not None else schema.auth
        self._warned_reset = False
        self._warned_env = False

    # --- cost accounting (must agree exactly with execute_test) ---

    def _needs_login(self, items: list[tuple[FunctionSpec, Any, bool]]) -> bool:
        auth = self.auth_spec
        if auth is None or auth.mode is not AuthMode.DYNAMIC:
            return False
        return any(enabled and auth.applies_to(fn.action_name)
                   for fn, _, enabled in items)

    def estimate_cost_items(self, items) -> int:
        return len(items) + (1 if self._needs_login(items) else 0)

    def estimate_cost(self, test) -> int:
        return self.estimate_cost_items(
            [(a.fn, None, a.auth_enabled) for a in test.actions])

    # --- execution ---

    def execute_test(self, test) -> TestExecution:
        items = [(action.fn, [g.render() for g in action.genes], action.auth_enabled)
                 for action in test.actions]
        return self.execute_items(test.env_setup, items)

    def execute_items(self, env_setup: list,
                      items: list[tuple[FunctionSpec, list, bool]]) -> TestExecution:
        if self.transport.supports_reset:
            self.transport.reset()
        elif not self._warned_reset:
            logger.warning("transport has no reset; SUT state carries across tests")
            self._warned_reset = True
        if env_setup and not self.transport.apply_env(env_setup):
            if not self._warned_env:
                logger.warning("transport cannot apply env setup; skipping")
                self._warned_env = True

        calls = 0
        first_call = True
        token = None
        login_response = None
        if self._needs_login(items):
            login_response, value = self._login(first_call)
            first_call = False
            calls += 1
            if value is not None:
                token = _walk_path(value, self.auth_spec.token_extraction_path)

        responses = []
        for fn, args, auth_enabled in items:
            auth_fields = self._auth_fields(fn, auth_enabled, token)
            responses.append(
                self._one_call(fn, args, auth_fields, first_call))
            first_call = False
            calls += 1
        return TestExecution(responses, calls, login_response)

    def _login(self, first_call: bool) -> tuple[ActionResponse, Any]:
        auth = self.auth_spec
        iface_id, _, action = (auth.login_function or "").partition(".")
        fn = self.schema.function(iface_id, action)
        if fn is None:
            return ActionResponse(exception_info=ExceptionInfo(
                "LoginUnresolved", auth.login_function or "",
                ExceptionType.UNEXPECTED_EXCEPTION)), None
        response = self._one_call(fn, list(auth.login_args), {}, first_call)
        return response, response.response_phenotype

    def _auth_fields(self, fn: FunctionSpec, auth_enabled: bool,
                     token: Any) -> dict:
        auth = self.auth_spec
        if auth is None or not auth_enabled or not auth.applies_to(fn.action_name):
            return {}
        if auth.mode is AuthMode.STATIC:
            return dict(auth.static_fields)
        if token is not None and auth.token_injection_path:
            return {auth.token_injection_path: token}
        return {}

    def _one_call(self, fn: FunctionSpec, args: list, auth_fields: dict,
                  first_call: bool) -> ActionResponse:
        started = time.perf_counter()
        try:
            value = self.transport.call(fn.interface_id, fn.action_name,
                                        args, auth_fields)
        except RawCallError as raw:
            latency = (time.perf_counter() - started) * 1000.0
            return ActionResponse(
                exception_info=self._exception_info(raw, fn), latency_ms=latency)
        except TransportUnavailable:
            if first_call:
                raise
            latency = (time.perf_counter() - started) * 1000.0
            return ActionResponse(exception_info=ExceptionInfo(
                "ConnectionLost", "SUT became unreachable mid-test",
                ExceptionType.TRANSPORT_NOT_OPEN), latency_ms=latency)
        latency = (time.perf_counter() - started) * 1000.0
        return ActionResponse(response_phenotype=value, latency_ms=latency)

    def _exception_info(self, raw: RawCallError, fn: FunctionSpec) -> ExceptionInfo:
        ex_type = None
        if raw.type_name:
            try:
                ex_type = ExceptionType(raw.type_name)
            except ValueError:
                ex_type = None
        if ex_type is None:
            if raw.name in fn.declared_exceptions:
                ex_type = ExceptionType.CUSTOMIZED_EXCEPTION
            else:
                ex_type = ExceptionType.UNEXPECTED_EXCEPTION
        return ExceptionInfo(
            exception_name=raw.name,
            exception_message=raw.message,
            type=ex_type,
            is_wrapped=raw.wrapped,
            payload=raw.payload,
            site=raw.site,
        )


def extract_response_flags(response: ActionResponse,
                           fn: FunctionSpec) -> tuple[bool, Optional[bool]]:
    """(is_null, is_empty_collection); the second is defined only for
    collection-typed responses that actually arrived."""
    is_null = response.response_phenotype is None
    is_collection = (fn.response_type is not None
                     and fn.response_type.kind in COLLECTION_KINDS)
    if not is_collection or is_null:
        return is_null, None
    return is_null, len(response.response_phenotype) == 0


def _walk_path(value: Any, dotted: Optional[str]) -> Any:
    if dotted is None or dotted == "":
        return value
    node = value
    for part in dotted.split("."):
        if isinstance(node, dict) and part in node:
            node = node[part]
        else:
            return None
    return node
