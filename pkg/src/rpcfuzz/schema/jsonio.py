"""Native JSON schema format ("rpcfuzz-schema/1") plus shared JSON helpers.

The document shape mirrors the in-memory model one-to-one::

    {
      "format": "rpcfuzz-schema/1",
      "interfaces": [
        {"interfaceId": "...",
         "functions": [{"actionName": ..., "requestParams": [...],
                        "responseType": ..., "declaredExceptions": [...],
                        "isAuthorized": false}],
         "authFunctions": ["login"]}
      ],
      "typeDefs": {"Dto": {...}},
      "auth": {...} | absent
    }

Parameter and type objects use the documented property names
(isNullable, isMutable, minSize, maxSize, minValue, maxValue, minInclusive,
maxInclusive, precision, scale, pattern, innerContent, example, keyType,
valueType, kind, typeName, fields, candidates). Properties with default
values may be omitted.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any, Optional

from ..errors import FormatError, SchemaValidationError
from .analysis import Severity, validate_schema
from .model import (
    AuthMode,
    AuthSpec,
    FunctionSpec,
    InterfaceSchema,
    ParamSpec,
    RpcSchema,
    SupportedDataType,
    TypeSpec,
)

FORMAT_TAG = "rpcfuzz-schema/1"


# --- serialization ---------------------------------------------------------------

def serialize_schema(schema: RpcSchema) -> dict:
    doc: dict[str, Any] = {
        "format": FORMAT_TAG,
        "interfaces": [_iface_out(i) for i in schema.interfaces],
        "typeDefs": {name: _type_out(ts) for name, ts in sorted(schema.type_defs.items())},
    }
    if schema.auth is not None:
        doc["auth"] = auth_spec_to_json(schema.auth)
    return doc


def schema_to_json(schema: RpcSchema) -> str:
    return json.dumps(serialize_schema(schema), indent=2, sort_keys=True)


def schema_hash(schema: RpcSchema) -> str:
    canonical = json.dumps(serialize_schema(schema), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _iface_out(iface: InterfaceSchema) -> dict:
    return {
        "interfaceId": iface.interface_id,
        "functions": [_function_out(fn) for fn in iface.functions],
        "authFunctions": [fn.action_name for fn in iface.auth_functions],
        "types": [ts.type_name for ts in iface.types],
    }


def _function_out(fn: FunctionSpec) -> dict:
    out: dict[str, Any] = {
        "actionName": fn.action_name,
        "requestParams": [_param_out(p) for p in fn.request_params],
        "declaredExceptions": list(fn.declared_exceptions),
        "isAuthorized": fn.is_authorized,
    }
    if fn.response_type is not None:
        out["responseType"] = _type_out(fn.response_type)
    return out


def _param_out(param: ParamSpec) -> dict:
    out: dict[str, Any] = {"name": param.name, "type": _type_out(param.type)}
    if param.is_nullable:
        out["isNullable"] = True
    if not param.is_mutable:
        out["isMutable"] = False
    if param.default_value is not None:
        out["defaultValue"] = param.default_value
    for attr, key in (("min_size", "minSize"), ("max_size", "maxSize"),
                      ("min_value", "minValue"), ("max_value", "maxValue"),
                      ("precision", "precision"), ("scale", "scale"),
                      ("pattern", "pattern")):
        value = getattr(param, attr)
        if value is not None:
            out[key] = value
    if not param.min_inclusive:
        out["minInclusive"] = False
    if not param.max_inclusive:
        out["maxInclusive"] = False
    if param.inner_content:
        out["innerContent"] = [_param_out(p) for p in param.inner_content]
    return out


def _type_out(ts: TypeSpec) -> dict:
    out: dict[str, Any] = {"kind": ts.kind.value, "typeName": ts.type_name}
    if ts.example is not None:
        out["example"] = _type_out(ts.example)
    if ts.key_type is not None:
        out["keyType"] = _type_out(ts.key_type)
    if ts.value_type is not None:
        out["valueType"] = _type_out(ts.value_type)
    if ts.fields is not None:
        out["fields"] = [_param_out(p) for p in ts.fields]
    if ts.candidates is not None:
        out["candidates"] = list(ts.candidates)
    return out


def auth_spec_to_json(auth: AuthSpec) -> dict:
    out: dict[str, Any] = {"mode": auth.mode.value}
    if auth.static_fields:
        out["staticFields"] = dict(auth.static_fields)
    if auth.login_function is not None:
        out["loginFunction"] = auth.login_function
        out["loginArgs"] = list(auth.login_args)
        out["tokenExtractionPath"] = auth.token_extraction_path
        out["tokenInjectionPath"] = auth.token_injection_path
    if auth.scope is not None:
        out["scope"] = list(auth.scope)
    return out


# --- loading ---------------------------------------------------------------------

def load_json_schema(source: str) -> RpcSchema:
    """Parse and validate a schema document; raises FormatError or
    SchemaValidationError (with a path to the offending element)."""
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("top-level value must be an object")
    if doc.get("format") != FORMAT_TAG:
        raise FormatError(f"missing or unknown format tag; expected {FORMAT_TAG!r}")

    schema = RpcSchema()
    try:
        for name, tdoc in _expect_mapping(doc.get("typeDefs", {}), "typeDefs").items():
            schema.type_defs[name] = _type_in(tdoc, f"typeDefs[{name}]")
        for idoc in _expect_list(doc.get("interfaces", []), "interfaces"):
            schema.interfaces.append(_iface_in(idoc, schema))
        if doc.get("auth") is not None:
            schema.auth = auth_spec_from_json(doc["auth"])
            _attach_auth(schema)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed schema document: {exc}") from exc

    errors = [d for d in validate_schema(schema) if d.severity is Severity.ERROR]
    if errors:
        raise SchemaValidationError(errors)
    return schema


def auth_spec_from_json(doc: dict) -> AuthSpec:
    mode = AuthMode(doc["mode"])
    return AuthSpec(
        mode=mode,
        static_fields=dict(doc.get("staticFields", {})),
        login_function=doc.get("loginFunction"),
        login_args=list(doc.get("loginArgs", [])),
        token_extraction_path=doc.get("tokenExtractionPath"),
        token_injection_path=doc.get("tokenInjectionPath"),
        scope=list(doc["scope"]) if doc.get("scope") is not None else None,
    )


def _attach_auth(schema: RpcSchema) -> None:
    auth = schema.auth
    for iface in schema.interfaces:
        for fn in iface.functions:
            if auth.applies_to(fn.action_name):
                fn.auth_setup = auth
                fn.is_authorized = True
    if auth.mode is AuthMode.DYNAMIC and auth.login_function:
        iface_id, _, action = auth.login_function.partition(".")
        login = schema.function(iface_id, action)
        if login is not None:
            login.is_authorized = False
            login.auth_setup = None
            for iface in schema.interfaces:
                if iface.interface_id == iface_id and login not in iface.auth_functions:
                    iface.auth_functions.append(login)


def _expect_list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise FormatError(f"{path} must be an array")
    return value


def _expect_mapping(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise FormatError(f"{path} must be an object")
    return value


def _iface_in(doc: dict, schema: RpcSchema) -> InterfaceSchema:
    iface = InterfaceSchema(interface_id=doc["interfaceId"])
    for fdoc in _expect_list(doc.get("functions", []), "functions"):
        iface.functions.append(_function_in(fdoc, iface.interface_id))
    by_name = {fn.action_name: fn for fn in iface.functions}
    for name in doc.get("authFunctions", []):
        if name in by_name:
            iface.auth_functions.append(by_name[name])
    iface.types = [schema.type_defs[name] for name in sorted(doc.get("types", []))
                   if name in schema.type_defs]
    return iface


def _function_in(doc: dict, interface_id: str) -> FunctionSpec:
    return FunctionSpec(
        interface_id=interface_id,
        action_name=doc["actionName"],
        request_params=[_param_in(p) for p in doc.get("requestParams", [])],
        response_type=_type_in(doc["responseType"], "responseType")
        if doc.get("responseType") is not None else None,
        declared_exceptions=list(doc.get("declaredExceptions", [])),
        is_authorized=bool(doc.get("isAuthorized", False)),
    )


def _param_in(doc: dict) -> ParamSpec:
    return ParamSpec(
        name=doc["name"],
        type=_type_in(doc["type"], doc["name"]),
        is_nullable=bool(doc.get("isNullable", False)),
        is_mutable=bool(doc.get("isMutable", True)),
        default_value=doc.get("defaultValue"),
        min_size=doc.get("minSize"),
        max_size=doc.get("maxSize"),
        min_value=doc.get("minValue"),
        max_value=doc.get("maxValue"),
        min_inclusive=bool(doc.get("minInclusive", True)),
        max_inclusive=bool(doc.get("maxInclusive", True)),
        precision=doc.get("precision"),
        scale=doc.get("scale"),
        pattern=doc.get("pattern"),
        inner_content=[_param_in(p) for p in doc.get("innerContent", [])],
    )


def _type_in(doc: dict, path: str) -> TypeSpec:
    try:
        kind = SupportedDataType(doc["kind"])
    except ValueError as exc:
        raise SchemaValidationError([f"unknown kind {doc.get('kind')!r} at {path}"]) from exc
    return TypeSpec(
        kind=kind,
        type_name=doc.get("typeName", kind.value.lower()),
        example=_type_in(doc["example"], f"{path}.example")
        if doc.get("example") is not None else None,
        key_type=_type_in(doc["keyType"], f"{path}.keyType")
        if doc.get("keyType") is not None else None,
        value_type=_type_in(doc["valueType"], f"{path}.valueType")
        if doc.get("valueType") is not None else None,
        fields=[_param_in(p) for p in doc["fields"]]
        if doc.get("fields") is not None else None,
        candidates=tuple(doc["candidates"])
        if doc.get("candidates") is not None else None,
    )


# --- phenotype persistence codec ---------------------------------------------------

def encode_phenotype(value: Any) -> Any:
    """JSON-safe encoding of a rendered value tree.

    Only map phenotypes need care: their keys may be non-strings, so they are
    wrapped as {"__map__": [[k, v], ...]}. Object phenotypes pass through as
    plain JSON objects.
    """
    if isinstance(value, dict):
        if all(isinstance(k, str) for k in value) and "__map__" not in value:
            return {k: encode_phenotype(v) for k, v in value.items()}
        return {"__map__": [[encode_phenotype(k), encode_phenotype(v)]
                            for k, v in value.items()]}
    if isinstance(value, (list, tuple)):
        return [encode_phenotype(v) for v in value]
    return value


def decode_phenotype(value: Any) -> Any:
    if isinstance(value, dict):
        if set(value.keys()) == {"__map__"}:
            return {decode_phenotype(k): decode_phenotype(v)
                    for k, v in value["__map__"]}
        return {k: decode_phenotype(v) for k, v in value.items()}
    if isinstance(value, list):
        return [decode_phenotype(v) for v in value]
    return value
