"""Structural validation and reference-cycle analysis for schemas."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import (
    COLLECTION_KINDS,
    ELEMENT_KINDS,
    NAMED_KINDS,
    PRIMITIVE_KINDS,
    AuthMode,
    ParamSpec,
    RpcSchema,
    SupportedDataType,
    TypeSpec,
)


class Severity(Enum):
    ERROR = "ERROR"
    WARNING = "WARNING"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.value} at {self.path}: {self.message}"


MAP_KEY_KINDS = frozenset({
    SupportedDataType.INT,
    SupportedDataType.SHORT,
    SupportedDataType.BYTE,
    SupportedDataType.LONG,
    SupportedDataType.STRING,
    SupportedDataType.CHAR,
    SupportedDataType.ENUM,
})


def validate_schema(schema: RpcSchema) -> list[Diagnostic]:
    """Check every structural invariant; an empty result means the schema is usable."""
    out: list[Diagnostic] = []

    seen_ids: set[str] = set()
    for iface in schema.interfaces:
        ipath = f"interfaces[{iface.interface_id}]"
        if iface.interface_id in seen_ids:
            out.append(Diagnostic(Severity.ERROR, ipath, "duplicate interface id"))
        seen_ids.add(iface.interface_id)

        if not iface.functions:
            out.append(Diagnostic(Severity.ERROR, ipath,
                                  "interface declares no functions"))
        seen_fns: set[str] = set()
        for fn in iface.functions:
            fpath = f"{ipath}.functions[{fn.action_name}]"
            if fn.action_name in seen_fns:
                out.append(Diagnostic(Severity.ERROR, fpath,
                                      "duplicate function name in interface"))
            seen_fns.add(fn.action_name)

            if len(set(fn.declared_exceptions)) != len(fn.declared_exceptions):
                out.append(Diagnostic(Severity.ERROR, fpath,
                                      "duplicate declared exception"))
            for exc in fn.declared_exceptions:
                if exc not in schema.type_defs:
                    out.append(Diagnostic(Severity.WARNING, fpath,
                                          f"declared exception '{exc}' has no type definition"))
            for i, param in enumerate(fn.request_params):
                _validate_param(schema, param, f"{fpath}.requestParams[{i}]", out)
            if fn.response_type is not None:
                _validate_type(schema, fn.response_type, f"{fpath}.responseType", out)

    for name, tdef in schema.type_defs.items():
        tpath = f"typeDefs[{name}]"
        _validate_type(schema, tdef, tpath, out, is_definition=True)
        for fld in tdef.fields or []:
            _validate_param(schema, fld, f"{tpath}.fields[{fld.name}]", out)

    if schema.auth is not None:
        _validate_auth(schema, out)
    return out


def _validate_auth(schema: RpcSchema, out: list[Diagnostic]) -> None:
    auth = schema.auth
    if auth.mode is AuthMode.STATIC and not auth.static_fields:
        out.append(Diagnostic(Severity.ERROR, "auth",
                              "static auth requires at least one field"))
    if auth.mode is AuthMode.DYNAMIC:
        ref = auth.login_function or ""
        iface, _, action = ref.partition(".")
        if not action or schema.function(iface, action) is None:
            out.append(Diagnostic(Severity.ERROR, "auth",
                                  f"login function '{ref}' does not resolve"))


def _validate_param(schema: RpcSchema, param: ParamSpec, path: str,
                    out: list[Diagnostic]) -> None:
    if param.type.kind in PRIMITIVE_KINDS and param.is_nullable:
        out.append(Diagnostic(Severity.ERROR, path,
                              f"primitive {param.type.kind.value} cannot be nullable"))
    if param.min_size is not None and param.min_size < 0:
        out.append(Diagnostic(Severity.ERROR, path, "minSize is negative"))
    if param.min_size is not None and param.max_size is not None \
            and param.min_size > param.max_size:
        out.append(Diagnostic(Severity.ERROR, path,
                              f"empty size interval [{param.min_size}, {param.max_size}]"))
    if param.min_value is not None and param.max_value is not None:
        lo, hi = param.min_value, param.max_value
        if lo > hi or (lo == hi and not (param.min_inclusive and param.max_inclusive)):
            out.append(Diagnostic(Severity.ERROR, path,
                                  "empty value interval under inclusivity flags"))
    if param.precision is not None and param.scale is not None \
            and param.precision < param.scale:
        out.append(Diagnostic(Severity.ERROR, path, "precision < scale"))
    if param.min_value is not None and param.type.kind is SupportedDataType.STRING:
        out.append(Diagnostic(Severity.WARNING, path,
                              "numeric bounds on STRING are not used for generation"))
    _validate_type(schema, param.type, f"{path}.type", out)
    for i, inner in enumerate(param.inner_content):
        _validate_param(schema, inner, f"{path}.innerContent[{i}]", out)


def _validate_type(schema: RpcSchema, ts: TypeSpec, path: str,
                   out: list[Diagnostic], is_definition: bool = False) -> None:
    if ts.kind is SupportedDataType.MAP:
        if ts.key_type is None or ts.value_type is None:
            out.append(Diagnostic(Severity.ERROR, path,
                                  "map type requires key and value types"))
        else:
            if ts.key_type.kind not in MAP_KEY_KINDS:
                out.append(Diagnostic(Severity.ERROR, path,
                                      f"unsupported map key kind {ts.key_type.kind.value}"))
            _validate_type(schema, ts.key_type, f"{path}.keyType", out)
            _validate_type(schema, ts.value_type, f"{path}.valueType", out)
    elif ts.kind in ELEMENT_KINDS:
        if ts.example is None:
            out.append(Diagnostic(Severity.ERROR, path,
                                  f"{ts.kind.value} requires an element type"))
        else:
            _validate_type(schema, ts.example, f"{path}.example", out)
    elif ts.kind in NAMED_KINDS and not is_definition:
        resolved = schema.resolve(ts)
        defined = resolved is not ts or ts.fields is not None or ts.candidates is not None
        if not defined:
            out.append(Diagnostic(Severity.ERROR, path,
                                  f"unresolved type reference '{ts.type_name}'"))
    if ts.kind is SupportedDataType.ENUM and is_definition and not ts.candidates:
        out.append(Diagnostic(Severity.ERROR, path, "enum defines no constants"))


def detect_cycles(schema: RpcSchema) -> set[tuple[str, str]]:
    """Find every (typeName, fieldName) whose referenced type sits on a reference cycle.

    Genes for these members are built as cycle-breaking placeholders instead of
    recursing forever.
    """
    edges: dict[str, list[tuple[str, str]]] = {}
    for name, tdef in schema.type_defs.items():
        if tdef.kind is not SupportedDataType.CUSTOM_OBJECT:
            continue
        for fld in tdef.fields or []:
            for ref in _named_refs(fld.type):
                if ref in schema.type_defs:
                    edges.setdefault(name, []).append((fld.name, ref))

    cyclic = _nodes_on_cycles({k: [t for _, t in v] for k, v in edges.items()})
    result: set[tuple[str, str]] = set()
    for name, outgoing in edges.items():
        for field_name, ref in outgoing:
            if ref in cyclic:
                result.add((name, field_name))
    return result


def _named_refs(ts: TypeSpec) -> list[str]:
    if ts.kind is SupportedDataType.CUSTOM_OBJECT:
        return [ts.type_name]
    refs: list[str] = []
    for child in (ts.example, ts.key_type, ts.value_type):
        if child is not None:
            refs.extend(_named_refs(child))
    return refs


def _nodes_on_cycles(graph: dict[str, list[str]]) -> set[str]:
    # A node lies on a cycle iff it can reach itself through at least one edge.
    on_cycle: set[str] = set()
    for start in graph:
        stack = list(graph.get(start, ()))
        seen: set[str] = set()
        while stack:
            node = stack.pop()
            if node == start:
                on_cycle.add(start)
                break
            if node in seen:
                continue
            seen.add(node)
            stack.extend(graph.get(node, ()))
    return on_cycle
