"""In-memory model of an RPC API surface: interfaces, functions, parameters, types.

The model is deliberately framework-neutral: it can be populated from the
IDL parser or from the native JSON format, and everything downstream
(genes, search, execution, suite output) consumes only these classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, Optional


class SupportedDataType(Enum):
    """Closed set of datatypes a parameter or return value may have."""

    ARRAY = "ARRAY"
    BYTEBUFFER = "BYTEBUFFER"
    DATE = "DATE"
    ENUM = "ENUM"
    LIST = "LIST"
    MAP = "MAP"
    SET = "SET"
    STRING = "STRING"
    INT = "INT"
    BOOLEAN = "BOOLEAN"
    DOUBLE = "DOUBLE"
    FLOAT = "FLOAT"
    LONG = "LONG"
    CHAR = "CHAR"
    BYTE = "BYTE"
    SHORT = "SHORT"
    BIGINTEGER = "BIGINTEGER"
    BIGDECIMAL = "BIGDECIMAL"
    CUSTOM_OBJECT = "CUSTOM_OBJECT"


# Value kinds (never nullable) vs reference kinds (nullable unless required).
PRIMITIVE_KINDS = frozenset({
    SupportedDataType.INT,
    SupportedDataType.BOOLEAN,
    SupportedDataType.DOUBLE,
    SupportedDataType.FLOAT,
    SupportedDataType.LONG,
    SupportedDataType.CHAR,
    SupportedDataType.BYTE,
    SupportedDataType.SHORT,
})

ELEMENT_KINDS = frozenset({
    SupportedDataType.ARRAY,
    SupportedDataType.LIST,
    SupportedDataType.SET,
})

# Kinds whose responses participate in empty/non-empty analysis.
COLLECTION_KINDS = ELEMENT_KINDS | {SupportedDataType.MAP}

NUMERIC_KINDS = frozenset({
    SupportedDataType.INT,
    SupportedDataType.DOUBLE,
    SupportedDataType.FLOAT,
    SupportedDataType.LONG,
    SupportedDataType.BYTE,
    SupportedDataType.SHORT,
    SupportedDataType.BIGINTEGER,
    SupportedDataType.BIGDECIMAL,
})

NAMED_KINDS = frozenset({SupportedDataType.CUSTOM_OBJECT, SupportedDataType.ENUM})


@dataclass
class TypeSpec:
    """Datatype descriptor; composite kinds reference their component types.

    For named types registered in ``RpcSchema.type_defs``, definitions also
    carry structure: object members in ``fields`` and enum constants in
    ``candidates``.
    """

    kind: SupportedDataType
    type_name: str
    example: Optional[TypeSpec] = None      # element type of ARRAY/LIST/SET
    key_type: Optional[TypeSpec] = None     # MAP only
    value_type: Optional[TypeSpec] = None   # MAP only
    fields: Optional[list["ParamSpec"]] = None
    candidates: Optional[tuple[str, ...]] = None

    def is_collection(self) -> bool:
        return self.kind in COLLECTION_KINDS


@dataclass
class ParamSpec:
    """One input parameter (or object member) with its value constraints."""

    name: str
    type: TypeSpec
    is_nullable: bool = False
    is_mutable: bool = True
    default_value: Any = None
    min_size: Optional[int] = None
    max_size: Optional[int] = None
    min_value: Any = None
    max_value: Any = None
    min_inclusive: bool = True
    max_inclusive: bool = True
    precision: Optional[int] = None
    scale: Optional[int] = None
    pattern: Optional[str] = None
    inner_content: list["ParamSpec"] = field(default_factory=list)


class AuthMode(Enum):
    STATIC = "STATIC"
    DYNAMIC = "DYNAMIC"


@dataclass
class AuthSpec:
    """How calls get authenticated: pre-fixed fields or a login-then-token flow.

    ``scope`` of None applies the setup to every function; otherwise it is a
    filter of action names. ``token_injection_path`` names the auth field the
    extracted token is written into on each authenticated call.
    """

    mode: AuthMode
    static_fields: dict[str, Any] = field(default_factory=dict)
    login_function: Optional[str] = None          # "InterfaceId.actionName"
    login_args: list[Any] = field(default_factory=list)
    token_extraction_path: Optional[str] = None   # dotted path into the login response
    token_injection_path: Optional[str] = None
    scope: Optional[list[str]] = None

    def applies_to(self, action_name: str) -> bool:
        return self.scope is None or action_name in self.scope


@dataclass
class FunctionSpec:
    """Everything needed to invoke one RPC function and interpret its result."""

    interface_id: str
    action_name: str
    request_params: list[ParamSpec] = field(default_factory=list)
    response_type: Optional[TypeSpec] = None
    declared_exceptions: list[str] = field(default_factory=list)
    is_authorized: bool = False
    auth_setup: Optional[AuthSpec] = None

    @property
    def qualified_name(self) -> str:
        return f"{self.interface_id}.{self.action_name}"


@dataclass
class InterfaceSchema:
    """One callable interface: its functions, auth helpers and named types."""

    interface_id: str
    functions: list[FunctionSpec] = field(default_factory=list)
    auth_functions: list[FunctionSpec] = field(default_factory=list)
    types: list[TypeSpec] = field(default_factory=list)


@dataclass
class RpcSchema:
    """A parsed and resolvable API schema."""

    interfaces: list[InterfaceSchema] = field(default_factory=list)
    type_defs: dict[str, TypeSpec] = field(default_factory=dict)
    auth: Optional[AuthSpec] = None

    def all_functions(self) -> Iterator[FunctionSpec]:
        for iface in self.interfaces:
            yield from iface.functions

    def function(self, interface_id: str, action_name: str) -> Optional[FunctionSpec]:
        for iface in self.interfaces:
            if iface.interface_id != interface_id:
                continue
            for fn in iface.functions:
                if fn.action_name == action_name:
                    return fn
        return None

    def resolve(self, type_spec: TypeSpec) -> TypeSpec:
        """Swap a bare named-type reference for its registered definition."""
        if type_spec.kind in NAMED_KINDS and type_spec.fields is None \
                and type_spec.candidates is None:
            return self.type_defs.get(type_spec.type_name, type_spec)
        return type_spec
