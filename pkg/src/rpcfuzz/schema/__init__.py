"""Schema parsing, validation and serialization."""

from .analysis import Diagnostic, Severity, detect_cycles, validate_schema
from .jsonio import (
    auth_spec_from_json,
    auth_spec_to_json,
    decode_phenotype,
    encode_phenotype,
    load_json_schema,
    schema_hash,
    schema_to_json,
    serialize_schema,
)
from .model import (
    COLLECTION_KINDS,
    ELEMENT_KINDS,
    NUMERIC_KINDS,
    PRIMITIVE_KINDS,
    AuthMode,
    AuthSpec,
    FunctionSpec,
    InterfaceSchema,
    ParamSpec,
    RpcSchema,
    SupportedDataType,
    TypeSpec,
)
from .thrift import parse_thrift_idl

__all__ = [
    "AuthMode", "AuthSpec", "COLLECTION_KINDS", "Diagnostic", "ELEMENT_KINDS",
    "FunctionSpec", "InterfaceSchema", "NUMERIC_KINDS", "PRIMITIVE_KINDS",
    "ParamSpec", "RpcSchema", "Severity", "SupportedDataType", "TypeSpec",
    "auth_spec_from_json", "auth_spec_to_json", "decode_phenotype",
    "detect_cycles", "encode_phenotype", "load_json_schema", "parse_thrift_idl",
    "schema_hash", "schema_to_json", "serialize_schema", "validate_schema",
]
