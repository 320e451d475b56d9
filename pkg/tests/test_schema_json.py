"""Native JSON schema format: loading, validation, lossless round-trips."""

import json

import pytest

from conftest import idl_corpus
from rpcfuzz.errors import FormatError, SchemaValidationError
from rpcfuzz.schema.jsonio import (
    decode_phenotype,
    encode_phenotype,
    load_json_schema,
    schema_hash,
    schema_to_json,
    serialize_schema,
)
from rpcfuzz.schema.model import SupportedDataType
from rpcfuzz.schema.thrift import parse_thrift_idl

MINIMAL = {
    "format": "rpcfuzz-schema/1",
    "interfaces": [{
        "interfaceId": "Days",
        "functions": [{
            "actionName": "pick",
            "requestParams": [{
                "name": "day",
                "type": {"kind": "INT", "typeName": "i32"},
                "minValue": 1, "maxValue": 31,
                "minInclusive": True, "maxInclusive": True,
            }],
            "responseType": {"kind": "STRING", "typeName": "string"},
            "declaredExceptions": [],
            "isAuthorized": False,
        }],
    }],
    "typeDefs": {},
}


def test_bounded_int_param_round_trips_the_interval():
    schema = load_json_schema(json.dumps(MINIMAL))
    param = schema.interfaces[0].functions[0].request_params[0]
    assert (param.min_value, param.max_value) == (1, 31)
    assert param.min_inclusive and param.max_inclusive


def test_empty_size_interval_is_rejected():
    doc = json.loads(json.dumps(MINIMAL))
    doc["interfaces"][0]["functions"][0]["requestParams"][0] = {
        "name": "xs",
        "type": {"kind": "LIST", "typeName": "list<i32>",
                 "example": {"kind": "INT", "typeName": "i32"}},
        "minSize": 5, "maxSize": 2,
    }
    with pytest.raises(SchemaValidationError):
        load_json_schema(json.dumps(doc))


def test_malformed_document_is_a_format_error():
    with pytest.raises(FormatError):
        load_json_schema("{not json")
    with pytest.raises(FormatError):
        load_json_schema(json.dumps({"format": "something-else/9"}))
    with pytest.raises(FormatError):
        load_json_schema(json.dumps({"format": "rpcfuzz-schema/1",
                                     "interfaces": "nope"}))


def test_unknown_kind_is_a_validation_error():
    doc = json.loads(json.dumps(MINIMAL))
    doc["interfaces"][0]["functions"][0]["requestParams"][0]["type"] = \
        {"kind": "TUPLE", "typeName": "tuple"}
    with pytest.raises(SchemaValidationError):
        load_json_schema(json.dumps(doc))


@pytest.mark.parametrize("path", idl_corpus(), ids=lambda p: p.stem)
def test_round_trip_over_corpus(path):
    original = parse_thrift_idl(path.read_text())
    reloaded = load_json_schema(schema_to_json(original))
    assert reloaded == original
    assert schema_hash(reloaded) == schema_hash(original)


def test_corpus_is_large_enough():
    assert len(idl_corpus()) >= 10


def test_auth_spec_round_trips():
    doc = json.loads(json.dumps(MINIMAL))
    doc["auth"] = {
        "mode": "DYNAMIC",
        "loginFunction": "Days.pick",
        "loginArgs": [1],
        "tokenExtractionPath": "token",
        "tokenInjectionPath": "token",
        "scope": None,
    }
    schema = load_json_schema(json.dumps(doc))
    assert schema.auth is not None
    reloaded = load_json_schema(json.dumps(serialize_schema(schema)))
    assert reloaded.auth == schema.auth


def test_static_auth_requires_fields():
    doc = json.loads(json.dumps(MINIMAL))
    doc["auth"] = {"mode": "STATIC", "staticFields": {}}
    with pytest.raises(SchemaValidationError):
        load_json_schema(json.dumps(doc))


def test_enum_and_object_definitions_round_trip():
    schema = parse_thrift_idl("""
enum Mood { CALM, TENSE }
struct Entry {
  1: Mood mood,
  2: map<string, list<i32>> tags
}
service Diary { Entry read(1: i32 day) }
""")
    reloaded = load_json_schema(schema_to_json(schema))
    mood = reloaded.type_defs["Mood"]
    assert mood.kind is SupportedDataType.ENUM
    assert mood.candidates == ("CALM", "TENSE")
    assert reloaded == schema


def test_phenotype_codec_handles_non_string_map_keys():
    value = {"plain": [1, 2.5, None, "x"],
             "mapped": {3: "three", 9: "nine"}}
    encoded = encode_phenotype(value)
    assert json.loads(json.dumps(encoded)) == encoded
    assert decode_phenotype(encoded) == value
