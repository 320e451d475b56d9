"""Spec-to-gene mapping: kinds, bounds, wrappers, cycles, seeds."""

import random

import pytest

from rpcfuzz.errors import UnsupportedType
from rpcfuzz.genes.core import (
    ArrayGene,
    BooleanGene,
    CycleObjectGene,
    DateGene,
    DateTimeGene,
    DoubleGene,
    EnumGene,
    IntegerGene,
    LongGene,
    MapGene,
    ObjectGene,
    OptionalGene,
    RegexGene,
    SeededGene,
    StringGene,
    TimeGene,
)
from rpcfuzz.genes.factory import GeneFactory
from rpcfuzz.schema.model import ParamSpec, RpcSchema, SupportedDataType, TypeSpec
from rpcfuzz.schema.thrift import parse_thrift_idl

D = SupportedDataType


def _build(spec, schema=None, seeds=None, seed=0):
    factory = GeneFactory(schema or RpcSchema(), seeds=seeds or {})
    return factory.build(spec, random.Random(seed)), factory


def test_bounded_int_param_maps_to_bounded_gene():
    gene, _ = _build(ParamSpec("day", TypeSpec(D.INT, "i32"),
                               min_value=1, max_value=31))
    assert isinstance(gene, IntegerGene)
    assert (gene.lo, gene.hi) == (1, 31)


def test_byte_short_and_char_defaults():
    byte_gene, _ = _build(ParamSpec("b", TypeSpec(D.BYTE, "byte")))
    assert (byte_gene.lo, byte_gene.hi) == (-128, 127)
    short_gene, _ = _build(ParamSpec("s", TypeSpec(D.SHORT, "i16")))
    assert (short_gene.lo, short_gene.hi) == (-32768, 32767)
    char_gene, _ = _build(ParamSpec("c", TypeSpec(D.CHAR, "char")))
    assert isinstance(char_gene, StringGene)
    assert (char_gene.min_len, char_gene.max_len) == (1, 1)
    assert len(char_gene.render()) == 1


def test_long_uses_long_gene():
    gene, _ = _build(ParamSpec("n", TypeSpec(D.LONG, "i64")))
    assert isinstance(gene, LongGene)
    assert gene.hi == 2 ** 63 - 1


def test_int_keyed_map_gets_integer_key_prototype():
    spec = ParamSpec("m", TypeSpec(D.MAP, "map",
                                   key_type=TypeSpec(D.INT, "i32"),
                                   value_type=TypeSpec(D.STRING, "string")))
    gene, _ = _build(spec)
    assert isinstance(gene, MapGene)
    assert isinstance(gene.key_prototype, IntegerGene)
    assert isinstance(gene.value_prototype, StringGene)


def test_double_keyed_map_is_unsupported():
    spec = ParamSpec("m", TypeSpec(D.MAP, "map",
                                   key_type=TypeSpec(D.DOUBLE, "double"),
                                   value_type=TypeSpec(D.STRING, "string")))
    with pytest.raises(UnsupportedType):
        _build(spec)


def test_nullable_string_wrapped_in_optional():
    gene, _ = _build(ParamSpec("s", TypeSpec(D.STRING, "string"),
                               is_nullable=True))
    assert isinstance(gene, OptionalGene)
    assert isinstance(gene.inner, StringGene)


def test_pattern_upgrades_to_regex_gene():
    gene, _ = _build(ParamSpec("code", TypeSpec(D.STRING, "string"),
                               pattern=r"[A-Z]{2}[0-9]{4}"))
    assert isinstance(gene, RegexGene)


def test_unsupported_pattern_falls_back_with_diagnostic():
    gene, factory = _build(ParamSpec("code", TypeSpec(D.STRING, "string"),
                                     pattern=r"(a)\1"))
    assert isinstance(gene, StringGene)
    assert factory.diagnostics


def test_cycle_field_becomes_cycle_object_gene():
    schema = parse_thrift_idl("""
struct Node { 1: i32 id, 2: Node next }
service S { Node head() }
""")
    spec = ParamSpec("root", TypeSpec(D.CUSTOM_OBJECT, "Node"))
    gene, _ = _build(spec, schema=schema)
    assert isinstance(gene, ObjectGene)
    by_name = {g.name: g for g in gene.fields}
    inner = by_name["next"]
    if isinstance(inner, OptionalGene):
        inner = inner.inner
    assert isinstance(inner, CycleObjectGene)


def test_object_gene_renders_all_fields(ncs_snippet):
    schema = parse_thrift_idl(ncs_snippet)
    gene, _ = _build(ParamSpec("dto", TypeSpec(D.CUSTOM_OBJECT, "Dto")),
                     schema=schema)
    rendered = gene.render()
    assert set(rendered) == {"resultAsInt", "resultAsDouble"}


def test_seeded_candidates_wrap_gene():
    gene, _ = _build(ParamSpec("token", TypeSpec(D.STRING, "string")),
                     seeds={"token": ["tokenA", "tokenB"]})
    assert isinstance(gene, SeededGene)
    assert gene.seeded.candidates == ("tokenA", "tokenB")


def test_immutable_default_pins_value():
    gene, _ = _build(ParamSpec("accepted", TypeSpec(D.BOOLEAN, "bool"),
                               default_value=True, is_mutable=False))
    assert isinstance(gene, BooleanGene)
    assert gene.render() is True
    assert gene.mutable is False


def test_enum_gene_uses_registered_candidates():
    schema = RpcSchema(type_defs={
        "Mood": TypeSpec(D.ENUM, "Mood", candidates=("CALM", "TENSE"))})
    gene, _ = _build(ParamSpec("mood", TypeSpec(D.ENUM, "Mood")), schema=schema)
    assert isinstance(gene, EnumGene)
    assert gene.render() in ("CALM", "TENSE")


def test_date_variants_dispatch_on_type_name():
    date_gene, _ = _build(ParamSpec("d", TypeSpec(D.DATE, "date")))
    assert isinstance(date_gene, DateGene)
    time_gene, _ = _build(ParamSpec("t", TypeSpec(D.DATE, "time")))
    assert isinstance(time_gene, TimeGene)
    dt_gene, _ = _build(ParamSpec("ts", TypeSpec(D.DATE, "datetime")))
    assert isinstance(dt_gene, DateTimeGene)


def test_collection_sizes_respect_spec_and_cap():
    elem = TypeSpec(D.DOUBLE, "double")
    gene, _ = _build(ParamSpec("xs", TypeSpec(D.LIST, "list", example=elem),
                               min_size=2, max_size=500))
    assert isinstance(gene, ArrayGene)
    assert gene.min_size == 2
    assert gene.max_size == 64
    assert isinstance(gene.prototype, DoubleGene)


def test_exclusive_bounds_shrink_interval():
    gene, _ = _build(ParamSpec("n", TypeSpec(D.INT, "i32"),
                               min_value=0, max_value=10,
                               min_inclusive=False, max_inclusive=False))
    assert (gene.lo, gene.hi) == (1, 9)
