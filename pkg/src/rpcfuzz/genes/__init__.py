"""Genotype system: gene catalog, factory and regex-subset generation."""

from .core import (
    CHARSET,
    ArrayGene,
    BigDecimalGene,
    BigIntegerGene,
    BooleanGene,
    CycleObjectGene,
    DateGene,
    DateTimeGene,
    DoubleGene,
    EnumGene,
    FloatGene,
    Gene,
    IntegerGene,
    LongGene,
    MapGene,
    ObjectGene,
    OptionalGene,
    RegexGene,
    SeededGene,
    StringGene,
    TimeGene,
    mutate,
    pin,
    randomize,
)
from .factory import GeneFactory, gene_from_param_spec

__all__ = [
    "ArrayGene", "BigDecimalGene", "BigIntegerGene", "BooleanGene", "CHARSET",
    "CycleObjectGene", "DateGene", "DateTimeGene", "DoubleGene", "EnumGene",
    "FloatGene", "Gene", "GeneFactory", "IntegerGene", "LongGene", "MapGene",
    "ObjectGene", "OptionalGene", "RegexGene", "SeededGene", "StringGene",
    "TimeGene", "gene_from_param_spec", "mutate", "pin", "randomize",
]
