"""Build gene trees from parameter specs.

Kind mapping: INT/SHORT/BYTE get integer genes with type-appropriate default
bounds, CHAR/STRING/BYTEBUFFER get string genes with length bounds, a present
pattern upgrades to a regex gene, nullable parameters get an optional
wrapper, fields whose type recurses get a cycle placeholder, and parameters
with configured seed candidates are wrapped in a seeded gene.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Any, Optional

from ..errors import RegexUnsupported, UnsupportedType
from ..schema.model import ParamSpec, RpcSchema, SupportedDataType, TypeSpec
from .core import (
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
    pin,
)

D = SupportedDataType

INT_BOUNDS = {
    D.INT: (-(2 ** 31), 2 ** 31 - 1),
    D.LONG: (-(2 ** 63), 2 ** 63 - 1),
    D.SHORT: (-32768, 32767),
    D.BYTE: (-128, 127),
    D.BIGINTEGER: (-(10 ** 19), 10 ** 19),
}

DEFAULT_FLOAT_BOUND = 1.0e6
DEFAULT_STRING_MAX = 16
DEFAULT_COLLECTION_MAX = 5
COLLECTION_HARD_CAP = 64        # bounds rendered size of any collection/string
MAX_OBJECT_DEPTH = 15
DEFAULT_DECIMAL_PRECISION = 11
DEFAULT_DECIMAL_SCALE = 2

_INT_GENE_CLS = {D.INT: IntegerGene, D.SHORT: IntegerGene, D.BYTE: IntegerGene,
                 D.LONG: LongGene, D.BIGINTEGER: BigIntegerGene}


@dataclass
class GeneFactory:
    """Stateful builder: resolves named types, cuts cycles, applies seeds."""

    schema: RpcSchema
    seeds: dict[str, list[Any]] = field(default_factory=dict)
    max_depth: int = MAX_OBJECT_DEPTH
    diagnostics: list[str] = field(default_factory=list)

    def build_params(self, fn, rng: random.Random) -> list[Gene]:
        return [self.build(p, rng) for p in fn.request_params]

    def build(self, spec: ParamSpec, rng: random.Random,
              _path: tuple[str, ...] = ()) -> Gene:
        gene = self._base_gene(spec, rng, _path)
        candidates = self.seeds.get(spec.name)
        if candidates:
            gene = SeededGene(spec.name, gene,
                              EnumGene(spec.name, tuple(candidates)))
        if spec.is_nullable:
            gene = OptionalGene(spec.name, gene)
        if spec.is_mutable:
            gene.randomize(rng)
        else:
            pin(gene)
        return gene

    def _base_gene(self, spec: ParamSpec, rng: random.Random,
                   path: tuple[str, ...]) -> Gene:
        ts = self.schema.resolve(spec.type)
        kind = ts.kind

        if spec.pattern and kind in (D.STRING, D.CHAR, D.BYTEBUFFER):
            try:
                return RegexGene(spec.name, spec.pattern)
            except RegexUnsupported as exc:
                self.diagnostics.append(
                    f"pattern on '{spec.name}' not generatable ({exc}); "
                    f"falling back to plain strings")

        if kind in _INT_GENE_CLS:
            lo, hi = self._int_bounds(spec, kind)
            gene = _INT_GENE_CLS[kind](spec.name, lo, hi, lo)
            if spec.default_value is not None:
                gene.value = min(hi, max(lo, int(spec.default_value)))
            return gene
        if kind in (D.DOUBLE, D.FLOAT):
            lo, hi = self._float_bounds(spec)
            cls = DoubleGene if kind is D.DOUBLE else FloatGene
            gene = cls(spec.name, lo, hi, lo)
            if spec.default_value is not None:
                gene.value = min(hi, max(lo, float(spec.default_value)))
            return gene
        if kind is D.BIGDECIMAL:
            return self._decimal_gene(spec)
        if kind is D.BOOLEAN:
            return BooleanGene(spec.name, bool(spec.default_value))
        if kind in (D.STRING, D.BYTEBUFFER):
            lo = spec.min_size or 0
            hi = min(spec.max_size if spec.max_size is not None else DEFAULT_STRING_MAX,
                     COLLECTION_HARD_CAP)
            gene = StringGene(spec.name, lo, max(lo, hi))
            if isinstance(spec.default_value, str):
                gene.value = spec.default_value
            return gene
        if kind is D.CHAR:
            return StringGene(spec.name, 1, 1,
                              spec.default_value if isinstance(spec.default_value, str)
                              else "a")
        if kind is D.DATE:
            lowered = ts.type_name.lower()
            if "datetime" in lowered or "timestamp" in lowered:
                return DateTimeGene(spec.name)
            if lowered == "time" or lowered.endswith(".time"):
                return TimeGene(spec.name)
            return DateGene(spec.name)
        if kind is D.ENUM:
            if not ts.candidates:
                raise UnsupportedType(f"enum '{ts.type_name}' has no constants")
            gene = EnumGene(spec.name, tuple(ts.candidates))
            if spec.default_value in ts.candidates:
                gene.index = ts.candidates.index(spec.default_value)
            return gene
        if kind in (D.LIST, D.SET, D.ARRAY):
            return self._array_gene(spec, ts, rng, path)
        if kind is D.MAP:
            return self._map_gene(spec, ts, rng, path)
        if kind is D.CUSTOM_OBJECT:
            return self._object_gene(spec, ts, rng, path)
        raise UnsupportedType(f"no gene mapping for kind {kind.value}")

    def _int_bounds(self, spec: ParamSpec, kind: D) -> tuple[int, int]:
        lo, hi = INT_BOUNDS[kind]
        if kind is D.BIGINTEGER and spec.precision is not None:
            digits = 10 ** spec.precision - 1
            lo, hi = -digits, digits
        # value constraints narrow the type's own range, never widen it
        if spec.min_value is not None:
            bound = int(math.ceil(spec.min_value))
            if not spec.min_inclusive:
                bound += 1
            lo = max(lo, bound)
        if spec.max_value is not None:
            bound = int(math.floor(spec.max_value))
            if not spec.max_inclusive:
                bound -= 1
            hi = min(hi, bound)
        return lo, max(lo, hi)

    def _float_bounds(self, spec: ParamSpec) -> tuple[float, float]:
        lo, hi = -DEFAULT_FLOAT_BOUND, DEFAULT_FLOAT_BOUND
        if spec.min_value is not None:
            lo = float(spec.min_value)
            if not spec.min_inclusive:
                lo = math.nextafter(lo, math.inf)
        if spec.max_value is not None:
            hi = float(spec.max_value)
            if not spec.max_inclusive:
                hi = math.nextafter(hi, -math.inf)
        return lo, max(lo, hi)

    def _decimal_gene(self, spec: ParamSpec) -> BigDecimalGene:
        precision = spec.precision if spec.precision is not None \
            else DEFAULT_DECIMAL_PRECISION
        scale = spec.scale if spec.scale is not None else DEFAULT_DECIMAL_SCALE
        scale = min(scale, precision)
        bound = 10 ** precision - 1
        lo_u, hi_u = -bound, bound
        factor = 10 ** scale
        if spec.min_value is not None:
            lo = math.ceil(float(spec.min_value) * factor)
            lo_u = max(lo_u, lo + (0 if spec.min_inclusive else 1))
        if spec.max_value is not None:
            hi = math.floor(float(spec.max_value) * factor)
            hi_u = min(hi_u, hi - (0 if spec.max_inclusive else 1))
        return BigDecimalGene(spec.name, precision, scale, lo_u, max(lo_u, hi_u))

    def _element_spec(self, spec: ParamSpec, ts: TypeSpec) -> ParamSpec:
        if spec.inner_content:
            return spec.inner_content[0]
        if ts.example is None:
            raise UnsupportedType(
                f"collection '{spec.name}' has no element type")
        return ParamSpec(name=f"{spec.name}[]", type=ts.example)

    def _sizes(self, spec: ParamSpec, depth: int) -> tuple[int, int]:
        if depth >= self.max_depth:
            return 0, 0
        lo = spec.min_size or 0
        hi = spec.max_size if spec.max_size is not None else DEFAULT_COLLECTION_MAX
        return lo, max(lo, min(hi, COLLECTION_HARD_CAP))

    def _array_gene(self, spec, ts, rng, path) -> ArrayGene:
        lo, hi = self._sizes(spec, len(path))
        proto = self._inner_gene(self._element_spec(spec, ts), rng, path)
        return ArrayGene(spec.name, lo, hi, proto)

    def _map_gene(self, spec, ts, rng, path) -> MapGene:
        if ts.key_type is None or ts.value_type is None:
            raise UnsupportedType(f"map '{spec.name}' lacks key/value types")
        lo, hi = self._sizes(spec, len(path))
        key_spec = spec.inner_content[0] if len(spec.inner_content) == 2 \
            else ParamSpec(name=f"{spec.name}.key", type=ts.key_type)
        value_spec = spec.inner_content[1] if len(spec.inner_content) == 2 \
            else ParamSpec(name=f"{spec.name}.value", type=ts.value_type)
        key_proto = self._inner_gene(key_spec, rng, path)
        if not isinstance(key_proto, (IntegerGene, StringGene, EnumGene)):
            raise UnsupportedType(
                f"map '{spec.name}' key kind {ts.key_type.kind.value} "
                f"is not a supported key gene")
        return MapGene(spec.name, lo, hi, key_proto,
                       self._inner_gene(value_spec, rng, path))

    def _object_gene(self, spec, ts, rng, path) -> Gene:
        type_name = ts.type_name
        if type_name in path or len(path) >= self.max_depth:
            return CycleObjectGene(spec.name, type_name)
        members = spec.inner_content or ts.fields or []
        fields = [self._inner_gene(m, rng, path + (type_name,)) for m in members]
        return ObjectGene(spec.name, type_name, fields)

    def _inner_gene(self, spec: ParamSpec, rng: random.Random,
                    path: tuple[str, ...]) -> Gene:
        gene = self._base_gene(spec, rng, path)
        if spec.is_nullable:
            gene = OptionalGene(spec.name, gene)
        if not spec.is_mutable:
            pin(gene)
        return gene


def gene_from_param_spec(spec: ParamSpec, rng: random.Random,
                         schema: Optional[RpcSchema] = None,
                         seeds: Optional[dict[str, list[Any]]] = None) -> Gene:
    """One-shot convenience over GeneFactory for a standalone parameter."""
    factory = GeneFactory(schema or RpcSchema(), seeds=seeds or {})
    return factory.build(spec, rng)
