"""Shared fixtures: schema snippets, random spec generation, constraint oracle."""

from __future__ import annotations

import random
import re
from decimal import Decimal
from pathlib import Path

import pytest

from rpcfuzz.schema.model import (
    ParamSpec,
    RpcSchema,
    SupportedDataType,
    TypeSpec,
)

DATA_DIR = Path(__file__).parent / "data"

# The minimal schema shape from the docs: one service, one function
# returning a two-field DTO.
NCS_SNIPPET = """
namespace java org.thrift.ncs

struct Dto {
\t1: i32 resultAsInt,
\t2: double resultAsDouble
}

service NcsService {

\tDto bessj(1:i32 n, 2:double x)
}
"""


@pytest.fixture
def ncs_snippet() -> str:
    return NCS_SNIPPET


def idl_corpus() -> list[Path]:
    return sorted(DATA_DIR.glob("*.thrift"))


# --- random ParamSpec generation (for constraint-preservation suites) ---------------

D = SupportedDataType

def random_param_spec(rng: random.Random, depth: int = 0) -> ParamSpec:
    """A random constrained parameter over the scalar/collection kinds."""
    kinds = [D.INT, D.LONG, D.SHORT, D.BYTE, D.DOUBLE, D.FLOAT, D.BOOLEAN,
             D.STRING, D.CHAR, D.BIGINTEGER, D.BIGDECIMAL, D.DATE, D.ENUM]
    if depth < 2:
        kinds += [D.LIST, D.SET, D.MAP]
    kind = rng.choice(kinds)
    name = f"p{rng.randrange(1000)}"

    if kind in (D.INT, D.LONG, D.SHORT, D.BYTE, D.BIGINTEGER):
        spec = ParamSpec(name, TypeSpec(kind, kind.value.lower()))
        if rng.random() < 0.6:
            # keep the interval satisfiable within the type's own range
            cap = {D.BYTE: 120, D.SHORT: 32000}.get(kind, 900)
            lo = rng.randint(-cap, cap - 100)
            spec.min_value = lo
            spec.max_value = lo + rng.randint(0, 100)
        return spec
    if kind in (D.DOUBLE, D.FLOAT):
        spec = ParamSpec(name, TypeSpec(kind, kind.value.lower()))
        if rng.random() < 0.6:
            lo = rng.uniform(-1e3, 1e3)
            spec.min_value = lo
            spec.max_value = lo + rng.uniform(0.5, 100.0)
        return spec
    if kind is D.BIGDECIMAL:
        precision = rng.randint(2, 12)
        return ParamSpec(name, TypeSpec(kind, "bigdecimal"),
                         precision=precision,
                         scale=rng.randint(0, precision))
    if kind is D.BOOLEAN:
        return ParamSpec(name, TypeSpec(kind, "bool"))
    if kind is D.CHAR:
        return ParamSpec(name, TypeSpec(kind, "char"))
    if kind is D.DATE:
        return ParamSpec(name, TypeSpec(kind, "date"))
    if kind is D.STRING:
        spec = ParamSpec(name, TypeSpec(kind, "string"))
        if rng.random() < 0.3:
            spec.pattern = rng.choice(
                [r"[a-c]{2,4}", r"\d+", r"(on|off)", r"x[0-9]?y"])
        elif rng.random() < 0.5:
            spec.min_size = rng.randint(0, 4)
            spec.max_size = spec.min_size + rng.randint(0, 8)
        return spec
    if kind is D.ENUM:
        count = rng.randint(1, 5)
        candidates = tuple(f"C{i}" for i in range(count))
        return ParamSpec(name, TypeSpec(D.ENUM, f"E{count}", candidates=candidates))
    if kind in (D.LIST, D.SET):
        elem = random_param_spec(rng, depth + 1)
        spec = ParamSpec(name, TypeSpec(kind, "list", example=elem.type),
                         inner_content=[elem])
        spec.min_size = rng.randint(0, 2)
        spec.max_size = spec.min_size + rng.randint(0, 4)
        return spec
    key = ParamSpec("k", TypeSpec(D.INT, "i32"))
    value = random_param_spec(rng, depth + 1)
    spec = ParamSpec(name, TypeSpec(D.MAP, "map",
                                    key_type=key.type, value_type=value.type),
                     inner_content=[key, value])
    spec.max_size = rng.randint(0, 5)
    return spec


def check_phenotype(spec: ParamSpec, value, schema: RpcSchema | None = None) -> list[str]:
    """Independent constraint oracle: violations of a rendered value against
    its spec. Empty list means the value conforms."""
    problems: list[str] = []
    kind = spec.type.kind
    if value is None:
        if not spec.is_nullable and kind is not D.CUSTOM_OBJECT:
            problems.append(f"{spec.name}: null but not nullable")
        return problems

    if kind in (D.INT, D.LONG, D.SHORT, D.BYTE, D.BIGINTEGER):
        if not isinstance(value, int):
            return [f"{spec.name}: not an int"]
        _check_bounds(spec, value, problems)
        hard = {D.INT: 2 ** 31, D.SHORT: 2 ** 15, D.BYTE: 2 ** 7, D.LONG: 2 ** 63}
        if kind in hard and not (-hard[kind] <= value < hard[kind]):
            problems.append(f"{spec.name}: outside {kind.value} range")
    elif kind in (D.DOUBLE, D.FLOAT):
        if not isinstance(value, float):
            return [f"{spec.name}: not a float"]
        _check_bounds(spec, value, problems)
    elif kind is D.BIGDECIMAL:
        dec = Decimal(str(value))
        digits = dec.as_tuple()
        fractional = max(0, -digits.exponent)
        total = len(digits.digits)
        if spec.scale is not None and fractional > spec.scale:
            problems.append(f"{spec.name}: {fractional} fractional digits")
        if spec.precision is not None and total > spec.precision:
            problems.append(f"{spec.name}: {total} digits exceeds precision")
        _check_bounds(spec, dec, problems)
    elif kind is D.BOOLEAN:
        if not isinstance(value, bool):
            problems.append(f"{spec.name}: not a bool")
    elif kind in (D.STRING, D.BYTEBUFFER, D.CHAR):
        if not isinstance(value, str):
            return [f"{spec.name}: not a string"]
        lo = 1 if kind is D.CHAR else (spec.min_size or 0)
        hi = 1 if kind is D.CHAR else spec.max_size
        if len(value) < lo or (hi is not None and len(value) > hi):
            problems.append(f"{spec.name}: length {len(value)} outside bounds")
        if spec.pattern is not None and re.fullmatch(spec.pattern, value) is None:
            problems.append(f"{spec.name}: {value!r} does not match pattern")
    elif kind is D.ENUM:
        candidates = spec.type.candidates or ()
        if value not in candidates:
            problems.append(f"{spec.name}: {value!r} not a candidate")
    elif kind is D.DATE:
        if not isinstance(value, str):
            problems.append(f"{spec.name}: date not rendered as string")
    elif kind in (D.LIST, D.SET, D.ARRAY):
        if not isinstance(value, list):
            return [f"{spec.name}: not a list"]
        if spec.min_size is not None and len(value) < spec.min_size:
            problems.append(f"{spec.name}: too few elements")
        if spec.max_size is not None and len(value) > spec.max_size:
            problems.append(f"{spec.name}: too many elements")
        elem = spec.inner_content[0] if spec.inner_content else None
        if elem is not None:
            for v in value:
                problems.extend(check_phenotype(elem, v, schema))
    elif kind is D.MAP:
        if not isinstance(value, dict):
            return [f"{spec.name}: not a map"]
        if spec.min_size is not None and len(value) < spec.min_size:
            problems.append(f"{spec.name}: too few entries")
        if spec.max_size is not None and len(value) > spec.max_size:
            problems.append(f"{spec.name}: too many entries")
        if len(spec.inner_content) == 2:
            for k, v in value.items():
                problems.extend(check_phenotype(spec.inner_content[0], k, schema))
                problems.extend(check_phenotype(spec.inner_content[1], v, schema))
    return problems


def _check_bounds(spec: ParamSpec, value, problems: list[str]) -> None:
    if spec.min_value is not None:
        if spec.min_inclusive and value < spec.min_value:
            problems.append(f"{spec.name}: {value} < min {spec.min_value}")
        if not spec.min_inclusive and value <= spec.min_value:
            problems.append(f"{spec.name}: {value} <= exclusive min")
    if spec.max_value is not None:
        if spec.max_inclusive and value > spec.max_value:
            problems.append(f"{spec.name}: {value} > max {spec.max_value}")
        if not spec.max_inclusive and value >= spec.max_value:
            problems.append(f"{spec.name}: {value} >= exclusive max")
