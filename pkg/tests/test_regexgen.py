"""Regex-subset generation checked against Python's re as the oracle."""

import random
import re

import pytest

from rpcfuzz.errors import RegexUnsupported
from rpcfuzz.genes.regexgen import UNBOUNDED_CAP, compile_pattern, generate

SUPPORTED = [
    r"abc",
    r"a\.b",
    r"[abc]+",
    r"[a-f0-9]{4}",
    r"[^0-9]{1,3}",
    r"\d{2,5}",
    r"\w+@\w+",
    r"(on|off|auto)",
    r"x?y*z+",
    r"^[A-Z]{2}[0-9]{4}$",
    r"(?:ab|cd){2}",
    r"a|b|c",
    r"\s?\S{2}",
    r"v\d+(\.\d+)*",
    r"",
]


@pytest.mark.parametrize("pattern", SUPPORTED)
def test_generated_strings_match_their_pattern(pattern):
    rng = random.Random(11)
    ast = compile_pattern(pattern)
    for _ in range(200):
        value = generate(ast, rng)
        assert re.fullmatch(pattern, value) is not None, (pattern, value)


def test_unbounded_quantifiers_are_capped():
    rng = random.Random(12)
    ast = compile_pattern(r"a*")
    assert max(len(generate(ast, rng)) for _ in range(500)) <= UNBOUNDED_CAP


@pytest.mark.parametrize("pattern", [
    r"(a)\1",          # backreference
    r"a(?=b)",         # lookahead
    r"(?<name>x)",     # named group
    r"a{3,1}",         # inverted quantifier
    r"[z-a]",          # inverted range
    r"(unclosed",
    r"\p{L}",          # unicode property escape
])
def test_unsupported_constructs_raise(pattern):
    with pytest.raises(RegexUnsupported):
        compile_pattern(pattern)


def test_generation_is_deterministic_per_seed():
    ast = compile_pattern(r"[a-z]{1,8}-\d+")
    a = [generate(ast, random.Random(5)) for _ in range(10)]
    b = [generate(ast, random.Random(5)) for _ in range(10)]
    assert a == b
