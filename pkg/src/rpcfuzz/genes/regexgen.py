"""String generation for a regular-expression subset.

Supported: literals, '.', escapes (\\d \\D \\w \\W \\s \\S and escaped
metacharacters), character classes incl. ranges and negation, groups,
alternation, quantifiers ? * + {m} {m,} {m,n}, and ^/$ anchors at the
pattern edges. Backreferences, lookaround and inline flags raise
RegexUnsupported; callers fall back to plain string generation.

Unbounded quantifiers are capped at UNBOUNDED_CAP repetitions so rendered
values stay small.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass

from ..errors import RegexUnsupported

UNBOUNDED_CAP = 8

# Generation alphabet for '.', negated classes and \W: printable ASCII.
ALPHABET = "".join(chr(c) for c in range(32, 127))
DIGITS = string.digits
WORD = string.ascii_letters + string.digits + "_"
SPACES = " \t"


@dataclass(frozen=True)
class _Lit:
    chars: str           # one candidate set; generation picks one member


@dataclass(frozen=True)
class _Repeat:
    node: object
    lo: int
    hi: int


@dataclass(frozen=True)
class _Seq:
    parts: tuple


@dataclass(frozen=True)
class _Alt:
    options: tuple


class _PatternParser:
    def __init__(self, pattern: str):
        self._p = pattern
        self._i = 0

    def parse(self) -> _Alt:
        node = self._alternation()
        if self._i != len(self._p):
            raise RegexUnsupported(f"unbalanced pattern at position {self._i}")
        return node

    def _peek(self) -> str:
        return self._p[self._i] if self._i < len(self._p) else ""

    def _next(self) -> str:
        ch = self._p[self._i]
        self._i += 1
        return ch

    def _alternation(self) -> _Alt:
        options = [self._sequence()]
        while self._peek() == "|":
            self._next()
            options.append(self._sequence())
        return _Alt(tuple(options))

    def _sequence(self) -> _Seq:
        parts: list = []
        while self._peek() not in ("", "|", ")"):
            parts.append(self._quantified())
        return _Seq(tuple(parts))

    def _quantified(self):
        atom = self._atom()
        ch = self._peek()
        if ch == "?":
            self._next()
            return _Repeat(atom, 0, 1)
        if ch == "*":
            self._next()
            return _Repeat(atom, 0, UNBOUNDED_CAP)
        if ch == "+":
            self._next()
            return _Repeat(atom, 1, UNBOUNDED_CAP)
        if ch == "{":
            self._next()
            lo = self._number()
            hi = lo
            if self._peek() == ",":
                self._next()
                hi = self._number() if self._peek() != "}" else lo + UNBOUNDED_CAP
            if self._next() != "}":
                raise RegexUnsupported("malformed {m,n} quantifier")
            if hi < lo:
                raise RegexUnsupported("quantifier with max < min")
            return _Repeat(atom, lo, hi)
        return atom

    def _number(self) -> int:
        digits = ""
        while self._peek().isdigit():
            digits += self._next()
        if not digits:
            raise RegexUnsupported("expected a number in quantifier")
        return int(digits)

    def _atom(self):
        ch = self._next()
        if ch == "^":
            if self._i != 1:
                raise RegexUnsupported("^ inside pattern")
            return _Seq(())
        if ch == "$":
            if self._i != len(self._p):
                raise RegexUnsupported("$ inside pattern")
            return _Seq(())
        if ch == "(":
            if self._peek() == "?":
                self._next()
                nxt = self._peek()
                if nxt == ":":
                    self._next()
                else:
                    raise RegexUnsupported(f"group construct (?{nxt}")
            inner = self._alternation()
            if self._peek() != ")":
                raise RegexUnsupported("unterminated group")
            self._next()
            return inner
        if ch == "[":
            return self._char_class()
        if ch == "\\":
            return _Lit(self._escape(self._next()))
        if ch == ".":
            return _Lit(ALPHABET)
        if ch in ")]}":
            raise RegexUnsupported(f"unexpected {ch!r}")
        return _Lit(ch)

    def _escape(self, ch: str) -> str:
        table = {"d": DIGITS, "w": WORD, "s": SPACES,
                 "D": _complement(DIGITS), "W": _complement(WORD),
                 "S": _complement(SPACES),
                 "n": "\n", "t": "\t", "r": "\r"}
        if ch in table:
            return table[ch]
        if ch.isdigit():
            raise RegexUnsupported("backreferences")
        if ch.isalpha():
            raise RegexUnsupported(f"escape \\{ch}")
        return ch

    def _char_class(self) -> _Lit:
        negate = False
        if self._peek() == "^":
            self._next()
            negate = True
        members: list[str] = []
        while self._peek() != "]":
            if self._peek() == "":
                raise RegexUnsupported("unterminated character class")
            ch = self._next()
            if ch == "\\":
                members.append(self._escape(self._next()))
                continue
            if self._peek() == "-" and self._i + 1 < len(self._p) \
                    and self._p[self._i + 1] != "]":
                self._next()
                end = self._next()
                if end == "\\":
                    end = self._next()
                if ord(end) < ord(ch):
                    raise RegexUnsupported(f"inverted range {ch}-{end}")
                members.append("".join(chr(c) for c in range(ord(ch), ord(end) + 1)))
            else:
                members.append(ch)
        self._next()
        chars = "".join(dict.fromkeys("".join(members)))
        if negate:
            chars = _complement(chars)
        if not chars:
            raise RegexUnsupported("empty character class")
        return _Lit(chars)


def _complement(chars: str) -> str:
    excluded = set(chars)
    out = "".join(c for c in ALPHABET if c not in excluded)
    if not out:
        raise RegexUnsupported("class excludes the whole alphabet")
    return out


def compile_pattern(pattern: str) -> _Alt:
    """Parse a pattern into a generator AST; raises RegexUnsupported."""
    return _PatternParser(pattern).parse()


def generate(node, rng: random.Random) -> str:
    if isinstance(node, _Alt):
        return generate(rng.choice(node.options), rng)
    if isinstance(node, _Seq):
        return "".join(generate(p, rng) for p in node.parts)
    if isinstance(node, _Repeat):
        n = rng.randint(node.lo, node.hi)
        return "".join(generate(node.node, rng) for _ in range(n))
    if isinstance(node, _Lit):
        return rng.choice(node.chars)
    raise TypeError(f"unknown node {node!r}")
