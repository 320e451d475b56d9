"""Genotype catalog: mutable, constraint-carrying value nodes.

Every gene keeps its value inside the constraints it was built with, both
after randomize() and after mutate(). render() produces a plain phenotype
tree (None/bool/int/float/str/list/dict) that is JSON-friendly: big
decimals render as strings, dates and times as ISO strings.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from decimal import Context, Decimal
from typing import Any, Optional

from ..errors import ImmutableGeneError
from . import regexgen

# Sorted by codepoint so index nudges follow the codepoint gradient.
CHARSET = "".join(sorted(set(
    string.ascii_letters + string.digits + " _-.@/:+,!?#=")))

P_SEED_FLIP = 0.05        # chance a mutation toggles seeded vs. searched value
P_PRESENT = 0.9           # chance randomize() makes an optional value present
P_PRESENCE_FLIP = 0.1     # chance a mutation flips optional presence
P_RERANDOMIZE = 0.05      # chance a numeric mutation redraws instead of stepping

_EPOCH_DATE = date(1970, 1, 1)
_EPOCH_DT = datetime(1970, 1, 1)
_DECIMAL_CTX = Context(prec=60)


class Gene:
    """Base interface; subclasses are single-owner mutable values."""

    name: str
    mutable: bool

    def copy(self) -> "Gene":
        raise NotImplementedError

    def randomize(self, rng: random.Random) -> None:
        raise NotImplementedError

    def mutate(self, rng: random.Random) -> bool:
        """Perturb the value in place; returns False when no alternative exists."""
        raise NotImplementedError

    def render(self) -> Any:
        raise NotImplementedError


def randomize(gene: Gene, rng: random.Random) -> Gene:
    gene.randomize(rng)
    return gene


def mutate(gene: Gene, rng: random.Random) -> Gene:
    if not gene.mutable:
        raise ImmutableGeneError(f"gene '{gene.name}' is pinned by its schema")
    gene.mutate(rng)
    return gene


def pin(gene: Gene) -> Gene:
    """Mark a whole gene tree immutable."""
    gene.mutable = False
    for child in _children(gene):
        pin(child)
    return gene


def _children(gene: Gene) -> list[Gene]:
    if isinstance(gene, ArrayGene):
        return [gene.prototype, *gene.elements]
    if isinstance(gene, MapGene):
        out: list[Gene] = [gene.key_prototype, gene.value_prototype]
        for k, v in gene.entries:
            out.extend((k, v))
        return out
    if isinstance(gene, ObjectGene):
        return list(gene.fields)
    if isinstance(gene, OptionalGene):
        return [gene.inner]
    if isinstance(gene, SeededGene):
        return [gene.inner, gene.seeded]
    return []


def _int_step(rng: random.Random, span: int) -> int:
    # geometric +/- 2^k perturbation, k drawn over the span's bit range
    bits = max(1, span.bit_length())
    step = 1 << rng.randrange(bits)
    return -step if rng.random() < 0.5 else step


@dataclass
class IntegerGene(Gene):
    name: str
    lo: int
    hi: int
    value: int = 0
    mutable: bool = True

    def __post_init__(self):
        self.value = min(self.hi, max(self.lo, self.value))

    def copy(self):
        return type(self)(self.name, self.lo, self.hi, self.value, self.mutable)

    def randomize(self, rng):
        self.value = rng.randint(self.lo, self.hi)

    def mutate(self, rng):
        if self.lo >= self.hi:
            return False
        if rng.random() < P_RERANDOMIZE:
            old = self.value
            self.value = rng.randint(self.lo, self.hi)
            if self.value != old:
                return True
        for _ in range(8):
            nv = min(self.hi, max(self.lo, self.value + _int_step(rng, self.hi - self.lo)))
            if nv != self.value:
                self.value = nv
                return True
        self.value = self.value + 1 if self.value < self.hi else self.value - 1
        return True

    def render(self):
        return self.value


class LongGene(IntegerGene):
    pass


class BigIntegerGene(IntegerGene):
    pass


@dataclass
class FloatGene(Gene):
    name: str
    lo: float
    hi: float
    value: float = 0.0
    mutable: bool = True

    def __post_init__(self):
        self.value = min(self.hi, max(self.lo, self.value))

    def copy(self):
        return type(self)(self.name, self.lo, self.hi, self.value, self.mutable)

    def randomize(self, rng):
        self.value = rng.uniform(self.lo, self.hi)

    def mutate(self, rng):
        if self.lo >= self.hi:
            return False
        span = self.hi - self.lo
        for _ in range(8):
            r = rng.random()
            if r < P_RERANDOMIZE:
                nv = rng.uniform(self.lo, self.hi)
            elif r < P_RERANDOMIZE + 0.1:
                # exact boundary/special values; gradients alone cannot land
                # equalities like x == 0.0
                nv = rng.choice(self._specials())
            else:
                step = span * (2.0 ** rng.randrange(-45, 3))
                if rng.random() < 0.5:
                    step = -step
                nv = min(self.hi, max(self.lo, self.value + step))
            if nv != self.value:
                self.value = nv
                return True
        return False

    def _specials(self) -> list[float]:
        candidates = [0.0, 1.0, -1.0, self.lo, self.hi,
                      float(round(self.value)), -self.value]
        return [min(self.hi, max(self.lo, c)) for c in candidates]

    def render(self):
        return self.value


class DoubleGene(FloatGene):
    pass


@dataclass
class BooleanGene(Gene):
    name: str
    value: bool = False
    mutable: bool = True

    def copy(self):
        return BooleanGene(self.name, self.value, self.mutable)

    def randomize(self, rng):
        self.value = rng.random() < 0.5

    def mutate(self, rng):
        self.value = not self.value
        return True

    def render(self):
        return self.value


@dataclass
class BigDecimalGene(Gene):
    """Fixed-point decimal: at most `precision` digits, `scale` of them fractional.

    The value is the integer `unscaled` scaled down by 10^scale; it renders as
    a plain decimal string so precision survives transport.
    """

    name: str
    precision: int
    scale: int
    lo_unscaled: int
    hi_unscaled: int
    unscaled: int = 0
    mutable: bool = True

    def __post_init__(self):
        self.unscaled = min(self.hi_unscaled, max(self.lo_unscaled, self.unscaled))

    def copy(self):
        return BigDecimalGene(self.name, self.precision, self.scale,
                              self.lo_unscaled, self.hi_unscaled,
                              self.unscaled, self.mutable)

    def randomize(self, rng):
        self.unscaled = rng.randint(self.lo_unscaled, self.hi_unscaled)

    def mutate(self, rng):
        if self.lo_unscaled >= self.hi_unscaled:
            return False
        for _ in range(8):
            step = _int_step(rng, self.hi_unscaled - self.lo_unscaled)
            nv = min(self.hi_unscaled, max(self.lo_unscaled, self.unscaled + step))
            if nv != self.unscaled:
                self.unscaled = nv
                return True
        self.unscaled = rng.randint(self.lo_unscaled, self.hi_unscaled)
        return True

    def render(self):
        return str(Decimal(self.unscaled).scaleb(-self.scale, _DECIMAL_CTX))


@dataclass
class StringGene(Gene):
    name: str
    min_len: int
    max_len: int
    value: str = ""
    mutable: bool = True

    def copy(self):
        return StringGene(self.name, self.min_len, self.max_len,
                          self.value, self.mutable)

    def randomize(self, rng):
        n = rng.randint(self.min_len, self.max_len)
        self.value = "".join(rng.choice(CHARSET) for _ in range(n))

    def mutate(self, rng):
        if self.max_len == 0:
            return False
        before = self.value
        edits = 1
        while edits < 3 and rng.random() < 0.3:
            edits += 1
        for _ in range(edits):
            self._edit(rng)
        return self.value != before

    def _edit(self, rng):
        r = rng.random()
        v = self.value
        if r < 0.55 and v:
            i = rng.randrange(len(v))
            self.value = v[:i] + self._nudged(rng, v[i]) + v[i + 1:]
        elif r < 0.75 and len(v) < self.max_len:
            count = min(1 << rng.randrange(3), self.max_len - len(v))
            i = rng.randint(0, len(v))
            # half the inserts duplicate a neighbor, extending matched runs
            if v and rng.random() < 0.5:
                ch = v[i - 1] if i > 0 else v[0]
            else:
                ch = rng.choice(CHARSET)
            self.value = v[:i] + ch * count + v[i:]
        elif r < 0.9 and len(v) > self.min_len and v:
            count = min(1 << rng.randrange(3), len(v) - self.min_len)
            i = rng.randrange(len(v) - count + 1)
            self.value = v[:i] + v[i + count:]
        elif v:
            i = rng.randrange(len(v))
            self.value = v[:i] + rng.choice(CHARSET) + v[i + 1:]
        elif self.max_len > 0:
            self.value = rng.choice(CHARSET)

    @staticmethod
    def _nudged(rng: random.Random, ch: str) -> str:
        idx = CHARSET.find(ch)
        if idx < 0:
            return rng.choice(CHARSET)
        step = _int_step(rng, len(CHARSET))
        return CHARSET[min(len(CHARSET) - 1, max(0, idx + step))]

    def render(self):
        return self.value


@dataclass
class RegexGene(Gene):
    """String constrained to match a pattern; values are whole fresh samples."""

    name: str
    pattern: str
    value: str = ""
    mutable: bool = True
    _ast: Any = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._ast is None:
            self._ast = regexgen.compile_pattern(self.pattern)

    def copy(self):
        return RegexGene(self.name, self.pattern, self.value, self.mutable, self._ast)

    def randomize(self, rng):
        self.value = regexgen.generate(self._ast, rng)

    def mutate(self, rng):
        for _ in range(8):
            nv = regexgen.generate(self._ast, rng)
            if nv != self.value:
                self.value = nv
                return True
        return False

    def render(self):
        return self.value


@dataclass
class EnumGene(Gene):
    name: str
    candidates: tuple
    index: int = 0
    mutable: bool = True

    def copy(self):
        return EnumGene(self.name, self.candidates, self.index, self.mutable)

    def randomize(self, rng):
        self.index = rng.randrange(len(self.candidates))

    def mutate(self, rng):
        if len(self.candidates) < 2:
            return False
        self.index = (self.index + rng.randrange(1, len(self.candidates))) \
            % len(self.candidates)
        return True

    def render(self):
        return self.candidates[self.index]


@dataclass
class DateGene(Gene):
    """Calendar date as days since 1970-01-01; renders ISO format."""

    name: str
    lo_day: int = 0
    hi_day: int = 36525           # ~year 2070
    day: int = 0
    mutable: bool = True

    def copy(self):
        return DateGene(self.name, self.lo_day, self.hi_day, self.day, self.mutable)

    def randomize(self, rng):
        self.day = rng.randint(self.lo_day, self.hi_day)

    def mutate(self, rng):
        if self.lo_day >= self.hi_day:
            return False
        for _ in range(8):
            nv = min(self.hi_day, max(self.lo_day, self.day + _int_step(rng, self.hi_day - self.lo_day)))
            if nv != self.day:
                self.day = nv
                return True
        return False

    def render(self):
        return (_EPOCH_DATE + timedelta(days=self.day)).isoformat()


@dataclass
class TimeGene(Gene):
    name: str
    second: int = 0               # seconds since midnight
    mutable: bool = True

    def copy(self):
        return TimeGene(self.name, self.second, self.mutable)

    def randomize(self, rng):
        self.second = rng.randrange(86400)

    def mutate(self, rng):
        for _ in range(8):
            nv = min(86399, max(0, self.second + _int_step(rng, 86399)))
            if nv != self.second:
                self.second = nv
                return True
        return False

    def render(self):
        h, rem = divmod(self.second, 3600)
        m, s = divmod(rem, 60)
        return f"{h:02d}:{m:02d}:{s:02d}"


@dataclass
class DateTimeGene(Gene):
    name: str
    lo_s: int = 0
    hi_s: int = 3155760000        # ~year 2070
    epoch_s: int = 0
    mutable: bool = True

    def copy(self):
        return DateTimeGene(self.name, self.lo_s, self.hi_s, self.epoch_s, self.mutable)

    def randomize(self, rng):
        self.epoch_s = rng.randint(self.lo_s, self.hi_s)

    def mutate(self, rng):
        if self.lo_s >= self.hi_s:
            return False
        for _ in range(8):
            nv = min(self.hi_s, max(self.lo_s, self.epoch_s + _int_step(rng, self.hi_s - self.lo_s)))
            if nv != self.epoch_s:
                self.epoch_s = nv
                return True
        return False

    def render(self):
        return (_EPOCH_DT + timedelta(seconds=self.epoch_s)).isoformat(sep="T")


@dataclass
class ArrayGene(Gene):
    """Sequence of homogeneous elements cloned from a prototype."""

    name: str
    min_size: int
    max_size: int
    prototype: Gene
    elements: list[Gene] = field(default_factory=list)
    mutable: bool = True

    def copy(self):
        return ArrayGene(self.name, self.min_size, self.max_size,
                         self.prototype.copy(),
                         [e.copy() for e in self.elements], self.mutable)

    def randomize(self, rng):
        n = rng.randint(self.min_size, self.max_size)
        self.elements = []
        for _ in range(n):
            elem = self.prototype.copy()
            elem.randomize(rng)
            self.elements.append(elem)

    def mutate(self, rng):
        can_grow = len(self.elements) < self.max_size
        can_shrink = len(self.elements) > self.min_size
        r = rng.random()
        if r < 0.25 and can_grow:
            elem = self.prototype.copy()
            elem.randomize(rng)
            self.elements.insert(rng.randint(0, len(self.elements)), elem)
            return True
        if r < 0.5 and can_shrink and self.elements:
            del self.elements[rng.randrange(len(self.elements))]
            return True
        mutable_elems = [e for e in self.elements if e.mutable]
        if mutable_elems:
            return rng.choice(mutable_elems).mutate(rng)
        if can_grow:
            elem = self.prototype.copy()
            elem.randomize(rng)
            self.elements.append(elem)
            return True
        if can_shrink and self.elements:
            del self.elements[rng.randrange(len(self.elements))]
            return True
        return False

    def render(self):
        return [e.render() for e in self.elements]


@dataclass
class MapGene(Gene):
    """Key/value entries; keys stay unique under phenotype equality."""

    name: str
    min_size: int
    max_size: int
    key_prototype: Gene
    value_prototype: Gene
    entries: list[tuple[Gene, Gene]] = field(default_factory=list)
    mutable: bool = True

    def copy(self):
        return MapGene(self.name, self.min_size, self.max_size,
                       self.key_prototype.copy(), self.value_prototype.copy(),
                       [(k.copy(), v.copy()) for k, v in self.entries],
                       self.mutable)

    def _keys(self) -> set:
        return {k.render() for k, _ in self.entries}

    def _fresh_entry(self, rng) -> Optional[tuple[Gene, Gene]]:
        used = self._keys()
        for _ in range(20):
            k = self.key_prototype.copy()
            k.randomize(rng)
            if k.render() not in used:
                v = self.value_prototype.copy()
                v.randomize(rng)
                return (k, v)
        return None

    def randomize(self, rng):
        n = rng.randint(self.min_size, self.max_size)
        self.entries = []
        for _ in range(n):
            entry = self._fresh_entry(rng)
            if entry is None:
                break           # key space exhausted; keep what fits
            self.entries.append(entry)

    def mutate(self, rng):
        r = rng.random()
        if r < 0.2 and len(self.entries) < self.max_size:
            entry = self._fresh_entry(rng)
            if entry is not None:
                self.entries.append(entry)
                return True
        if r < 0.4 and len(self.entries) > self.min_size and self.entries:
            del self.entries[rng.randrange(len(self.entries))]
            return True
        if not self.entries:
            if len(self.entries) < self.max_size:
                entry = self._fresh_entry(rng)
                if entry is not None:
                    self.entries.append(entry)
                    return True
            return False
        idx = rng.randrange(len(self.entries))
        key, value = self.entries[idx]
        if r < 0.6 and key.mutable:
            trial = key.copy()
            if trial.mutate(rng):
                others = {k.render() for i, (k, _) in enumerate(self.entries) if i != idx}
                if trial.render() not in others:
                    self.entries[idx] = (trial, value)
                    return True
        if value.mutable:
            return value.mutate(rng)
        return False

    def render(self):
        return {k.render(): v.render() for k, v in self.entries}


@dataclass
class ObjectGene(Gene):
    name: str
    type_name: str
    fields: list[Gene] = field(default_factory=list)
    mutable: bool = True

    def copy(self):
        return ObjectGene(self.name, self.type_name,
                          [f.copy() for f in self.fields], self.mutable)

    def randomize(self, rng):
        for f in self.fields:
            if f.mutable:
                f.randomize(rng)

    def mutate(self, rng):
        candidates = [f for f in self.fields if f.mutable]
        rng.shuffle(candidates)
        for f in candidates:
            if f.mutate(rng):
                return True
        return False

    def render(self):
        return {f.name: f.render() for f in self.fields}


@dataclass
class CycleObjectGene(Gene):
    """Placeholder for a field whose type would recurse forever; renders null."""

    name: str
    type_name: str
    mutable: bool = True

    def copy(self):
        return CycleObjectGene(self.name, self.type_name, self.mutable)

    def randomize(self, rng):
        pass

    def mutate(self, rng):
        return False

    def render(self):
        return None


@dataclass
class OptionalGene(Gene):
    """Nullable wrapper; absent renders as null."""

    name: str
    inner: Gene
    present: bool = True
    mutable: bool = True

    def copy(self):
        return OptionalGene(self.name, self.inner.copy(), self.present, self.mutable)

    def randomize(self, rng):
        self.present = rng.random() < P_PRESENT
        self.inner.randomize(rng)

    def mutate(self, rng):
        if not self.present or rng.random() < P_PRESENCE_FLIP:
            self.present = not self.present
            return True
        if self.inner.mutable and self.inner.mutate(rng):
            return True
        self.present = not self.present
        return True

    def render(self):
        return self.inner.render() if self.present else None


@dataclass
class SeededGene(Gene):
    """Choice between a searched gene and an enumerated candidate of the same type."""

    name: str
    inner: Gene
    seeded: EnumGene
    employ_seeded: bool = True
    mutable: bool = True

    def copy(self):
        return SeededGene(self.name, self.inner.copy(), self.seeded.copy(),
                          self.employ_seeded, self.mutable)

    def randomize(self, rng):
        self.employ_seeded = rng.random() < (1.0 - P_SEED_FLIP)
        self.inner.randomize(rng)
        self.seeded.randomize(rng)

    def mutate(self, rng):
        if rng.random() < P_SEED_FLIP:
            self.employ_seeded = not self.employ_seeded
            return True
        active = self.seeded if self.employ_seeded else self.inner
        if active.mutable and active.mutate(rng):
            return True
        self.employ_seeded = not self.employ_seeded
        return True

    def render(self):
        return self.seeded.render() if self.employ_seeded else self.inner.render()
