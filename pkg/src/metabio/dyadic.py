"""Exact sparse dyadic rationals.

A value is ``integer + sum(2**-e for e in exponents)`` with the exponents kept
sorted, distinct and >= 1.  Only the set bits are stored, so a number like
``2**-(20 * 2**20)`` costs one tuple slot.  The model only ever adds powers of
two and compares, which is all this type supports.
"""

from __future__ import annotations

import re
from bisect import bisect_left
from fractions import Fraction
from typing import Iterable


def _add_into(exps: list[int], integer: int, e: int) -> int:
    """Add ``2**-e`` to the (exps, integer) pair in place; returns the new integer part."""
    if e <= 0:
        return integer + (1 << -e)
    while True:
        i = bisect_left(exps, e)
        if i < len(exps) and exps[i] == e:
            # two copies of 2^-e carry into 2^-(e-1)
            del exps[i]
            e -= 1
            if e == 0:
                return integer + 1
        else:
            exps.insert(i, e)
            return integer


def _cmp_exps(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    if a == b:
        return 0
    n = min(len(a), len(b))
    if a[:n] == b[:n]:
        return 1 if len(a) > len(b) else -1
    # at the first difference the smaller exponent is the larger bit
    return 1 if a < b else -1


class SparseDyadic:
    __slots__ = ("integer", "exponents", "_dense")

    def __init__(self, integer: int = 0, exponents: Iterable[int] = ()):
        exps = tuple(exponents)
        if integer < 0:
            raise ValueError("SparseDyadic is nonnegative")
        if any(e < 1 for e in exps) or any(x >= y for x, y in zip(exps, exps[1:])):
            # not canonical: rebuild through the carry logic
            acc: list[int] = []
            for e in exps:
                integer = _add_into(acc, integer, e)
            exps = tuple(acc)
        self.integer = integer
        self.exponents = exps
        self._dense = None

    @classmethod
    def zero(cls) -> "SparseDyadic":
        return cls(0, ())

    @classmethod
    def power(cls, e: int) -> "SparseDyadic":
        return cls.zero().add_power(e)

    @classmethod
    def from_bits(cls, bits: str, integer: int = 0) -> "SparseDyadic":
        """Value ``integer + 0.b1 b2 ... bn`` (binary)."""
        return cls(integer, tuple(i + 1 for i, b in enumerate(bits) if b == "1"))

    @classmethod
    def parse(cls, text: str) -> "SparseDyadic":
        m = re.fullmatch(r"\s*(\d+)\.\{([\d,\s]*)\}\s*", text)
        if not m:
            raise ValueError(f"bad dyadic literal {text!r}")
        body = m.group(2).strip()
        exps = [int(t) for t in body.split(",")] if body else []
        return cls(int(m.group(1)), exps)

    # arithmetic ---------------------------------------------------------

    def add_power(self, e: int) -> "SparseDyadic":
        """``self + 2**-e`` with carries resolved; requires ``e >= 1``."""
        if e < 1:
            raise ValueError("exponent must be >= 1")
        exps = list(self.exponents)
        integer = _add_into(exps, self.integer, e)
        return SparseDyadic._raw(integer, tuple(exps))

    def add_multiple(self, count: int, e: int) -> "SparseDyadic":
        """``self + count * 2**-e`` for a natural ``count`` and any integer ``e``."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        if count == 0:
            return self
        exps = list(self.exponents)
        integer = self.integer
        j = 0
        while count:
            if count & 1:
                integer = _add_into(exps, integer, e - j)
            count >>= 1
            j += 1
        return SparseDyadic._raw(integer, tuple(exps))

    def __add__(self, other: "SparseDyadic") -> "SparseDyadic":
        if not isinstance(other, SparseDyadic):
            return NotImplemented
        exps = list(self.exponents)
        integer = self.integer + other.integer
        for e in other.exponents:
            integer = _add_into(exps, integer, e)
        return SparseDyadic._raw(integer, tuple(exps))

    @classmethod
    def _raw(cls, integer: int, exps: tuple[int, ...]) -> "SparseDyadic":
        obj = cls.__new__(cls)
        obj.integer = integer
        obj.exponents = exps
        obj._dense = None
        return obj

    # order --------------------------------------------------------------

    def compare(self, other: "SparseDyadic") -> int:
        """-1, 0 or 1 as ``self`` is below, equal to or above ``other``."""
        if self.integer != other.integer:
            return 1 if self.integer > other.integer else -1
        return _cmp_exps(self.exponents, other.exponents)

    def __eq__(self, other):
        if not isinstance(other, SparseDyadic):
            return NotImplemented
        return self.integer == other.integer and self.exponents == other.exponents

    def __hash__(self):
        return hash((self.integer, self.exponents))

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    # readout ------------------------------------------------------------

    @property
    def max_exponent(self) -> int:
        return self.exponents[-1] if self.exponents else 0

    def is_zero(self) -> bool:
        return self.integer == 0 and not self.exponents

    def bit_at(self, i: int) -> int:
        if i < 1:
            raise ValueError("fractional bit index starts at 1")
        j = bisect_left(self.exponents, i)
        return int(j < len(self.exponents) and self.exponents[j] == i)

    def prefix_bits(self, n: int) -> str:
        out = ["0"] * n
        for e in self.exponents:
            if e > n:
                break
            out[e - 1] = "1"
        return "".join(out)

    def fraction_int(self) -> int:
        """Fractional part scaled by ``2**max_exponent`` as a Python int (cached)."""
        if self._dense is None:
            top = self.max_exponent
            self._dense = sum(1 << (top - e) for e in self.exponents)
        return self._dense

    def to_fraction(self) -> Fraction:
        if self.max_exponent > 1 << 16:
            raise OverflowError("exponents too large for a dense Fraction")
        return self.integer + Fraction(self.fraction_int(), 1 << self.max_exponent)

    def __str__(self):
        return f"{self.integer}.{{{','.join(map(str, self.exponents))}}}"

    def __repr__(self):
        return f"SparseDyadic({self})"


def add_power(v: SparseDyadic, e: int) -> SparseDyadic:
    return v.add_power(e)


def compare(v: SparseDyadic, w: SparseDyadic) -> int:
    return v.compare(w)


def bit_at(v: SparseDyadic, i: int) -> int:
    return v.bit_at(i)


def prefix_bits(v: SparseDyadic, n: int) -> str:
    return v.prefix_bits(n)
