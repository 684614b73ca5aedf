"""Fitness oracles deciding whether a candidate lower bound is still below Omega.

Two stand-ins for the (noncomputable) halting probability:

``RandomOmegaOracle``
    Omega's binary digits are a keyed hash of the digit index, so any digit
    can be read in O(1) without generating the ones before it.  Entangled
    runs touch digits near ``N * 2**N``, which rules out a stored stream.

``EnumeratedOmegaOracle``
    Brackets the toy machine's Omega between the enumerated lower bound and
    that bound plus the mass of every unresolved subtree, and only answers
    when the bracket decides the question.
"""

from __future__ import annotations

import abc
import enum
import hashlib

from metabio.dyadic import SparseDyadic
from metabio import toy_machine

SCAN_CAP = 10**6
_BLOCK_BITS = 512
_DENSE_LIMIT = 1 << 16


class Verdict(enum.Enum):
    BELOW = "below"
    NOT_BELOW = "not_below"
    UNKNOWN = "unknown"


class OracleError(RuntimeError):
    pass


class OracleUnknown(OracleError):
    """The oracle could not certify an answer."""


class OmegaOracle(abc.ABC):
    @abc.abstractmethod
    def query(self, v: SparseDyadic) -> Verdict:
        """BELOW iff ``v < Omega``."""

    @abc.abstractmethod
    def true_bits(self, n: int) -> str:
        """First ``n`` fractional digits of Omega."""

    def is_below(self, v: SparseDyadic) -> bool:
        verdict = self.query(v)
        if verdict is Verdict.UNKNOWN:
            raise OracleUnknown(f"oracle cannot decide {v}")
        return verdict is Verdict.BELOW


def parse_seed(text: str | int) -> int:
    """Accept decimal or ``0x`` hex; reduce to 64 bits."""
    value = int(text, 0) if isinstance(text, str) else int(text)
    if value < 0:
        raise ValueError("seed must be nonnegative")
    return value & 0xFFFF_FFFF_FFFF_FFFF


class RandomOmegaOracle(OmegaOracle):
    """Omega = 0.w1 w2 w3 ... with ``w_i`` a keyed BLAKE2b bit of ``i``."""

    def __init__(self, seed: int | str):
        self.seed = parse_seed(seed)
        self._key = self.seed.to_bytes(8, "little")
        self._blocks: dict[int, int] = {}
        self._prefix = 0
        self._prefix_blocks = 0
        self.max_index = 0

    def __repr__(self):
        return f"RandomOmegaOracle(seed={self.seed:#x})"

    def _block(self, j: int) -> int:
        blk = self._blocks.get(j)
        if blk is None:
            if len(self._blocks) > 4096:
                self._blocks.clear()
            msg = j.to_bytes(max(16, (j.bit_length() + 7) // 8), "little")
            digest = hashlib.blake2b(msg, key=self._key, digest_size=64).digest()
            blk = self._blocks[j] = int.from_bytes(digest, "big")
        return blk

    def bit(self, i: int) -> int:
        if i < 1:
            raise ValueError("digit index starts at 1")
        if i > self.max_index:
            self.max_index = i
        j, off = divmod(i - 1, _BLOCK_BITS)
        return (self._block(j) >> (_BLOCK_BITS - 1 - off)) & 1

    def first_one(self, start: int, stop: int | None = None) -> int | None:
        """Smallest ``i`` in ``[start, stop)`` with ``w_i == 1``.

        With ``stop=None`` the scan is open-ended; more than ``SCAN_CAP`` zero
        digits in a row raises :class:`OracleError` (probability 2**-10**6).
        """
        i = start
        limit = start + SCAN_CAP
        while stop is None or i < stop:
            if i >= limit:
                raise OracleError(f"no 1 digit within {SCAN_CAP} positions of {start}")
            j, off = divmod(i - 1, _BLOCK_BITS)
            rest = self._block(j) & ((1 << (_BLOCK_BITS - off)) - 1)
            if rest:
                hit = j * _BLOCK_BITS + _BLOCK_BITS - rest.bit_length() + 1
                if stop is not None and hit >= stop:
                    self.max_index = max(self.max_index, stop - 1)
                    return None
                self.max_index = max(self.max_index, hit)
                return hit
            i = (j + 1) * _BLOCK_BITS + 1
        self.max_index = max(self.max_index, stop - 1)
        return None

    def _prefix_int(self, n: int) -> int:
        """``floor(Omega * 2**n)`` for moderate n."""
        need = -(-n // _BLOCK_BITS)
        if need > self._prefix_blocks:
            grow = max(need, 2 * self._prefix_blocks)
            acc = self._prefix
            for j in range(self._prefix_blocks, grow):
                acc = (acc << _BLOCK_BITS) | self._block(j)
            self._prefix, self._prefix_blocks = acc, grow
        self.max_index = max(self.max_index, n)
        return self._prefix >> (self._prefix_blocks * _BLOCK_BITS - n)

    def query(self, v: SparseDyadic) -> Verdict:
        if v.integer >= 1:
            return Verdict.NOT_BELOW
        exps = v.exponents
        if not exps:
            self.first_one(1)
            return Verdict.BELOW
        top = exps[-1]
        if top <= _DENSE_LIMIT:
            mine = v.fraction_int()
            theirs = self._prefix_int(top)
            if mine != theirs:
                return Verdict.BELOW if mine < theirs else Verdict.NOT_BELOW
        else:
            pos = 1
            for e in exps:
                if self.first_one(pos, e) is not None:
                    return Verdict.BELOW
                if not self.bit(e):
                    return Verdict.NOT_BELOW
                pos = e + 1
        # v equals Omega truncated at its last digit; Omega is larger iff a 1 follows
        self.first_one(top + 1)
        return Verdict.BELOW

    def true_bits(self, n: int) -> str:
        if n < 1:
            raise ValueError("n must be >= 1")
        return format(self._prefix_int(n), f"0{n}b")

    def value_prefix(self, n: int) -> SparseDyadic:
        """Omega truncated after ``n`` digits."""
        return SparseDyadic.from_bits(self.true_bits(n))


class EnumeratedOmegaOracle(OmegaOracle):
    """Certified answers about the toy machine's own halting probability."""

    def __init__(self, max_len: int, step_budget: int):
        dom = toy_machine.enumerate_domain(max_len, step_budget)
        self.max_len = max_len
        self.step_budget = step_budget
        self.lower = dom.omega()
        self.tail = dom.tail()
        self.upper = self.lower + self.tail

    def __repr__(self):
        return f"EnumeratedOmegaOracle(max_len={self.max_len}, step_budget={self.step_budget})"

    def query(self, v: SparseDyadic) -> Verdict:
        # lower <= Omega <= upper
        if v < self.lower:
            return Verdict.BELOW
        if v >= self.upper:
            return Verdict.NOT_BELOW
        return Verdict.UNKNOWN

    def certified_bits(self) -> int:
        """Number of leading digits shared by every value in ``[lower, upper]``."""
        if self.lower.integer != self.upper.integer:
            return 0
        limit = max(self.lower.max_exponent, self.upper.max_exponent)
        n = 0
        while n < limit and self.lower.bit_at(n + 1) == self.upper.bit_at(n + 1):
            n += 1
        return n

    def true_bits(self, n: int) -> str:
        if n < 1:
            raise ValueError("n must be >= 1")
        have = self.certified_bits()
        if have < n:
            raise OracleUnknown(f"only {have} digits certified at max_len={self.max_len}")
        return self.lower.prefix_bits(n)
