"""Self-delimiting encodings of bit-strings and naturals.

Bit-strings are plain ``str`` objects over ``"0"``/``"1"``; the empty string
is the blank word.  Decoders read from any iterable of bits (``str``, list of
ints, a :class:`FairCoin`, ...) and report how many bits they consumed.

Two constructions are provided:

* naive:      ``x -> 0^n 1 x``                      (|out| = 2n + 1)
* efficient:  ``x -> naive(binary(n)) x``          (|out| = n + 2|binary(n)| + 1)

Integers are coded as ``efficient(binary(k))`` and are therefore prefix-free
over all naturals.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator

import numpy as np

from metabio.dyadic import SparseDyadic

BitString = str

MAX_SAMPLE_BITS = 10**6


class DecodeError(ValueError):
    """Raised when a bit stream cannot be decoded."""


class StreamExhausted(DecodeError):
    pass


class MalformedCode(DecodeError):
    """The stream does not start with a codeword of the requested code."""


class NotPrefixFree(ValueError):
    pass


class BitReader:
    """Pull bits one at a time from an iterable, counting what was consumed."""

    def __init__(self, source: Iterable, limit: int | None = None):
        self._it: Iterator = iter(source)
        self.consumed = 0
        self.limit = limit

    def bit(self) -> str:
        if self.limit is not None and self.consumed >= self.limit:
            raise DecodeError(f"bit cap of {self.limit} exceeded")
        try:
            b = next(self._it)
        except StopIteration:
            raise StreamExhausted(f"stream ended after {self.consumed} bits") from None
        self.consumed += 1
        if b in (1, "1", True):
            return "1"
        if b in (0, "0", False):
            return "0"
        raise DecodeError(f"not a bit: {b!r}")

    def read(self, n: int) -> str:
        return "".join(self.bit() for _ in range(n))


def _reader(stream) -> BitReader:
    return stream if isinstance(stream, BitReader) else BitReader(stream)


def binary(k: int) -> BitString:
    """Shortest binary representation of ``k``; ``binary(0) == "0"``."""
    if k < 0:
        raise ValueError("negative integer")
    return format(k, "b")


def ceil_log2(m: int) -> int:
    """Exact ``ceil(log2(m))`` for ``m >= 1``."""
    if m < 1:
        raise ValueError("ceil_log2 needs m >= 1")
    return (m - 1).bit_length()


def encode_naive(x: BitString) -> BitString:
    return "0" * len(x) + "1" + x


def decode_naive(stream) -> tuple[BitString, int]:
    r = _reader(stream)
    start = r.consumed
    n = 0
    while r.bit() == "0":
        n += 1
    x = r.read(n)
    return x, r.consumed - start


def encode_efficient(x: BitString) -> BitString:
    return encode_naive(binary(len(x))) + x


def efficient_length(n: int) -> int:
    """``|encode_efficient(x)|`` for ``|x| = n``.

    Equals ``n + 2*ceil(log2(n+1)) + 1`` for n >= 1; n = 0 costs 3 bits
    because ``binary(0)`` is the one-bit string ``"0"``.
    """
    return n + 2 * len(binary(n)) + 1


def _canonical_binary(s: str) -> bool:
    return s == "0" or s.startswith("1")


def decode_efficient(stream) -> tuple[BitString, int]:
    r = _reader(stream)
    start = r.consumed
    header, _ = decode_naive(r)
    if not header or not _canonical_binary(header):
        raise MalformedCode(f"length header {header!r} is not a canonical binary numeral")
    x = r.read(int(header, 2))
    return x, r.consumed - start


def integer_size(k: int) -> int:
    """``1 + ceil(log2(1 + k))``."""
    if k < 0:
        raise ValueError("negative integer")
    return 1 + ceil_log2(1 + k)


def encode_integer(k: int) -> BitString:
    return encode_efficient(binary(k))


def integer_code_length(k: int) -> int:
    """``|encode_integer(k)|`` without building the string."""
    return efficient_length(len(binary(k)))


def decode_integer(stream) -> tuple[int, int]:
    r = _reader(stream)
    start = r.consumed
    x, _ = decode_efficient(r)
    if not x or not _canonical_binary(x):
        raise MalformedCode(f"payload {x!r} is not a canonical binary numeral")
    return int(x, 2), r.consumed - start


def is_prefix_free(codes: Iterable[BitString]) -> bool:
    words = sorted(codes)
    # after sorting, any prefix relation shows up between neighbours
    for a, b in zip(words, words[1:]):
        if b.startswith(a):
            return False
    return True


def kraft_sum(codes: Iterable[BitString]) -> SparseDyadic:
    """Exact ``sum 2^-|c|`` over a prefix-free code set."""
    words = list(codes)
    if not is_prefix_free(words):
        raise NotPrefixFree("code set is not prefix-free")
    counts: dict[int, int] = {}
    for w in words:
        counts[len(w)] = counts.get(len(w), 0) + 1
    total = SparseDyadic.zero()
    for length, c in sorted(counts.items()):
        total = total.add_multiple(c, length)
    return total


class FairCoin:
    """Iterator of independent uniform bits drawn from a numpy Generator."""

    def __init__(self, rng: np.random.Generator | int | None = None, chunk: int = 4096):
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self._chunk = chunk
        self._buf: list[int] = []
        self._pos = 0
        self.flips = 0

    def __iter__(self):
        return self

    def __next__(self) -> int:
        if self._pos >= len(self._buf):
            raw = self.rng.integers(0, 256, size=self._chunk, dtype=np.uint8)
            self._buf = np.unpackbits(raw).tolist()
            self._pos = 0
        b = self._buf[self._pos]
        self._pos += 1
        self.flips += 1
        return b


def draw_integer(coin, max_bits: int = MAX_SAMPLE_BITS, max_value: int | None = None) -> int | None:
    """One decoding trial on a fair coin.

    Returns ``k`` when the flips begin with ``encode_integer(k)`` (probability
    exactly ``2^-|encode_integer(k)|``) and ``None`` when they spell something
    that is not a codeword.  The code is not complete, so roughly 13/16 of
    trials come back ``None``.

    With ``max_value`` set, a trial also returns ``None`` once its outcome is
    known to exceed ``max_value``, without reading the rest of the codeword.
    The flips left unread are independent of everything else, so the
    distribution of outcomes is unchanged.
    """
    r = BitReader(coin, limit=max_bits)
    n = 0
    while r.bit() == "0":
        n += 1
    header = r.read(n)
    if not header or not _canonical_binary(header):
        return None
    length = int(header, 2)
    if length == 0:
        return None
    if max_value is not None and length > max(1, max_value.bit_length()):
        return None
    first = r.bit()
    if length > 1 and first == "0":
        return None
    k = int(first + r.read(length - 1), 2)
    if max_value is not None and k > max_value:
        return None
    return k


def sample_integer(coin, max_bits: int = MAX_SAMPLE_BITS) -> int:
    """Draw a natural by repeated decoding trials until one is a codeword.

    ``P(k) = 2^-|encode_integer(k)| / (3/16)``; the normaliser is the total
    Kraft mass of the integer code.
    """
    r = BitReader(coin, limit=max_bits)
    while True:
        try:
            k, _ = decode_integer(r)
            return k
        except MalformedCode:
            continue


# total Kraft mass of encode_integer over all naturals
INTEGER_CODE_MASS = 3 / 16
