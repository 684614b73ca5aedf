import hashlib
import random

import pytest
from hypothesis import given, settings, strategies as st

from metabio.dyadic import SparseDyadic
from metabio.oracle import (EnumeratedOmegaOracle, OracleError, OracleUnknown, RandomOmegaOracle,
                            Verdict, parse_seed)

D = SparseDyadic


def direct_bit(seed: int, i: int) -> int:
    j, off = divmod(i - 1, 512)
    digest = hashlib.blake2b(j.to_bytes(16, "little"), key=seed.to_bytes(8, "little"),
                             digest_size=64).digest()
    return (int.from_bytes(digest, "big") >> (511 - off)) & 1


def compare_prefix(o: RandomOmegaOracle, v: SparseDyadic, m: int) -> Verdict:
    """Reference answer from readouts alone (assumes no long run of equal digits)."""
    if v.integer >= 1:
        return Verdict.NOT_BELOW
    mine, theirs = v.prefix_bits(m), o.true_bits(m)
    return Verdict.BELOW if mine < theirs else Verdict.NOT_BELOW


def test_frozen_leading_digits():
    assert RandomOmegaOracle(0).true_bits(8) == "10101111"
    assert RandomOmegaOracle(4).true_bits(8) == "11010101"
    assert RandomOmegaOracle("0x5").true_bits(8) == "00001100"


def test_seeded_half_is_below():
    o = RandomOmegaOracle(0)
    assert o.true_bits(3) == "101"
    assert o.query(D(0, [1])) is Verdict.BELOW
    assert o.query(D(0, [1, 2])) is Verdict.NOT_BELOW
    assert o.query(D(0, [1, 3])) is Verdict.BELOW  # 0.101 then a later 1 digit


def test_zero_and_one():
    for seed in range(5):
        o = RandomOmegaOracle(seed)
        assert o.query(D.zero()) is Verdict.BELOW
        assert o.query(D(1)) is Verdict.NOT_BELOW
        assert o.query(D(3, [2])) is Verdict.NOT_BELOW


@pytest.mark.parametrize("seed", [0, 1, 0xDEADBEEF, 2**64 - 1])
def test_bits_match_direct_evaluation(seed):
    o = RandomOmegaOracle(seed)
    bits = o.true_bits(1500)
    assert bits == "".join(str(direct_bit(seed, i)) for i in range(1, 1501))
    assert [o.bit(i) for i in (1, 512, 513, 1500)] == [int(bits[i - 1]) for i in (1, 512, 513, 1500)]


def test_far_bits_are_index_addressable():
    seed = 77
    o = RandomOmegaOracle(seed)
    for i in (10**6, 20 << 20, 402_653_184, 10**12):
        assert o.bit(i) == direct_bit_far(seed, i)
    assert o.max_index == 10**12


def direct_bit_far(seed, i):
    j, off = divmod(i - 1, 512)
    msg = j.to_bytes(max(16, (j.bit_length() + 7) // 8), "little")
    digest = hashlib.blake2b(msg, key=seed.to_bytes(8, "little"), digest_size=64).digest()
    return (int.from_bytes(digest, "big") >> (511 - off)) & 1


def test_prefix_property():
    o = RandomOmegaOracle(9)
    for n in (1, 7, 100, 511, 512, 513, 3000):
        assert o.true_bits(n + 4).startswith(o.true_bits(n))


def test_true_bits_rejects_zero():
    with pytest.raises(ValueError):
        RandomOmegaOracle(1).true_bits(0)


def test_first_one():
    o = RandomOmegaOracle(5)  # 0.00001100...
    assert o.first_one(1) == 5
    assert o.first_one(1, 5) is None
    assert o.first_one(7) > 6


def test_parse_seed():
    assert parse_seed("0x10") == 16
    assert parse_seed("42") == 42
    assert parse_seed(2**64 + 3) == 3
    with pytest.raises(ValueError):
        parse_seed(-1)


def test_scan_cap_is_a_hard_error(monkeypatch):
    o = RandomOmegaOracle(1)
    monkeypatch.setattr(o, "_block", lambda j: 0)
    with pytest.raises(OracleError):
        o.first_one(1)


@given(st.integers(0, 2**64 - 1), st.lists(st.integers(1, 200), max_size=12))
@settings(max_examples=300)
def test_query_agrees_with_readout_comparison(seed, exps):
    o = RandomOmegaOracle(seed)
    v = D(0, exps)
    assert o.query(v) is compare_prefix(o, v, 400)


def test_sparse_path_agrees_with_dense_path():
    rng = random.Random(3)
    o = RandomOmegaOracle(123)
    prefix = o.true_bits(70_000)
    ones = [i + 1 for i, c in enumerate(prefix) if c == "1"]
    for _ in range(20):
        cut = rng.randint(65_537, 69_990)
        head = [e for e in ones if e <= cut]
        # truncations of Omega are below; bumping the last digit lands above
        assert o.query(D(0, head)) is Verdict.BELOW
        bumped = D(0, head).add_power(cut)
        assert o.query(bumped) is Verdict.NOT_BELOW
        assert o.query(D(0, head[:-1]).add_power(head[-1] + 1)) is Verdict.BELOW


def test_consistency_of_answers():
    rng = random.Random(11)
    o = RandomOmegaOracle(31)
    below, above = [], []
    for _ in range(500):
        v = D(0, rng.sample(range(1, 40), rng.randint(1, 6)))
        (below if o.is_below(v) else above).append(v)
    assert below and above
    assert max(below) < min(above)


def test_far_exponent_queries():
    o = RandomOmegaOracle(2)
    e = 20 << 20
    head = o.value_prefix(30)
    nxt = o.first_one(31)
    # equal to Omega through digit 30, so the first 1 digit after 30 decides
    assert o.query(head.add_power(e)) is (Verdict.BELOW if nxt < e else Verdict.NOT_BELOW)
    far = D(0, [e])
    assert o.query(far) is Verdict.BELOW
    assert o.bit(e) in (0, 1) and o.max_index >= e


# -- enumerated backend --


@pytest.fixture(scope="module")
def enumerated():
    return EnumeratedOmegaOracle(12, 10_000)


def test_enumerated_bracket(enumerated):
    assert enumerated.lower == D.parse("0.{2,5,6,7}")
    assert enumerated.tail == D.parse("0.{1,3,5,6,7,9}")
    assert enumerated.upper < D(1)


def test_enumerated_answers_only_when_certified(enumerated):
    assert enumerated.query(D.zero()) is Verdict.BELOW
    assert enumerated.query(D(0, [2])) is Verdict.BELOW
    assert enumerated.query(D(1)) is Verdict.NOT_BELOW
    assert enumerated.query(D(0, [1])) is Verdict.UNKNOWN
    with pytest.raises(OracleUnknown):
        enumerated.is_below(D(0, [1]))


def test_enumerated_certifies_no_digit_at_12(enumerated):
    assert enumerated.certified_bits() == 0
    with pytest.raises(OracleUnknown):
        enumerated.true_bits(1)


@pytest.mark.xfail(strict=True, raises=OracleUnknown,
                   reason="lower bound 0.305 and upper bound 0.986 straddle 1/2")
def test_enumerated_two_digits_at_12(enumerated):
    assert len(enumerated.true_bits(2)) == 2


def test_enumerated_answers_agree_with_longer_enumeration(enumerated):
    longer = EnumeratedOmegaOracle(16, 10_000)
    rng = random.Random(5)
    for _ in range(300):
        v = D(0, rng.sample(range(1, 14), rng.randint(0, 5)))
        a, b = enumerated.query(v), longer.query(v)
        if a is not Verdict.UNKNOWN:
            assert b is a
