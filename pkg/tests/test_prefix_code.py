import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from metabio.dyadic import SparseDyadic
from metabio.prefix_code import (
    INTEGER_CODE_MASS, BitReader, DecodeError, FairCoin, MalformedCode, NotPrefixFree,
    StreamExhausted, binary, ceil_log2, decode_efficient, decode_integer, decode_naive,
    draw_integer, efficient_length, encode_efficient, encode_integer, encode_naive,
    integer_code_length, integer_size, is_prefix_free, kraft_sum, sample_integer)

bitstrings = st.text(alphabet="01", max_size=64)


def all_strings(max_len):
    for n in range(max_len + 1):
        for bits in itertools.product("01", repeat=n):
            yield "".join(bits)


# -- naive code --


@pytest.mark.parametrize("x, code", [("0", "010"), ("11", "00111"), ("", "1"), ("01", "00101")])
def test_encode_naive_table(x, code):
    assert encode_naive(x) == code


def test_decode_naive_examples():
    assert decode_naive("00101") == ("01", 5)
    assert decode_naive("1") == ("", 1)


def test_decode_naive_concatenated_stream():
    r = BitReader("01011")
    assert decode_naive(r) == ("0", 3)
    assert decode_naive(r) == ("", 1)  # the leftover "11" starts with the codeword "1"
    assert r.consumed == 4


@pytest.mark.xfail(strict=True, reason="leftover '11' begins with the complete codeword '1'")
def test_decode_naive_concatenated_stream_stated_failure():
    r = BitReader("01011")
    decode_naive(r)
    with pytest.raises(StreamExhausted):
        decode_naive(r)


def test_decode_naive_exhausted():
    with pytest.raises(StreamExhausted):
        decode_naive("0001")
    with pytest.raises(StreamExhausted):
        decode_naive("")


@given(bitstrings)
def test_naive_round_trip_and_length(x):
    code = encode_naive(x)
    assert len(code) == 2 * len(x) + 1
    assert decode_naive(code + "0110") == (x, len(code))


# -- efficient code --


def test_efficient_examples():
    assert encode_efficient("") == "010"
    assert encode_efficient("1") == "0111"
    assert encode_efficient("0110") == "0001100" + "0110"
    x = "10101010"
    code = encode_efficient(x)
    assert len(code) == 17
    assert code[:9] == encode_naive("1000")


def test_efficient_round_trip_exhaustive_to_12():
    for x in all_strings(12):
        code = encode_efficient(x)
        assert decode_efficient(code) == (x, len(code))
        assert len(code) == efficient_length(len(x))


def test_efficient_size_formula():
    for n in range(1, 4097):
        assert efficient_length(n) == n + 2 * ceil_log2(n + 1) + 1
    assert efficient_length(0) == 3  # binary(0) is one bit long


def test_decode_efficient_rejects_noncanonical_header():
    with pytest.raises(MalformedCode):
        decode_efficient(encode_naive("01") + "0")
    with pytest.raises(MalformedCode):
        decode_efficient("1")  # empty header


def test_code_sets_are_prefix_free():
    words = list(all_strings(8))
    assert is_prefix_free([encode_naive(x) for x in words])
    assert is_prefix_free([encode_efficient(x) for x in words])
    assert is_prefix_free([encode_integer(k) for k in range(5000)])


# -- integers --


@pytest.mark.parametrize("k, size", [(0, 1), (1, 2), (7, 4), (8, 5), (1023, 11)])
def test_integer_size(k, size):
    assert integer_size(k) == size


def test_binary_and_ceil_log2():
    assert binary(0) == "0"
    assert binary(5) == "101"
    assert [ceil_log2(m) for m in (1, 2, 3, 4, 5, 8, 9)] == [0, 1, 2, 2, 3, 3, 4]


@pytest.mark.parametrize("k, code", [(0, "0110"), (1, "0111"), (2, "0011010"), (5, "00111101")])
def test_encode_integer_table(k, code):
    assert encode_integer(k) == code


def test_integer_round_trip_0_to_4096():
    for k in range(4097):
        code = encode_integer(k)
        assert decode_integer(code + "1") == (k, len(code))
        assert integer_code_length(k) == len(code)


def test_integer_length_formula_for_positive_k():
    for k in range(1, 5000):
        L = ceil_log2(k + 1)
        assert integer_code_length(k) == L + 2 * ceil_log2(L + 1) + 1
    assert integer_code_length(0) == 4


def test_integer_length_nondecreasing_within_binary_length_class():
    for L in range(1, 14):
        lengths = [integer_code_length(k) for k in range(1 << (L - 1), 1 << L)]
        assert lengths == sorted(lengths)


def test_decode_integer_rejects_leading_zero_payload():
    with pytest.raises(MalformedCode):
        decode_integer(encode_efficient("01"))


def test_kraft_of_integer_code_up_to_2_16():
    total = Fraction(0)
    for k in range(1, (1 << 16) + 1):
        total += Fraction(1, 1 << integer_code_length(k))
    assert total < 1
    assert total < Fraction(3, 16)


def test_total_integer_code_mass_is_three_sixteenths():
    # sum over binary-length classes; lengths beyond 2**20 contribute < 2**-20
    total = Fraction(0)
    for L in range(1, 1 << 12):
        count = 2 if L == 1 else 1 << (L - 1)
        total += Fraction(count, 1 << efficient_length(L))
    assert Fraction(3, 16) - total < Fraction(1, 1 << 14)
    assert INTEGER_CODE_MASS == 3 / 16


# -- Kraft --


def test_kraft_examples():
    assert kraft_sum(["0", "10", "11"]) == SparseDyadic(1)
    assert kraft_sum(["010", "011"]) == SparseDyadic(0, [2])
    with pytest.raises(NotPrefixFree):
        kraft_sum(["0", "01"])


@given(st.sets(bitstrings.filter(bool), max_size=30))
def test_kraft_of_encoded_sets_at_most_one(words):
    codes = [encode_efficient(w) for w in words]
    assert kraft_sum(codes) <= SparseDyadic(1)


def test_is_prefix_free_detects_nonneighbour_prefix():
    assert not is_prefix_free(["01", "0110", "0101"])
    assert is_prefix_free([])


# -- sampling --


def test_bounded_draw_agrees_with_full_decoding():
    rng = np.random.default_rng(8)
    for _ in range(3000):
        flips = "".join(map(str, rng.integers(0, 2, size=64)))
        try:
            full = decode_integer(flips)[0]
        except MalformedCode:
            full = None
        except DecodeError:
            full = 10**9  # codeword longer than the 64 flips: certainly a huge value
        bounded = draw_integer(iter(flips), max_value=9)
        assert bounded == (full if full is not None and full <= 9 else None)


def test_draw_integer_first_flips_decide():
    assert draw_integer(iter("0111")) == 1
    assert draw_integer(iter("0110")) == 0
    assert draw_integer(iter("0101")) is None  # "010" then payload "1": header says 0 bits
    with pytest.raises(DecodeError):
        draw_integer(iter([0] * 100), max_bits=50)


def test_fair_coin_is_reproducible():
    a = [next(FairCoin(7)) for _ in range(1)]
    c1, c2 = FairCoin(7), FairCoin(7)
    assert [next(c1) for _ in range(10000)] == [next(c2) for _ in range(10000)]
    assert set(a) <= {0, 1}


@pytest.mark.slow
def test_raw_trial_frequency_of_one_matches_code_length():
    coin = FairCoin(np.random.default_rng(11))
    n = 10**6
    # a bounded draw stops reading once the value is out of range, so no trial can hit the bit cap
    hits = sum(1 for _ in range(n) if draw_integer(coin, max_value=1 << 16) == 1)
    p = 2.0 ** -integer_code_length(1)
    sigma = (n * p * (1 - p)) ** 0.5
    assert abs(hits - n * p) < 3 * sigma


def test_raw_trial_frequency_ratio():
    coin = FairCoin(np.random.default_rng(5))
    draws = [draw_integer(coin, max_value=1 << 16) for _ in range(300_000)]
    n2, n4 = draws.count(2), draws.count(4)
    expected = 2.0 ** (integer_code_length(2) - integer_code_length(4))
    # n2 ~ 2343, n4 ~ 1171: the ratio's relative sd is about 3.6%
    assert abs(n4 / n2 - expected) < 0.15 * expected


def test_sample_integer_is_normalised_distribution():
    coin = FairCoin(np.random.default_rng(3))
    draws = [sample_integer(coin) for _ in range(60_000)]
    assert min(draws) >= 0
    freq1 = draws.count(1) / len(draws)
    p1 = 2.0 ** -integer_code_length(1) / INTEGER_CODE_MASS  # 1/3
    assert abs(freq1 - p1) < 4 * (p1 * (1 - p1) / len(draws)) ** 0.5
