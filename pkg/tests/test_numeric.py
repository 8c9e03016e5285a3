import random

import pytest
from hypothesis import given, strategies as st

from ntisp.errors import ParseError, ValidationError
from ntisp.sublinear import numeric as nm


def test_partition_examples():
    assert nm.stream_partition([1, 2, 3], mode="search").verdict == nm.SAT
    assert nm.stream_partition([1, 2], mode="search").verdict == nm.UNSAT
    assert nm.stream_partition([], base=2, mode="search").verdict == nm.SAT


def test_partition_verify():
    r = nm.stream_partition([1, 2, 3], mode="verify", cert=[1, 1, 0])
    assert r.verdict == nm.SAT
    assert nm.stream_partition([1, 2, 3], mode="verify", cert=[1, 0, 0]).verdict == nm.UNSAT
    with pytest.raises(ValidationError):
        nm.stream_partition([1, 2, 3], mode="verify", cert=[1, 0])


def test_knapsack_examples():
    assert nm.stream_knapsack([(1, 1)], 1, 1, mode="search").verdict == nm.SAT
    r = nm.stream_knapsack([(2, 3)], 1, 1, mode="search")
    assert r.verdict == nm.UNSAT
    assert nm.stream_knapsack([(2, 3)], 1, 1, mode="verify", cert=[1]).reason == "total size exceeds B"
    assert nm.stream_knapsack([(2, 3)], 1, 1, mode="verify", cert=[0]).reason == "total value below K"


def test_digits():
    assert nm.digits_of(0, 7) == (0,)
    assert nm.digits_of(10, 3) == (1, 0, 1)
    assert nm.value_of((1, 0, 1), 3) == 10
    with pytest.raises(ValidationError):
        nm.digits_of(-1, 2)


def test_small_limit():
    assert [nm.small_limit(n) for n in (1, 4, 5, 9, 10)] == [0, 1, 2, 2, 3]


def test_digit_strings_validated():
    with pytest.raises(ValidationError):
        nm.stream_partition([(1, 5)], base=4, mode="search")
    with pytest.raises(ValidationError):
        nm.stream_partition([()], base=4, mode="search")


def test_load_numbers():
    nums, base = nm.load_numbers("base 10\n1 2\n3\n")
    assert nums == [(1, 2), (3,)] and base == 10
    nums, base = nm.load_numbers("1 2\n3\n")
    assert base == 4  # max(2, 3 digits, largest digit 3 + 1)
    with pytest.raises(ParseError):
        nm.load_numbers("1 x\n")
    with pytest.raises(ParseError):
        nm.load_numbers("base 2\n1 2\n")


def test_load_knapsack():
    items, B, K, base = nm.load_knapsack("base 10\nB: 5\nK: 4\nitem: 2 | 3\nitem: 4 | 1\n")
    assert items == [((2,), (3,)), ((4,), (1,))] and B == (5,) and K == (4,) and base == 10
    with pytest.raises(ParseError):
        nm.load_knapsack("B: 5\nitem: 2\n")


def _random_numbers(rng, width=30):
    base = rng.choice([2, 3, 10])
    k = rng.randint(0, 8)
    vals = [rng.randrange(base ** rng.randint(1, width // 4 or 1)) for _ in range(k)]
    return vals, base


@given(st.integers(0, 10 ** 6))
def test_partition_agrees_with_dp(seed):
    vals, base = _random_numbers(random.Random(seed))
    res = nm.stream_partition([nm.digits_of(v, base) for v in vals], base, "search")
    assert (res.verdict == nm.SAT) == nm.partition_oracle(vals)
    if res.verdict == nm.SAT:
        side = [v for v, b in zip(vals, res.certificate) if b]
        assert 2 * sum(side) == sum(vals)


@given(st.integers(0, 10 ** 6))
def test_knapsack_agrees_with_dp(seed):
    rng = random.Random(seed)
    items = [(rng.randint(0, 50), rng.randint(0, 50)) for _ in range(rng.randint(0, 8))]
    B, K = rng.randint(0, 120), rng.randint(0, 150)
    res = nm.stream_knapsack(items, B, K, base=10, mode="search")
    assert (res.verdict == nm.SAT) == nm.knapsack_oracle(items, B, K)


@given(st.lists(st.integers(0, 10 ** 9), max_size=8), st.integers(2, 16))
def test_mixed_lengths_sum_exactly(vals, base):
    # the sweep must agree with Python integers regardless of the split
    nums = [nm.digits_of(v, base) for v in vals]
    bits = [i % 2 for i in range(len(vals))]
    r = nm.stream_partition(nums, base, "verify", bits)
    want = sum(v for v, b in zip(vals, bits) if b) == sum(v for v, b in zip(vals, bits) if not b)
    assert (r.verdict == nm.SAT) == want


def test_registers_stay_near_sqrt():
    from ntisp.cli import partition_family
    ratios = []
    for n in (100, 400, 1600, 6400):
        nums, base = partition_family(n, random.Random(1))
        r = nm.stream_partition(nums, base, "verify", [i % 2 for i in range(len(nums))])
        ratios.append(r.peak_registers / r.size ** 0.5)
    assert max(ratios) / min(ratios) <= 3
