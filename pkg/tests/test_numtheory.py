import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shallowpac.numtheory import (
    ProblemParams,
    balanced_sizes,
    default_block_size,
    is_prime,
    majmod,
    parity,
    primes_up_to,
    signed_weight,
    weight,
)

PRIMES = [3, 5, 7, 11, 13, 23]


@pytest.mark.parametrize("p,expected", [(3, True), (23, True), (21, False), (2, True), (1, False), (97, True)])
def test_is_prime(p, expected):
    assert is_prime(p) is expected


def test_sieve_matches_trial_division():
    assert primes_up_to(500) == [q for q in range(501) if is_prime(q)]


@pytest.mark.parametrize("p,s,k,bit", [(3, 0, 0, 0), (3, 0, 2, 1), (23, 3, 9, 1), (3, 0, 1, 0), (5, 0, -1, 1)])
def test_majmod_examples(p, s, k, bit):
    assert majmod(p, s, k) == bit


def test_majmod_rejects_bad_arguments():
    with pytest.raises(ValueError):
        majmod(9, 0, 1)
    with pytest.raises(ValueError):
        majmod(5, 5, 1)


@pytest.mark.parametrize("x,bit", [("000", 0), ("101", 0), ("1110", 1)])
def test_parity(x, bit):
    assert parity(x) == bit


@pytest.mark.parametrize("x,h,val", [("0000", "1011", 0), ("1111", "0000", 4), ("1101", "0110", 1)])
def test_signed_weight_examples(x, h, val):
    assert signed_weight(x, h) == val


def test_signed_weight_length_mismatch():
    with pytest.raises(ValueError):
        signed_weight("101", "10")


@given(st.sampled_from(PRIMES), st.data(), st.integers(-1000, 1000))
def test_majmod_periodic_and_shift(p, data, k):
    s = data.draw(st.integers(0, p - 1))
    assert majmod(p, s, k) == majmod(p, s, k + p)
    assert majmod(p, s, k) == majmod(p, 0, k + s)


bits = st.lists(st.integers(0, 1), min_size=1, max_size=40)


@given(st.data())
def test_parity_is_linear(data):
    x = data.draw(bits)
    y = data.draw(st.lists(st.integers(0, 1), min_size=len(x), max_size=len(x)))
    xor = [a ^ b for a, b in zip(x, y)]
    assert parity(xor) == parity(x) ^ parity(y)


@given(st.data())
def test_signed_weight_bounds(data):
    x = data.draw(bits)
    h = data.draw(st.lists(st.integers(0, 1), min_size=len(x), max_size=len(x)))
    assert signed_weight(x, [0] * len(x)) == weight(x)
    assert abs(signed_weight(x, h)) <= weight(x)


def test_params_derive_theta_and_validate():
    pr = ProblemParams(7, 5, 2, 3)
    assert pr.theta == math.pi / 5
    assert pr.n_bits == 13
    with pytest.raises(TypeError):
        ProblemParams(7, 5, 2, 3, 0.25, 0.1)
    for bad in [dict(n=4, p=3), dict(n=7, p=9), dict(n=7, p=3, s=3), dict(n=7, p=3, m=1),
                dict(n=7, p=3, m=7), dict(n=7, p=3, c=0.5)]:
        with pytest.raises(ValueError):
            ProblemParams(**bad)


def test_block_size_defaults_fit_the_cap():
    assert default_block_size(7) == 6
    for n in [3, 5, 7, 15, 31, 63, 127, 255, 511]:
        m = default_block_size(n)
        assert 2 <= m <= n - 1
        assert max(balanced_sizes(n - 1, m)) <= 10


@given(st.integers(2, 300), st.data())
def test_balanced_sizes_cover_and_respect_m(total, data):
    m = data.draw(st.integers(1, total))
    sizes = balanced_sizes(total, m)
    assert sum(sizes) == total
    assert min(sizes) >= m
    assert max(sizes) - min(sizes) <= 1
    assert sizes == sorted(sizes)
