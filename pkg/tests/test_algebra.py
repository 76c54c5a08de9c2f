from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hdx.algebra import (
    SUPPORTED_ORDERS,
    DegreeOverflow,
    Field,
    Ring,
    commutator,
    elementary_matrix,
    identity,
)
from hdx.errors import ConfigError, DegreeViolation, IndexOutOfRange, NotUnitriangular, RingMismatch

import oracles


def _poly_mod(a, b, p, modulus):
    """Product of two digit vectors modulo a monic polynomial, by long division."""
    m = len(modulus) - 1
    prod = [0] * (2 * m - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    for deg in range(len(prod) - 1, m - 1, -1):
        c = prod[deg]
        for k in range(m + 1):
            prod[deg - m + k] = (prod[deg - m + k] - c * modulus[k]) % p
    return prod[:m]


@pytest.mark.parametrize("q", [2, 3, 5, 7])
def test_prime_field_matches_integers_mod_q(q):
    f = Field.of(q)
    for a, b in itertools.product(range(q), repeat=2):
        assert f.add(a, b) == (a + b) % q
        assert f.mul(a, b) == (a * b) % q
    for a in range(1, q):
        assert f.mul(a, f.inv(a)) == 1


@pytest.mark.parametrize("q,p,modulus", [(4, 2, (1, 1, 1)), (8, 2, (1, 1, 0, 1)), (9, 3, (1, 0, 1))])
def test_extension_field_matches_polynomial_arithmetic(q, p, modulus):
    f = Field.of(q)
    m = len(modulus) - 1

    def digits(c):
        return [(c // p**i) % p for i in range(m)]

    def code(ds):
        return sum(d * p**i for i, d in enumerate(ds))

    for a, b in itertools.product(range(q), repeat=2):
        assert f.mul(a, b) == code(_poly_mod(digits(a), digits(b), p, modulus))
        assert f.add(a, b) == code([(x + y) % p for x, y in zip(digits(a), digits(b))])


def test_field_axioms_every_supported_order():
    for q in SUPPORTED_ORDERS:
        f = Field.of(q)
        nonzero = range(1, q)
        assert sorted(f.mul(a, f.inv(a)) for a in nonzero) == [1] * (q - 1)
        assert all(f.add(a, f.neg(a)) == 0 for a in range(q))


def test_unsupported_order_is_a_config_error():
    with pytest.raises(ConfigError):
        Field.of(6)
    with pytest.raises(ZeroDivisionError):
        Field.of(5).inv(0)


@given(st.sampled_from([2, 3, 5, 4, 9]), st.data())
def test_field_distributivity(q, data):
    f = Field.of(q)
    a, b, c = (data.draw(st.integers(0, q - 1)) for _ in range(3))
    assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))


def test_polynomial_ring_degree_overflow_and_truncation():
    poly = Ring.polynomial(3, 2)
    t = poly.t(1)
    assert (t * t).coeffs == (0, 0, 1)
    with pytest.raises(DegreeOverflow):
        _ = t * t * t
    quo = Ring.truncated(3, 3)
    s = quo.t(1)
    assert (s * s * s).is_zero()


def test_elementary_matrix_checks():
    r = Ring.finite_field(3)
    with pytest.raises(IndexOutOfRange):
        elementary_matrix(4, 2, 2, 1, r)
    with pytest.raises(RingMismatch):
        elementary_matrix(4, 1, 2, 1)
    bounded = Ring.polynomial(2, 3, degree_bound=True)
    with pytest.raises(DegreeViolation):
        elementary_matrix(4, 1, 2, bounded.t(2), bounded)
    assert elementary_matrix(4, 1, 3, bounded.t(2), bounded).entry(1, 3) == bounded.t(2)


@pytest.mark.parametrize("q", [2, 3, 5])
def test_matrix_product_matches_modular_oracle(q):
    r = Ring.finite_field(q)
    rng = np.random.default_rng(q)
    for _ in range(20):
        i, j = sorted(rng.choice(np.arange(1, 5), 2, replace=False).tolist())
        k, l = sorted(rng.choice(np.arange(1, 5), 2, replace=False).tolist())
        a, b = int(rng.integers(q)), int(rng.integers(q))
        got = elementary_matrix(4, i, j, a, r) * elementary_matrix(4, k, l, b, r)
        want = oracles.mat_mul_mod(oracles.elementary_mod(4, i, j, a, q), oracles.elementary_mod(4, k, l, b, q), q)
        assert tuple(tuple(got.entry(x, y).value for y in range(1, 5)) for x in range(1, 5)) == want


def test_inverse_and_commutator():
    r = Ring.finite_field(5)
    a = elementary_matrix(4, 1, 2, 3, r) * elementary_matrix(4, 2, 4, 2, r)
    assert (a * a.inverse()).is_identity()
    c = commutator(elementary_matrix(4, 1, 2, 1, r), elementary_matrix(4, 2, 3, 1, r))
    assert c == elementary_matrix(4, 1, 3, 1, r)
    m = identity(3, r)
    codes = np.array(m.codes)
    codes[0, 0, 0] = 2
    with pytest.raises(NotUnitriangular):
        type(m)(codes, r).inverse()
