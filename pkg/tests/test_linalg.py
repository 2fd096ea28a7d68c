"""Howell form, solving, and kernels over Z/N, checked against enumeration."""

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from zmodext.linalg import (
    DimensionError,
    MatZN,
    howell_form,
    kernel,
    row_span_contains,
    solve,
    span_equal,
)


def brute_span(m: MatZN):
    """All row combinations, by enumeration. Only for tiny matrices."""
    n = m.n
    out = set()
    for coeffs in itertools.product(range(n), repeat=m.rows):
        v = [0] * m.cols
        for c, i in zip(coeffs, range(m.rows)):
            row = m.row(i)
            v = [(a + c * b) % n for a, b in zip(v, row)]
        out.add(tuple(v))
    return out


def random_matrix(rng, n, rows, cols):
    return MatZN.from_rows(
        n, [[rng.randrange(n) for _ in range(cols)] for _ in range(rows)], cols)


# -- frozen hand-checkable cases ----------------------------------------------


def test_howell_single_row_normalizes_to_gcd():
    h, _ = howell_form(MatZN.from_rows(4, [[2]], 1))
    assert h.row_list() == [[2]]
    # 3 is a unit mod 6; the canonical generator of (3) is 3 itself
    h, _ = howell_form(MatZN.from_rows(6, [[3]], 1))
    assert h.row_list() == [[3]]
    # 4 generates (2) in Z/6 since gcd(4,6)=2
    h, _ = howell_form(MatZN.from_rows(6, [[4]], 1))
    assert h.row_list() == [[2]]


def test_howell_annihilator_row_appears():
    # span of (2,1) in (Z/4)^2 contains 2*(2,1) = (0,2), which no single
    # echelon row with pivot in column 0 exhibits
    h, _ = howell_form(MatZN.from_rows(4, [[2, 1]], 2))
    assert h.row_list() == [[2, 1], [0, 2]]
    assert row_span_contains(h, [0, 2])


def test_howell_reduces_above_pivots():
    h, _ = howell_form(MatZN.from_rows(4, [[1, 3], [0, 2]], 2))
    assert h.row_list() == [[1, 1], [0, 2]]


def test_transform_reproduces_howell_rows():
    m = MatZN.from_rows(12, [[4, 6, 1], [3, 3, 3], [0, 8, 2]], 3)
    h, u = howell_form(m)
    assert u * m == h


# -- enumeration oracles --------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4, 6, 8, 9])
def test_howell_span_is_complete_invariant(n):
    rng = random.Random(1000 + n)
    for _ in range(40):
        rows, cols = rng.randrange(1, 4), rng.randrange(1, 4)
        m1 = random_matrix(rng, n, rows, cols)
        m2 = random_matrix(rng, n, rows, cols)
        h1, _ = howell_form(m1)
        h2, _ = howell_form(m2)
        same_span = brute_span(m1) == brute_span(m2)
        assert same_span == (h1.row_list() == h2.row_list())
        assert span_equal(m1, m2) == same_span


@pytest.mark.parametrize("n", [4, 6, 9])
def test_solve_against_enumeration(n):
    rng = random.Random(2000 + n)
    for _ in range(40):
        m = random_matrix(rng, n, rng.randrange(1, 4), rng.randrange(1, 4))
        span = brute_span(m)
        b = [rng.randrange(n) for _ in range(m.cols)]
        x = solve(m, b)
        if tuple(v % n for v in b) in span:
            assert x is not None
            got = [0] * m.cols
            for c, i in zip(x, range(m.rows)):
                got = [(a + c * v) % n for a, v in zip(got, m.row(i))]
            assert got == [v % n for v in b]
        else:
            assert x is None


@pytest.mark.parametrize("n", [4, 6, 9])
def test_kernel_against_enumeration(n):
    rng = random.Random(3000 + n)
    for _ in range(30):
        m = random_matrix(rng, n, rng.randrange(1, 4), rng.randrange(1, 4))
        k = kernel(m)
        # every kernel row annihilates m
        for i in range(k.rows):
            prod = MatZN.from_rows(n, [list(k.row(i))], m.rows) * m
            assert all(v == 0 for v in prod.entries)
        # and the kernel span is exactly the brute-force left annihilator
        want = {c for c in itertools.product(range(n), repeat=m.rows)
                if all(sum(ci * m[i, j] for ci, i in zip(c, range(m.rows))) % n == 0
                       for j in range(m.cols))}
        assert brute_span(k) == want


# -- hypothesis properties -------------------------------------------------------


matrix_strategy = st.integers(2, 12).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(1, 3), st.integers(1, 3)).flatmap(
        lambda t: st.lists(
            st.lists(st.integers(0, t[0] - 1), min_size=t[2], max_size=t[2]),
            min_size=t[1], max_size=t[1],
        ).map(lambda rows: MatZN.from_rows(t[0], rows, t[2]))))


@settings(max_examples=60, deadline=None)
@given(matrix_strategy)
def test_howell_is_idempotent(m):
    h, _ = howell_form(m)
    h2, _ = howell_form(h)
    assert h.row_list() == h2.row_list()


@settings(max_examples=60, deadline=None)
@given(matrix_strategy)
def test_howell_pivot_columns_strictly_increase(m):
    h, _ = howell_form(m)
    pivots = []
    for i in range(h.rows):
        row = h.row(i)
        assert any(row), "Howell form keeps no zero rows"
        pivots.append(next(j for j in range(h.cols) if row[j]))
    assert pivots == sorted(set(pivots))
    for i, c in enumerate(pivots):
        assert m.n % h[i, c] == 0, "pivot divides the modulus"
        for i2 in range(i):
            assert h[i2, c] < h[i, c], "entries above a pivot are reduced"


@settings(max_examples=40, deadline=None)
@given(matrix_strategy, st.randoms(use_true_random=False))
def test_random_span_member_is_recognized(m, rng):
    coeffs = [rng.randrange(m.n) for _ in range(m.rows)]
    v = [0] * m.cols
    for c, i in zip(coeffs, range(m.rows)):
        v = [(a + c * b) % m.n for a, b in zip(v, m.row(i))]
    assert row_span_contains(m, v)
    assert solve(m, v) is not None


def test_dimension_errors():
    m = MatZN.from_rows(4, [[1, 2]], 2)
    with pytest.raises(DimensionError):
        solve(m, [1])
    with pytest.raises(DimensionError):
        m * MatZN.from_rows(4, [[1]], 1)
    with pytest.raises(ValueError):
        MatZN.from_rows(4, [[1], [1, 2]], 1)
