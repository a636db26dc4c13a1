"""Tests for prime-field arithmetic."""
from __future__ import annotations

import galois
import numpy as np
import pytest

from fcsa.exceptions import InvalidParams, ShapeMismatch, SingularMatrix, ZeroInverse
from fcsa.field import (
    PrimeField,
    coefficients_ascending,
    ff_inv,
    mat_mul,
    poly_eval,
    poly_product_expand,
    solve_linear,
    to_int_rows,
)


def _schoolbook(factors, modulus):
    coeffs = [1]
    for root, multiplicity in factors:
        for _ in range(multiplicity):
            shifted = [0] + coeffs
            scaled = [(-root * c) for c in coeffs] + [0]
            coeffs = [(s + t) % modulus for s, t in zip(shifted, scaled)]
    return coeffs


def test_modulus_must_be_prime():
    with pytest.raises(InvalidParams):
        PrimeField(8)
    with pytest.raises(InvalidParams):
        PrimeField(1)
    assert PrimeField(7) == PrimeField(7)


def test_modulus_must_fit_int64():
    with pytest.raises(InvalidParams, match="exceeds"):
        PrimeField(2**89 - 1)
    mersenne = PrimeField(2**61 - 1)
    assert [int(v) for v in mersenne.vector([2**61, -1])] == [1, 2**61 - 2]
    assert int(mersenne.matrix([[2**62]])[0, 0]) == 2


def test_inverse_examples():
    small = PrimeField(7)
    assert int(ff_inv(small, 1)) == 1
    assert int(ff_inv(small, 2)) == 4
    assert int(ff_inv(small, -1)) == 6


def test_inverse_of_zero():
    with pytest.raises(ZeroInverse):
        ff_inv(PrimeField(7), 0)
    with pytest.raises(ZeroInverse):
        ff_inv(PrimeField(7), 14)


def test_inverse_random(prime_field, rng):
    for value in rng.integers(1, prime_field.modulus, size=1000):
        inverse = ff_inv(prime_field, int(value))
        assert int(prime_field.element(int(value)) * inverse) == 1


def test_field_axioms(prime_field, rng):
    gf = prime_field.gf
    a, b, c = (gf(rng.integers(0, prime_field.modulus, size=10_000)) for _ in range(3))
    assert np.array_equal((a * b) * c, a * (b * c))
    assert np.array_equal((a + b) + c, a + (b + c))
    assert np.array_equal(a * (b + c), a * b + a * c)
    nonzero = a[a.view(np.ndarray) != 0]
    assert np.array_equal(nonzero * np.reciprocal(nonzero), gf.Ones(nonzero.size))


def test_empty_product_is_one(prime_field):
    assert coefficients_ascending(poly_product_expand(prime_field, [])) == [1]


def test_product_expand_matches_schoolbook():
    small = PrimeField(7)
    poly = poly_product_expand(small, [(1, 2), (2, 2)])
    assert poly.degree == 4
    assert coefficients_ascending(poly) == _schoolbook([(1, 2), (2, 2)], 7) == [4, 2, 6, 1, 1]


def test_product_expand_roots_and_values(prime_field, rng):
    factors = [(int(r), int(m)) for r, m in zip(rng.integers(0, 1000, 5), rng.integers(0, 4, 5))]
    poly = poly_product_expand(prime_field, factors)
    assert poly.degree == sum(m for _, m in factors)
    for root, multiplicity in factors:
        if multiplicity:
            assert int(poly_eval(poly, root)) == 0
    for point in rng.integers(1000, prime_field.modulus, size=20):
        expected = prime_field.element(1)
        for root, multiplicity in factors:
            expected = expected * prime_field.element(int(point) - root) ** multiplicity
        assert poly_eval(poly, int(point)) == expected


def test_zero_multiplicity_is_skipped(prime_field):
    assert coefficients_ascending(poly_product_expand(prime_field, [(5, 0)])) == [1]
    with pytest.raises(InvalidParams):
        poly_product_expand(prime_field, [(5, -1)])


def test_poly_eval_examples(prime_field, rng):
    one = poly_product_expand(prime_field, [])
    assert int(poly_eval(one, 12345)) == 1
    linear = poly_product_expand(prime_field, [(3, 1)])
    assert int(poly_eval(linear, 3)) == 0

    coefficients = [int(c) for c in rng.integers(0, prime_field.modulus, size=11)]
    poly = galois.Poly(prime_field.gf(coefficients[::-1]))
    point = int(rng.integers(0, prime_field.modulus))
    expected = sum(c * pow(point, k, prime_field.modulus) for k, c in enumerate(coefficients))
    assert int(poly_eval(poly, point)) == expected % prime_field.modulus


def test_mat_mul_examples():
    small = PrimeField(101)
    left = small.matrix([[1, 2], [3, 4]])
    right = small.matrix([[5, 6], [7, 8]])
    assert to_int_rows(mat_mul(left, right)) == [[19, 22], [43, 50]]
    assert np.array_equal(mat_mul(left, small.identity(2)), left)


def test_mat_mul_shape_mismatch(prime_field):
    with pytest.raises(ShapeMismatch):
        mat_mul(prime_field.zeros(2, 3), prime_field.zeros(2, 3))


def test_mat_mul_matches_big_integers(prime_field, rng):
    left = prime_field.random_matrix(4, 4, rng)
    right = prime_field.random_matrix(4, 4, rng)
    big_left, big_right = to_int_rows(left), to_int_rows(right)
    expected = [
        [
            sum(big_left[r][k] * big_right[k][c] for k in range(4)) % prime_field.modulus
            for c in range(4)
        ]
        for r in range(4)
    ]
    assert to_int_rows(mat_mul(left, right)) == expected


def test_matrix_reduces_negative_entries():
    small = PrimeField(7)
    assert to_int_rows(small.matrix([[-1, 8], [14, 3]])) == [[6, 1], [0, 3]]


def test_solve_identity(prime_field, rng):
    rhs = prime_field.random_matrix(3, 2, rng)
    assert np.array_equal(solve_linear(prime_field.identity(3), rhs), rhs)


@pytest.mark.parametrize("size", [3, 16, 64])
def test_solve_multiply_back(prime_field, rng, size):
    matrix = prime_field.random_matrix(size, size, rng)
    rhs = prime_field.random_matrix(size, 3, rng)
    assert np.array_equal(mat_mul(matrix, solve_linear(matrix, rhs)), rhs)


def test_solve_singular(prime_field):
    matrix = prime_field.matrix([[1, 2, 3], [1, 2, 3], [0, 1, 5]])
    with pytest.raises(SingularMatrix):
        solve_linear(matrix, prime_field.zeros(3, 1))


def test_solve_shape_checks(prime_field):
    with pytest.raises(ShapeMismatch):
        solve_linear(prime_field.zeros(2, 3), prime_field.zeros(2, 1))
    with pytest.raises(ShapeMismatch):
        solve_linear(prime_field.identity(2), prime_field.zeros(3, 1))


def test_vandermonde_interpolation(prime_field):
    # degree-2 polynomial 5 + 3z + 2z^2 through three points
    points = [2, 3, 4]
    values = [[5 + 3 * z + 2 * z * z] for z in points]
    system = prime_field.matrix([[1, z, z * z] for z in points])
    solution = solve_linear(system, prime_field.matrix(values))
    assert to_int_rows(solution) == [[5], [3], [2]]
