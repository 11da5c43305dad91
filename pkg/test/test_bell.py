import math
import random
from fractions import Fraction

import pytest
import sympy

from coxjumps.bell import (
    bell_matrix,
    complete_bell_det,
    complete_bell_recurrence,
    complete_bell_sequence,
    complete_bell_sum,
    partial_bell,
    riordan_exp_derivatives,
)
from coxjumps.errors import DomainError

BELL_NUMBERS = [1, 1, 2, 5, 15, 52, 203, 877, 4140]


@pytest.fixture
def rng():
    return random.Random(12345)


def test_bell_numbers():
    for n, expected in enumerate(BELL_NUMBERS):
        ones = [1] * n
        assert complete_bell_sum(n, ones) == expected
        assert complete_bell_recurrence(n, ones) == expected
        if n:
            assert complete_bell_det(n, ones) == expected


def test_low_orders():
    assert complete_bell_recurrence(2, [2, 3]) == 7
    assert complete_bell_det(3, [1, 2, 3]) == 10
    assert complete_bell_sum(0, []) == 1
    assert complete_bell_sequence([2, 3]) == [1, 2, 7]


def test_partial_bell_edge_cases():
    assert partial_bell(0, 0, []) == 1
    assert partial_bell(4, 0, [1, 2, 3, 4]) == 0
    assert partial_bell(3, 3, [2]) == 8
    with pytest.raises(DomainError):
        partial_bell(2, 3, [1, 1])


def test_partial_bell_against_sympy(rng):
    x = sympy.symbols("x1:9")
    for n in range(1, 9):
        for k in range(1, n + 1):
            expected = sympy.bell(n, k, x[: n - k + 1])
            xs = [rng.randint(-3, 3) for _ in range(n)]
            value = expected.subs(dict(zip(x, xs)))
            assert partial_bell(n, k, xs) == int(value)


def test_evaluators_agree_exactly(rng):
    for _ in range(100):
        xs = [rng.randint(-3, 3) for _ in range(12)]
        for n in range(13):
            by_sum = complete_bell_sum(n, xs)
            by_recurrence = complete_bell_recurrence(n, xs)
            assert isinstance(by_sum, int)
            assert by_sum == by_recurrence
            if n:
                assert complete_bell_det(n, xs) == by_sum


def test_float_and_fraction_arguments():
    xs = [0.5, -1.25, 2.0, 0.75]
    assert complete_bell_det(4, xs) == pytest.approx(complete_bell_recurrence(4, xs), rel=1e-12)
    fractions = [Fraction(1, 2), Fraction(-5, 4), Fraction(2), Fraction(3, 4)]
    assert complete_bell_sum(4, fractions) == complete_bell_recurrence(4, fractions)
    assert float(complete_bell_sum(4, fractions)) == pytest.approx(complete_bell_sum(4, xs))


def test_bell_matrix_layout():
    assert bell_matrix(3, [1, 2, 3]) == [[1, 4, 3], [-1, 1, 2], [0, -1, 1]]


def test_missing_arguments():
    with pytest.raises(DomainError):
        complete_bell_recurrence(3, [1, 2])
    with pytest.raises(DomainError):
        complete_bell_det(0, [])
    with pytest.raises(DomainError):
        complete_bell_sum(-1, [])


def test_riordan_against_symbolic_derivatives(rng):
    u = sympy.symbols("u")
    for _ in range(50):
        coeffs = [sympy.Rational(rng.randint(-20, 20), 10) for _ in range(6)]
        psi = sum(c * u**j for j, c in enumerate(coeffs))
        point = sympy.Rational(rng.randint(-5, 5), 10)
        psi_derivs = [float(sympy.diff(psi, u, k).subs(u, point)) for k in range(1, 6)]
        values = riordan_exp_derivatives(psi_derivs, float(psi.subs(u, point)))
        for k in range(6):
            expected = float(sympy.diff(sympy.exp(psi), u, k).subs(u, point).evalf(30))
            assert values[k] == pytest.approx(expected, rel=1e-10, abs=1e-11)


def test_riordan_complex_value():
    values = riordan_exp_derivatives([1j], 0.5j)
    assert values[0] == pytest.approx(complex(math.cos(0.5), math.sin(0.5)))
    assert values[1] == pytest.approx(1j * complex(math.cos(0.5), math.sin(0.5)))


@pytest.mark.parametrize("a", [-1, 2, 1j])
def test_homogeneity(a, rng):
    # B_k(a x_1, a^2 x_2, ..., a^k x_k) = a^k B_k(x_1, ..., x_k)
    for _ in range(20):
        xs = [rng.randint(-3, 3) for _ in range(8)]
        scaled = [a ** (j + 1) * x for j, x in enumerate(xs)]
        for k in range(9):
            assert complete_bell_recurrence(k, scaled) == pytest.approx(a**k * complete_bell_sum(k, xs), abs=1e-9)
            if k:
                for j in range(1, k + 1):
                    assert partial_bell(k, j, scaled) == pytest.approx(a**k * partial_bell(k, j, xs), abs=1e-9)
