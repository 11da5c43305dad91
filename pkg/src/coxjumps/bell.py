"""Partial and complete Bell polynomials.

Three independent evaluators of the complete polynomial B_n are provided:
the partition sum, the determinant form and the recurrence. The recurrence
is the one used by the survival routines; the other two serve as
cross-checks. Binomials and factorials are exact Python integers, so integer
arguments give exact results.
"""

import cmath
import logging
import math
from fractions import Fraction
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np

from coxjumps.errors import DomainError

logger = logging.getLogger(__name__)

Scalar = Union[int, float, complex, Fraction]
BellArgs = Sequence[Scalar]

MAX_JUMPS = 32


def _check_args(n: int, xs: BellArgs, needed: int) -> None:
    if n < 0:
        raise DomainError(f"Bell polynomial order must be non-negative, got {n}.")
    if len(xs) < needed:
        raise DomainError(
            f"B_{n} needs at least {needed} arguments, got {len(xs)}."
        )


def _multiplicities(n: int, k: int, largest: int) -> Iterator[Tuple[int, ...]]:
    """Yield (j_1, ..., j_largest) with sum j_m = k and sum m*j_m = n."""
    if largest == 0:
        if n == 0 and k == 0:
            yield ()
        return
    for j in range(min(k, n // largest) + 1):
        for rest in _multiplicities(n - j * largest, k - j, largest - 1):
            yield rest + (j,)


def partial_bell(n: int, k: int, xs: BellArgs) -> Scalar:
    """Partial Bell polynomial B_{n,k}(x_1, ..., x_{n-k+1}).

    Args:
        n (int): Total order.
        k (int): Number of blocks.
        xs (BellArgs): Arguments x_1, x_2, ... (at least n-k+1 of them).

    Returns:
        Scalar: Sum over partitions of n into k blocks.

    Raises:
        DomainError: If k > n or arguments are missing.
    """
    if k < 0 or k > n:
        raise DomainError(f"Partial Bell polynomial needs 0 <= k <= n, got k={k}, n={n}.")
    if n == 0:
        return 1
    if k == 0:
        return 0
    largest = n - k + 1
    _check_args(n, xs, largest)

    total = 0
    for js in _multiplicities(n, k, largest):
        coeff = math.factorial(n)
        for m, j in enumerate(js, start=1):
            coeff //= math.factorial(j) * math.factorial(m) ** j
        term = coeff
        for m, j in enumerate(js, start=1):
            if j:
                term = term * xs[m - 1] ** j
        total = total + term
    return total


def complete_bell_sum(n: int, xs: BellArgs) -> Scalar:
    """Complete Bell polynomial as the sum of partial ones."""
    _check_args(n, xs, n)
    if n == 0:
        return 1
    total = 0
    for k in range(1, n + 1):
        total = total + partial_bell(n, k, xs)
    return total


def _bareiss_det(matrix: List[List[int]]) -> int:
    """Exact determinant of an integer matrix (fraction-free elimination)."""
    a = [row[:] for row in matrix]
    size = len(a)
    sign = 1
    prev = 1
    for i in range(size - 1):
        if a[i][i] == 0:
            swap = next((r for r in range(i + 1, size) if a[r][i] != 0), None)
            if swap is None:
                return 0
            a[i], a[swap] = a[swap], a[i]
            sign = -sign
        for r in range(i + 1, size):
            for c in range(i + 1, size):
                a[r][c] = (a[r][c] * a[i][i] - a[r][i] * a[i][c]) // prev
        prev = a[i][i]
    return sign * a[-1][-1]


def bell_matrix(n: int, xs: BellArgs) -> List[List[Scalar]]:
    """Matrix whose determinant is B_n(x_1, ..., x_n).

    Entry (r, c) is binom(n-1-r, c-r) * x_{c-r+1} on and above the diagonal
    (0-based rows and columns), -1 on the subdiagonal and 0 below it.
    """
    rows = []
    for r in range(n):
        row = []
        for c in range(n):
            if c >= r:
                row.append(math.comb(n - 1 - r, c - r) * xs[c - r])
            elif c == r - 1:
                row.append(-1)
            else:
                row.append(0)
        rows.append(row)
    return rows


def complete_bell_det(n: int, xs: BellArgs) -> Scalar:
    """Complete Bell polynomial as a determinant.

    Integer arguments are evaluated exactly (Bareiss elimination), anything
    else with `numpy.linalg.det`.
    """
    if n < 1:
        raise DomainError(f"Determinant form needs n >= 1, got {n}.")
    _check_args(n, xs, n)
    matrix = bell_matrix(n, xs)
    if all(isinstance(x, (int, np.integer)) for x in xs[:n]):
        return _bareiss_det([[int(v) for v in row] for row in matrix])
    is_complex = any(isinstance(x, complex) for x in xs[:n])
    det = np.linalg.det(np.array(matrix, dtype=complex if is_complex else float))
    return complex(det) if is_complex else float(det)


def complete_bell_sequence(xs: BellArgs, n: int = None) -> List[Scalar]:
    """B_0, ..., B_n by B_{m+1} = sum_k binom(m, k) B_{m-k} x_{k+1}.

    Args:
        xs (BellArgs): Arguments x_1, x_2, ...
        n (int, optional): Highest order. Defaults to len(xs).

    Returns:
        List[Scalar]: The complete Bell polynomials of orders 0..n.
    """
    n = len(xs) if n is None else n
    _check_args(n, xs, n)
    values: List[Scalar] = [1]
    for m in range(n):
        acc = 0
        for k in range(m + 1):
            acc = acc + math.comb(m, k) * values[m - k] * xs[k]
        values.append(acc)
    return values


def complete_bell_recurrence(n: int, xs: BellArgs) -> Scalar:
    """Complete Bell polynomial B_n by recurrence."""
    return complete_bell_sequence(xs, n)[n]


def riordan_exp_derivatives(psi_derivs: Sequence[Scalar], psi_value: Scalar) -> List[Scalar]:
    """Derivatives of exp(Psi) from those of Psi (Faa di Bruno / Riordan).

    Args:
        psi_derivs (Sequence[Scalar]): Psi', Psi'', ..., Psi^(n) at a point.
        psi_value (Scalar): Psi at the same point.

    Returns:
        List[Scalar]: (exp Psi)^(k) for k = 0..n.
    """
    if isinstance(psi_value, complex):
        phi = cmath.exp(psi_value)
    else:
        phi = math.exp(psi_value)
    return [phi * b for b in complete_bell_sequence(psi_derivs)]


if __name__ == "__main__":
    print([complete_bell_recurrence(n, [1] * n) for n in range(9)])
