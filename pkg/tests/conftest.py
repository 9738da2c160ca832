"""Shared oracles for the test suite.

The brute-force helpers here use only ``itertools`` and plain integers so they
share no code with the package under test.
"""

from __future__ import annotations

import itertools
import math

import pytest

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def quad_value(Q, x) -> int:
    n = len(x)
    return sum(Q[i][j] * x[i] * x[j] for i in range(n) for j in range(n))


def leibniz_det(M) -> int:
    n = len(M)
    total = 0
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = -1 if inversions % 2 else 1
        for i in range(n):
            term *= M[i][perm[i]]
        total += term
    return total


def sym_matrix(x, n):
    M = [[0] * n for _ in range(n)]
    it = iter(x)
    for i in range(n):
        for j in range(i, n):
            M[i][j] = M[j][i] = next(it)
    return M


def skew_matrix(x, n2):
    M = [[0] * n2 for _ in range(n2)]
    it = iter(x)
    for i in range(n2):
        for j in range(i + 1, n2):
            v = next(it)
            M[i][j], M[j][i] = v, -v
    return M


def pfaffian_recursive(M) -> int:
    """Expansion along the first row."""
    n = len(M)
    if n == 0:
        return 1
    total = 0
    for j in range(1, n):
        keep = [k for k in range(n) if k not in (0, j)]
        minor = [[M[a][b] for b in keep] for a in keep]
        total += (-1) ** (j + 1) * M[0][j] * pfaffian_recursive(minor)
    return total


def brute_points(f, dim: int, T: int, m: int) -> list[tuple]:
    r = range(-T, T + 1)
    return sorted(x for x in itertools.product(r, repeat=dim) if f(x) == m)


def brute_count_mod(f, dim: int, modulus: int, m: int, primitive_p: int | None = None) -> int:
    count = 0
    for x in itertools.product(range(modulus), repeat=dim):
        if primitive_p is not None and all(v % primitive_p == 0 for v in x):
            continue
        if (f(x) - m) % modulus == 0:
            count += 1
    return count


def is_primitive(x) -> bool:
    return math.gcd(*x) == 1


@pytest.fixture
def sum3():
    from symcount import VarietySpec
    return VarietySpec.diagonal(1, 1, 1, anisotropic_over_Q=True)


@pytest.fixture
def hyperboloid():
    from symcount import VarietySpec
    return VarietySpec.diagonal(1, 1, 1, -1)
