"""Level sets ``f(x) = m`` of the three classical symmetric-variety families.

A :class:`VarietySpec` describes the ambient coordinate space and the
homogeneous integral polynomial ``f``:

``Quadric``
    ``f(x) = x^T Q x`` for a nondegenerate symmetric integer matrix ``Q``
    in ``n >= 3`` variables.
``DetSym``
    ``f = sign * det`` on symmetric ``n x n`` matrices (``n >= 3``), with the
    matrix flattened to its ``n(n+1)/2`` upper-triangular entries, row-major.
``Pfaffian``
    ``f = sign * pf`` on skew-symmetric ``2n x 2n`` matrices (``n >= 2``),
    flattened to the ``n(2n-1)`` strictly upper-triangular entries.

Every family is therefore a hypersurface in an affine space ``Z^N`` and the
rest of the package only needs :func:`evaluate_array` and the degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np

QUADRIC = "Quadric"
DETSYM = "DetSym"
PFAFFIAN = "Pfaffian"
KINDS = (QUADRIC, DETSYM, PFAFFIAN)

# |values| above this switch integer kernels to Python ints (object arrays).
INT64_SAFE = 2**62


def parse_rational(value) -> Fraction:
    """Parse an int, Fraction or ``"p/q"`` string into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as an exact rational")


def format_rational(value) -> str:
    q = Fraction(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class VarietySpec:
    """A symmetric variety presented as a level set of an integral form.

    Use the constructors :meth:`quadric`, :meth:`diagonal`, :meth:`det_sym`
    and :meth:`pfaffian` rather than the raw dataclass.
    """

    kind: str
    Q: tuple | None = None
    n: int = 0
    sign: int = 1
    anisotropic_over_Q: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown variety kind {self.kind!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.kind == QUADRIC:
            if self.Q is None:
                raise ValueError("Quadric needs a matrix Q")
            Q = np.array(self.Q, dtype=object)
            size = Q.shape[0]
            if Q.ndim != 2 or Q.shape != (size, size):
                raise ValueError("Q must be square")
            if any(int(v) != v for v in Q.flat):
                raise ValueError("Q must have integer entries")
            if any(Q[i, j] != Q[j, i] for i in range(size) for j in range(size)):
                raise ValueError("Q must be symmetric")
            if size < 3:
                raise ValueError("a quadric needs n >= 3 variables")
            if exact_det([[int(v) for v in row] for row in self.Q]) == 0:
                raise ValueError("Q must be nondegenerate")
            object.__setattr__(self, "n", size)
            if size == 3:
                if not self.anisotropic_over_Q:
                    raise ValueError(
                        "ternary quadrics must not represent 0 over Q; "
                        "pass anisotropic_over_Q=True after checking this")
                if ternary_isotropic(self.Q):
                    witness = _ternary_zero(self.Q, 200)
                    detail = f" (for instance {witness})" if witness else ""
                    raise ValueError(f"form has a nontrivial rational zero{detail}")
        elif self.kind == DETSYM:
            if self.n < 3:
                raise ValueError("DetSym needs n >= 3")
        else:
            if self.n < 2:
                raise ValueError("Pfaffian needs a 2n x 2n matrix with n >= 2")

    # -- constructors -----------------------------------------------------
    @classmethod
    def quadric(cls, Q, anisotropic_over_Q: bool = False) -> "VarietySpec":
        rows = tuple(tuple(int(v) for v in row) for row in Q)
        return cls(QUADRIC, Q=rows, anisotropic_over_Q=anisotropic_over_Q)

    @classmethod
    def diagonal(cls, *coefficients: int, anisotropic_over_Q: bool = False) -> "VarietySpec":
        k = len(coefficients)
        Q = [[coefficients[i] if i == j else 0 for j in range(k)] for i in range(k)]
        return cls.quadric(Q, anisotropic_over_Q=anisotropic_over_Q)

    @classmethod
    def det_sym(cls, n: int, sign: int = 1) -> "VarietySpec":
        return cls(DETSYM, n=n, sign=sign)

    @classmethod
    def pfaffian(cls, n: int, sign: int = 1) -> "VarietySpec":
        return cls(PFAFFIAN, n=n, sign=sign)

    # -- derived quantities ------------------------------------------------
    @property
    def ambient_dim(self) -> int:
        if self.kind == QUADRIC:
            return self.n
        if self.kind == DETSYM:
            return self.n * (self.n + 1) // 2
        return self.n * (2 * self.n - 1)

    @property
    def degree(self) -> int:
        return 2 if self.kind == QUADRIC else self.n

    @property
    def matrix(self) -> np.ndarray:
        """The quadric's Gram matrix as an int64 array."""
        if self.kind != QUADRIC:
            raise AttributeError("only quadrics carry a matrix")
        return np.array(self.Q, dtype=np.int64)

    @property
    def coefficient_bound(self) -> int:
        """max over the box ``||x||_inf <= 1`` of ``|f(x)|`` (an upper bound)."""
        if self.kind == QUADRIC:
            return int(np.abs(self.matrix).sum())
        if self.kind == DETSYM:
            # Hadamard: |det| <= prod of column norms <= n^(n/2)
            return math.isqrt(self.n**self.n) + 1
        size = 2 * self.n
        return math.isqrt(math.isqrt(size**size) + 1) + 1

    def definiteness(self) -> int:
        """+1 positive definite, -1 negative definite, 0 otherwise.

        Determinantal and pfaffian forms are never definite.
        """
        if self.kind != QUADRIC:
            return 0
        eig = np.linalg.eigvalsh(self.matrix.astype(float))
        if np.all(eig > 0):
            return 1
        if np.all(eig < 0):
            return -1
        return 0

    def attainable(self, m) -> bool:
        """Whether ``f = m`` can have real solutions, judged by sign."""
        m = Fraction(m)
        if m == 0:
            return False
        s = self.definiteness()
        return s == 0 or (m > 0) == (s > 0)

    def solve_index(self) -> int:
        """Coordinate in which ``f`` is solved during enumeration.

        For quadrics this is the variable with the largest ``|Q_kk|``; for
        determinants and pfaffians the last coordinate, in which ``f`` is
        affine.
        """
        if self.kind == QUADRIC:
            diag = np.abs(np.diag(self.matrix))
            return int(np.argmax(diag))
        return self.ambient_dim - 1

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == QUADRIC:
            out["Q"] = [list(row) for row in self.Q]
            if self.n == 3:
                out["anisotropic_over_Q"] = True
        else:
            out["n"] = self.n
            out["sign"] = self.sign
        return out

    @classmethod
    def from_json(cls, data: dict) -> "VarietySpec":
        kind = data["kind"]
        if kind == QUADRIC:
            return cls.quadric(data["Q"], bool(data.get("anisotropic_over_Q", False)))
        if kind == DETSYM:
            return cls.det_sym(int(data["n"]), int(data.get("sign", 1)))
        if kind == PFAFFIAN:
            return cls.pfaffian(int(data["n"]), int(data.get("sign", 1)))
        raise ValueError(f"unknown variety kind {kind!r}")


def check_level(m) -> int:
    if isinstance(m, Fraction):
        if m.denominator != 1:
            raise ValueError("levels are integers")
        m = m.numerator
    m = int(m)
    if m == 0:
        raise ValueError("level m = 0 is not allowed")
    return m


# ---------------------------------------------------------------------------
# exact scalar arithmetic

def exact_det(rows) -> Fraction:
    """Determinant by fraction-free Gaussian elimination."""
    A = [[Fraction(v) for v in row] for row in rows]
    size = len(A)
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if A[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            A[col], A[pivot] = A[pivot], A[col]
            det = -det
        det *= A[col][col]
        for r in range(col + 1, size):
            factor = A[r][col] / A[col][col]
            if factor:
                for c in range(col, size):
                    A[r][c] -= factor * A[col][c]
    return det


def exact_pfaffian(rows) -> Fraction:
    """Pfaffian by expansion along the first row."""
    A = [[Fraction(v) for v in row] for row in rows]
    return _pf_expand(A, tuple(range(len(A))))


def _pf_expand(A, idx: tuple) -> Fraction:
    if not idx:
        return Fraction(1)
    if len(idx) % 2:
        return Fraction(0)
    first = idx[0]
    total = Fraction(0)
    for pos in range(1, len(idx)):
        a = A[first][idx[pos]]
        if a:
            rest = idx[1:pos] + idx[pos + 1:]
            term = a * _pf_expand(A, rest)
            total += term if pos % 2 == 1 else -term
    return total


def sym_from_coords(x, n: int):
    """Symmetric n x n matrix (nested lists) from upper-triangular coordinates."""
    M = [[0] * n for _ in range(n)]
    it = iter(x)
    for i in range(n):
        for j in range(i, n):
            M[i][j] = M[j][i] = next(it)
    return M


def skew_from_coords(x, n: int):
    """Skew-symmetric 2n x 2n matrix from strictly upper-triangular coordinates."""
    size = 2 * n
    M = [[0] * size for _ in range(size)]
    it = iter(x)
    for i in range(size):
        for j in range(i + 1, size):
            v = next(it)
            M[i][j] = v
            M[j][i] = -v
    return M


def _check_dim(spec: VarietySpec, x) -> None:
    if len(x) != spec.ambient_dim:
        raise ValueError(
            f"expected {spec.ambient_dim} coordinates, got {len(x)}")


def evaluate(spec: VarietySpec, x: Sequence) -> Fraction:
    """Exact value ``f(x)`` for a vector of ints, Fractions or ``"p/q"`` strings."""
    _check_dim(spec, x)
    z = [parse_rational(v) for v in x]
    if spec.kind == QUADRIC:
        Q = spec.Q
        n = spec.n
        return sum((Q[i][j] * z[i] * z[j] for i in range(n) for j in range(n)),
                   Fraction(0))
    if spec.kind == DETSYM:
        return spec.sign * exact_det(sym_from_coords(z, spec.n))
    value = spec.sign * exact_pfaffian(skew_from_coords(z, spec.n))
    if __debug__ and spec.n <= 3:
        assert value * value == exact_det(skew_from_coords(z, spec.n))
    return value


# ---------------------------------------------------------------------------
# vectorized integer evaluation

def _sym_stack(X: np.ndarray, n: int) -> np.ndarray:
    N = X.shape[0]
    M = np.zeros((N, n, n), dtype=X.dtype)
    iu = np.triu_indices(n)
    M[:, iu[0], iu[1]] = X
    M[:, iu[1], iu[0]] = X
    return M


def _skew_stack(X: np.ndarray, n: int) -> np.ndarray:
    size = 2 * n
    N = X.shape[0]
    M = np.zeros((N, size, size), dtype=X.dtype)
    iu = np.triu_indices(size, k=1)
    M[:, iu[0], iu[1]] = X
    M[:, iu[1], iu[0]] = -X
    return M


def _bareiss_stack(M: np.ndarray) -> np.ndarray:
    """Exact determinants of a stack of integer matrices (Bareiss)."""
    A = M.copy()
    N, n, _ = A.shape
    sign = np.ones(N, dtype=np.int64)
    prev = np.ones(N, dtype=A.dtype)
    zero = np.zeros(N, dtype=bool)
    rows = np.arange(N)
    for k in range(n - 1):
        # partial pivoting on exact zeros only
        piv = A[:, k, k] == 0
        if piv.any():
            for r in np.nonzero(piv)[0]:
                cand = np.nonzero(A[r, k:, k] != 0)[0]
                if cand.size == 0:
                    zero[r] = True
                    continue
                s = k + cand[0]
                A[r, [k, s]] = A[r, [s, k]]
                sign[r] = -sign[r]
        pivot = np.where(zero, 1, A[:, k, k])
        sub = A[:, k + 1:, k + 1:]
        num = (pivot[:, None, None] * sub
               - A[:, k + 1:, k][:, :, None] * A[:, k, k + 1:][:, None, :])
        A[:, k + 1:, k + 1:] = num // prev[:, None, None]
        prev = pivot
    det = A[rows, n - 1, n - 1] * sign
    det[zero] = 0
    return det


def _pfaffian_stack(M: np.ndarray, idx: tuple | None = None) -> np.ndarray:
    if idx is None:
        idx = tuple(range(M.shape[1]))
    if not idx:
        return np.ones(M.shape[0], dtype=M.dtype)
    first = idx[0]
    total = np.zeros(M.shape[0], dtype=M.dtype)
    for pos in range(1, len(idx)):
        rest = idx[1:pos] + idx[pos + 1:]
        term = M[:, first, idx[pos]] * _pfaffian_stack(M, rest)
        total = total + term if pos % 2 == 1 else total - term
    return total


def value_bound(spec: VarietySpec, T: int) -> int:
    """Upper bound for ``|f(x)|`` when ``||x||_inf <= T``."""
    return spec.coefficient_bound * int(T) ** spec.degree


def evaluate_array(spec: VarietySpec, X: np.ndarray) -> np.ndarray:
    """Exact ``f`` on the rows of an integer array.

    int64 inputs must keep ``value_bound`` below ``INT64_SAFE``; callers that
    cannot guarantee this pass object arrays of Python ints.
    """
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != spec.ambient_dim:
        raise ValueError(f"expected rows of length {spec.ambient_dim}")
    if spec.kind == QUADRIC:
        if X.dtype == object:
            Q = np.array(spec.Q, dtype=object)
        else:
            Q = spec.matrix
        return ((X @ Q) * X).sum(axis=1)
    if spec.kind == DETSYM:
        return spec.sign * _bareiss_stack(_sym_stack(X, spec.n))
    return spec.sign * _pfaffian_stack(_skew_stack(X, spec.n))


# ---------------------------------------------------------------------------
# real-valued geometry

def gradient(spec: VarietySpec, x) -> np.ndarray:
    """Gradient of ``f`` with respect to the flattened coordinates."""
    _check_dim(spec, x)
    x = np.asarray([float(parse_rational(v)) if not isinstance(v, float) else v
                    for v in x])
    if spec.kind == QUADRIC:
        return 2.0 * spec.matrix.astype(float) @ x
    if spec.kind == DETSYM:
        n = spec.n
        M = np.array(sym_from_coords(x, n), dtype=float)
        out = []
        for i in range(n):
            for j in range(i, n):
                cof = _cofactor(M, i, j)
                out.append(cof if i == j else 2.0 * cof)
        return spec.sign * np.array(out)
    size = 2 * spec.n
    M = skew_from_coords(x, spec.n)
    out = []
    for i, j in combinations(range(size), 2):
        rest = tuple(k for k in range(size) if k not in (i, j))
        out.append((-1) ** (i + j + 1) * _pf_float(M, rest))
    return spec.sign * np.array(out)


def _cofactor(M: np.ndarray, i: int, j: int) -> float:
    minor = np.delete(np.delete(M, i, axis=0), j, axis=1)
    return (-1) ** (i + j) * float(np.linalg.det(minor)) if minor.size else 1.0


def _pf_float(M, idx: tuple) -> float:
    if not idx:
        return 1.0
    first = idx[0]
    total = 0.0
    for pos in range(1, len(idx)):
        a = M[first][idx[pos]]
        if a:
            rest = idx[1:pos] + idx[pos + 1:]
            term = a * _pf_float(M, rest)
            total += term if pos % 2 == 1 else -term
    return total


def real_root(m, d: int) -> float:
    """The real ``d``-th root of ``m``; raises if none exists."""
    m = float(m)
    if m < 0:
        if d % 2 == 0:
            raise ValueError(f"{m} has no real root of even degree {d}")
        return -((-m) ** (1.0 / d))
    return m ** (1.0 / d)


def radial_project(spec: VarietySpec, m, x) -> np.ndarray:
    """Map a point of ``V_m`` to ``V_1`` by ``x -> m^(-1/d) x``."""
    m = check_level(m)
    if evaluate(spec, x) != m:
        raise ValueError("point is not on V_m")
    root = real_root(m, spec.degree)
    return np.array([float(parse_rational(v)) for v in x]) / root


def radial_project_array(spec: VarietySpec, m, X: np.ndarray) -> np.ndarray:
    """Vectorized :func:`radial_project` for rows already known to lie on V_m."""
    return np.asarray(X, dtype=float) / real_root(check_level(m), spec.degree)


# ---------------------------------------------------------------------------
# ternary anisotropy: exact decision by Hasse-Minkowski, plus a witness search

def _prime_factors(n: int) -> set[int]:
    n = abs(n)
    out, d = set(), 2
    while d * d <= n:
        while n % d == 0:
            out.add(d)
            n //= d
        d += 1
    if n > 1:
        out.add(n)
    return out


def _split(a: int, p: int) -> tuple[int, int]:
    alpha = 0
    while a % p == 0:
        a //= p
        alpha += 1
    return alpha, a


def hilbert_symbol(a: int, b: int, p) -> int:
    """``(a, b)_p`` for nonzero integers; ``p = 0`` stands for the real place."""
    if p == 0:
        return -1 if a < 0 and b < 0 else 1
    alpha, u = _split(a, p)
    beta, v = _split(b, p)
    if p == 2:
        eps = lambda t: ((t - 1) // 2) % 2  # noqa: E731
        omega = lambda t: ((t * t - 1) // 8) % 2  # noqa: E731
        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    legendre = lambda t: 1 if pow(t % p, (p - 1) // 2, p) == 1 else -1  # noqa: E731
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    return sign * legendre(u) ** beta * legendre(v) ** alpha


def rational_diagonal(Q) -> list[Fraction]:
    """Diagonal entries of a form rationally equivalent to ``x^T Q x``."""
    A = [[Fraction(v) for v in row] for row in Q]
    n = len(A)
    out = []
    for k in range(n):
        if A[k][k] == 0:
            j = next((j for j in range(k + 1, n) if A[k][j] != 0), None)
            if j is None:
                out.append(Fraction(0))
                continue
            # replace e_k by e_k + e_j (or e_k - e_j) to make the pivot nonzero
            t = 1 if A[k][k] + 2 * A[k][j] + A[j][j] != 0 else -1
            for i in range(n):
                A[i][k] += t * A[i][j]
            for i in range(n):
                A[k][i] += t * A[j][i]
        piv = A[k][k]
        out.append(piv)
        for i in range(k + 1, n):
            f = A[i][k] / piv
            for j in range(k, n):
                A[i][j] -= f * A[k][j]
        for j in range(k + 1, n):
            A[k][j] = Fraction(0)
        for i in range(k + 1, n):
            A[i][k] = Fraction(0)
    return out


def ternary_isotropic(Q) -> bool:
    """Whether the ternary form ``x^T Q x`` has a nonzero rational zero.

    The form is diagonalised over Q to ``<a, b, c>`` (integers after removing
    square denominators); it is isotropic iff ``(-ac, -bc)_v = 1`` at every
    place ``v``, and only ``v = inf``, 2 and primes dividing ``abc`` can fail.
    """
    diag = rational_diagonal(Q)
    if len(diag) != 3:
        raise ValueError("need a ternary form")
    if any(d == 0 for d in diag):
        return True
    a, b, c = (d.numerator * d.denominator for d in diag)
    places = {0, 2} | _prime_factors(a * b * c)
    return all(hilbert_symbol(-a * c, -b * c, p) == 1 for p in places)


@lru_cache(maxsize=32)
def _ternary_zero(Q: tuple, bound: int):
    """A nonzero integer zero of a ternary form with sup-norm <= bound, or None."""
    Q = np.array(Q, dtype=np.int64)
    # order variables so the solved one has a nonzero diagonal entry
    k = int(np.argmax(np.abs(np.diag(Q))))
    if Q[k, k] == 0:
        e = np.zeros(3, dtype=np.int64)
        e[0] = 1
        return tuple(int(v) for v in e)
    others = [i for i in range(3) if i != k]
    a = int(Q[k, k])
    r = np.arange(-bound, bound + 1, dtype=np.int64)
    for u in range(0, bound + 1):
        v = r if u > 0 else r[r >= 0]
        y = np.zeros((v.size, 2), dtype=np.int64)
        y[:, 0] = u
        y[:, 1] = v
        Qyy = Q[np.ix_(others, others)]
        b = 2 * (y @ Q[others, k])
        c = ((y @ Qyy) * y).sum(axis=1)
        disc = b * b - 4 * a * c
        ok = disc >= 0
        s = np.zeros_like(disc)
        s[ok] = np.floor(np.sqrt(disc[ok].astype(float))).astype(np.int64)
        for adj in (-1, 0, 1):
            t = s + adj
            hit = ok & (t >= 0) & (t * t == disc)
            for idx in np.nonzero(hit)[0]:
                for root in (-b[idx] + t[idx], -b[idx] - t[idx]):
                    if root % (2 * a) == 0:
                        z = root // (2 * a)
                        if abs(z) <= bound and (u or v[idx] or z):
                            out = [0, 0, 0]
                            out[others[0]], out[others[1]], out[k] = u, int(v[idx]), int(z)
                            return tuple(out)
    return None
