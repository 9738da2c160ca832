"""Integral, primitive and S-integral points on level sets ``f(x) = m``.

All enumerators return ``(N, dim)`` integer arrays whose rows are unique and
sorted lexicographically, so results can be compared or diffed directly.

The pruned path solves ``f`` exactly in one coordinate (see
:meth:`VarietySpec.solve_index`) after generating candidates for the others:

* definite quadrics: Fincke-Pohst style ellipsoid enumeration of the Schur
  complement, so only candidates with a real solution are visited;
* indefinite quadrics, determinants and pfaffians: every candidate in the box
  (or ball) is visited and the last coordinate is found by an exact integer
  square root (quadrics) or exact division (``f`` affine in that entry).

``oracle=True`` switches to a full scan of the box, which shares no code with
the pruned path beyond :func:`evaluate_array`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import _parallel
from .varieties import (INT64_SAFE, QUADRIC, VarietySpec, check_level,
                        evaluate_array, value_bound)

# target rows per chunk of candidates
CHUNK_ROWS = 1 << 20


# ---------------------------------------------------------------------------
# places and S-points

def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


def padic_valuation(value, p: int) -> int:
    """``v_p`` of a nonzero int or Fraction."""
    q = Fraction(value)
    if q == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


@dataclass(frozen=True)
class PlaceSet:
    """``S = {inf} + finite_primes`` over Q."""

    finite_primes: tuple = ()
    includes_infinity: bool = True

    def __post_init__(self):
        primes = tuple(sorted(int(p) for p in self.finite_primes))
        if len(set(primes)) != len(primes):
            raise ValueError("primes in S must be distinct")
        for p in primes:
            if not _is_prime(p):
                raise ValueError(f"{p} is not prime")
        if not self.includes_infinity:
            raise ValueError("only S containing the infinite place is supported")
        object.__setattr__(self, "finite_primes", primes)

    @property
    def m_S(self) -> int:
        return math.prod(self.finite_primes)

    def in_semigroup(self, m: int) -> bool:
        """Whether the positive integer ``m`` lies in ``<S>``."""
        m = int(m)
        if m <= 0:
            return False
        for p in self.finite_primes:
            while m % p == 0:
                m //= p
        return m == 1

    def semigroup_up_to(self, bound: int) -> list[int]:
        """All elements of ``<S>`` in ``[1, bound]``, ascending."""
        out = [1]
        for p in self.finite_primes:
            grown = []
            for u in out:
                while u <= bound:
                    grown.append(u)
                    u *= p
            out = grown
        return sorted(u for u in out if u <= bound)


@dataclass(frozen=True)
class SPoint:
    """The rational vector ``numerator / denominator`` in lowest terms."""

    numerator: tuple
    denominator: int

    def __post_init__(self):
        num = tuple(int(v) for v in self.numerator)
        q = int(self.denominator)
        if q <= 0:
            raise ValueError("denominator must be positive")
        if math.gcd(math.gcd(*num) if num else 0, q) != 1:
            raise ValueError("representation is not reduced")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", q)

    @classmethod
    def from_rationals(cls, z: Sequence) -> "SPoint":
        z = [Fraction(v) for v in z]
        q = math.lcm(*(v.denominator for v in z))
        return cls(tuple(int(v * q) for v in z), q)

    def to_fractions(self) -> list[Fraction]:
        return [Fraction(v, self.denominator) for v in self.numerator]

    def is_s_integral(self, S: PlaceSet) -> bool:
        return S.in_semigroup(self.denominator)

    def __array__(self, dtype=None, copy=None):
        out = np.array(self.numerator, dtype=float) / self.denominator
        return out if dtype is None else out.astype(dtype)


# ---------------------------------------------------------------------------
# helpers

def sort_unique(X: np.ndarray) -> np.ndarray:
    """Unique rows in lexicographic order."""
    if X.shape[0] == 0:
        return X
    if X.dtype == object:
        rows = sorted(set(tuple(int(v) for v in row) for row in X))
        out = np.empty((len(rows), X.shape[1]), dtype=object)
        out[:] = rows
        return out
    return np.unique(X, axis=0)  # sorts rows lexicographically


def primitive_filter(points: np.ndarray) -> np.ndarray:
    """Rows whose entries have gcd 1."""
    points = np.asarray(points)
    if points.shape[0] == 0:
        return points
    if points.dtype == object:
        keep = [math.gcd(*map(int, row)) == 1 for row in points]
        return points[np.array(keep, dtype=bool)]
    g = np.gcd.reduce(np.abs(points), axis=1)
    return points[g == 1]


def isqrt_exact(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integer square roots and a mask of exact squares (negatives -> False)."""
    values = np.asarray(values)
    if values.dtype == object:
        ok = np.array([v >= 0 and math.isqrt(v) ** 2 == v for v in values], dtype=bool)
        root = np.array([math.isqrt(v) if v >= 0 else 0 for v in values], dtype=object)
        return root, ok
    nonneg = values >= 0
    root = np.zeros_like(values)
    root[nonneg] = np.floor(np.sqrt(values[nonneg].astype(np.float64))).astype(values.dtype)
    # float sqrt can be off by one near 2^53
    for _ in range(2):
        hi = nonneg & ((root + 1) * (root + 1) <= values)
        root[hi] += 1
        lo = nonneg & (root * root > values)
        root[lo] -= 1
    ok = nonneg & (root * root == values)
    return root, ok


def _dtype_for(spec: VarietySpec, T: int, m: int):
    bound = 4 * (value_bound(spec, T) + abs(m)) ** 2
    return np.int64 if bound < INT64_SAFE else object


def _box_chunks(lo: int, hi: int, inner: int) -> list[tuple[int, int]]:
    """Split [lo, hi] into consecutive ranges of about CHUNK_ROWS rows."""
    step = max(1, CHUNK_ROWS // max(1, inner))
    return [(a, min(hi, a + step - 1)) for a in range(lo, hi + 1, step)]


def _grid(ranges: list[tuple[int, int]], dtype) -> np.ndarray:
    axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in ranges]
    if any(ax.size == 0 for ax in axes):
        return np.zeros((0, len(ranges)), dtype=dtype)
    mesh = np.meshgrid(*axes, indexing="ij")
    out = np.stack([g.ravel() for g in mesh], axis=1)
    return out.astype(dtype) if dtype is object else out


def ellipsoid_points(P: np.ndarray, bound: float, T: int,
                     first: tuple[int, int] | None = None) -> np.ndarray:
    """Integer ``y`` in ``[-T, T]^k`` with ``y^T P y <= bound`` (P positive definite).

    Coordinates are fixed from the last to the first (Fincke-Pohst); each step
    keeps only the integer range compatible with the remaining budget.  The
    result is a superset up to a relative slack of 1e-9, which callers remove
    by exact checks.  ``first`` restricts the outermost (last) coordinate.
    """
    k = P.shape[0]
    if bound < 0:
        return np.zeros((0, k), dtype=np.int64)
    R = np.linalg.cholesky(P).T  # P = R^T R, R upper triangular
    diag2 = np.diag(R) ** 2
    mu = R / np.diag(R)[:, None]
    budget = bound * (1 + 1e-9) + 1e-9
    ys = np.zeros((1, 0), dtype=np.int64)  # columns hold y_i, ..., y_{k-1}
    acc = np.zeros(1)
    for i in range(k - 1, -1, -1):
        if ys.shape[1]:
            centre = -(ys * mu[i, i + 1:]).sum(axis=1)
        else:
            centre = np.zeros(ys.shape[0])
        radius = np.sqrt(np.maximum(budget - acc, 0.0) / diag2[i])
        lo = np.maximum(np.ceil(centre - radius - 1e-9), -T).astype(np.int64)
        hi = np.minimum(np.floor(centre + radius + 1e-9), T).astype(np.int64)
        if i == k - 1 and first is not None:
            lo = np.maximum(lo, first[0])
            hi = np.minimum(hi, first[1])
        counts = np.maximum(hi - lo + 1, 0)
        total = int(counts.sum())
        rep = np.repeat(np.arange(ys.shape[0]), counts)
        offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        vals = lo[rep] + offsets
        diff = vals - centre[rep]
        acc = acc[rep] + diag2[i] * diff * diff
        ys = np.concatenate([vals[:, None], ys[rep]], axis=1)
    return ys


# ---------------------------------------------------------------------------
# candidate generation

def _candidates(spec: VarietySpec, m: int, T: int, radius: float | None,
                dtype) -> Iterator[np.ndarray]:
    """Chunks of the non-solved coordinates worth solving for."""
    dim = spec.ambient_dim
    k = spec.solve_index()
    rest = [i for i in range(dim) if i != k]
    definite = spec.definiteness()
    if spec.kind == QUADRIC and definite != 0:
        if m * definite <= 0:
            return
        Qf = definite * spec.matrix.astype(float)
        P = (Qf[np.ix_(rest, rest)]
             - np.outer(Qf[rest, k], Qf[k, rest]) / Qf[k, k])
        bound = float(m * definite)
        for first in _outer_ranges(P, bound, T):
            Y = ellipsoid_points(P, bound, T, first=first)
            if radius is not None:
                Y = Y[(Y.astype(float) ** 2).sum(axis=1) <= radius * radius * (1 + 1e-9) + 1e-9]
            yield Y.astype(dtype) if dtype is object else Y
        return
    if radius is not None and radius < T:
        P = np.eye(dim - 1)
        bound = float(radius) ** 2
        for first in _outer_ranges(P, bound, T):
            Y = ellipsoid_points(P, bound, T, first=first)
            yield Y.astype(dtype) if dtype is object else Y
        return
    inner = (2 * T + 1) ** (dim - 2)
    for a, b in _box_chunks(-T, T, inner):
        yield _grid([(-T, T)] * (dim - 2) + [(a, b)], dtype)


def _outer_ranges(P: np.ndarray, bound: float, T: int) -> list[tuple[int, int]]:
    """Chunks of the outermost Fincke-Pohst coordinate (the last one)."""
    k = P.shape[0]
    # extent of the last coordinate over the ellipsoid: sqrt(bound * (P^-1)_kk)
    extent = math.sqrt(max(bound, 0.0) * np.linalg.inv(P)[k - 1, k - 1]) + 1e-9
    hi = min(T, math.floor(extent))
    lo = -hi
    if hi < lo:
        return []
    # rough row count per outer value: volume of a (k-1)-dim slice
    inner = 1
    if k > 1:
        ext = np.sqrt(max(bound, 0.0) * np.diag(np.linalg.inv(P)))[:-1]
        inner = int(np.prod(np.minimum(2 * ext + 1, 2 * T + 1)))
    return _box_chunks(lo, hi, inner)


def _solve_chunk(spec: VarietySpec, m: int, T: int, Y: np.ndarray) -> np.ndarray:
    """All integer completions ``x`` of the rows of ``Y`` with ``f(x) = m``."""
    dim = spec.ambient_dim
    k = spec.solve_index()
    rest = [i for i in range(dim) if i != k]
    if Y.shape[0] == 0:
        return np.zeros((0, dim), dtype=Y.dtype)
    pieces = []
    if spec.kind == QUADRIC:
        Q = np.array(spec.Q, dtype=object) if Y.dtype == object else spec.matrix
        a = int(Q[k, k])
        b = 2 * (Y @ Q[rest, k])
        c = ((Y @ Q[np.ix_(rest, rest)]) * Y).sum(axis=1) - m
        if a != 0:
            disc = b * b - 4 * a * c
            root, ok = isqrt_exact(disc)
            for sgn in (1, -1):
                num = -b + sgn * root
                good = ok & (num % (2 * a) == 0)
                t = np.where(good, num // (2 * a), 0)
                good &= (t >= -T) & (t <= T)
                if sgn == -1:
                    good &= root != 0  # double root already taken
                pieces.append((Y[good], t[good]))
        else:
            pieces.extend(_solve_affine(b, c, Y, T))
    else:
        Y0 = _insert(Y, k, np.zeros(Y.shape[0], dtype=Y.dtype))
        Y1 = _insert(Y, k, np.ones(Y.shape[0], dtype=Y.dtype))
        beta = evaluate_array(spec, Y0)
        alpha = evaluate_array(spec, Y1) - beta
        pieces.extend(_solve_affine(alpha, beta - m, Y, T))
    rows = [_insert(Yg, k, tg) for Yg, tg in pieces if Yg.shape[0]]
    if not rows:
        return np.zeros((0, dim), dtype=Y.dtype)
    return np.concatenate(rows, axis=0)


def _solve_affine(alpha, gamma, Y, T):
    """Integer t in [-T, T] with ``alpha * t + gamma == 0``, per row."""
    out = []
    nz = alpha != 0
    safe = np.where(nz, alpha, 1)
    good = nz & (gamma % safe == 0)
    t = np.where(good, -(gamma // safe), 0)
    good &= (t >= -T) & (t <= T)
    out.append((Y[good], t[good]))
    flat = (~nz) & (gamma == 0)
    if flat.any():
        Yf = Y[flat]
        ts = np.arange(-T, T + 1, dtype=np.int64)
        Yrep = np.repeat(Yf, ts.size, axis=0)
        trep = np.tile(ts, Yf.shape[0]).astype(Y.dtype)
        out.append((Yrep, trep))
    return out


def _insert(Y: np.ndarray, k: int, t: np.ndarray) -> np.ndarray:
    return np.concatenate([Y[:, :k], np.asarray(t, dtype=Y.dtype)[:, None], Y[:, k:]], axis=1)


# ---------------------------------------------------------------------------
# public enumerators

def integral_points(spec: VarietySpec, m: int, T: int, *, oracle: bool = False,
                    radius: float | None = None) -> np.ndarray:
    """``{x in Z^dim : f(x) = m, ||x||_inf <= T}`` as sorted unique rows.

    ``radius`` additionally restricts to the euclidean ball ``||x||_2 <= radius``.
    """
    m = check_level(m)
    T = int(T)
    if T < 1:
        raise ValueError("bound T must be >= 1")
    dtype = _dtype_for(spec, T, m)
    if oracle:
        X = _full_scan(spec, m, T, dtype)
    elif not spec.attainable(m):
        X = np.zeros((0, spec.ambient_dim), dtype=dtype)
    else:
        parts = _parallel.map_chunks(lambda Y: _solve_chunk(spec, m, T, Y),
                                     list(_candidates(spec, m, T, radius, dtype)))
        parts = [p for p in parts if p.shape[0]]
        if parts:
            X = np.concatenate(parts, axis=0)
        else:
            X = np.zeros((0, spec.ambient_dim), dtype=dtype)
    if radius is not None and X.shape[0]:
        r2 = Fraction(radius) ** 2
        norms = (X.astype(object) ** 2).sum(axis=1)
        X = X[np.array([v <= r2 for v in norms], dtype=bool)]
    return sort_unique(X)


def _full_scan(spec: VarietySpec, m: int, T: int, dtype) -> np.ndarray:
    dim = spec.ambient_dim
    inner = (2 * T + 1) ** (dim - 1)
    found = []
    for a, b in _box_chunks(-T, T, inner):
        X = _grid([(a, b)] + [(-T, T)] * (dim - 1), dtype)
        hit = evaluate_array(spec, X) == m
        found.append(X[hit])
    return np.concatenate(found, axis=0) if found else np.zeros((0, dim), dtype=dtype)


def s_points_by_level(spec: VarietySpec, S: PlaceSet, T: int, *,
                      oracle: bool = False) -> dict[int, np.ndarray]:
    """Primitive ``x`` with ``||x||_inf < T`` and ``f(x)`` in ``<S>``, by level.

    Levels are the positive elements of ``<S>``; empty levels are omitted.
    """
    if not S.finite_primes:
        raise ValueError("S needs at least one finite prime")
    T = int(T)
    out: dict[int, np.ndarray] = {}
    if T <= 1:
        return out
    bound = T - 1
    for u in S.semigroup_up_to(value_bound(spec, bound)):
        pts = primitive_filter(integral_points(spec, u, bound, oracle=oracle))
        if pts.shape[0]:
            out[u] = pts
    return out


def denominator_numerators(spec: VarietySpec, p: int, n: int, lo, hi) -> np.ndarray:
    """Numerators ``x = p^n z`` of the points counted by :func:`denominator_points`."""
    lo = [Fraction(v) for v in lo]
    hi = [Fraction(v) for v in hi]
    if len(lo) != spec.ambient_dim or len(hi) != spec.ambient_dim:
        raise ValueError("box must have one interval per coordinate")
    scale = p**n
    level = p ** (spec.degree * n)
    T = math.floor(max(max(abs(v) for v in lo), max(abs(v) for v in hi)) * scale)
    if T < 1:
        return np.zeros((0, spec.ambient_dim), dtype=np.int64)
    X = integral_points(spec, level, T)
    if n > 0 and X.shape[0]:
        X = X[np.any(X % p != 0, axis=1)]
    lo_s = [v * scale for v in lo]
    hi_s = [v * scale for v in hi]
    keep = np.ones(X.shape[0], dtype=bool)
    for i in range(spec.ambient_dim):
        col = X[:, i]
        keep &= np.array([lo_s[i] <= int(v) <= hi_s[i] for v in col], dtype=bool)
    return X[keep]


def denominator_points(spec: VarietySpec, p: int, n: int, box) -> list[SPoint]:
    """Points ``z`` of ``V_1`` in ``box`` with ``p^n z`` integral and p-primitive.

    ``box`` is a pair ``(lo, hi)`` of coordinate bounds (closed).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    lo, hi = box
    X = denominator_numerators(spec, p, n, lo, hi)
    return [SPoint.from_rationals([Fraction(int(v), p**n) for v in row]) for row in X]
