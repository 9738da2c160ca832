"""Exact p-adic volumes of level sets, spheres and balls, and their growth laws.

Volumes use the Gelfand-Leray normalisation ``dx/df``: the volume of
``{f = m}`` inside ``Z_p^n`` is the limit of ``N_k / p^(k(n-1))`` where
``N_k = #{x mod p^k : f(x) = m mod p^k}``.

Counting is a digit tree.  A node is a residue ``x0 mod p^e`` with
``f(x0) = m mod p^e``.  When ``v = min_i v_p(df/dx_i (x0)) < e`` the node is
*resolved*: ``f(x0) mod p^(e+v)`` is well defined, and if it matches ``m`` the
node has exactly ``p^((n-1)(k-e) + v)`` descendants mod ``p^k`` for every
``k >= e + v`` (one coordinate is fixed by Hensel lifting, the rest are
free); otherwise its descendants die out at a known level.  Unresolved nodes
are expanded one digit further.  This gives exact ``N_k`` for every ``k`` and
the exact limit whenever the tree closes within the depth cap.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from .varieties import INT64_SAFE, VarietySpec, check_level, evaluate_array, value_bound
from .volumes_arch import AsymptoticFit


class StabilizationError(RuntimeError):
    """The digit tree did not close within ``k_max`` levels."""


def default_k_max(p: int) -> int:
    return 6 if p <= 5 else 4


@dataclass(frozen=True)
class DensityRecord:
    p: int
    k: int
    count: int
    density: Fraction
    stabilized: bool = True
    limit: Fraction | None = None


@dataclass
class _Tree:
    """Aggregated digit tree for ``f = m`` over ``Z_p``."""

    n: int
    p: int
    depth: int
    resolved: Counter = field(default_factory=Counter)   # (e, v, a) -> nodes
    unresolved: dict = field(default_factory=dict)       # level -> nodes

    def lifts(self, e: int, v: int, a: int, k: int) -> int:
        n, p = self.n, self.p
        if a == e + v:
            if k < e + v:
                return p ** (n * (k - e))
            return p ** ((n - 1) * (k - e) + v)
        return p ** (n * (k - e)) if k <= a else 0

    def count(self, k: int) -> int:
        if not 1 <= k <= self.depth:
            raise ValueError(f"tree only covers levels 1..{self.depth}")
        total = self.unresolved.get(k, 0)
        for (e, v, a), nodes in self.resolved.items():
            if e <= k:
                total += nodes * self.lifts(e, v, a, k)
        return total

    def density(self, k: int) -> Fraction:
        return Fraction(self.count(k), self.p ** (k * (self.n - 1)))

    @property
    def closed(self) -> bool:
        return self.unresolved.get(self.depth, 0) == 0

    def limit(self) -> Fraction:
        """Exact limit density; for an open tree, the level-``depth`` density."""
        if not self.closed:
            return self.density(self.depth)
        n, p = self.n, self.p
        total = Fraction(0)
        for (e, v, a), nodes in self.resolved.items():
            if a == e + v:
                total += nodes * Fraction(p) ** (v - e * (n - 1))
        return total


def _valuation(values: np.ndarray, p: int, cap: int) -> np.ndarray:
    """``min(v_p(value), cap)`` elementwise (zero has valuation ``cap``)."""
    cur = values.copy()
    out = np.zeros(values.shape, dtype=np.int64)
    active = np.ones(values.shape, dtype=bool)
    for _ in range(cap):
        div = active & (cur % p == 0)
        out += div
        cur = np.where(div, cur // p, cur)
        active = div
        if not active.any():
            break
    return out


def integer_gradient(spec: VarietySpec, X: np.ndarray) -> np.ndarray:
    """Exact ``grad f`` on integer rows.

    Each family has degree at most 2 in every single coordinate, so the
    central difference ``(f(x+e_i) - f(x-e_i)) / 2`` is exact.
    """
    cols = []
    for i in range(spec.ambient_dim):
        step = np.zeros(spec.ambient_dim, dtype=X.dtype)
        step[i] = 1
        cols.append((evaluate_array(spec, X + step) - evaluate_array(spec, X - step)) // 2)
    return np.stack(cols, axis=1)


def _digit_tree(spec: VarietySpec, m: int, p: int, depth: int, primitive: bool,
                hensel: bool = True) -> _Tree:
    n = spec.ambient_dim
    tree = _Tree(n=n, p=p, depth=depth)
    digits = np.array(list(product(range(p), repeat=n)), dtype=np.int64)
    nodes = digits
    if primitive:
        nodes = nodes[np.any(nodes != 0, axis=1)]
    e = 1
    while True:
        modulus = p**e
        wide = value_bound(spec, p ** (e + 1)) * 4 >= INT64_SAFE
        if wide and nodes.dtype != object:
            nodes = nodes.astype(object)
        fx = evaluate_array(spec, nodes)
        keep = (fx - m) % modulus == 0
        nodes, fx = nodes[keep], fx[keep]
        if hensel and nodes.shape[0]:
            grad = integer_gradient(spec, nodes)
            gval = _valuation(grad, p, e).min(axis=1)
            done = gval < e
            if done.any():
                v = gval[done]
                A = fx[done] - m
                a = np.minimum(_valuation(A, p, e + int(v.max())), e + v)
                tree.resolved.update(zip([e] * int(done.sum()), v.tolist(), a.tolist()))
            nodes = nodes[~done]
        tree.unresolved[e] = int(nodes.shape[0])
        if e == depth or nodes.shape[0] == 0:
            for level in range(e + 1, depth + 1):
                tree.unresolved[level] = 0
            break
        # expand one digit
        lift = digits.astype(nodes.dtype) * modulus
        nodes = (nodes[:, None, :] + lift[None, :, :]).reshape(-1, n)
        e += 1
    return tree


@lru_cache(maxsize=512)
def _cached_tree(spec, m, p, depth, primitive):
    return _digit_tree(spec, m, p, depth, primitive)


def count_solutions(spec: VarietySpec, m: int, p: int, k: int, *,
                    primitive: bool = False, method: str = "hensel") -> int:
    """``#{x mod p^k : f(x) = m mod p^k}`` (optionally ``x`` not all divisible by p).

    ``method="lift"`` expands every digit without Hensel shortcuts; it is the
    independent route for cross-checks and only practical for small ``p^(kn)``.
    """
    m = check_level(m)
    if k < 1:
        raise ValueError("k must be >= 1")
    if method == "lift":
        return _digit_tree(spec, m, p, k, primitive, hensel=False).count(k)
    return _cached_tree(spec, m, p, k, primitive).count(k)


def local_density(spec: VarietySpec, m: int, p: int, k_max: int | None = None, *,
                  primitive: bool = False) -> DensityRecord:
    """Normalised counts ``N_k / p^(k(n-1))`` until two consecutive ones agree.

    ``k`` in the record is the first level whose density equals the next one;
    if none does up to ``k_max`` the record is flagged ``stabilized=False``.
    ``limit`` is the exact ``k -> infinity`` value when the digit tree closes
    within ``k_max`` levels, else None.  Two equal consecutive densities do
    not by themselves prove the limit has been reached (for
    ``x^2+y^2+z^2 = 4^5`` at ``p = 2`` the densities pair up as
    ``1/2, 1/2, 1/4, 1/4, ...`` before settling at ``3/64``), so ``limit`` is the
    value to trust when it is present.
    """
    m = check_level(m)
    k_max = default_k_max(p) if k_max is None else int(k_max)
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    tree = _cached_tree(spec, m, p, k_max, primitive)
    limit = tree.limit() if tree.closed else None
    for k in range(1, k_max):
        if tree.density(k) == tree.density(k + 1):
            return DensityRecord(p, k, tree.count(k), tree.density(k), True, limit)
    return DensityRecord(p, k_max, tree.count(k_max), tree.density(k_max), False, limit)


def _check_prime(p: int) -> None:
    if p < 2 or any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
        raise ValueError(f"{p} is not prime")


def padic_sphere_volume(spec: VarietySpec, p: int, j: int, k_max: int | None = None) -> Fraction:
    """Volume of ``{z in Z_p-points of V_1 : ||z||_p = p^j}``.

    With ``z = p^(-j) x``, ``x`` primitive and ``f(x) = p^(dj)``; the change of
    variables multiplies ``dx/df`` by ``p^(j(n-d))``.
    """
    _check_prime(p)
    if j < 0:
        raise ValueError("j must be >= 0 (points of norm < 1 cannot lie on f = 1)")
    k_max = default_k_max(p) if k_max is None else int(k_max)
    n, d = spec.ambient_dim, spec.degree
    tree = _cached_tree(spec, p ** (d * j), p, k_max, True)
    if not tree.closed:
        raise StabilizationError(
            f"sphere j={j} at p={p} not resolved within k_max={k_max}")
    return tree.limit() * Fraction(p) ** (j * (n - d))


def padic_ball_volume(spec: VarietySpec, p: int, j: int, k_max: int | None = None) -> Fraction:
    """Volume of ``{||z||_p <= p^j}``: sum of sphere volumes for ``0..j``."""
    return sum((padic_sphere_volume(spec, p, i, k_max) for i in range(j + 1)), Fraction(0))


def padic_sphere_series(spec: VarietySpec, p: int, j_max: int,
                        k_max: int | None = None) -> list[tuple[int, Fraction]]:
    return [(j, padic_sphere_volume(spec, p, j, k_max)) for j in range(j_max + 1)]


def padic_tail(spec: VarietySpec, p: int, j: int, k0: float,
               k_max: int | None = None) -> float:
    """``int_{ball p^j} ||z||_p^(-k0) d mu = sum_i p^(-k0 i) sphere(i)``."""
    return float(sum(p ** (-k0 * i) * float(padic_sphere_volume(spec, p, i, k_max))
                     for i in range(j + 1)))


def height_strata(primes: Sequence[int], T: float, strict: bool = False):
    """Exponent tuples ``(j_p)`` with ``prod p^(j_p) <= T`` (``< T`` if strict)."""
    out = [((), 1)]
    for p in primes:
        grown = []
        for exps, h in out:
            j = 0
            while (h * p**j < T) if strict else (h * p**j <= T):
                grown.append((exps + (j,), h * p**j))
                j += 1
        out = grown
    return out


def multi_prime_sphere_volume(spec: VarietySpec, primes: Sequence[int], exps: Sequence[int],
                              k_max: int | None = None) -> Fraction:
    """Product measure of ``prod_p S_p(p^(j_p))``."""
    out = Fraction(1)
    for p, j in zip(primes, exps):
        out *= padic_sphere_volume(spec, p, j, k_max)
    return out


def multi_prime_ball_volume(spec: VarietySpec, primes: Sequence[int], T: float,
                            k_max: int | None = None) -> Fraction:
    """``w_T``: volume of ``{z in prod_p Z_p : prod_p ||z||_p <= T}``."""
    return sum((multi_prime_sphere_volume(spec, primes, exps, k_max)
                for exps, _ in height_strata(primes, T)), Fraction(0))


# ---------------------------------------------------------------------------
# growth diagnostics

@dataclass(frozen=True)
class ClassFit:
    residue: int
    fit: AsymptoticFit | None
    empty: bool = False


@dataclass(frozen=True)
class StructureFit:
    period: int
    classes: tuple
    residual_rms: float


def _fit_class(js: np.ndarray, logv: np.ndarray, q: float, b_max: int):
    design = np.stack([np.ones_like(js), js], axis=1)
    best = None
    logj = np.log(js) / math.log(q)
    for b in range(b_max + 1):
        target = logv - b * logj
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        resid = target - design @ coef
        sse = float((resid**2).sum())
        if best is None or sse < best[2] * 0.99 - 1e-18:
            best = (b, coef, sse)
    return best


def structure_fit(series: Sequence[tuple[int, float]], q: float, *, max_period: int = 2,
                  b_max: int = 2, start: int = 1, min_class_points: int = 3) -> StructureFit:
    """Fit ``log_q v_j = log_q c + a j + b log_q j`` per residue class of ``j mod N0``.

    Periods ``N0 = 1..max_period`` are tried and the one with the smallest
    total RMS residual is kept (ties go to the smaller period).  Terms with
    ``j < start`` are treated as transient.  Within a class, leading zeros are
    dropped; a class that is zero throughout is reported as empty, and a class
    with zeros after nonzero terms rules the period out.
    """
    data = sorted((int(j), float(v)) for j, v in series)
    if sum(1 for _, v in data if v > 0) < 8:
        raise ValueError("need at least 8 nonzero terms")
    data = [(j, v) for j, v in data if j >= max(start, 1)]
    best = None
    for period in range(1, max_period + 1):
        classes = []
        sse = 0.0
        points = 0
        valid = True
        for r in range(period):
            vals = [(j, v) for j, v in data if j % period == r]
            nonzero = [i for i, (_, v) in enumerate(vals) if v > 0]
            if not nonzero:
                classes.append(ClassFit(r, None, empty=True))
                continue
            tail = vals[nonzero[0]:]
            if any(v <= 0 for _, v in tail) or len(tail) < min_class_points:
                valid = False
                break
            js = np.array([j for j, _ in tail], dtype=float)
            logv = np.log(np.array([v for _, v in tail])) / math.log(q)
            b, coef, class_sse = _fit_class(js, logv, q, b_max)
            sse += class_sse
            points += len(tail)
            rms = math.sqrt(class_sse / len(tail))
            classes.append(ClassFit(r, AsymptoticFit(
                a=float(coef[1]), b=int(b), c=float(q ** coef[0]), residual_rms=rms,
                grid=tuple(tail))))
        if not valid or points == 0:
            continue
        rms = math.sqrt(sse / points)
        if best is None or rms < best.residual_rms - 1e-9:
            best = StructureFit(period, tuple(classes), rms)
    if best is None:
        raise ValueError("no period gives a consistent fit")
    return best


@dataclass(frozen=True)
class DoublingReport:
    max_ratio: float
    ratios: tuple       # ((T, w_2T / w_T), ...)
    growing: bool


def doubling_check(series: Sequence[tuple[float, float]]) -> DoublingReport:
    """Ratios ``w_2T / w_T`` over all doubling pairs in the grid.

    ``growing`` is set when the last three ratios increase strictly, the
    pattern an unbounded ratio would produce.
    """
    table = {float(T): float(w) for T, w in series}
    ratios = []
    for T in sorted(table):
        if 2 * T in table:
            if table[T] <= 0:
                raise ValueError("w must be positive at compared points")
            ratios.append((T, table[2 * T] / table[T]))
    if not ratios:
        raise ValueError("grid has no doubling pairs")
    last = [r for _, r in ratios[-3:]]
    growing = len(last) == 3 and last[0] < last[1] < last[2]
    return DoublingReport(max(r for _, r in ratios), tuple(ratios), growing)
