"""Local norms and the S-height ``H_S(z) = prod_{v in S} ||z||_v``.

The euclidean norm sits at the infinite place and the max norm at each finite
prime.  ``H_S(z)^2`` is an exact rational (the p-adic factors are powers of
p and the squared euclidean norm is rational), so height comparisons are done
exactly through :func:`height_squared`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .enumeration import PlaceSet, SPoint, padic_valuation
from .varieties import parse_rational


def _as_fractions(z) -> list[Fraction]:
    if isinstance(z, SPoint):
        return z.to_fractions()
    return [parse_rational(v) if not isinstance(v, Fraction) else v for v in z]


@dataclass(frozen=True)
class HeightProfile:
    places: PlaceSet = field(default_factory=PlaceSet)
    euclidean_gram: tuple | None = None

    def __post_init__(self):
        if self.euclidean_gram is not None:
            G = [[Fraction(v) for v in row] for row in self.euclidean_gram]
            Gf = np.array(G, dtype=float)
            if not np.allclose(Gf, Gf.T) or any(G[i][j] != G[j][i]
                                                 for i in range(len(G)) for j in range(len(G))):
                raise ValueError("Gram matrix must be symmetric")
            if np.any(np.linalg.eigvalsh(Gf) <= 0):
                raise ValueError("Gram matrix must be positive definite")
            object.__setattr__(self, "euclidean_gram", tuple(tuple(row) for row in G))


def padic_norm(z, p: int) -> int:
    """Exponent ``e`` with ``||z||_p = p^e = max_i |z_i|_p``."""
    z = _as_fractions(z)
    vals = [padic_valuation(v, p) for v in z if v != 0]
    if not vals:
        raise ValueError("the zero vector has no p-adic norm")
    return -min(vals)


def euclidean_norm_squared(z, gram=None) -> Fraction:
    z = _as_fractions(z)
    if gram is None:
        return sum((v * v for v in z), Fraction(0))
    n = len(z)
    return sum((Fraction(gram[i][j]) * z[i] * z[j] for i in range(n) for j in range(n)),
               Fraction(0))


def height_squared(z, profile: HeightProfile | None = None) -> Fraction:
    """Exact ``H_S(z)^2``."""
    profile = profile or HeightProfile()
    z = _as_fractions(z)
    if all(v == 0 for v in z):
        raise ValueError("the zero vector has no height")
    h2 = euclidean_norm_squared(z, profile.euclidean_gram)
    for p in profile.places.finite_primes:
        e = padic_norm(z, p)
        h2 *= Fraction(p) ** (2 * e)
    return h2


def height(z, profile: HeightProfile | None = None) -> float:
    """``H_S(z)`` as a float; use :func:`height_below` for exact comparisons."""
    h2 = height_squared(z, profile)
    return float(np.sqrt(float(h2)))


def height_below(z, T, profile: HeightProfile | None = None, strict: bool = True) -> bool:
    h2 = height_squared(z, profile)
    T2 = Fraction(T) ** 2
    return h2 < T2 if strict else h2 <= T2


def integral_heights_squared(X: np.ndarray, gram=None) -> np.ndarray:
    """``||x||^2`` for integer rows that are primitive at every prime of S.

    For such rows every p-adic factor is 1, so this is ``H_S(x)^2`` exactly.
    """
    X = np.asarray(X)
    if gram is None:
        return (X.astype(object) ** 2).sum(axis=1) if X.dtype == object else (X * X).sum(axis=1)
    G = np.array(gram, dtype=object)
    Xo = X.astype(object)
    return ((Xo @ G) * Xo).sum(axis=1)
