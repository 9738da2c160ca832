"""Real invariant-measure volumes on ``V_m(R)`` and power-log asymptotic fits.

The invariant measure on a level set is normalised as the Gelfand-Leray form
``dx/df``.  It is estimated through the thin shell

    Leb{x : |f(x) - m| <= eps, ||pi(x)|| <= T} / (2 eps),

where ``pi(x) = (m / f(x))^(1/d) x`` pushes a shell point radially onto
``V_m``.  The quantity tends to ``mu(B_T)`` as ``eps -> 0``.  Testing the
ball (and evaluating integrands) at ``pi(x)`` rather than at ``x`` keeps the
estimate exact when the sphere ``||x|| = T`` is tangent to the level set, as
for a compact level set at its maximal norm.  Two unbiased Monte Carlo
estimators of the shell quantity are provided:

``"box"``
    sample ``x`` uniformly in a cube containing the shell and count hits.
``"conditional"`` (default)
    sample every coordinate but the solved one uniformly and integrate the
    solved coordinate over its shell intervals, which are found exactly (at
    most two per line); a single uniform draw inside them handles the ball
    test and the integrand.  This is the box estimator with one coordinate
    integrated out, so it has the same mean and a much smaller variance on
    non-compact level sets.

Randomness comes from a counter-based Philox stream per batch, keyed by
``(seed, batch index)``; estimates depend only on ``(seed, samples)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _parallel
from .varieties import QUADRIC, VarietySpec, _pfaffian_stack, _skew_stack, _sym_stack

BATCH_SIZE = 1 << 15
SHELL_MC = "shell_mc"
EXACT_PADIC = "exact_padic"
CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float = 0.0
    method: str = SHELL_MC
    samples: int = 0
    degenerate: bool = False

    def __post_init__(self):
        if self.value < 0 or self.stderr < 0:
            raise ValueError("volumes and errors are nonnegative")
        if self.method != SHELL_MC and self.stderr != 0:
            raise ValueError("only Monte Carlo estimates carry a standard error")


@dataclass(frozen=True)
class AsymptoticFit:
    """``v ~ c T^a (log T)^b`` (or ``c q^(a j) j^b``) with fit diagnostics."""

    a: float
    b: int
    c: float
    residual_rms: float
    grid: tuple = field(default=(), repr=False)

    def predict(self, T):
        T = np.asarray(T, dtype=float)
        return self.c * T**self.a * np.log(T) ** self.b

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "residual_rms": self.residual_rms}


def batch_rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(batch,))))


# ---------------------------------------------------------------------------
# interval algebra along the solved coordinate

def _quadratic_band(a, b, c, lower, upper):
    """``{t : lower <= a t^2 + b t + c <= upper}`` for scalar ``a != 0``.

    Returns two intervals ``(lo1, hi1, lo2, hi2)``; empty ones have lo > hi.
    """
    if a < 0:
        return _quadratic_band(-a, -b, -c, -upper, -lower)
    inf = np.full(np.shape(b), np.inf)
    d_up = b * b - 4 * a * (c - upper)
    d_lo = b * b - 4 * a * (c - lower)
    s_up = np.sqrt(np.maximum(d_up, 0.0))
    s_lo = np.sqrt(np.maximum(d_lo, 0.0))
    r1 = np.where(d_up >= 0, (-b - s_up) / (2 * a), inf)
    r2 = np.where(d_up >= 0, (-b + s_up) / (2 * a), -inf)
    split = d_lo > 0
    s1 = (-b - s_lo) / (2 * a)
    s2 = (-b + s_lo) / (2 * a)
    hi1 = np.where(split, np.minimum(r2, s1), r2)
    lo2 = np.where(split, np.maximum(r1, s2), inf)
    hi2 = np.where(split, r2, -inf)
    return r1, hi1, lo2, hi2


def _affine_band(alpha, gamma, lower, upper):
    """``{t : lower <= alpha t + gamma <= upper}`` per row."""
    nz = alpha != 0
    safe = np.where(nz, alpha, 1.0)
    e1 = (lower - gamma) / safe
    e2 = (upper - gamma) / safe
    lo = np.where(nz, np.minimum(e1, e2), -np.inf)
    hi = np.where(nz, np.maximum(e1, e2), np.inf)
    inside = (~nz) & (gamma >= lower) & (gamma <= upper)
    lo = np.where(nz | inside, lo, np.inf)
    hi = np.where(nz | inside, hi, -np.inf)
    empty = np.full(np.shape(alpha), np.inf)
    return lo, hi, empty, -empty


def _ball_interval(Y, k, T, gram):
    rest_sq = None
    if gram is None:
        rest_sq = (Y * Y).sum(axis=1)
        r2 = T * T - rest_sq
        r = np.sqrt(np.maximum(r2, 0.0))
        return np.where(r2 >= 0, -r, np.inf), np.where(r2 >= 0, r, -np.inf)
    G = np.asarray(gram, dtype=float)
    dim = G.shape[0]
    rest = [i for i in range(dim) if i != k]
    b = 2 * Y @ G[rest, k]
    c = ((Y @ G[np.ix_(rest, rest)]) * Y).sum(axis=1)
    lo, hi, _, _ = _quadratic_band(G[k, k], b, c, -np.inf, T * T)
    return lo, hi


def _clip(lo, hi, blo, bhi):
    lo = np.maximum(lo, blo)
    hi = np.minimum(hi, bhi)
    return lo, np.maximum(hi - lo, 0.0)


def _float_eval(spec: VarietySpec, X: np.ndarray) -> np.ndarray:
    if spec.kind == QUADRIC:
        Q = spec.matrix.astype(float)
        return ((X @ Q) * X).sum(axis=1)
    if spec.kind == "DetSym":
        return spec.sign * np.linalg.det(_sym_stack(X, spec.n))
    return spec.sign * _pfaffian_stack(_skew_stack(X, spec.n))


def _insert(Y, k, t):
    return np.concatenate([Y[:, :k], t[:, None], Y[:, k:]], axis=1)


def _norm(X, gram):
    if gram is None:
        return np.sqrt((X * X).sum(axis=1))
    G = np.asarray(gram, dtype=float)
    return np.sqrt(((X @ G) * X).sum(axis=1))


# ---------------------------------------------------------------------------
# batch kernels: return (sum, sum of squares, degenerate hits, hits)

def _project(spec, m, X, fx):
    """Radial projection of shell points onto ``V_m``."""
    ratio = np.where(fx * m > 0, m / np.where(fx == 0, m, fx), 1.0)
    return X * ratio[:, None] ** (1.0 / spec.degree)


def _outer_radius(spec, m, T, eps):
    # shell points whose projection has norm <= T have norm <= this
    return T * (1.0 + eps / abs(m)) ** (1.0 / spec.degree)


def _weights(spec, m, T, integrand, gram, X, hits):
    """``1[||proj x|| <= T] * integrand(proj x)`` on hit rows, 0 elsewhere."""
    fx = _float_eval(spec, X)
    P = _project(spec, m, X, np.where(hits, fx, m))
    inside = hits & (_norm(P, gram) <= T)
    if integrand is None:
        return inside.astype(float), P, inside
    return np.where(inside, integrand(P), 0.0), P, inside


def _conditional_batch(spec, m, T, eps, integrand, gram, rng, size):
    dim = spec.ambient_dim
    k = spec.solve_index()
    rest = [i for i in range(dim) if i != k]
    R = _outer_radius(spec, m, T, eps)
    Y = rng.uniform(-R, R, size=(size, dim - 1))
    lower, upper = m - eps, m + eps
    if spec.kind == QUADRIC:
        Q = spec.matrix.astype(float)
        a = Q[k, k]
        b = 2 * Y @ Q[rest, k]
        c = ((Y @ Q[np.ix_(rest, rest)]) * Y).sum(axis=1)
        if a != 0:
            band = _quadratic_band(a, b, c, lower, upper)
        else:
            band = _affine_band(b, c, lower, upper)
    else:
        zeros = np.zeros(size)
        beta = _float_eval(spec, _insert(Y, k, zeros))
        alpha = _float_eval(spec, _insert(Y, k, zeros + 1.0)) - beta
        band = _affine_band(alpha, beta, lower, upper)
    blo, bhi = _ball_interval(Y, k, R, gram)
    lo1, len1 = _clip(band[0], band[1], blo, bhi)
    lo2, len2 = _clip(band[2], band[3], blo, bhi)
    length = len1 + len2
    scale = (2.0 * R) ** (dim - 1) / (2.0 * eps)
    hits = length > 0
    u = rng.uniform(0.0, 1.0, size=size) * length
    t = np.where(u < len1, lo1 + u, lo2 + (u - len1))
    t = np.where(hits, t, 0.0)
    X = _insert(Y, k, t)
    weight, P, inside = _weights(spec, m, T, integrand, gram, X, hits)
    values = scale * length * weight
    degenerate = int(np.count_nonzero(inside & (_grad_norm(spec, P) < 1e-12 * max(abs(m), 1.0))))
    return values.sum(), (values * values).sum(), degenerate, int(inside.sum())


def _box_batch(spec, m, T, eps, integrand, gram, rng, size):
    dim = spec.ambient_dim
    R = _outer_radius(spec, m, T, eps)
    X = rng.uniform(-R, R, size=(size, dim))
    hits = np.abs(_float_eval(spec, X) - m) <= eps
    scale = (2.0 * R) ** dim / (2.0 * eps)
    weight, P, inside = _weights(spec, m, T, integrand, gram, X, hits)
    values = scale * weight
    degenerate = int(np.count_nonzero(inside & (_grad_norm(spec, P) < 1e-12 * max(abs(m), 1.0))))
    return values.sum(), (values * values).sum(), degenerate, int(inside.sum())


def _grad_norm(spec, X):
    if spec.kind == QUADRIC:
        return np.sqrt(((2.0 * X @ spec.matrix.astype(float)) ** 2).sum(axis=1))
    # a hit point with vanishing gradient would lie on f = 0, never on V_m
    return np.full(X.shape[0], np.inf)


ESTIMATORS = {"conditional": _conditional_batch, "box": _box_batch}


def shell_integral(spec: VarietySpec, m, T: float, integrand: Callable | None = None, *,
                   epsilon: float | None = None, samples: int = 10**6, seed: int = 0,
                   estimator: str = "conditional", gram=None,
                   batch_size: int = BATCH_SIZE) -> VolumeEstimate:
    """Shell Monte Carlo estimate of ``int_{B_T cap V_m} integrand d(dx/df)``.

    ``integrand`` maps an ``(N, dim)`` float array of points to weights; None
    means the constant 1 (the volume of the ball).
    """
    m = float(m)
    if m == 0:
        raise ValueError("level m = 0 is not allowed")
    eps = 0.01 * abs(m) if epsilon is None else float(epsilon)
    if not 0 < eps <= abs(m) / 10:
        raise ValueError("epsilon must lie in (0, |m|/10]")
    if T <= 0:
        raise ValueError("radius T must be positive")
    if samples < 1000:
        raise ValueError("use at least 1000 samples")
    kernel = ESTIMATORS[estimator]
    sizes = [batch_size] * (samples // batch_size)
    if samples % batch_size:
        sizes.append(samples % batch_size)

    def run(item):
        b, size = item
        return kernel(spec, m, float(T), eps, integrand, gram, batch_rng(seed, b), size)

    parts = _parallel.map_chunks(run, list(enumerate(sizes)))
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    degenerate = sum(p[2] for p in parts)
    hits = sum(p[3] for p in parts)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return VolumeEstimate(value=float(mean), stderr=float(math.sqrt(var / samples)),
                          method=SHELL_MC, samples=samples,
                          degenerate=bool(hits and degenerate > 0.01 * hits))


def shell_volume(spec: VarietySpec, m, T: float, epsilon: float | None = None,
                 samples: int = 10**6, seed: int = 0, *, estimator: str = "conditional",
                 gram=None) -> VolumeEstimate:
    """Invariant volume of ``{x in V_m(R) : ||x|| <= T}``."""
    return shell_integral(spec, m, T, None, epsilon=epsilon, samples=samples, seed=seed,
                          estimator=estimator, gram=gram)


def tail_integral(spec: VarietySpec, m, T: float, k0: float, samples: int = 10**6,
                  seed: int = 0, *, epsilon: float | None = None,
                  estimator: str = "conditional", gram=None) -> VolumeEstimate:
    """``int_{B_T} ||x||^(-k0) d mu`` with the same shell scheme."""
    if k0 == 0:
        integrand = None
    else:
        def integrand(X):
            return _norm(X, gram) ** (-float(k0))
    return shell_integral(spec, m, T, integrand, epsilon=epsilon, samples=samples,
                          seed=seed, estimator=estimator, gram=gram)


def annulus_volume(spec: VarietySpec, m, r_inner: float, r_outer: float, *,
                   epsilon: float | None = None, samples: int = 10**6, seed: int = 0,
                   gram=None) -> VolumeEstimate:
    """Invariant volume of ``{r_inner < ||x|| <= r_outer}`` on ``V_m``, sampled directly."""
    def integrand(X):
        return (_norm(X, gram) > r_inner).astype(float)
    return shell_integral(spec, m, r_outer, integrand, epsilon=epsilon, samples=samples,
                          seed=seed, gram=gram)


def volume_grid(spec: VarietySpec, m, T_grid: Sequence[float], **kwargs) -> list[VolumeEstimate]:
    return [shell_volume(spec, m, T, **kwargs) for T in T_grid]


def hyperboloid_volume(T: float) -> float:
    """Closed-form Gelfand-Leray volume of ``{x^2+y^2+z^2-w^2 = 1, ||x|| <= T}``.

    Slicing at height ``w`` gives a 2-sphere of radius ``r = sqrt(1+w^2)`` whose
    ``dx/df`` mass is ``4 pi r^2 / (2r) = 2 pi r``.
    """
    if T < 1:
        return 0.0
    W = math.sqrt((T * T - 1) / 2)
    return 2 * math.pi * (W * math.sqrt(1 + W * W) + math.asinh(W))


# ---------------------------------------------------------------------------
# fitting

def _lstsq(design: np.ndarray, target: np.ndarray):
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = target - design @ coef
    return coef, float(np.sqrt(np.mean(resid**2)))


def fit_power_log(grid: Sequence[tuple[float, float]], *, b_max: int = 4,
                  b: int | None = None, min_points: int = 6) -> AsymptoticFit:
    """Fit ``log v = log c + a log T + b log log T`` with integer ``b`` in 0..b_max.

    Each candidate ``b`` is a two-parameter linear least-squares problem; the
    candidate with the smallest RMS residual wins.  A larger ``b`` must beat
    every smaller one by more than 1e-9 plus 1% to be chosen.
    """
    grid = [(float(T), float(v)) for T, v in grid]
    if len(grid) < min_points:
        raise ValueError(f"need at least {min_points} grid points")
    Ts = np.array([g[0] for g in grid])
    vs = np.array([g[1] for g in grid])
    if np.any(np.diff(Ts) <= 0):
        raise ValueError("T values must be strictly increasing")
    if np.any(vs <= 0):
        raise ValueError("values must be positive")
    logT = np.log(Ts)
    logv = np.log(vs)
    candidates = [b] if b is not None else list(range(b_max + 1))
    if np.any(Ts <= 1):
        candidates = [c for c in candidates if c == 0]
        if not candidates:
            raise ValueError("log T must be positive when b > 0")
    design = np.stack([np.ones_like(logT), logT], axis=1)
    best = None
    for bb in candidates:
        target = logv - (bb * np.log(logT) if bb else 0.0)
        coef, rms = _lstsq(design, target)
        if best is None or rms < best[2] * 0.99 - 1e-9:
            best = (bb, coef, rms)
    bb, coef, rms = best
    return AsymptoticFit(a=float(coef[1]), b=int(bb), c=float(math.exp(coef[0])),
                         residual_rms=rms, grid=tuple(grid))


def doubling_regularity(grid: Sequence[tuple[float, float]], eps_values: Sequence[float],
                        volume: Callable[[float], float]) -> list[tuple[float, float, float]]:
    """Rows ``(T, eps, (v((1+eps)T) - v(T)) / (v(T) + 1))``."""
    out = []
    for T, vT in grid:
        for eps in eps_values:
            out.append((T, eps, (volume((1 + eps) * T) - vT) / (vT + 1.0)))
    return out
