"""Experiments tying counts of integral and S-integral points to invariant volumes.

* :func:`counting_experiment` compares ``N(T)``, the number of S-points of
  ``V_1`` with height below ``T``, to the product-measure volume ``V(T)``.
* :func:`equidist_experiment` projects level-``m`` points onto ``V_1`` and
  compares region frequencies with volume fractions.
* :func:`denominator_experiment` does the same for points with denominator
  exactly ``p^n``.
* :func:`well_rounded_check` measures how fast the boundary shells of height
  balls shrink.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .enumeration import PlaceSet, denominator_numerators, integral_points, primitive_filter
from .heights import integral_heights_squared
from .varieties import (VarietySpec, check_level, radial_project_array, real_root,
                        value_bound)
from .volumes_arch import annulus_volume, shell_integral, shell_volume
from .volumes_padic import (height_strata, multi_prime_ball_volume, multi_prime_sphere_volume,
                            padic_ball_volume, padic_sphere_volume)


# ---------------------------------------------------------------------------
# regions

BOX, CAP, HALFSPACE = "box", "spherical_cap", "halfspace"


@dataclass(frozen=True)
class Region:
    """A bounded region of ``V_1(R)`` given by a simple ambient shape.

    ``box``: ``lo <= x < hi`` (half-open so that boxes tile).
    ``spherical_cap``: ``<x, axis> >= cos_min * ||x||`` and ``||x|| <= radius``.
    ``halfspace``: ``<x, normal> >= offset`` and ``||x|| <= radius``.
    """

    kind: str
    params: tuple
    name: str = ""

    @classmethod
    def box(cls, lo, hi, name: str = "") -> "Region":
        lo = tuple(float(v) for v in lo)
        hi = tuple(float(v) for v in hi)
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("box needs lo < hi in every coordinate")
        if not all(map(math.isfinite, lo + hi)):
            raise ValueError("box corners must be finite")
        return cls(BOX, (lo, hi), name)

    @classmethod
    def spherical_cap(cls, axis, cos_min: float, radius: float, name: str = "") -> "Region":
        axis = np.asarray(axis, dtype=float)
        if not -1 <= cos_min < 1 or radius <= 0:
            raise ValueError("cap needs cos_min in [-1, 1) and a positive radius")
        axis = axis / np.linalg.norm(axis)
        return cls(CAP, (tuple(axis.tolist()), float(cos_min), float(radius)), name)

    @classmethod
    def halfspace(cls, normal, offset: float, radius: float, name: str = "") -> "Region":
        normal = np.asarray(normal, dtype=float)
        if not np.any(normal) or radius <= 0 or abs(offset) >= radius * np.linalg.norm(normal):
            raise ValueError("halfspace must cut the ball of the given radius")
        return cls(HALFSPACE, (tuple(normal.tolist()), float(offset), float(radius)), name)

    @property
    def dim(self) -> int:
        return len(self.params[0])

    @property
    def bounding_radius(self) -> float:
        if self.kind == BOX:
            lo, hi = self.params
            return float(max(max(abs(a), abs(b)) for a, b in zip(lo, hi)))
        return self.params[-1]

    def contains(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.kind == BOX:
            lo, hi = (np.array(v) for v in self.params)
            return np.all((X >= lo) & (X < hi), axis=1)
        norms = np.linalg.norm(X, axis=1)
        if self.kind == CAP:
            axis, c, r = self.params
            return (X @ np.array(axis) >= c * norms) & (norms <= r)
        normal, b, r = self.params
        return (X @ np.array(normal) >= b) & (norms <= r)

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.params, "name": self.name}


def octant_partition(dim: int = 3, radius: float = 1.0) -> list[Region]:
    """The ``2^dim`` half-open orthants of the box ``[-R, R)^dim`` (R slightly above radius)."""
    R = float(radius) * (1 + 1e-9)
    out = []
    for code in range(2**dim):
        signs = [(code >> i) & 1 for i in range(dim)]
        lo = [-R if s else 0.0 for s in signs]
        hi = [0.0 if s else R for s in signs]
        label = "".join("-" if s else "+" for s in signs)
        out.append(Region.box(lo, hi, name=label))
    return out


def halfspace_pair(normal, offset: float, radius: float) -> list[Region]:
    """``{<x,n> >= b}`` and its complement ``{<x,-n> > -b}`` within ``||x|| <= radius``."""
    normal = np.asarray(normal, dtype=float)
    # the complement is written as a closed halfspace shifted by one ulp
    return [Region.halfspace(normal, offset, radius, name="upper"),
            Region.halfspace(-normal, np.nextafter(-offset, np.inf), radius, name="lower")]


def assign_regions(X: np.ndarray, regions: Sequence[Region]) -> np.ndarray:
    """Index of the first region containing each row, or -1."""
    label = np.full(len(X), -1, dtype=np.int64)
    for i, region in enumerate(regions):
        free = label < 0
        if not free.any():
            break
        label[free & region.contains(X)] = i
    return label


def region_volume_masses(spec: VarietySpec, regions: Sequence[Region], *, samples: int,
                         seed: int, epsilon: float | None = None) -> np.ndarray:
    """Normalised invariant volumes of the regions on ``V_1`` (one shared MC run)."""
    R = max(r.bounding_radius for r in regions)
    radius = R * math.sqrt(spec.ambient_dim) if any(r.kind == BOX for r in regions) else R
    masses = []
    for i in range(len(regions)):
        def indicator(X, i=i):
            return (assign_regions(X, regions) == i).astype(float)
        masses.append(shell_integral(spec, 1, radius, indicator, epsilon=epsilon,
                                     samples=samples, seed=seed).value)
    masses = np.array(masses)
    total = masses.sum()
    if total <= 0:
        raise ValueError("regions carry no invariant volume")
    return masses / total


# ---------------------------------------------------------------------------
# counting

@dataclass
class CountingReport:
    T_grid: tuple
    counts: tuple
    volumes: tuple
    volume_stderr: tuple
    ratios: tuple
    spread: float | None
    delta: float | None
    notes: list = field(default_factory=list)

    def rows(self) -> list[dict]:
        return [{"T": T, "count": N, "volume": V, "volume_stderr": s, "ratio": r}
                for T, N, V, s, r in zip(self.T_grid, self.counts, self.volumes,
                                         self.volume_stderr, self.ratios)]

    def summary(self) -> dict:
        return {"spread_top_half": self.spread, "delta": self.delta, "notes": list(self.notes)}


def s_point_heights(spec: VarietySpec, S: PlaceSet, T_max: float) -> list[int]:
    """Sorted ``H_S(z)^2`` of all S-points ``z`` of ``V_1`` with ``H_S(z) < T_max``.

    Such ``z`` are ``x / D`` with ``D`` in ``<S>``, ``x`` primitive and
    ``f(x) = D^d``; then ``H_S(z) = ||x||``.
    """
    d = spec.degree
    T_int = math.ceil(T_max)
    top = value_bound(spec, T_int)
    out = []
    for D in S.semigroup_up_to(int(top ** (1.0 / d)) + 1) if S.finite_primes else [1]:
        if D**d > top or not spec.attainable(D**d):
            continue
        X = primitive_filter(integral_points(spec, D**d, T_int, radius=float(T_max)))
        out.extend(int(v) for v in integral_heights_squared(X))
    limit = Fraction(T_max) ** 2
    return sorted(v for v in out if v < limit)


def _height_cutoff(spec: VarietySpec, T: float) -> float:
    """Strata ``D`` at or above this have no real points with ``||z|| < T / D``.

    On ``V_1(R)``, ``1 = |f(z)| <= B ||z||^d`` with ``B`` the coefficient bound.
    """
    return T * spec.coefficient_bound ** (1.0 / spec.degree)


class _RealVolumes:
    """Cached real ball volumes ``v(r)`` on ``V_1`` with common random numbers."""

    def __init__(self, spec, samples, seed, epsilon):
        self.spec, self.samples, self.seed, self.epsilon = spec, samples, seed, epsilon
        self.cache = {}

    def __call__(self, r: float):
        if r not in self.cache:
            est = shell_volume(self.spec, 1, r, epsilon=self.epsilon,
                               samples=self.samples, seed=self.seed)
            self.cache[r] = (est.value, est.stderr)
        return self.cache[r]


def stratified_volume(spec: VarietySpec, S: PlaceSet, T: float, real_volume: Callable,
                      k_max: int | None = None) -> tuple[float, float]:
    """``V(T) = sum over (j_p) of prod_p sphere_p(j_p) * v_inf(T / prod p^j_p)``.

    Returns the value and a standard error from the real factors (the p-adic
    factors are exact).
    """
    primes = S.finite_primes
    value = var = 0.0
    for exps, D in height_strata(primes, _height_cutoff(spec, T), strict=True):
        w = float(multi_prime_sphere_volume(spec, primes, exps, k_max))
        if w == 0:
            continue
        v, s = real_volume(T / D)
        value += w * v
        var += (w * s) ** 2
    return value, math.sqrt(var)


def stratified_volume_by_height(spec: VarietySpec, S: PlaceSet, T: float,
                                real_volume: Callable, k_max: int | None = None) -> float:
    """Same quantity through differences of ball volumes ``w_D - w_(D-)`` at each height ``D``."""
    primes = S.finite_primes
    cutoff = _height_cutoff(spec, T)
    heights = S.semigroup_up_to(math.ceil(cutoff)) if primes else [1]
    heights = [D for D in heights if D < cutoff]
    total = 0.0
    previous = Fraction(0)
    for D in heights:
        w = multi_prime_ball_volume(spec, primes, D, k_max)
        mass = w - previous
        previous = w
        if mass:
            total += float(mass) * real_volume(T / D)[0]
    return total


def _fit_delta(T_grid, ratios) -> float | None:
    r_ref = ratios[-1]
    pts = [(T, abs(r / r_ref - 1)) for T, r in zip(T_grid[:-1], ratios[:-1])
           if r > 0 and abs(r / r_ref - 1) > 0]
    if len(pts) < 2:
        return None
    x = np.log([T for T, _ in pts])
    y = np.log([e for _, e in pts])
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


def counting_experiment(spec: VarietySpec, S: PlaceSet, T_grid: Sequence[float], *,
                        samples: int = 10**6, seed: int = 0, epsilon: float | None = None,
                        k_max: int | None = None, min_grid: int = 4) -> CountingReport:
    """Counts ``N(T)`` of S-points of ``V_1`` with ``H_S < T`` against ``V(T)``.

    The ratio ``r(T) = N(T) / V(T)`` should settle to a positive constant.
    ``spread`` is ``(max - min) / mean`` of ``r`` over the top half of the grid and
    ``delta`` the slope in ``|r(T)/r(T_max) - 1| ~ T^(-delta)``.
    """
    T_grid = tuple(float(T) for T in T_grid)
    if len(T_grid) < min_grid:
        raise ValueError(f"T grid needs at least {min_grid} values")
    if any(b <= a for a, b in zip(T_grid, T_grid[1:])) or T_grid[0] <= 0:
        raise ValueError("T grid must be positive and strictly increasing")
    h2 = s_point_heights(spec, S, T_grid[-1])
    counts = tuple(bisect.bisect_left(h2, Fraction(T) ** 2) for T in T_grid)
    report = CountingReport(T_grid, counts, (), (), (), None, None)
    if counts[-1] == 0:
        report.notes.append("no S-points below the largest height; nothing to fit")
        report.volumes = report.volume_stderr = report.ratios = (float("nan"),) * len(T_grid)
        return report
    real = _RealVolumes(spec, samples, seed, epsilon)
    vols = [stratified_volume(spec, S, T, real, k_max) for T in T_grid]
    report.volumes = tuple(v for v, _ in vols)
    report.volume_stderr = tuple(s for _, s in vols)
    report.ratios = tuple(N / V if V > 0 else float("nan") for N, V in zip(counts, report.volumes))
    top = [r for r in report.ratios[len(T_grid) // 2:] if math.isfinite(r)]
    if len(top) >= 2 and np.mean(top) > 0:
        report.spread = float((max(top) - min(top)) / np.mean(top))
    if all(math.isfinite(r) and r > 0 for r in report.ratios):
        report.delta = _fit_delta(T_grid, report.ratios)
    else:
        report.notes.append("some ratios undefined; delta not fitted")
    return report


# ---------------------------------------------------------------------------
# equidistribution

@dataclass
class DiscrepancyRow:
    m: int
    point_count: int
    empirical: tuple
    volume: tuple
    D: float
    eligible: bool

    def as_dict(self) -> dict:
        return {"m": self.m, "point_count": self.point_count, "empirical": list(self.empirical),
                "volume": list(self.volume), "D": self.D, "eligible": self.eligible}


@dataclass
class DiscrepancyReport:
    regions: tuple
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def by_level(self) -> dict:
        return {row.m: row for row in self.rows}

    def trend(self) -> tuple[float, float] | None:
        """``(D(first), D(last))`` over rows with enough points, if there are two."""
        rows = [r for r in self.rows if r.eligible]
        if len(rows) < 2:
            return None
        return rows[0].D, rows[-1].D


def _discrepancy_row(m, labels, volume, min_count) -> DiscrepancyRow:
    counts = np.bincount(labels[labels >= 0], minlength=len(volume))
    total = int(counts.sum())
    emp = counts / total
    D = float(np.max(np.abs(emp - volume)))
    return DiscrepancyRow(int(m), total, tuple(emp.tolist()), tuple(volume.tolist()),
                          D, total >= min_count)


def equidist_experiment(spec: VarietySpec, S: PlaceSet, levels: Sequence[int],
                        regions: Sequence[Region], *, min_count: int = 50,
                        samples: int = 10**6, seed: int = 0,
                        epsilon: float | None = None) -> DiscrepancyReport:
    """Discrepancy of radially projected primitive level-``m`` points over a partition.

    Points are those whose projection lies in the union of ``regions``.  Levels
    without such points are skipped with a note; levels with fewer than
    ``min_count`` points are kept but marked ineligible for trend checks.
    """
    levels = [check_level(m) for m in levels]
    for m in levels:
        if not S.in_semigroup(m):
            raise ValueError(f"level {m} is not in the semigroup generated by S")
    regions = tuple(regions)
    R = max(r.bounding_radius for r in regions)
    if any(r.kind == BOX for r in regions):
        R *= math.sqrt(spec.ambient_dim)
    volume = region_volume_masses(spec, regions, samples=samples, seed=seed, epsilon=epsilon)
    report = DiscrepancyReport(regions)
    for m in levels:
        scale = real_root(m, spec.degree)
        X = primitive_filter(integral_points(spec, m, math.floor(scale * R)))
        labels = assign_regions(radial_project_array(spec, m, X), regions) if len(X) else \
            np.zeros(0, dtype=np.int64)
        if not np.any(labels >= 0):
            report.notes.append(f"m={m}: no primitive points in the regions; skipped")
            continue
        report.rows.append(_discrepancy_row(m, labels, volume, min_count))
    if not report.rows:
        raise ValueError("every level is empty")
    return report


# ---------------------------------------------------------------------------
# denominators p^n

@dataclass
class DenominatorRow:
    n: int
    counts: tuple
    sphere_volume: float
    ball_volume: float
    count_over_sphere: float
    cumulative_over_ball: float
    empirical: tuple
    volume: tuple

    def as_dict(self) -> dict:
        return dict(self.__dict__, counts=list(self.counts), empirical=list(self.empirical),
                    volume=list(self.volume))


@dataclass
class DenominatorReport:
    p: int
    regions: tuple
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)


def denominator_experiment(spec: VarietySpec, p: int, n_sequence: Sequence[int],
                           regions: Sequence[Region], *, samples: int = 10**6, seed: int = 0,
                           epsilon: float | None = None,
                           k_max: int | None = None) -> DenominatorReport:
    """Points of ``V_1`` with denominator exactly ``p^n`` binned into regions.

    Each row gives region counts, their total divided by the p-adic sphere
    volume at ``n``, the running total divided by the ball volume, and the
    empirical and volume fractions per region.
    """
    regions = tuple(regions)
    R = max(r.bounding_radius for r in regions)
    volume = region_volume_masses(spec, regions, samples=samples, seed=seed, epsilon=epsilon)
    report = DenominatorReport(int(p), regions)
    cumulative = 0
    for n in sorted(int(v) for v in n_sequence):
        X = denominator_numerators(spec, p, n, [-R] * spec.ambient_dim, [R] * spec.ambient_dim)
        Z = np.asarray(X, dtype=float) / float(p) ** n
        labels = assign_regions(Z, regions) if len(Z) else np.zeros(0, dtype=np.int64)
        counts = np.bincount(labels[labels >= 0], minlength=len(regions))
        total = int(counts.sum())
        cumulative += total
        sphere = float(padic_sphere_volume(spec, p, n, k_max))
        ball = float(padic_ball_volume(spec, p, n, k_max))
        if total == 0:
            report.notes.append(f"n={n}: no points (p-adic sphere volume {sphere})")
            emp = tuple([float("nan")] * len(regions))
        else:
            emp = tuple((counts / total).tolist())
        report.rows.append(DenominatorRow(
            n, tuple(int(c) for c in counts), sphere, ball,
            total / sphere if sphere else float("nan"),
            cumulative / ball if ball else float("nan"), emp, tuple(volume.tolist())))
    if cumulative == 0:
        report.notes.append("no points for any n")
    return report


# ---------------------------------------------------------------------------
# well-roundedness

@dataclass
class WellRoundedReport:
    kappa: float
    exact: bool
    per_T: tuple        # ((T, kappa_T), ...)
    rows: tuple         # ((T, eps, ball, shell), ...)
    notes: list = field(default_factory=list)

    def summary(self) -> dict:
        return {"kappa": "exact" if self.exact else self.kappa,
                "per_T": [list(v) for v in self.per_T], "notes": list(self.notes)}


def fit_kappa(eps_values: Sequence[float], ratios: Sequence[float]) -> float:
    """Slope of ``log(shell / ball)`` against ``log eps``."""
    x = np.log(np.asarray(eps_values, dtype=float))
    y = np.log(np.asarray(ratios, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def height_ball_family(spec: VarietySpec, S: PlaceSet | None = None, *, samples: int = 10**6,
                       seed: int = 0, epsilon: float | None = None,
                       k_max: int | None = None) -> Callable:
    """``(T, eps) -> (ball mass, shell mass)`` for height balls ``H_S < T``.

    The shell is ``(1-eps)T < H_S <= (1+eps)T``, sampled directly as an annulus
    in each stratum.
    """
    S = S or PlaceSet()
    real = _RealVolumes(spec, samples, seed, epsilon)

    def family(T: float, eps: float):
        ball = stratified_volume(spec, S, T, real, k_max)[0]
        shell = 0.0
        for exps, D in height_strata(S.finite_primes, _height_cutoff(spec, (1 + eps) * T),
                                     strict=True):
            w = float(multi_prime_sphere_volume(spec, S.finite_primes, exps, k_max))
            if w:
                r_out = (1 + eps) * T / D
                r_in = (1 - eps) * T / D
                shell += w * annulus_volume(spec, 1, r_in, r_out, epsilon=epsilon,
                                            samples=samples, seed=seed).value
        return ball, shell

    return family


def well_rounded_check(spec: VarietySpec | None, T_grid: Sequence[float],
                       eps_grid: Sequence[float], *, family: Callable | None = None,
                       S: PlaceSet | None = None, samples: int = 10**6, seed: int = 0,
                       epsilon: float | None = None) -> WellRoundedReport:
    """Estimate ``kappa`` in ``shell mass = O(eps^kappa * ball mass)``.

    ``family`` maps ``(T, eps)`` to ``(ball mass, shell mass)``; by default it
    is the height-ball family of ``spec``.  If every shell is empty the
    boundary has no mass and the report is flagged ``exact``.
    """
    eps_grid = [float(e) for e in eps_grid]
    if len(eps_grid) < 3 or not all(0 < e <= 0.3 for e in eps_grid):
        raise ValueError("need at least 3 eps values in (0, 0.3]")
    if family is None:
        family = height_ball_family(spec, S, samples=samples, seed=seed, epsilon=epsilon)
    rows, per_T, notes = [], [], []
    for T in T_grid:
        masses = [family(float(T), e) for e in eps_grid]
        rows.extend((float(T), e, b, s) for e, (b, s) in zip(eps_grid, masses))
        usable = [(e, s / b) for e, (b, s) in zip(eps_grid, masses) if b > 0 and s > 0]
        if len(usable) < len(eps_grid):
            if any(b > 0 and s > 0 for b, s in masses):
                notes.append(f"T={T}: some shells below resolution")
        if len(usable) >= 2:
            per_T.append((float(T), fit_kappa(*zip(*usable))))
    if not per_T:
        if all(s == 0 for _, _, _, s in rows):
            return WellRoundedReport(math.inf, True, (), tuple(rows),
                                     notes + ["all shells empty"])
        raise ValueError("shell mass below Monte Carlo resolution everywhere")
    kappa = float(np.mean([k for _, k in per_T]))
    return WellRoundedReport(kappa, False, tuple(per_T), tuple(rows), notes)
