"""Voronoi marker partitions of periodic ℤᴺ windows.

A configuration is a set of markers on a torus ℤᴺ / (L₁ℤ × … × L_Nℤ). Every point is
assigned to the marker at minimal Euclidean distance, ties broken by the
lexicographically least displacement; the orbits of the resulting elementary
subgroupoid are the fibres of this assignment."""

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .conf import get_setting
from .exceptions import DimensionMismatch, DomainViolation, EmptyMarkerSet
from .logging import logger

Point = Tuple[int, ...]


@dataclass(frozen=True)
class MarkerConfiguration:
    N: int
    period: Tuple[int, ...]
    markers: Tuple[Point, ...]
    m: Optional[int] = None

    def __post_init__(self):
        if not 1 <= self.N <= 3:
            raise DomainViolation(f"Dimension {self.N} is not supported, use 1 to 3")
        if len(self.period) != self.N:
            raise DimensionMismatch(f"Period has {len(self.period)} entries for N={self.N}")
        limit = get_setting("ETALE_ZN_MAX_WINDOW")
        for side in self.period:
            if not 1 <= side <= limit:
                raise DomainViolation(f"Window side {side} outside 1..{limit}")
        if not self.markers:
            raise EmptyMarkerSet("The configuration has no marker")
        for marker in self.markers:
            if len(marker) != self.N:
                raise DimensionMismatch(f"Marker {marker} is not a point of ℤ^{self.N}")
            if any(not 0 <= x < side for x, side in zip(marker, self.period)):
                raise DomainViolation(f"Marker {marker} lies outside the window {self.period}")
        if len(set(self.markers)) != len(self.markers):
            raise DomainViolation("Duplicate markers")

    @classmethod
    def grid(cls, N: int, m: int, window: Optional[int] = None) -> "MarkerConfiguration":
        """Markers on mℤᴺ; the default window holds at least two blocks and 8 points per axis"""
        if m < 1:
            raise DomainViolation(f"Grid spacing {m} < 1")
        if window is None:
            window = m * max(2, -(-8 // m))
        if window % m:
            raise DomainViolation(f"Window {window} is not a multiple of the grid spacing {m}")
        axis = range(0, window, m)
        return cls(N, (window,) * N, tuple(product(axis, repeat=N)), m)

    @classmethod
    def explicit(cls, markers: Iterable[Sequence[int]], period: Sequence[int]) -> "MarkerConfiguration":
        markers = tuple(sorted(tuple(int(x) for x in p) for p in markers))
        return cls(len(period), tuple(period), markers)

    @property
    def size(self) -> int:
        return math.prod(self.period)

    def to_dict(self) -> dict:
        if self.m is not None:
            return {"N": self.N, "mode": "grid", "m": self.m, "window": self.period[0]}
        return {"N": self.N, "mode": "explicit", "markers": [list(p) for p in self.markers], "period": list(self.period)}


@dataclass(frozen=True)
class VoronoiAssignment:
    """`displacement[x]` is f(x) and `owner[x]` the index of the marker x + f(x)"""

    config: MarkerConfiguration
    displacement: np.ndarray
    owner: np.ndarray
    norm2: np.ndarray

    def displacement_of(self, point: Sequence[int]) -> Point:
        index = tuple(x % side for x, side in zip(point, self.config.period))
        return tuple(int(v) for v in self.displacement[index])

    def marker_of(self, point: Sequence[int]) -> Point:
        index = tuple(x % side for x, side in zip(point, self.config.period))
        return self.config.markers[int(self.owner[index])]


def _torus_displacements(points: np.ndarray, marker: Sequence[int], period: np.ndarray) -> np.ndarray:
    # representatives in [-L/2, L/2); at a tie the +L/2 candidate is lexicographically
    # larger than its -L/2 twin with equal norm, so it never wins
    return (np.asarray(marker) - points + period // 2) % period - period // 2


def assign_markers(config: MarkerConfiguration) -> VoronoiAssignment:
    period = np.asarray(config.period)
    points = np.indices(config.period).reshape(config.N, -1).T
    best = np.zeros_like(points)
    best_norm = np.full(len(points), np.iinfo(np.int64).max, dtype=np.int64)
    owner = np.full(len(points), -1, dtype=np.int64)

    for k, marker in enumerate(config.markers):
        d = _torus_displacements(points, marker, period)
        norm = (d * d).sum(axis=1)
        less = np.zeros(len(points), dtype=bool)
        equal = np.ones(len(points), dtype=bool)
        for axis in range(config.N):
            less |= equal & (d[:, axis] < best[:, axis])
            equal &= d[:, axis] == best[:, axis]
        better = (norm < best_norm) | ((norm == best_norm) & less)
        best[better] = d[better]
        best_norm[better] = norm[better]
        owner[better] = k

    logger.debug(f"Assigned {len(points)} points to {len(config.markers)} markers")
    return VoronoiAssignment(
        config,
        best.reshape(config.period + (config.N,)),
        owner.reshape(config.period),
        best_norm.reshape(config.period),
    )


def orbit_partition(config: MarkerConfiguration, assignment: Optional[VoronoiAssignment] = None) -> Dict[Point, List[Point]]:
    assignment = assignment or assign_markers(config)
    orbits: Dict[Point, List[Point]] = {marker: [] for marker in config.markers}
    for index in np.ndindex(*config.period):
        orbits[config.markers[int(assignment.owner[index])]].append(tuple(int(x) for x in index))
    return orbits


def moves(n: int, N: int) -> List[Point]:
    """The nonzero p ∈ ℤᴺ with ‖p‖ <= n"""
    return [p for p in product(range(-n, n + 1), repeat=N) if any(p) and sum(x * x for x in p) <= n * n]


def boundary_ratio(config: MarkerConfiguration, n: int, assignment: Optional[VoronoiAssignment] = None) -> Fraction:
    """max over orbits K of #{(p, z) : z ∈ K, ‖p‖ <= n, z + p ∉ K} / |K|"""

    if n < 1:
        raise DomainViolation(f"Move radius {n} < 1")
    assignment = assignment or assign_markers(config)
    owner = assignment.owner
    markers = len(config.markers)
    sizes = np.bincount(owner.ravel(), minlength=markers)
    crossings = np.zeros(markers, dtype=np.int64)
    axes = tuple(range(config.N))
    for p in moves(n, config.N):
        neighbour = np.roll(owner, shift=tuple(-x for x in p), axis=axes)
        leaving = owner != neighbour
        crossings += np.bincount(owner[leaving], minlength=markers)
    return max(Fraction(int(c), int(s)) for c, s in zip(crossings, sizes) if s)


def boundary_ratio_per_orbit(config: MarkerConfiguration, n: int, assignment: Optional[VoronoiAssignment] = None) -> Fraction:
    """Same statistic as boundary_ratio, counted orbit by orbit"""

    if n < 1:
        raise DomainViolation(f"Move radius {n} < 1")
    assignment = assignment or assign_markers(config)
    ratio = Fraction(0)
    for marker, orbit in orbit_partition(config, assignment).items():
        if not orbit:
            continue
        leaving = 0
        for z in orbit:
            for p in moves(n, config.N):
                if assignment.marker_of(tuple(a + b for a, b in zip(z, p))) != marker:
                    leaving += 1
        ratio = max(ratio, Fraction(leaving, len(orbit)))
    return ratio


def separated_marker_bound(m: int, n: int, N: int) -> Fraction:
    """Upper bound on the boundary ratio of an m-separated, (m+1)-syndetic marker set.

    ((m+2)^N − (m−2n−2)^N)·(m+1)^N / m^N, divided by the orbit lower bound
    (m/2 − 2)^N and multiplied by 2^N."""

    if m <= 2 * n + 2 or m <= 4:
        raise DomainViolation(f"The bound needs m > 2n + 2 and m > 4, got m={m}, n={n}")
    half = Fraction(m, 2) - 2
    return Fraction((m + 2) ** N - (m - 2 * n - 2) ** N) * (m + 1) ** N / m**N * 2**N / half**N


def separation_syndeticity(config: MarkerConfiguration, assignment: Optional[VoronoiAssignment] = None) -> Tuple[float, float]:
    """Minimal distance between distinct markers (translates included) and covering radius"""

    assignment = assignment or assign_markers(config)
    period = np.asarray(config.period)
    markers = np.asarray(config.markers)
    separation2 = min(side * side for side in config.period)
    for k, marker in enumerate(config.markers[:-1]):
        d = _torus_displacements(markers[k + 1 :], marker, period)
        separation2 = min(separation2, int((d * d).sum(axis=1).min()))
    return math.sqrt(separation2), math.sqrt(int(assignment.norm2.max()))


def is_separated_syndetic(config: MarkerConfiguration, m: int, assignment: Optional[VoronoiAssignment] = None) -> bool:
    separation, syndeticity = separation_syndeticity(config, assignment)
    return separation >= m and syndeticity <= m + 1


@dataclass(frozen=True)
class SweepRow:
    m: int
    n: int
    N: int
    ratio: Fraction
    bound: Optional[Fraction]

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "N": self.N,
            "ratio": str(self.ratio),
            "bound": None if self.bound is None else str(self.bound),
        }


def grid_row(m: int, n: int, N: int, window: Optional[int] = None) -> SweepRow:
    config = MarkerConfiguration.grid(N, m, window)
    assignment = assign_markers(config)
    ratio = boundary_ratio(config, n, assignment)
    bound = None
    if m > 2 * n + 2 and m > 4 and is_separated_syndetic(config, m, assignment):
        bound = separated_marker_bound(m, n, N)
    return SweepRow(m, n, N, ratio, bound)


def sweep(ms: Iterable[int], n: int, N: int) -> List[SweepRow]:
    rows = []
    for m in ms:
        rows.append(grid_row(m, n, N))
        logger.debug(f"m={m}: ratio {rows[-1].ratio}")
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["m", "n", "N", "ratio", "bound"])
    for row in rows:
        writer.writerow([row.m, row.n, row.N, float(row.ratio), "" if row.bound is None else float(row.bound)])
    return buffer.getvalue()
