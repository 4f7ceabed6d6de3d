"""Compact principal groupoids as finite tower partitions.

A class is one orbit type of size k, with floors numbered 1..k. Clopen sets are
unions of floors (callers refine first), so every operation here is finite
combinatorics."""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

from .exceptions import (
    CountViolation,
    DimensionMismatch,
    DomainViolation,
    NegativeHeight,
    NotFull,
    OverlapError,
    UnknownClass,
)

Heights = Mapping[str, Union[int, Sequence[int]]]


@dataclass(frozen=True)
class TowerPartition:
    classes: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        seen = set()
        for class_id, size in self.classes:
            if class_id in seen:
                raise DomainViolation(f"Duplicate class '{class_id}'")
            if size < 1:
                raise DomainViolation(f"Class '{class_id}' has orbit size {size}")
            seen.add(class_id)

    @classmethod
    def from_sizes(cls, sizes: Mapping[str, int]) -> "TowerPartition":
        return cls(tuple((str(c), int(k)) for c, k in sizes.items()))

    @property
    def class_ids(self) -> List[str]:
        return [c for c, _ in self.classes]

    def orbit_size(self, class_id: str) -> int:
        for c, k in self.classes:
            if c == class_id:
                return k
        raise UnknownClass(class_id)

    def full(self) -> "FloorSet":
        return FloorSet(self, {c: range(1, k + 1) for c, k in self.classes})

    def empty(self) -> "FloorSet":
        return FloorSet(self, {})

    def to_dict(self) -> list:
        return [{"class_id": c, "orbit_size": k} for c, k in self.classes]

    def __str__(self):
        return "{" + ", ".join(f"{c}: {k}" for c, k in self.classes) + "}"


class FloorSet:
    """A union of floors, given per class"""

    def __init__(self, partition: TowerPartition, floors: Mapping[str, Iterable[int]]):
        self.partition = partition
        self._floors: Dict[str, Tuple[int, ...]] = {}
        for class_id, values in floors.items():
            k = partition.orbit_size(class_id)
            values = tuple(sorted(set(values)))
            for floor in values:
                if not 1 <= floor <= k:
                    raise DomainViolation(f"Floor {floor} outside 1..{k} in class '{class_id}'")
            self._floors[class_id] = values

    def floors(self, class_id: str) -> Tuple[int, ...]:
        self.partition.orbit_size(class_id)
        return self._floors.get(class_id, ())

    def complement(self) -> "FloorSet":
        return FloorSet(
            self.partition,
            {c: sorted(set(range(1, k + 1)) - set(self.floors(c))) for c, k in self.partition.classes},
        )

    def union(self, other: "FloorSet") -> "FloorSet":
        self._check_partition(other)
        return FloorSet(self.partition, {c: set(self.floors(c)) | set(other.floors(c)) for c in self.partition.class_ids})

    def intersection(self, other: "FloorSet") -> "FloorSet":
        self._check_partition(other)
        return FloorSet(self.partition, {c: set(self.floors(c)) & set(other.floors(c)) for c in self.partition.class_ids})

    def is_disjoint(self, other: "FloorSet") -> bool:
        return all(not self.intersection(other).floors(c) for c in self.partition.class_ids)

    def _check_partition(self, other: "FloorSet"):
        if other.partition != self.partition:
            raise DomainViolation("Floor sets over different tower partitions")

    def to_dict(self) -> dict:
        return {c: list(self.floors(c)) for c in self.partition.class_ids if self.floors(c)}

    def __eq__(self, other):
        if not isinstance(other, FloorSet):
            return NotImplemented
        return self.partition == other.partition and self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"FloorSet({self.to_dict()})"


class TowerBisection:
    """Per class, a partial injective map from source floors onto range floors.

    Stored as {class_id: {range_floor: source_floor}}."""

    def __init__(self, partition: TowerPartition, pairs: Mapping[str, Mapping[int, int]]):
        self.partition = partition
        self._pairs: Dict[str, Dict[int, int]] = {}
        for class_id, mapping in pairs.items():
            k = partition.orbit_size(class_id)
            if len(set(mapping.values())) != len(mapping):
                raise DomainViolation(f"Bisection is not injective in class '{class_id}'")
            for r, s in mapping.items():
                if not (1 <= r <= k and 1 <= s <= k):
                    raise DomainViolation(f"Pair {r}<-{s} outside 1..{k} in class '{class_id}'")
            self._pairs[class_id] = dict(sorted(mapping.items()))

    def pairs(self, class_id: str) -> Dict[int, int]:
        self.partition.orbit_size(class_id)
        return dict(self._pairs.get(class_id, {}))

    @property
    def range(self) -> FloorSet:
        return FloorSet(self.partition, {c: m.keys() for c, m in self._pairs.items()})

    @property
    def source(self) -> FloorSet:
        return FloorSet(self.partition, {c: m.values() for c, m in self._pairs.items()})

    def inverse(self) -> "TowerBisection":
        return TowerBisection(self.partition, {c: {s: r for r, s in m.items()} for c, m in self._pairs.items()})

    def to_dict(self) -> dict:
        return {c: [[r, s] for r, s in m.items()] for c, m in self._pairs.items() if m}

    def __eq__(self, other):
        if not isinstance(other, TowerBisection):
            return NotImplemented
        return self.partition == other.partition and self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"TowerBisection({self.to_dict()})"


class TowerElement:
    """Per class, a permutation of the floors, as the tuple of images of 1..k"""

    def __init__(self, partition: TowerPartition, permutations: Mapping[str, Sequence[int]]):
        self.partition = partition
        self._permutations: Dict[str, Tuple[int, ...]] = {}
        for class_id, k in partition.classes:
            images = tuple(permutations.get(class_id, range(1, k + 1)))
            if sorted(images) != list(range(1, k + 1)):
                raise DomainViolation(f"Not a permutation of 1..{k} in class '{class_id}'")
            self._permutations[class_id] = images
        for class_id in permutations:
            partition.orbit_size(class_id)

    @classmethod
    def identity(cls, partition: TowerPartition) -> "TowerElement":
        return cls(partition, {})

    def image(self, class_id: str, floor: int) -> int:
        return self._permutations[class_id][floor - 1]

    def permutation(self, class_id: str) -> Tuple[int, ...]:
        self.partition.orbit_size(class_id)
        return self._permutations[class_id]

    def compose(self, other: "TowerElement") -> "TowerElement":
        """self ∘ other"""
        return TowerElement(
            self.partition,
            {c: [self.image(c, other.image(c, j)) for j in range(1, k + 1)] for c, k in self.partition.classes},
        )

    def apply(self, floors: FloorSet) -> FloorSet:
        return FloorSet(self.partition, {c: [self.image(c, j) for j in floors.floors(c)] for c in self.partition.class_ids})

    def fixed_floors(self) -> FloorSet:
        return FloorSet(
            self.partition,
            {c: [j for j in range(1, k + 1) if self.image(c, j) == j] for c, k in self.partition.classes},
        )

    def order(self) -> int:
        element, n = self, 1
        identity = TowerElement.identity(self.partition)
        while element != identity:
            element, n = element.compose(self), n + 1
        return n

    def to_dict(self) -> dict:
        return {c: list(p) for c, p in self._permutations.items()}

    def __eq__(self, other):
        if not isinstance(other, TowerElement):
            return NotImplemented
        return self.partition == other.partition and self._permutations == other._permutations

    def __repr__(self):
        return f"TowerElement({self.to_dict()})"


def orbit_count(floors: FloorSet, class_id: str) -> int:
    return len(floors.floors(class_id))


def measure_sup_check(floors: FloorSet, c) -> bool:
    """Whether μ(U) < c for every invariant probability measure μ.

    The extreme invariant measures are the uniform measures on each class, so it is
    enough to compare the per-class ratios."""

    c = Fraction(c)
    if c <= 0:
        raise DomainViolation(f"Bound {c} is not positive")
    return all(Fraction(orbit_count(floors, class_id), k) < c for class_id, k in floors.partition.classes)


def match_subsets(subsets: Sequence[FloorSet], target: FloorSet) -> List[TowerBisection]:
    """Bisections C_i with range U_i and pairwise disjoint sources inside the target.

    Sources are taken from the target in ascending floor order, U_1 first."""

    partition = target.partition
    for subset in subsets:
        if subset.partition != partition:
            raise DomainViolation("Floor sets over different tower partitions")
    pairs: List[Dict[str, Dict[int, int]]] = [{} for _ in subsets]
    for class_id in partition.class_ids:
        needed = sum(orbit_count(subset, class_id) for subset in subsets)
        available = target.floors(class_id)
        if needed > len(available):
            raise CountViolation(class_id, f"Class '{class_id}' needs {needed} floors of the target, has {len(available)}")
        sources = iter(available)
        for n, subset in enumerate(subsets):
            pairs[n][class_id] = {floor: next(sources) for floor in subset.floors(class_id)}
    return [TowerBisection(partition, p) for p in pairs]


def match_equal(range_floors: FloorSet, source_floors: FloorSet) -> TowerBisection:
    """A bisection with range exactly U and source exactly V, paired in ascending order"""

    partition = range_floors.partition
    if source_floors.partition != partition:
        raise DomainViolation("Floor sets over different tower partitions")
    pairs = {}
    for class_id in partition.class_ids:
        u, v = range_floors.floors(class_id), source_floors.floors(class_id)
        if len(u) != len(v):
            raise CountViolation(class_id, f"Class '{class_id}' has {len(u)} floors in U but {len(v)} in V")
        pairs[class_id] = dict(zip(u, v))
    return TowerBisection(partition, pairs)


def positive_cone_check(partition: TowerPartition, weights: Mapping[str, Sequence[int]]) -> bool:
    """Whether [f] is in the positive cone of H₀, i.e. every orbit sum is >= 0"""

    for class_id, k in partition.classes:
        values = weights.get(class_id, [0] * k)
        if len(values) != k:
            raise DimensionMismatch(f"Class '{class_id}' has {k} floors but {len(values)} weights")
        if sum(values) < 0:
            return False
    for class_id in weights:
        partition.orbit_size(class_id)
    return True


def involution_from_bisection(bisection: TowerBisection) -> TowerElement:
    """The element swapping source and range floors of C and fixing everything else"""

    partition = bisection.partition
    permutations = {}
    for class_id, k in partition.classes:
        pairs = bisection.pairs(class_id)
        if set(pairs) & set(pairs.values()):
            raise OverlapError(f"Range and source meet in class '{class_id}'")
        images = list(range(1, k + 1))
        for r, s in pairs.items():
            images[r - 1], images[s - 1] = s, r
        permutations[class_id] = images
    return TowerElement(partition, permutations)


def involution_between(u: FloorSet, v: FloorSet) -> TowerElement:
    """An order two element exchanging two disjoint floor sets with equal counts"""
    return involution_from_bisection(match_equal(u, v))


def _floor_heights(partition: TowerPartition, heights: Heights) -> Dict[str, Tuple[int, ...]]:
    result = {}
    for class_id, k in partition.classes:
        value = heights.get(class_id, 0)
        per_floor = (value,) * k if isinstance(value, int) else tuple(value)
        if len(per_floor) != k:
            raise DimensionMismatch(f"Class '{class_id}' has {k} floors but {len(per_floor)} heights")
        for h in per_floor:
            if h < 0:
                raise NegativeHeight(f"Negative height {h} in class '{class_id}'")
        result[class_id] = per_floor
    for class_id in heights:
        partition.orbit_size(class_id)
    return result


def tower_extend(partition: TowerPartition, heights: Heights) -> TowerPartition:
    """The partition of G_f: floor j of a class gets h_j extra copies stacked on it"""
    per_floor = _floor_heights(partition, heights)
    return TowerPartition(tuple((c, sum(1 + h for h in per_floor[c])) for c, _ in partition.classes))


def base_floors(partition: TowerPartition, heights: Heights) -> FloorSet:
    """The copies at height 0 inside tower_extend(partition, heights); a full clopen set"""
    per_floor = _floor_heights(partition, heights)
    extended = tower_extend(partition, heights)
    floors = {}
    for class_id, _ in partition.classes:
        position, base = 1, []
        for h in per_floor[class_id]:
            base.append(position)
            position += 1 + h
        floors[class_id] = base
    return FloorSet(extended, floors)


def reduce_full_clopen(partition: TowerPartition, full: FloorSet) -> Tuple[TowerPartition, Dict[str, Tuple[int, ...]]]:
    """The reduction to a full clopen set Y, with heights rebuilding the original sizes.

    Heights are given per floor of the reduction; all floors outside Y attach to the
    lowest floor of Y in their class."""

    sizes, heights = [], {}
    for class_id, k in partition.classes:
        count = orbit_count(full, class_id)
        if count == 0:
            raise NotFull(class_id)
        sizes.append((class_id, count))
        heights[class_id] = (k - count,) + (0,) * (count - 1)
    return TowerPartition(tuple(sizes)), heights
