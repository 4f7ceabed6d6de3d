from fractions import Fraction
from itertools import combinations

import numpy as np
from django.test import SimpleTestCase

from django_etale_homology import towers
from django_etale_homology.exceptions import (
    CountViolation,
    DomainViolation,
    NegativeHeight,
    NotFull,
    OverlapError,
    UnknownClass,
)
from django_etale_homology.towers import FloorSet, TowerElement, TowerPartition


class TestTowers(SimpleTestCase):
    def setUp(self):
        self.partition = TowerPartition.from_sizes({"a": 4, "b": 3})

    def floors(self, **floors):
        return FloorSet(self.partition, floors)

    def test_partition(self):
        self.assertEqual(self.partition.class_ids, ["a", "b"])
        self.assertEqual(self.partition.orbit_size("b"), 3)
        self.assertEqual(self.partition.to_dict(), [{"class_id": "a", "orbit_size": 4}, {"class_id": "b", "orbit_size": 3}])

        with self.assertRaises(UnknownClass):
            self.partition.orbit_size("c")
        with self.assertRaises(DomainViolation):
            TowerPartition.from_sizes({"a": 0})
        with self.assertRaises(DomainViolation):
            self.floors(a=[5])

    def test_floor_sets(self):
        u = self.floors(a=[1, 2], b=[1])
        self.assertEqual(u.complement(), self.floors(a=[3, 4], b=[2, 3]))
        self.assertTrue(u.is_disjoint(u.complement()))
        self.assertEqual(u.union(u.complement()), self.partition.full())
        self.assertEqual(towers.orbit_count(u, "a"), 2)
        self.assertEqual(towers.orbit_count(u, "b"), 1)

    def test_measure_sup_check(self):
        u = self.floors(a=[1, 2], b=[1])
        # the uniform measures give 1/2 on class a and 1/3 on class b
        self.assertTrue(towers.measure_sup_check(u, Fraction(2, 3)))
        self.assertFalse(towers.measure_sup_check(u, Fraction(1, 2)))
        self.assertTrue(towers.measure_sup_check(self.partition.empty(), Fraction(1, 100)))

        with self.assertRaises(DomainViolation):
            towers.measure_sup_check(u, 0)

    def test_match_subsets(self):
        target = self.floors(a=[2, 3, 4], b=[2, 3])
        u1, u2 = self.floors(a=[1], b=[1]), self.floors(a=[2, 3])
        c1, c2 = towers.match_subsets([u1, u2], target)

        self.assertEqual(c1.range, u1)
        self.assertEqual(c2.range, u2)
        self.assertTrue(c1.source.is_disjoint(c2.source))
        # sources are taken in ascending order, U_1 first
        self.assertEqual(c1.pairs("a"), {1: 2})
        self.assertEqual(c2.pairs("a"), {2: 3, 3: 4})
        self.assertEqual(c1.pairs("b"), {1: 2})

        with self.assertRaises(CountViolation) as context:
            towers.match_subsets([u1, u2, self.floors(a=[4])], target)
        self.assertEqual(context.exception.class_id, "a")

    def test_match_equal(self):
        u, v = self.floors(a=[1, 2], b=[1]), self.floors(a=[3, 4], b=[3])
        c = towers.match_equal(u, v)
        self.assertEqual(c.range, u)
        self.assertEqual(c.source, v)
        self.assertEqual(c.inverse().range, v)

        with self.assertRaises(CountViolation) as context:
            towers.match_equal(u, self.floors(a=[3, 4]))
        self.assertEqual(context.exception.class_id, "b")

    def test_involution(self):
        u, v = self.floors(a=[1, 2], b=[1]), self.floors(a=[3, 4], b=[3])
        gamma = towers.involution_between(u, v)

        self.assertEqual(gamma.apply(u), v)
        self.assertEqual(gamma.apply(v), u)
        self.assertEqual(gamma.compose(gamma), TowerElement.identity(self.partition))
        self.assertEqual(gamma.fixed_floors(), self.floors(b=[2]))
        self.assertEqual(gamma.order(), 2)

        with self.assertRaises(OverlapError):
            towers.involution_between(u, self.floors(a=[2, 3], b=[3]))

    def test_positive_cone_check(self):
        self.assertTrue(towers.positive_cone_check(self.partition, {"a": [1, -1, 2, -2], "b": [0, 0, 1]}))
        self.assertFalse(towers.positive_cone_check(self.partition, {"b": [1, -3, 1]}))

        with self.assertRaises(UnknownClass):
            towers.positive_cone_check(self.partition, {"c": [1]})

    def test_tower_extend(self):
        heights = {"a": 1, "b": [0, 1, 2]}
        extended = towers.tower_extend(self.partition, heights)
        self.assertEqual(extended, TowerPartition.from_sizes({"a": 8, "b": 6}))
        base = towers.base_floors(self.partition, heights)
        self.assertEqual(base.to_dict(), {"a": [1, 3, 5, 7], "b": [1, 2, 4]})

        with self.assertRaises(NegativeHeight):
            towers.tower_extend(self.partition, {"a": -1})
        with self.assertRaises(UnknownClass):
            towers.tower_extend(self.partition, {"c": 1})

    def test_reduce_full_clopen(self):
        y = self.floors(a=[2, 4], b=[1])
        reduced, heights = towers.reduce_full_clopen(self.partition, y)
        self.assertEqual(reduced, TowerPartition.from_sizes({"a": 2, "b": 1}))
        self.assertEqual(heights, {"a": (2, 0), "b": (2,)})

        # extending the reduction by the heights recovers the orbit sizes
        self.assertEqual(towers.tower_extend(reduced, heights), self.partition)

        with self.assertRaises(NotFull) as context:
            towers.reduce_full_clopen(self.partition, self.floors(a=[1]))
        self.assertEqual(context.exception.class_id, "b")


class TestRandomTowers(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(1729)

    def random_partition(self):
        count = int(self.rng.integers(1, 4))
        return TowerPartition.from_sizes({f"c{i}": int(k) for i, k in enumerate(self.rng.integers(1, 5, size=count))})

    def random_floors(self, partition):
        return FloorSet(
            partition,
            {c: [j for j in range(1, k + 1) if self.rng.random() < 0.5] for c, k in partition.classes},
        )

    def test_positive_cone_of_negation(self):
        """f and −f are both positive exactly when every orbit sum vanishes"""

        for _ in range(50):
            partition = self.random_partition()
            weights = {c: self.rng.integers(-2, 3, size=k).tolist() for c, k in partition.classes}
            negated = {c: [-w for w in values] for c, values in weights.items()}
            both = towers.positive_cone_check(partition, weights) and towers.positive_cone_check(partition, negated)
            self.assertEqual(both, all(sum(values) == 0 for values in weights.values()), weights)

    def test_reduce_then_extend(self):
        for _ in range(50):
            partition = self.random_partition()
            full = self.random_floors(partition)
            if not all(towers.orbit_count(full, c) for c in partition.class_ids):
                with self.assertRaises(NotFull):
                    towers.reduce_full_clopen(partition, full)
                continue
            reduced, heights = towers.reduce_full_clopen(partition, full)
            self.assertEqual(towers.tower_extend(reduced, heights), partition)
            base = towers.base_floors(reduced, heights)
            for c in partition.class_ids:
                self.assertEqual(towers.orbit_count(base, c), towers.orbit_count(full, c))

    def test_match_subsets_over_several_classes(self):
        for _ in range(100):
            partition = self.random_partition()
            target = self.random_floors(partition)
            subsets = [self.random_floors(partition) for _ in range(int(self.rng.integers(0, 4)))]
            needed = {c: sum(towers.orbit_count(s, c) for s in subsets) for c in partition.class_ids}
            if any(needed[c] > towers.orbit_count(target, c) for c in partition.class_ids):
                with self.assertRaises(CountViolation):
                    towers.match_subsets(subsets, target)
                continue
            bisections = towers.match_subsets(subsets, target)
            self.assertEqual([b.range for b in bisections], subsets)
            for b in bisections:
                self.assertEqual(b.source.intersection(target), b.source)
            for first, second in combinations(bisections, 2):
                self.assertTrue(first.source.is_disjoint(second.source))
