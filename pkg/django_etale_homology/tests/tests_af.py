from django.test import SimpleTestCase

from django_etale_homology import af
from django_etale_homology.af import BratteliDiagram, Decision
from django_etale_homology.exceptions import (
    ClassesDiffer,
    DimensionMismatch,
    DomainViolation,
    OverlapError,
    PreconditionUncertified,
    Undecided,
)

# two vertices merging into each other: (1, -1) dies after one step
COLLAPSING = [[[1, 1]], [[1, 1], [1, 1]]]

# the stationary tail is injective (determinant 3)
INJECTIVE = [[[1, 1]], [[2, 1], [1, 2]]]

# a non injective prefix before a 1x1 tail
PREFIXED = [[[1, 1]], [[1], [1]], [[2]]]


class TestBratteliDiagram(SimpleTestCase):
    def test_uhf(self):
        diagram = BratteliDiagram.uhf(2)
        self.assertEqual(diagram.tail_start, 0)
        self.assertEqual(diagram.vertex_count(5), 1)
        self.assertEqual(diagram.paths(1), (((0, 0),), ((0, 1),)))
        self.assertEqual(len(diagram.paths(3)), 8)
        self.assertEqual(diagram.push_vector((3,), 4), (6,))

    def test_validation(self):
        with self.assertRaises(DimensionMismatch):
            BratteliDiagram.from_rows([[[1], [1]]])
        with self.assertRaises(DimensionMismatch):
            BratteliDiagram.from_rows([[[1, 1]], [[1, 1, 1], [1, 1, 1]]])
        with self.assertRaises(DomainViolation):
            BratteliDiagram.from_rows([[[1, 0]], [[1, 1], [1, 1]]])
        with self.assertRaises(DomainViolation):
            BratteliDiagram.uhf(2).check_path([(0, 2)])

    def test_elements(self):
        diagram = BratteliDiagram.from_rows(INJECTIVE)
        u = af.element(diagram, 1, [1, 0])
        self.assertEqual(af.push(diagram, u, 2).vector, (2, 1))
        self.assertEqual((u - u).is_zero, True)
        self.assertEqual(u.scale(3).vector, (3, 0))

        with self.assertRaises(DimensionMismatch):
            af.element(diagram, 1, [1])
        with self.assertRaises(DimensionMismatch):
            u + af.element(diagram, 2, [1, 0])
        with self.assertRaises(DomainViolation):
            af.push(diagram, u, 0)

    def test_class_of_clopen(self):
        diagram = BratteliDiagram.uhf(2)
        self.assertEqual(af.class_of_clopen(diagram, [[(0, 0)]]).vector, (1,))
        self.assertEqual(af.class_of_clopen(diagram, [[(0, 0)], [(0, 1), (0, 0)]]).vector, (3,))
        self.assertEqual(af.unit_class(diagram).vector, (1,))

        with self.assertRaises(OverlapError):
            af.class_of_clopen(diagram, [[(0, 0)], [(0, 0), (0, 1)]])


class TestOrder(SimpleTestCase):
    def test_classes_equal(self):
        uhf2 = BratteliDiagram.uhf(2)
        half = af.class_of_clopen(uhf2, [[(0, 0)]])
        other_half = af.class_of_clopen(uhf2, [[(0, 1)]])
        quarter = af.class_of_clopen(uhf2, [[(0, 1), (0, 0)]])
        self.assertEqual(af.classes_equal(uhf2, half, other_half), Decision.TRUE)
        self.assertEqual(af.classes_equal(uhf2, half, quarter), Decision.FALSE)

        collapsing = BratteliDiagram.from_rows(COLLAPSING)
        self.assertEqual(
            af.compare_classes(collapsing, af.element(collapsing, 1, [1, 0]), af.element(collapsing, 1, [0, 1])),
            (Decision.TRUE, 2),
        )

        injective = BratteliDiagram.from_rows(INJECTIVE)
        self.assertEqual(
            af.classes_equal(injective, af.element(injective, 1, [1, 0]), af.element(injective, 1, [0, 1])),
            Decision.FALSE,
        )

    def test_undecided(self):
        diagram = BratteliDiagram.from_rows(PREFIXED)
        u, v = af.element(diagram, 1, [1, 0]), af.element(diagram, 1, [0, 1])
        self.assertEqual(af.classes_equal(diagram, u, v, budget=0), Decision.UNDECIDED)
        self.assertEqual(af.classes_equal(diagram, u, v), Decision.TRUE)

    def test_positivity(self):
        diagram = BratteliDiagram.from_rows(COLLAPSING)
        self.assertEqual(af.positivity_check(diagram, af.element(diagram, 1, [2, 0])), Decision.TRUE)
        self.assertEqual(af.positivity_check(diagram, af.element(diagram, 1, [1, -1])), Decision.TRUE)
        self.assertEqual(af.positivity_check(diagram, af.element(diagram, 1, [1, -2])), Decision.FALSE)

    def test_order_unit(self):
        diagram = BratteliDiagram.uhf(2)
        self.assertEqual(af.order_unit_check(diagram, af.element(diagram, 2, [3])), 1)
        self.assertEqual(af.order_unit_check(diagram, af.element(diagram, 2, [9])), 3)
        self.assertEqual(af.order_unit_check(diagram, af.element(diagram, 1, [-1])), 0)


class TestTransport(SimpleTestCase):
    def assertTransport(self, diagram, u, v):
        gamma = af.transport_hopf2(diagram, u, v)
        level = max(len(p) for p, _ in gamma.pairs)
        u_paths = af.canonical_paths(diagram, u, level)
        v_paths = af.canonical_paths(diagram, v, level)
        self.assertEqual(sorted(af.path_tableau_apply(diagram, gamma, p) for p in u_paths), sorted(v_paths))
        for p in diagram.paths(level):
            if p not in u_paths and p not in v_paths:
                self.assertEqual(af.path_tableau_apply(diagram, gamma, p), p)
        self.assertTrue(af.path_tableau_square(diagram, gamma).is_identity)
        return gamma

    def test_uhf(self):
        diagram = BratteliDiagram.uhf(2)
        gamma = self.assertTransport(diagram, [[(0, 0)]], [[(0, 1)]])
        self.assertEqual(len(gamma.pairs), 2)

        with self.assertRaises(ClassesDiffer):
            af.transport_hopf2(diagram, [[(0, 0)]], [[(0, 1), (0, 0)]])

    def test_refined_witness(self):
        # the classes only agree one level below the paths
        diagram = BratteliDiagram.from_rows(COLLAPSING)
        gamma = self.assertTransport(diagram, [[(0, 0)]], [[(1, 0)]])
        self.assertEqual(len(gamma.pairs), 4)

    def test_overlapping(self):
        diagram = BratteliDiagram.uhf(2)
        u = [[(0, 0), (0, 0)], [(0, 0), (0, 1)]]
        v = [[(0, 0), (0, 1)], [(0, 1), (0, 0)]]
        self.assertTransport(diagram, u, v)
        self.assertEqual(af.transport_hopf2(diagram, u, u), af.PathTableau())

    def test_undecided(self):
        diagram = BratteliDiagram.from_rows(PREFIXED)
        with self.assertRaises(Undecided):
            af.transport_hopf2(diagram, [[(0, 0)]], [[(1, 0)]], budget=0)


class TestRiesz(SimpleTestCase):
    def test_interpolate(self):
        diagram = BratteliDiagram.uhf(2)
        f1, f2 = af.element(diagram, 0, [0]), af.element(diagram, 1, [1])
        g1, g2 = af.element(diagram, 1, [3]), af.element(diagram, 0, [2])
        h = af.riesz_interpolate(diagram, f1, f2, g1, g2)
        self.assertEqual(h, af.element(diagram, 1, [1]))
        for f in (f1, f2):
            self.assertEqual(af.positivity_check(diagram, h - af.push(diagram, f, h.level)), Decision.TRUE)
        for g in (g1, g2):
            self.assertEqual(af.positivity_check(diagram, af.push(diagram, g, h.level) - h), Decision.TRUE)

    def test_uncertified(self):
        diagram = BratteliDiagram.uhf(2)
        f, g = af.element(diagram, 1, [5]), af.element(diagram, 1, [2])
        with self.assertRaises(PreconditionUncertified):
            af.riesz_interpolate(diagram, f, f, g, g, budget=3)


class TestHomology(SimpleTestCase):
    def test_h1_vanishes(self):
        for rows in ([[[2]]], COLLAPSING, INJECTIVE, PREFIXED):
            diagram = BratteliDiagram.from_rows(rows)
            checks = af.af_h1_check(diagram, 3)
            self.assertEqual([c.level for c in checks], [1, 2, 3])
            for check in checks:
                self.assertTrue(check.h1.is_trivial, check.to_dict())
                self.assertEqual(check.h0.free_rank, diagram.vertex_count(check.level))
                self.assertTrue(check.ok)
