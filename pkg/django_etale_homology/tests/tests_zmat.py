import numpy as np
from django.test import SimpleTestCase

from django_etale_homology.exceptions import DimensionMismatch, Unstabilized
from django_etale_homology.zmat import (
    AbelianGroupPresentation,
    DirectedGroupSystem,
    IntMatrix,
    cokernel_presentation,
    colimit_stabilize,
    homology_presentation,
    induced_map,
    invariant_factors,
    is_isomorphism,
    kernel_basis,
    rank,
    reduce_element,
    smith_decomposition,
    smith_normal_form,
    solve_integer,
)


class TestIntMatrix(SimpleTestCase):
    def test_constructors(self):
        m = IntMatrix.from_rows([[1, 0, 2], [0, 0, 3]])
        self.assertEqual(m.shape, (2, 3))
        self.assertEqual(m.nnz(), 3)
        self.assertEqual(m.to_rows(), [[1, 0, 2], [0, 0, 3]])
        self.assertEqual(m.transpose().to_rows(), [[1, 0], [0, 0], [2, 3]])
        self.assertEqual(IntMatrix.from_columns([[1, 0], [0, 0], [2, 3]], 2), m)
        self.assertEqual(IntMatrix.identity(2).to_rows(), [[1, 0], [0, 1]])
        self.assertTrue(IntMatrix.zeros(3, 4).is_zero())

        with self.assertRaises(DimensionMismatch):
            IntMatrix.from_rows([[1, 2], [3]])

    def test_arithmetic(self):
        a = IntMatrix.from_rows([[1, 2], [3, 4]])
        b = IntMatrix.from_rows([[0, 1], [1, 0]])
        self.assertEqual((a @ b).to_rows(), [[2, 1], [4, 3]])
        self.assertEqual((a - a).is_zero(), True)
        self.assertEqual(a.apply([1, -1]), (-1, -1))
        self.assertEqual(a.determinant(), -2)

        with self.assertRaises(DimensionMismatch):
            a @ IntMatrix.zeros(3, 1)

    def test_large_entries(self):
        """Entries are arbitrary precision integers"""
        big = 10**40
        m = IntMatrix.from_rows([[big, 0], [0, big]])
        self.assertEqual((m @ m)[0, 0], big * big)
        self.assertEqual(invariant_factors(m), (big, big))


class TestSmithNormalForm(SimpleTestCase):
    def assertDecomposition(self, rows):
        m = IntMatrix.from_rows(rows)
        s, p, q = smith_normal_form(m)
        self.assertEqual(p @ m @ q, s)
        self.assertIn(p.determinant(), (1, -1))
        self.assertIn(q.determinant(), (1, -1))
        decomposition = smith_decomposition(m)
        self.assertEqual(decomposition.P @ decomposition.P_inverse, IntMatrix.identity(m.rows))
        self.assertEqual(decomposition.Q @ decomposition.Q_inverse, IntMatrix.identity(m.cols))
        diagonal = decomposition.diagonal
        for a, b in zip(diagonal, diagonal[1:]):
            self.assertEqual(b % a, 0)
        return diagonal

    def test_examples(self):
        self.assertEqual(self.assertDecomposition([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]), (2, 6, 12))
        self.assertEqual(self.assertDecomposition([[2, 0], [0, 3]]), (1, 6))
        self.assertEqual(self.assertDecomposition([[0, 0], [0, 0]]), ())
        self.assertEqual(self.assertDecomposition([[1, 1, 1], [1, 1, 1]]), (1,))
        self.assertEqual(self.assertDecomposition([[6], [4]]), (2,))

    def test_rank(self):
        self.assertEqual(rank(IntMatrix.from_rows([[1, 2], [2, 4]])), 1)
        self.assertEqual(rank(IntMatrix.zeros(2, 3)), 0)


class TestGroups(SimpleTestCase):
    def test_cokernel(self):
        group = cokernel_presentation(IntMatrix.from_rows([[2, 0], [0, 3], [0, 0]]))
        self.assertEqual(group, AbelianGroupPresentation((6,), 1))
        self.assertEqual(str(group), "ℤ/6ℤ ⊕ ℤ")
        self.assertEqual(group.order, None)
        self.assertEqual(str(cokernel_presentation(IntMatrix.identity(3))), "0")

    def test_reduce_element(self):
        # ℤ² / <(2, 0), (0, 3)> ≅ ℤ/6
        group = cokernel_presentation(IntMatrix.from_rows([[2, 0], [0, 3]]))
        self.assertEqual(group.order, 6)
        self.assertEqual(reduce_element(group, [2, 0]), (0,))
        self.assertEqual(reduce_element(group, [0, 3]), (0,))
        one = reduce_element(group, [1, 1])
        self.assertNotEqual(one, (0,))
        # the generator representative maps back to the first coordinate
        self.assertEqual(reduce_element(group, group.generator(0)), (1,))

    def test_kernel_and_solve(self):
        m = IntMatrix.from_rows([[1, 1, 0], [0, 1, 1]])
        basis = kernel_basis(m)
        self.assertEqual(len(basis), 1)
        self.assertEqual(m.apply(basis[0]), (0, 0))
        self.assertIn(basis[0], [(1, -1, 1), (-1, 1, -1)])

        x = solve_integer(m, [3, 5])
        self.assertEqual(m.apply(x), (3, 5))
        self.assertIsNone(solve_integer(IntMatrix.from_rows([[2, 0], [0, 2]]), [1, 0]))

    def test_homology(self):
        # a triangle: H0 = ℤ (cokernel of d1), H1 = ℤ without the face, 0 with it
        d1 = IntMatrix.from_rows([[-1, 0, 1], [1, -1, 0], [0, 1, -1]])
        face = IntMatrix.from_columns([[1, 1, 1]], 3)
        self.assertEqual(homology_presentation(d1, None, 3), AbelianGroupPresentation((), 1))
        self.assertTrue(homology_presentation(d1, face, 3).is_trivial)
        self.assertEqual(cokernel_presentation(d1), AbelianGroupPresentation((), 1))

        # the doubled face leaves torsion
        self.assertEqual(homology_presentation(d1, IntMatrix.from_columns([[2, 2, 2]], 3), 3), AbelianGroupPresentation((2,)))

    def test_is_isomorphism(self):
        z6 = cokernel_presentation(IntMatrix.from_rows([[6]]))
        self.assertTrue(is_isomorphism(z6, z6, IntMatrix.from_rows([[5]])))
        self.assertFalse(is_isomorphism(z6, z6, IntMatrix.from_rows([[2]])))
        z = AbelianGroupPresentation((), 1)
        self.assertTrue(is_isomorphism(z, z, IntMatrix.from_rows([[-1]])))
        self.assertFalse(is_isomorphism(z, z, IntMatrix.from_rows([[2]])))
        self.assertFalse(is_isomorphism(z, z6, IntMatrix.from_rows([[1]])))

    def test_induced_map(self):
        source = cokernel_presentation(IntMatrix.from_rows([[0]]))
        target = cokernel_presentation(IntMatrix.from_rows([[4]]))
        matrix = induced_map(source, target, IntMatrix.from_rows([[3]]))
        self.assertEqual(matrix.shape, (1, 1))
        self.assertEqual((matrix[0, 0],), reduce_element(target, [3 * source.generator(0)[0]]))


class TestColimit(SimpleTestCase):
    def test_stabilize(self):
        z = AbelianGroupPresentation((), 1)
        z2 = AbelianGroupPresentation((2,))
        identity = IntMatrix.identity(1)
        system = DirectedGroupSystem(
            (z2, z, z, z, z),
            (IntMatrix.from_rows([[0]]), identity, identity, IntMatrix.from_rows([[-1]])),
        )
        self.assertEqual(colimit_stabilize(system, window=3), (z, 1))

        with self.assertRaises(Unstabilized):
            colimit_stabilize(system, window=4)

    def test_doubling_never_stabilizes(self):
        z = AbelianGroupPresentation((), 1)
        double = IntMatrix.from_rows([[2]])
        system = DirectedGroupSystem((z,) * 5, (double,) * 4)
        with self.assertRaises(Unstabilized) as context:
            colimit_stabilize(system, window=2)
        self.assertEqual(context.exception.levels, 5)

    def test_shapes_are_checked(self):
        z = AbelianGroupPresentation((), 1)
        with self.assertRaises(DimensionMismatch):
            DirectedGroupSystem((z, z), (IntMatrix.identity(2),))


def _subgroup_mod(columns, n, d):
    """Elements of (ℤ/d)ⁿ reached from zero by adding columns, breadth first"""
    generators = [tuple(x % d for x in column) for column in columns]
    zero = (0,) * n
    seen, frontier = {zero}, [zero]
    while frontier:
        following = []
        for v in frontier:
            for g in generators:
                w = tuple((a + b) % d for a, b in zip(v, g))
                if w not in seen:
                    seen.add(w)
                    following.append(w)
        frontier = following
    return seen


class TestRandomMatrices(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(1729)

    def random_rows(self, rows, cols, bound=3):
        return self.rng.integers(-bound, bound + 1, size=(rows, cols)).tolist()

    def test_cokernel_against_quotient(self):
        """For a square M with det D ≠ 0, Dℤⁿ ⊂ im M, so coker M = (ℤ/D)ⁿ / ⟨columns⟩"""

        checked = 0
        while checked < 20:
            n = int(self.rng.integers(1, 4))
            m = IntMatrix.from_rows(self.random_rows(n, n))
            d = abs(m.determinant())
            if d == 0 or d > 40:
                continue
            checked += 1
            image = _subgroup_mod(m.columns(), n, d)
            group = cokernel_presentation(m)
            self.assertEqual(group.order * len(image), d**n, m)

            for _ in range(5):
                v = tuple(int(x) for x in self.rng.integers(-10, 11, size=n))
                in_image = tuple(x % d for x in v) in image
                self.assertEqual(not any(reduce_element(group, v)), in_image, (m, v))

    def test_reduce_element_is_additive(self):
        for _ in range(20):
            rows, cols = (int(x) for x in self.rng.integers(1, 5, size=2))
            group = cokernel_presentation(IntMatrix.from_rows(self.random_rows(rows, cols)))
            u, v = (self.rng.integers(-20, 21, size=rows).tolist() for _ in range(2))
            total = reduce_element(group, [a + b for a, b in zip(u, v)])
            parts = zip(reduce_element(group, u), reduce_element(group, v), group.moduli)
            self.assertEqual(total, tuple((a + b) % d if d else a + b for a, b, d in parts))

    def test_kernel_basis_is_saturated(self):
        for _ in range(20):
            rows, cols = (int(x) for x in self.rng.integers(1, 5, size=2))
            m = IntMatrix.from_rows(self.random_rows(rows, cols))
            basis = kernel_basis(m)
            self.assertEqual(len(basis), cols - rank(m))
            for vector in basis:
                self.assertFalse(any(m.apply(vector)))
            if basis:
                # a saturated lattice has every invariant factor equal to 1
                self.assertEqual(invariant_factors(IntMatrix.from_columns(basis, cols)), (1,) * len(basis))
