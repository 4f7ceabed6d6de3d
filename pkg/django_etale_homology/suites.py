"""Seeded property suites, run with `manage.py groupoid check <name>|all`."""

from fractions import Fraction
from itertools import combinations, product

from sympy import Matrix
from sympy.matrices.normalforms import invariant_factors as sympy_invariant_factors
from sympy.polys.domains import ZZ

from . import af, sft, towers, zn_lab
from .decorators import register_suite
from .exceptions import ClassesDiffer, CountViolation
from .suite import CaseResult
from .zmat import IntMatrix, smith_decomposition

DESIGNATED = [[1, 1, 0], [1, 1, 1], [0, 1, 1]]


def random_matrix(rng, rows, cols, bound=6):
    return IntMatrix.from_rows(rng.integers(-bound, bound + 1, size=(rows, cols)).tolist())


def random_irreducible(rng, n):
    """A random 0-1 matrix whose graph is strongly connected"""
    while True:
        rows = rng.integers(0, 2, size=(n, n)).tolist()
        for a in range(n):
            rows[a][(a + 1) % n] = 1
        system = sft.SftSystem.from_rows(rows)
        if system.irreducible:
            return system


def random_diagram(rng, levels, max_vertices=3, max_multiplicity=2):
    sizes = [1] + [int(rng.integers(1, max_vertices + 1)) for _ in range(levels)]
    sizes.append(sizes[-1])
    incidences = []
    for top, bottom in zip(sizes, sizes[1:]):
        rows = rng.integers(0, max_multiplicity + 1, size=(top, bottom)).tolist()
        for i in range(top):
            rows[i][i % bottom] = max(rows[i][i % bottom], 1)
        for j in range(bottom):
            rows[j % top][j] = max(rows[j % top][j], 1)
        incidences.append(rows)
    return af.BratteliDiagram.from_rows(incidences)


def random_collapsing_diagram(rng, max_vertices=3, max_multiplicity=2):
    """A diagram whose first two vertices at level one have the same edges down"""
    top, middle = (int(x) for x in rng.integers(2, max_vertices + 1, size=2))
    root = [[int(x) for x in rng.integers(1, max_multiplicity + 1, size=top)]]
    collapse = rng.integers(0, max_multiplicity + 1, size=(top, middle)).tolist()
    for i in range(top):
        collapse[i][i % middle] = max(collapse[i][i % middle], 1)
    collapse[1] = list(collapse[0])
    for j in range(middle):
        if not any(row[j] for row in collapse):
            collapse[0][j] = collapse[1][j] = 1
    tail = rng.integers(0, max_multiplicity + 1, size=(middle, middle)).tolist()
    for i in range(middle):
        tail[i][i] = max(tail[i][i], 1)
    return af.BratteliDiagram.from_rows([root, collapse, tail])


@register_suite(name="zmat.snf", module="zmat", cases=30)
def smith_normal_form_suite(rng, cases):
    for case in range(cases):
        rows, cols = (int(x) for x in rng.integers(1, 7, size=2))
        matrix = random_matrix(rng, rows, cols)
        decomposition = smith_decomposition(matrix)
        product_ok = decomposition.P @ matrix @ decomposition.Q == decomposition.S
        unimodular = abs(decomposition.P.determinant()) == 1 and abs(decomposition.Q.determinant()) == 1
        chain = all(b % a == 0 for a, b in zip(decomposition.diagonal, decomposition.diagonal[1:]))
        oracle = [int(abs(d)) for d in sympy_invariant_factors(Matrix(matrix.to_rows()), domain=ZZ) if d]
        ok = product_ok and unimodular and chain and oracle == list(decomposition.diagonal)
        yield CaseResult(f"{rows}x{cols}#{case}", ok, f"diagonal {decomposition.diagonal}, oracle {oracle}")


@register_suite(name="sft.full_shift", module="sft", cases=5)
def full_shift_suite(rng, cases):
    for n in range(2, 2 + cases):
        system = sft.SftSystem.full_shift(n)
        h0 = sft.truncated_homology(system, 0)
        h1 = sft.truncated_homology(system, 1)
        ok = h0.torsion == ((n - 1,) if n > 2 else ()) and h0.free_rank == 0 and h1.is_trivial
        ok = ok and h0 == sft.h0_group(system) and h1 == sft.h1_group(system)
        yield CaseResult(f"full {n}-shift", ok, f"H0 = {h0}, H1 = {h1}")


@register_suite(name="sft.oracle", module="sft", cases=20, slow=True)
def oracle_suite(rng, cases):
    for case in range(cases):
        system = random_irreducible(rng, int(rng.integers(1, 5)))
        for degree, closed_form in ((0, sft.h0_group), (1, sft.h1_group)):
            for model in sft.MODELS:
                truncated = sft.truncated_homology(system, degree, max_depth=8, model=model)
                yield CaseResult(
                    f"{system} H{degree} {model}",
                    truncated == closed_form(system),
                    f"truncation {truncated}, matrix {closed_form(system)}",
                )


@register_suite(name="sft.designated", module="sft", cases=1)
def designated_suite(rng, cases):
    system = sft.SftSystem.from_rows(DESIGNATED)
    for degree in (0, 1):
        group = sft.truncated_homology(system, degree)
        yield CaseResult(f"H{degree}", str(group) == "ℤ" and str(sft.h0_group(system)) == "ℤ", str(group))
    tableau = sft.find_with_index(system, (1,))
    yield CaseResult("find_with_index", sft.index_of(system, tableau).coordinates == (1,), str(tableau))


@register_suite(name="sft.index_homomorphism", module="sft", cases=100)
def index_homomorphism_suite(rng, cases):
    system = sft.SftSystem.from_rows(DESIGNATED)
    candidates = sft.enumerate_tableaux(system, max_pairs=5, max_depth=2)
    for case in range(cases):
        first, second = (candidates[int(i)] for i in rng.integers(0, len(candidates), size=2))
        composed = sft.tableau_compose(system, first, second)
        i1, i2 = sft.index_of(system, first), sft.index_of(system, second)
        i12 = sft.index_of(system, composed)
        inverse = sft.index_of(system, sft.tableau_invert(system, first))
        ok = i12.vector == tuple(a + b for a, b in zip(i1.vector, i2.vector))
        ok = ok and inverse.vector == tuple(-a for a in i1.vector)
        if first.is_lag_zero:
            ok = ok and i1.is_zero
        yield CaseResult(f"pair#{case}", ok, f"{first} ∘ {second}: {i12.vector} vs {i1.vector} + {i2.vector}")


@register_suite(name="sft.boundaries", module="sft", cases=3)
def boundaries_suite(rng, cases):
    systems = [sft.SftSystem.full_shift(2), sft.SftSystem.golden_mean(), sft.SftSystem.from_rows(DESIGNATED)]
    for system in systems[:cases]:
        first = sft.ChainTruncation(system, 2, 1)
        second = sft.ChainTruncation(system, 3, 2)
        commutes = second.d1 @ first.refinement(second, 1) == first.refinement(second, 0) @ first.d1
        phi = first.transfer_map()
        transfer = sft.transfer_level_matrix(system, first.k + first.m)
        chain_map = transfer @ phi == -first.d1 and (phi @ first.d2).is_zero()
        reduced = sft.reduced_truncation(system, first.k + first.m - 1)
        retraction = reduced.retraction(first)
        retracts = reduced.d1 @ retraction == first.d1 and (retraction @ first.d2).is_zero()
        yield CaseResult(str(system), commutes and chain_map and retracts, "refinement, chain map or retraction identity fails")


@register_suite(name="af.h1", module="af", cases=20)
def af_h1_suite(rng, cases):
    diagrams = [("uhf2", af.BratteliDiagram.uhf(2))]
    diagrams += [(f"random#{case}", random_diagram(rng, int(rng.integers(1, 4)))) for case in range(cases)]
    for label, diagram in diagrams:
        checks = af.af_h1_check(diagram, 4 if label == "uhf2" else 3)
        yield CaseResult(label, all(c.ok for c in checks), "; ".join(str(c.to_dict()) for c in checks))


def _random_clopen(rng, diagram, level):
    paths = diagram.paths(level)
    chosen = rng.random(len(paths)) < 0.4
    return [p for p, keep in zip(paths, chosen) if keep]


def _terminal_shuffle(rng, diagram, level):
    """A random bijection of the level paths preserving terminal vertices"""
    by_vertex = {}
    for p in diagram.paths(level):
        by_vertex.setdefault(diagram.terminal(p), []).append(p)
    mapping = {}
    for paths in by_vertex.values():
        mapping.update({p: paths[int(j)] for p, j in zip(paths, rng.permutation(len(paths)))})
    return mapping


def _check_transport(diagram, gamma, u, v):
    """γ maps U onto V, fixes the rest and squares to the identity, read at the depth of γ"""
    depth = max([len(p) for pair in gamma.pairs for p in pair] + [len(p) for p in u + v], default=0)
    refined_u = af.canonical_paths(diagram, u, depth)
    refined_v = af.canonical_paths(diagram, v, depth)
    image = sorted(af.path_tableau_apply(diagram, gamma, p) for p in refined_u)
    outside = set(diagram.paths(depth)) - set(refined_u) - set(refined_v)
    fixed = all(af.path_tableau_apply(diagram, gamma, p) == p for p in outside)
    return image == list(refined_v) and fixed and af.path_tableau_square(diagram, gamma).is_identity


def _check_collapsed_transport(rng, case):
    """U and V end at the two merged vertices, so their classes agree only after one push"""
    diagram = random_collapsing_diagram(rng)
    at_zero = [p for p in diagram.paths(1) if diagram.terminal(p) == 0]
    at_one = [p for p in diagram.paths(1) if diagram.terminal(p) == 1]
    k = int(rng.integers(1, min(len(at_zero), len(at_one)) + 1))
    common = [p for p in diagram.paths(1) if diagram.terminal(p) > 1 and rng.random() < 0.5]
    u = at_zero[:k] + common
    v = at_one[:k] + common
    if case % 2:
        v = [q for p in v for q in diagram.path_extensions(p, 2)]
    try:
        gamma = af.transport_hopf2(diagram, u, v)
    except ClassesDiffer:
        return CaseResult(f"collapsed#{case}", False, "classes equal after one push were reported different")
    return CaseResult(f"collapsed#{case}", _check_transport(diagram, gamma, u, v), f"{k} paths over {diagram.to_dict()}")


@register_suite(name="af.transport", module="af", cases=50)
def transport_suite(rng, cases):
    for case in range(cases):
        diagram = random_diagram(rng, 2)
        level = int(rng.integers(1, 4))
        u = _random_clopen(rng, diagram, level)
        shuffle = _terminal_shuffle(rng, diagram, level)
        v = sorted(shuffle[p] for p in u)

        gamma = af.transport_hopf2(diagram, u, v)
        yield CaseResult(f"equal#{case}", _check_transport(diagram, gamma, u, v), f"{len(u)} paths at level {level}")
        yield _check_collapsed_transport(rng, case)

        complement = [p for p in diagram.paths(level) if p not in u]
        if not complement:
            continue
        try:
            af.transport_hopf2(diagram, u, u + complement[:1])
            yield CaseResult(f"unequal#{case}", False, "transport built between different classes")
        except ClassesDiffer:
            yield CaseResult(f"unequal#{case}", True)


@register_suite(name="af.riesz", module="af", cases=20)
def riesz_suite(rng, cases):
    for case in range(cases):
        diagram = random_diagram(rng, 2)
        level = int(rng.integers(0, 3))
        size = diagram.vertex_count(level)
        f1, f2 = (af.element(diagram, level, rng.integers(-3, 4, size=size).tolist()) for _ in range(2))
        top = [max(a, b) for a, b in zip(f1.vector, f2.vector)]
        g1, g2 = (
            af.element(diagram, level, [t + 1 + int(x) for t, x in zip(top, rng.integers(0, 3, size=size))])
            for _ in range(2)
        )
        h = af.riesz_interpolate(diagram, f1, f2, g1, g2)
        lower = [af.push(diagram, f, h.level) for f in (f1, f2)]
        upper = [af.push(diagram, g, h.level) for g in (g1, g2)]
        differences = [h - f for f in lower] + [g - h for g in upper]
        ok = all(af.positivity_check(diagram, d) == af.Decision.TRUE for d in differences)
        yield CaseResult(f"riesz#{case}", ok, f"h = {h.vector} at level {h.level}")


def _all_subsets(k):
    return [c for r in range(k + 1) for c in combinations(range(1, k + 1), r)]


def _floor_sets(partition):
    choices = product(*[_all_subsets(k) for _, k in partition.classes])
    return [towers.FloorSet(partition, dict(zip(partition.class_ids, choice))) for choice in choices]


def _partitions():
    """Up to three classes, each of size at most 4"""
    for count in (1, 2, 3):
        for sizes in product(range(1, 5), repeat=count):
            yield towers.TowerPartition.from_sizes({f"c{i}": k for i, k in enumerate(sizes)})


def _check_match_equal(partition, u, v):
    counts_equal = all(towers.orbit_count(u, c) == towers.orbit_count(v, c) for c in partition.class_ids)
    try:
        bisection = towers.match_equal(u, v)
    except CountViolation:
        return not counts_equal
    if not (counts_equal and bisection.range == u and bisection.source == v):
        return False
    if u.is_disjoint(v):
        gamma = towers.involution_from_bisection(bisection)
        outside = u.union(v).complement()
        return (
            gamma.apply(u) == v
            and gamma.apply(v) == u
            and gamma.apply(outside) == outside
            and gamma.compose(gamma) == towers.TowerElement.identity(partition)
        )
    return True


def _check_match_subsets(partition, subsets, target):
    needed = {c: sum(towers.orbit_count(s, c) for s in subsets) for c in partition.class_ids}
    feasible = all(needed[c] <= towers.orbit_count(target, c) for c in partition.class_ids)
    try:
        bisections = towers.match_subsets(subsets, target)
    except CountViolation:
        return not feasible
    if not feasible:
        return False
    sources = [b.source for b in bisections]
    return (
        all(b.range == s for b, s in zip(bisections, subsets))
        and all(source.intersection(target) == source for source in sources)
        and all(a.is_disjoint(b) for a, b in combinations(sources, 2))
    )


EXHAUSTIVE_INPUTS = 4096


def _inputs(rng, sets, repeat, samples):
    """Every tuple of floor sets while there are few of them, a seeded sample otherwise"""
    if len(sets) ** repeat <= EXHAUSTIVE_INPUTS:
        return list(product(sets, repeat=repeat))
    return [tuple(sets[int(i)] for i in rng.integers(0, len(sets), size=repeat)) for _ in range(samples)]


@register_suite(name="towers.cpthopf", module="towers", cases=200, slow=True)
def cpthopf_suite(rng, cases):
    for partition in _partitions():
        sets = _floor_sets(partition)
        failures = [(u, v) for u, v in _inputs(rng, sets, 2, cases) if not _check_match_equal(partition, u, v)]
        for length in range(4):
            failures += [
                (*subsets, target)
                for *subsets, target in _inputs(rng, sets, length + 1, cases)
                if not _check_match_subsets(partition, subsets, target)
            ]
        yield CaseResult(str(partition), not failures, f"{len(failures)} failing inputs, first {failures[:1]}")


@register_suite(name="zn.ratios", module="zn_lab", cases=3)
def zn_ratio_suite(rng, cases):
    previous = None
    for m in (8, 16, 32, 64)[: cases + 1]:
        config = zn_lab.MarkerConfiguration.grid(2, m)
        ratio = zn_lab.boundary_ratio(config, 1)
        ok = ratio == Fraction(4, m) and ratio == zn_lab.boundary_ratio_per_orbit(config, 1)
        if m >= 16:
            ok = ok and ratio <= zn_lab.separated_marker_bound(m, 1, 2)
        if previous is not None:
            ok = ok and ratio < previous
        previous = ratio
        yield CaseResult(f"m={m}", ok, f"ratio {ratio}")
