"""AF groupoids given by Bratteli diagrams.

Level 0 is the root. `incidences[ℓ]` counts the edges from level ℓ to level ℓ + 1;
the last listed matrix is square and repeats forever. A path is a tuple of
(vertex, edge index) steps, one per level, vertices and edges numbered from 0."""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from django.db import models
from django.utils.translation import gettext_lazy as _

from .conf import get_setting
from .exceptions import (
    ClassesDiffer,
    DimensionMismatch,
    DomainViolation,
    NeedsRefinement,
    OverlapError,
    PreconditionUncertified,
    Undecided,
)
from .logging import logger
from .zmat import AbelianGroupPresentation, IntMatrix, cokernel_presentation, homology_presentation, kernel_basis

Path = Tuple[Tuple[int, int], ...]


class Decision(models.TextChoices):
    TRUE = "TRUE", _("True")
    FALSE = "FALSE", _("False")
    UNDECIDED = "UNDECIDED", _("Undecided")

    @classmethod
    def icon(cls, decision):
        if decision == cls.TRUE:
            return "✔️"
        elif decision == cls.FALSE:
            return "❌"
        elif decision == cls.UNDECIDED:
            return "❓"
        raise NotImplementedError(f"Unknown decision: {decision}")


@dataclass(frozen=True)
class BratteliDiagram:
    incidences: Tuple[IntMatrix, ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if not self.incidences:
            raise DimensionMismatch("A diagram needs at least one incidence matrix")
        if self.incidences[0].rows != 1:
            raise DimensionMismatch("The first level must have a single root vertex")
        for level, (upper, lower) in enumerate(zip(self.incidences, self.incidences[1:])):
            if upper.cols != lower.rows:
                raise DimensionMismatch(f"Incidence {level} has {upper.cols} columns, incidence {level + 1} has {lower.rows} rows")
        tail = self.incidences[-1]
        if len(self.incidences) > 1 and tail.rows != tail.cols:
            raise DimensionMismatch("The repeating last incidence matrix must be square")
        if len(self.incidences) == 1 and tail.cols != 1:
            raise DimensionMismatch("A single incidence matrix repeats, so it must be 1x1")
        for level, matrix in enumerate(self.incidences):
            for i, j, value in matrix.items():
                if value < 0:
                    raise DomainViolation(f"Negative multiplicity at level {level}")
            for i in range(matrix.rows):
                if not any(matrix[i, j] for j in range(matrix.cols)):
                    raise DomainViolation(f"Vertex {i} of level {level} has no outgoing edge")
            for j in range(matrix.cols):
                if not any(matrix[i, j] for i in range(matrix.rows)):
                    raise DomainViolation(f"Vertex {j} of level {level + 1} is unreachable")

    @classmethod
    def from_rows(cls, incidences: Sequence[Sequence[Sequence[int]]]) -> "BratteliDiagram":
        return cls(tuple(IntMatrix.from_rows(rows) for rows in incidences))

    @classmethod
    def uhf(cls, multiplicity: int) -> "BratteliDiagram":
        return cls.from_rows([[[multiplicity]]])

    @property
    def tail_start(self) -> int:
        """First level from which the connecting matrix is the repeating one"""
        return len(self.incidences) - 1

    def incidence(self, level: int) -> IntMatrix:
        return self.incidences[min(level, self.tail_start)]

    def vertex_count(self, level: int) -> int:
        return 1 if level == 0 else self.incidence(level - 1).cols

    def paths(self, level: int) -> Tuple[Path, ...]:
        """All paths from the root to a level, in lexicographic order"""
        key = ("paths", level)
        if key not in self._cache:
            if level == 0:
                self._cache[key] = ((),)
            else:
                self._cache[key] = tuple(p for q in self.paths(level - 1) for p in self.path_children(q))
        return self._cache[key]

    def terminal(self, path: Path) -> int:
        return path[-1][0] if path else 0

    def path_children(self, path: Path) -> List[Path]:
        matrix = self.incidence(len(path))
        start = self.terminal(path)
        return [
            path + ((v, e),)
            for v in range(matrix.cols)
            for e in range(matrix[start, v])
        ]

    def path_extensions(self, path: Path, level: int) -> List[Path]:
        if len(path) > level:
            raise NeedsRefinement(f"Path of length {len(path)} is deeper than level {level}")
        frontier = [path]
        for _ in range(level - len(path)):
            frontier = [child for p in frontier for child in self.path_children(p)]
        return frontier

    def check_path(self, path: Sequence[Sequence[int]]) -> Path:
        path = tuple((int(v), int(e)) for v, e in path)
        start = 0
        for level, (v, e) in enumerate(path):
            matrix = self.incidence(level)
            if not 0 <= v < matrix.cols or not 0 <= e < matrix[start, v]:
                raise DomainViolation(f"Step {level + 1} ({v}, {e}) of the path is not an edge of the diagram")
            start = v
        return path

    def push_vector(self, vector: Sequence[int], level: int) -> Tuple[int, ...]:
        """Image of a level vector at the next level"""
        return self.incidence(level).transpose().apply(vector)

    def to_dict(self) -> dict:
        return {
            "levels": [{"vertices": m.cols, "incidence": m.to_rows()} for m in self.incidences]
        }


@dataclass(frozen=True)
class DimensionGroupElement:
    level: int
    vector: Tuple[int, ...]

    def __add__(self, other: "DimensionGroupElement") -> "DimensionGroupElement":
        if self.level != other.level:
            raise DimensionMismatch("Elements must be pushed to a common level first")
        return DimensionGroupElement(self.level, tuple(a + b for a, b in zip(self.vector, other.vector)))

    def __neg__(self) -> "DimensionGroupElement":
        return DimensionGroupElement(self.level, tuple(-a for a in self.vector))

    def __sub__(self, other: "DimensionGroupElement") -> "DimensionGroupElement":
        return self + (-other)

    def scale(self, n: int) -> "DimensionGroupElement":
        return DimensionGroupElement(self.level, tuple(n * a for a in self.vector))

    @property
    def is_zero(self) -> bool:
        return not any(self.vector)

    def to_dict(self) -> dict:
        return {"level": self.level, "vector": list(self.vector)}


@dataclass(frozen=True)
class PathTableau:
    """Pairs (p, q) mapping q·tail to p·tail; the identity off the listed cylinders"""

    pairs: Tuple[Tuple[Path, Path], ...] = ()

    @property
    def is_identity(self) -> bool:
        return all(p == q for p, q in self.pairs)

    def to_dict(self) -> dict:
        return {"pairs": [[[list(s) for s in p], [list(s) for s in q]] for p, q in self.pairs]}


def element(diagram: BratteliDiagram, level: int, vector: Sequence[int]) -> DimensionGroupElement:
    if len(vector) != diagram.vertex_count(level):
        raise DimensionMismatch(f"Level {level} has {diagram.vertex_count(level)} vertices, got {len(vector)} values")
    return DimensionGroupElement(level, tuple(vector))


def push(diagram: BratteliDiagram, u: DimensionGroupElement, level: int) -> DimensionGroupElement:
    if level < u.level:
        raise DomainViolation(f"Cannot push an element of level {u.level} back to level {level}")
    element(diagram, u.level, u.vector)
    vector = u.vector
    for current in range(u.level, level):
        vector = diagram.push_vector(vector, current)
    return DimensionGroupElement(level, vector)


def unit_class(diagram: BratteliDiagram) -> DimensionGroupElement:
    return DimensionGroupElement(0, (1,))


def canonical_paths(diagram: BratteliDiagram, paths: Iterable[Sequence[Sequence[int]]], level: Optional[int] = None) -> Tuple[Path, ...]:
    """A clopen set as distinct paths of one common level; overlapping cylinders are rejected"""
    checked = [diagram.check_path(p) for p in paths]
    if level is None:
        level = max([len(p) for p in checked], default=0)
    refined = [q for p in checked for q in diagram.path_extensions(p, level)]
    if len(set(refined)) != len(refined):
        raise OverlapError("The path cylinders overlap")
    return tuple(sorted(refined))


def class_of_clopen(diagram: BratteliDiagram, paths: Iterable[Sequence[Sequence[int]]]) -> DimensionGroupElement:
    refined = canonical_paths(diagram, paths)
    level = len(refined[0]) if refined else 0
    counts = [0] * diagram.vertex_count(level)
    for p in refined:
        counts[diagram.terminal(p)] += 1
    return DimensionGroupElement(level, tuple(counts))


def _injective(matrix: IntMatrix) -> bool:
    return not kernel_basis(matrix.transpose())


def _tail_nonzero(diagram: BratteliDiagram, u: DimensionGroupElement) -> bool:
    """In the stationary tail, u is nonzero in the limit iff it survives V more pushes"""
    size = diagram.vertex_count(u.level)
    return not push(diagram, u, u.level + size).is_zero


def _zero_in_limit(diagram: BratteliDiagram, u: DimensionGroupElement, budget: int) -> Tuple[Decision, int]:
    """Whether u vanishes in the limit, with the level certifying the answer"""

    current = u
    for _step in range(budget + 1):
        if current.is_zero:
            return Decision.TRUE, current.level
        if current.level >= diagram.tail_start:
            if _tail_nonzero(diagram, current):
                return Decision.FALSE, current.level
        elif all(_injective(diagram.incidence(level)) for level in range(current.level, diagram.tail_start)):
            pushed = push(diagram, current, diagram.tail_start)
            if _tail_nonzero(diagram, pushed):
                return Decision.FALSE, current.level
        current = push(diagram, current, current.level + 1)
    logger.warning(f"Budget of {budget} levels exhausted before deciding")
    return Decision.UNDECIDED, current.level


def _common_level(diagram: BratteliDiagram, *elements: DimensionGroupElement) -> List[DimensionGroupElement]:
    level = max(e.level for e in elements)
    return [push(diagram, e, level) for e in elements]


def compare_classes(
    diagram: BratteliDiagram, u: DimensionGroupElement, v: DimensionGroupElement, budget: Optional[int] = None
) -> Tuple[Decision, int]:
    if budget is None:
        budget = get_setting("ETALE_DEFAULT_BUDGET")
    u, v = _common_level(diagram, u, v)
    return _zero_in_limit(diagram, u - v, budget)


def classes_equal(
    diagram: BratteliDiagram, u: DimensionGroupElement, v: DimensionGroupElement, budget: Optional[int] = None
) -> Decision:
    return compare_classes(diagram, u, v, budget)[0]


def positivity_check(diagram: BratteliDiagram, u: DimensionGroupElement, budget: Optional[int] = None) -> Decision:
    """Whether u lies in the positive cone of the dimension group"""

    if budget is None:
        budget = get_setting("ETALE_DEFAULT_BUDGET")
    current = push(diagram, u, u.level)
    for _step in range(budget + 1):
        if all(a >= 0 for a in current.vector):
            return Decision.TRUE
        if all(a <= 0 for a in current.vector):
            # -u is positive, so u is positive only if it vanishes
            nonzero, _ = _zero_in_limit(diagram, current, budget)
            if nonzero == Decision.FALSE:
                return Decision.FALSE
        current = push(diagram, current, current.level + 1)
    logger.warning(f"Budget of {budget} levels exhausted before deciding positivity")
    return Decision.UNDECIDED


def order_unit_check(diagram: BratteliDiagram, u: DimensionGroupElement) -> int:
    """The least n with n·[1] − u positive at the first level where both live"""
    unit, u = _common_level(diagram, unit_class(diagram), u)
    if u.level == 0:
        unit, u = push(diagram, unit, 1), push(diagram, u, 1)
    return max([-(-a // b) for a, b in zip(u.vector, unit.vector)] + [0])


def transport_hopf2(
    diagram: BratteliDiagram,
    u: Iterable[Sequence[Sequence[int]]],
    v: Iterable[Sequence[Sequence[int]]],
    budget: Optional[int] = None,
) -> PathTableau:
    """An involution mapping U onto V and fixing everything outside U ∪ V"""

    u = [diagram.check_path(p) for p in u]
    v = [diagram.check_path(p) for p in v]
    level = max([len(p) for p in u + v], default=0)
    u, v = set(canonical_paths(diagram, u, level)), set(canonical_paths(diagram, v, level))
    u_only, v_only = sorted(u - v), sorted(v - u)
    if not u_only and not v_only:
        return PathTableau()

    decision, witness = compare_classes(diagram, class_of_clopen(diagram, u_only), class_of_clopen(diagram, v_only), budget)
    if decision == Decision.FALSE:
        raise ClassesDiffer(witness)
    if decision == Decision.UNDECIDED:
        raise Undecided(f"Could not compare the classes within the budget (reached level {witness})")

    witness = max(witness, level)
    by_vertex_u, by_vertex_v = defaultdict(list), defaultdict(list)
    for p in canonical_paths(diagram, u_only, witness):
        by_vertex_u[diagram.terminal(p)].append(p)
    for q in canonical_paths(diagram, v_only, witness):
        by_vertex_v[diagram.terminal(q)].append(q)
    pairs = []
    for vertex in sorted(by_vertex_u):
        for p, q in zip(by_vertex_u[vertex], by_vertex_v[vertex]):
            pairs.append((q, p))
            pairs.append((p, q))
    logger.debug(f"Transport built at level {witness} with {len(pairs)} pairs")
    return PathTableau(tuple(sorted(pairs, key=lambda pair: pair[1])))


def path_tableau_apply(diagram: BratteliDiagram, tableau: PathTableau, path: Sequence[Sequence[int]]) -> Path:
    path = diagram.check_path(path)
    for p, q in tableau.pairs:
        if path[: len(q)] == q:
            return p + path[len(q) :]
    for p, q in tableau.pairs:
        if q[: len(path)] == path:
            raise NeedsRefinement("The path straddles several cylinders of the tableau")
    return path


def path_tableau_square(diagram: BratteliDiagram, tableau: PathTableau) -> PathTableau:
    """T∘T, listed on the source cylinders refined to a common level"""
    level = max([max(len(p), len(q)) for p, q in tableau.pairs], default=0)
    pairs = []
    for _, q in tableau.pairs:
        for x in diagram.path_extensions(q, level):
            image = path_tableau_apply(diagram, tableau, path_tableau_apply(diagram, tableau, x))
            if image != x:
                pairs.append((image, x))
    return PathTableau(tuple(pairs))


def riesz_interpolate(
    diagram: BratteliDiagram,
    f1: DimensionGroupElement,
    f2: DimensionGroupElement,
    g1: DimensionGroupElement,
    g2: DimensionGroupElement,
    budget: Optional[int] = None,
) -> DimensionGroupElement:
    """h with f_i <= h <= g_j, the coordinatewise max of the f's at a certifying level"""

    if budget is None:
        budget = get_setting("ETALE_DEFAULT_BUDGET")
    f1, f2, g1, g2 = _common_level(diagram, f1, f2, g1, g2)
    for _step in range(budget + 1):
        if all(a <= b for f in (f1, f2) for g in (g1, g2) for a, b in zip(f.vector, g.vector)):
            return DimensionGroupElement(f1.level, tuple(max(a, b) for a, b in zip(f1.vector, f2.vector)))
        f1, f2, g1, g2 = (push(diagram, e, e.level + 1) for e in (f1, f2, g1, g2))
    raise PreconditionUncertified(f"f <= g could not be certified within {budget} levels")


@dataclass(frozen=True)
class LevelCheck:
    level: int
    vertices: int
    h0: AbelianGroupPresentation
    h1: AbelianGroupPresentation

    @property
    def ok(self) -> bool:
        return self.h1.is_trivial and self.h0 == AbelianGroupPresentation((), self.vertices)

    def to_dict(self) -> dict:
        return {"level": self.level, "h0": str(self.h0), "h1": str(self.h1), "ok": self.ok}


def level_complex(diagram: BratteliDiagram, level: int) -> Tuple[IntMatrix, IntMatrix]:
    """Boundaries δ₁, δ₂ of the elementary groupoid of paths of one level.

    C¹ holds the pairs of paths with a common terminal vertex; C² is generated by
    triples through the least path of each vertex and by diagonal triples."""

    paths = diagram.paths(level)
    index = {p: i for i, p in enumerate(paths)}
    by_vertex: Dict[int, List[Path]] = defaultdict(list)
    for p in paths:
        by_vertex[diagram.terminal(p)].append(p)
    c1 = [(p, q) for vertex in sorted(by_vertex) for p in by_vertex[vertex] for q in by_vertex[vertex]]
    c1_index = {pair: i for i, pair in enumerate(c1)}

    d1 = IntMatrix.from_sparse_columns(
        [{index[q]: 1, index[p]: -1} if p != q else {} for p, q in c1], len(paths)
    )
    triples = []
    for vertex in sorted(by_vertex):
        reference = by_vertex[vertex][0]
        triples += [(x, reference, z) for x in by_vertex[vertex] for z in by_vertex[vertex]]
        triples += [(w, w, w) for w in by_vertex[vertex] if w != reference]
    columns = []
    for x, y, z in triples:
        column: Dict[int, int] = defaultdict(int)
        column[c1_index[(y, z)]] += 1
        column[c1_index[(x, z)]] -= 1
        column[c1_index[(x, y)]] += 1
        columns.append({i: c for i, c in column.items() if c})
    return d1, IntMatrix.from_sparse_columns(columns, len(c1))


def af_h1_check(diagram: BratteliDiagram, max_level: int) -> List[LevelCheck]:
    """Homology of each level's elementary groupoid: H₁ vanishes and H₀ is free"""

    checks = []
    for level in range(1, max_level + 1):
        d1, d2 = level_complex(diagram, level)
        check = LevelCheck(
            level, diagram.vertex_count(level), cokernel_presentation(d1), homology_presentation(d1, d2, d1.cols)
        )
        if not check.ok:
            logger.warning(f"Level {level}: H₀ = {check.h0}, H₁ = {check.h1}")
        checks.append(check)
    return checks
