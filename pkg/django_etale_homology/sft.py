"""Groupoids of one-sided subshifts of finite type.

Symbols are 1..n and a word is a tuple of symbols. Clopen sets are finite antichains
of words (unions of cylinders). A full group element is given by a tableau: pairs
(μ, ν) whose last symbols have the same followers, each mapping νz to μz."""

from collections import Counter
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .af import BratteliDiagram, PathTableau
from .conf import get_setting
from .exceptions import (
    DimensionMismatch,
    DomainViolation,
    ExceedsBudget,
    InadmissibleWord,
    InfeasibleBounds,
    InvalidTableau,
    NeedsRefinement,
    NotFound,
    Unstabilized,
)
from .logging import logger
from .zmat import (
    AbelianGroupPresentation,
    DirectedGroupSystem,
    IntMatrix,
    cokernel_presentation,
    colimit_stabilize,
    homology_presentation,
    induced_map,
    is_isomorphism,
    kernel_basis,
    reduce_element,
    solve_integer,
)

Word = Tuple[int, ...]

MODELS = ("groupoid", "transfer")


def format_word(word: Sequence[int]) -> str:
    return "[" + " ".join(str(a) for a in word) + "]"


@dataclass(frozen=True)
class SftSystem:
    """A vertex shift given by a 0-1 matrix with no zero row and no zero column"""

    matrix: IntMatrix
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        n, cols = self.matrix.shape
        if n != cols or n < 1:
            raise DimensionMismatch(f"Transition matrix must be square and nonempty, got {n}x{cols}")
        for i, j, value in self.matrix.items():
            if value != 1:
                raise DomainViolation(f"Entry ({i + 1},{j + 1}) is {value}, only 0-1 matrices are supported")
        for a in range(n):
            if not any(self.matrix[a, b] for b in range(n)):
                raise DomainViolation(f"Symbol {a + 1} has no successor")
            if not any(self.matrix[b, a] for b in range(n)):
                raise DomainViolation(f"Symbol {a + 1} has no predecessor")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "SftSystem":
        return cls(IntMatrix.from_rows(rows))

    @classmethod
    def full_shift(cls, n: int) -> "SftSystem":
        return cls.from_rows([[1] * n for _ in range(n)])

    @classmethod
    def golden_mean(cls) -> "SftSystem":
        return cls.from_rows([[1, 1], [1, 0]])

    @property
    def n(self) -> int:
        return self.matrix.rows

    @property
    def symbols(self) -> range:
        return range(1, self.n + 1)

    def successors(self, a: int) -> Tuple[int, ...]:
        table = self._cache.get("successors")
        if table is None:
            table = {s: tuple(b for b in self.symbols if self.matrix[s - 1, b - 1]) for s in self.symbols}
            self._cache["successors"] = table
        return table[a]

    @property
    def irreducible(self) -> bool:
        for start in self.symbols:
            reached, frontier = {start}, [start]
            while frontier:
                a = frontier.pop()
                for b in self.successors(a):
                    if b not in reached:
                        reached.add(b)
                        frontier.append(b)
            if len(reached) != self.n:
                return False
        return True

    def is_admissible(self, word: Sequence[int]) -> bool:
        if not word or any(a not in self.symbols for a in word):
            return False
        return all(self.matrix[a - 1, b - 1] for a, b in zip(word, word[1:]))

    def check_word(self, word: Sequence[int]) -> Word:
        word = tuple(word)
        if not self.is_admissible(word):
            raise InadmissibleWord(f"Word {format_word(word)} is not admissible")
        return word

    def words(self, length: int) -> Tuple[Word, ...]:
        """All admissible words of a length, in lexicographic order"""
        if length < 1:
            raise DomainViolation(f"Word length {length} < 1")
        key = ("words", length)
        if key not in self._cache:
            if length == 1:
                self._cache[key] = tuple((a,) for a in self.symbols)
            else:
                self._cache[key] = tuple(w + (b,) for w in self.words(length - 1) for b in self.successors(w[-1]))
        return self._cache[key]

    def word_index(self, length: int) -> Dict[Word, int]:
        key = ("index", length)
        if key not in self._cache:
            self._cache[key] = {w: i for i, w in enumerate(self.words(length))}
        return self._cache[key]

    def words_ending(self, length: int, a: int) -> Tuple[Word, ...]:
        key = ("ending", length, a)
        if key not in self._cache:
            self._cache[key] = tuple(w for w in self.words(length) if w[-1] == a)
        return self._cache[key]

    def least_word(self, length: int, a: int) -> Optional[Word]:
        words = self.words_ending(length, a)
        return words[0] if words else None

    def extensions(self, word: Word, length: int) -> Tuple[Word, ...]:
        """The admissible words of a length having `word` as a prefix"""
        if len(word) > length:
            raise NeedsRefinement(f"Word {format_word(word)} is longer than {length}")
        frontier = [word]
        for _ in range(length - len(word)):
            frontier = [w + (b,) for w in frontier for b in self.successors(w[-1])]
        return tuple(frontier)

    def transfer_matrix(self) -> IntMatrix:
        """I − Aᵗ"""
        return IntMatrix.identity(self.n) - self.matrix.transpose()

    def to_dict(self) -> dict:
        return {"n": self.n, "rows": self.matrix.to_rows()}

    def __str__(self):
        return "SFT(" + "; ".join(" ".join(str(x) for x in row) for row in self.matrix.to_rows()) + ")"


# Clopen sets


def canonical_clopen(system: SftSystem, words: Iterable[Sequence[int]]) -> Tuple[Word, ...]:
    """Prefix-free form of a union of cylinders; refines only, never coarsens"""
    checked = {system.check_word(w) for w in words}
    kept = [w for w in checked if not any(w[:i] in checked for i in range(1, len(w)))]
    return tuple(sorted(kept))


def refine_clopen(system: SftSystem, words: Iterable[Word], depth: int) -> Tuple[Word, ...]:
    refined = []
    for w in canonical_clopen(system, words):
        refined.extend(system.extensions(w, depth) if len(w) < depth else [w])
    return tuple(sorted(refined))


def clopen_equal(system: SftSystem, u: Iterable[Word], v: Iterable[Word]) -> bool:
    u, v = canonical_clopen(system, u), canonical_clopen(system, v)
    depth = max([len(w) for w in u + v], default=1)
    return refine_clopen(system, u, depth) == refine_clopen(system, v, depth)


# Closed-form homology


def h0_group(system: SftSystem) -> AbelianGroupPresentation:
    return cokernel_presentation(system.transfer_matrix())


def h1_group(system: SftSystem) -> AbelianGroupPresentation:
    return homology_presentation(system.transfer_matrix(), None, system.n)


def h1_kernel_basis(system: SftSystem) -> List[Tuple[int, ...]]:
    return kernel_basis(system.transfer_matrix())


def h0_class(system: SftSystem, clopen: Iterable[Sequence[int]]) -> Tuple[int, ...]:
    """[1_U] in coker(I − Aᵗ); the cylinder [w] is equivalent to e_last(w)"""
    vector = [0] * system.n
    for w in canonical_clopen(system, clopen):
        vector[w[-1] - 1] += 1
    return reduce_element(h0_group(system), vector)


def unit_class(system: SftSystem) -> Tuple[int, ...]:
    return h0_class(system, [(a,) for a in system.symbols])


# Tableaux


@dataclass(frozen=True)
class CylinderBisection:
    """Z(μ, ν), mapping νz to μz"""

    mu: Word
    nu: Word

    @property
    def lag(self) -> int:
        return len(self.mu) - len(self.nu)

    def inverse(self) -> "CylinderBisection":
        return CylinderBisection(self.nu, self.mu)

    def __str__(self):
        return f"({format_word(self.mu)}, {format_word(self.nu)})"


@dataclass(frozen=True)
class Tableau:
    pairs: Tuple[CylinderBisection, ...]

    @classmethod
    def from_words(cls, pairs: Iterable[Tuple[Sequence[int], Sequence[int]]]) -> "Tableau":
        return cls(tuple(CylinderBisection(tuple(mu), tuple(nu)) for mu, nu in pairs))

    def sorted(self) -> "Tableau":
        return Tableau(tuple(sorted(self.pairs, key=lambda p: (p.nu, p.mu))))

    @property
    def depth(self) -> int:
        return max([max(len(p.mu), len(p.nu)) for p in self.pairs], default=0)

    @property
    def total_length(self) -> int:
        return sum(len(p.mu) + len(p.nu) for p in self.pairs)

    @property
    def is_lag_zero(self) -> bool:
        return all(p.lag == 0 for p in self.pairs)

    @property
    def is_identity(self) -> bool:
        return all(p.mu == p.nu for p in self.pairs)

    def to_dict(self) -> dict:
        return {"pairs": [[list(p.mu), list(p.nu)] for p in self.pairs]}

    def __str__(self):
        return "{" + ", ".join(str(p) for p in self.pairs) + "}"


@dataclass(frozen=True)
class TableauValidation:
    valid: bool
    kind: Optional[str] = None
    word: Optional[Word] = None
    message: str = ""

    def __bool__(self):
        return self.valid


def _cover_violation(system: SftSystem, words: Sequence[Word], side: str) -> Optional[TableauValidation]:
    depth = max(len(w) for w in words)
    covered = Counter()
    for w in words:
        covered.update(system.extensions(w, depth))
    for w in system.words(depth):
        if covered[w] > 1:
            return TableauValidation(False, "overlap", w, f"{side} cylinders overlap at {format_word(w)}")
    for w in system.words(depth):
        if not covered[w]:
            return TableauValidation(False, "gap", w, f"{side} cylinders miss {format_word(w)}")
    return None


def tableau_validate(system: SftSystem, tableau: Tableau) -> TableauValidation:
    """Checks both sides partition the shift space and each pair ends in symbols with equal followers"""

    if not tableau.pairs:
        first = system.words(1)[0]
        return TableauValidation(False, "gap", first, f"empty tableau misses {format_word(first)}")
    for pair in tableau.pairs:
        for w in (pair.mu, pair.nu):
            if not system.is_admissible(w):
                return TableauValidation(False, "inadmissible", w, f"word {format_word(w)} is not admissible")
        if system.successors(pair.mu[-1]) != system.successors(pair.nu[-1]):
            return TableauValidation(False, "terminal", pair.nu, f"pair {pair} ends in symbols with different followers")
    for side, words in (("source", [p.nu for p in tableau.pairs]), ("range", [p.mu for p in tableau.pairs])):
        violation = _cover_violation(system, words, side)
        if violation is not None:
            return violation
    return TableauValidation(True)


def require_valid(system: SftSystem, tableau: Tableau) -> Tableau:
    result = tableau_validate(system, tableau)
    if not result:
        raise InvalidTableau(f"Invalid tableau: {result.message}", kind=result.kind, word=result.word)
    return tableau


def identity_tableau(system: SftSystem) -> Tableau:
    return Tableau.from_words(((a,), (a,)) for a in system.symbols)


def tableau_simplify(system: SftSystem, tableau: Tableau) -> Tableau:
    """Merges sibling pairs (μb, νb), b ranging over all successors, into (μ, ν)"""

    mapping = {p.nu: p.mu for p in tableau.pairs}
    changed = True
    while changed:
        changed = False
        parents = {nu[:-1] for nu in mapping if len(nu) >= 2}
        for parent in sorted(parents, key=len, reverse=True):
            children = [parent + (b,) for b in system.successors(parent[-1])]
            if not all(c in mapping for c in children):
                continue
            stem = mapping[children[0]][:-1]
            if not stem or system.successors(stem[-1]) != system.successors(parent[-1]):
                continue
            if any(mapping[c] != stem + c[-1:] for c in children):
                continue
            for c in children:
                del mapping[c]
            mapping[parent] = stem
            changed = True
    return Tableau.from_words((mu, nu) for nu, mu in mapping.items()).sorted()


def tableau_compose(system: SftSystem, first: Tableau, second: Tableau) -> Tableau:
    """The tableau of τ_first ∘ τ_second (second acts first)"""

    require_valid(system, first)
    require_valid(system, second)
    pairs = []
    for inner in second.pairs:
        for outer in first.pairs:
            if inner.mu[: len(outer.nu)] == outer.nu:
                pairs.append((outer.mu + inner.mu[len(outer.nu) :], inner.nu))
            elif outer.nu[: len(inner.mu)] == inner.mu:
                pairs.append((outer.mu, inner.nu + outer.nu[len(inner.mu) :]))
    return tableau_simplify(system, Tableau.from_words(pairs))


def tableau_invert(system: SftSystem, tableau: Tableau) -> Tableau:
    require_valid(system, tableau)
    return Tableau(tuple(p.inverse() for p in tableau.pairs)).sorted()


def _refined_pairs(system: SftSystem, tableau: Tableau, depth: int) -> set:
    refined = set()
    for p in tableau.pairs:
        for nu in system.extensions(p.nu, depth):
            refined.add((p.mu + nu[len(p.nu) :], nu))
    return refined


def tableau_equal(system: SftSystem, first: Tableau, second: Tableau) -> bool:
    """Equality as full group elements, tested at the common source depth"""
    first = tableau_simplify(system, require_valid(system, first))
    second = tableau_simplify(system, require_valid(system, second))
    depth = max(len(p.nu) for p in first.pairs + second.pairs)
    return _refined_pairs(system, first, depth) == _refined_pairs(system, second, depth)


def tableau_order(system: SftSystem, tableau: Tableau, budget: Optional[int] = None) -> int:
    """The least p <= budget with T^p the identity"""

    if budget is None:
        budget = get_setting("ETALE_DEFAULT_BUDGET")
    require_valid(system, tableau)
    power = tableau_simplify(system, tableau)
    for p in range(1, budget + 1):
        if power.is_identity:
            return p
        power = tableau_compose(system, tableau, power)
    raise ExceedsBudget(f"No power up to {budget} is the identity")


def tableau_apply(system: SftSystem, tableau: Tableau, word: Sequence[int]) -> Word:
    """Image of the cylinder of a word lying inside one source cylinder"""

    word = system.check_word(word)
    for p in tableau.pairs:
        if word[: len(p.nu)] == p.nu:
            return p.mu + word[len(p.nu) :]
    for p in tableau.pairs:
        if p.nu[: len(word)] == word:
            raise NeedsRefinement(f"Word {format_word(word)} straddles several source cylinders")
    raise InvalidTableau(f"No source cylinder contains {format_word(word)}", kind="gap", word=word)


# Truncated chain complexes


def transfer_level_matrix(system: SftSystem, depth: int) -> IntMatrix:
    """id − σ_* on functions of depth `depth`; σ_* 1_[w] = Σ_b 1_[w₂…w_ℓ b]"""
    words = system.words(depth)
    index = system.word_index(depth)
    data: Dict[int, Dict[int, int]] = {}
    for j, w in enumerate(words):
        data.setdefault(j, {})[j] = 1
        for b in system.successors(w[-1]):
            i = index[w[1:] + (b,)]
            row = data.setdefault(i, {})
            row[j] = row.get(j, 0) - 1
    return IntMatrix(len(words), len(words), data)


def transfer_refinement(system: SftSystem, depth: int) -> IntMatrix:
    """1_[w] written as Σ_b 1_[wb], from depth to depth + 1"""
    index = system.word_index(depth + 1)
    columns = [{index[w + (b,)]: 1 for b in system.successors(w[-1])} for w in system.words(depth)]
    return IntMatrix.from_sparse_columns(columns, len(index))


def _cylinder_vector(system: SftSystem, word: Word, depth: int, index: Dict[Word, int], out: Dict[int, int], sign: int):
    for w in system.extensions(word, depth):
        k = index[w]
        out[k] = out.get(k, 0) + sign
        if not out[k]:
            del out[k]


class ChainTruncation:
    """Groupoid chain complex C² → C¹ → C⁰ restricted to depth k and lag bound m.

    C⁰ has the words of length k + m; C¹ the bisections Z(μ, ν) with |ν| = k,
    |μ| in [k − m, k + m] and equal last symbols; C² is generated by composable
    triples (x, y, z) whose middle word is the least word of its length and last
    symbol, plus the diagonal triples (w, w, w). These span the same boundaries as
    all triples of the window."""

    def __init__(self, system: SftSystem, k: int, m: int):
        if m < 1 or k < m + 1:
            raise InfeasibleBounds(f"Truncation needs m >= 1 and k >= m + 1, got k={k}, m={m}")
        self.system = system
        self.k = k
        self.m = m
        limit = get_setting("ETALE_MAX_BASIS_SIZE")

        self.c0: Tuple[Word, ...] = system.words(k + m)
        self.c0_index = system.word_index(k + m)

        c1 = []
        for nu in system.words(k):
            for length in range(k - m, k + m + 1):
                c1.extend((mu, nu) for mu in system.words_ending(length, nu[-1]))
            if len(c1) > limit:
                raise InfeasibleBounds(f"C¹ basis at k={k}, m={m} exceeds {limit} elements")
        self.c1: Tuple[Tuple[Word, Word], ...] = tuple(c1)
        self.c1_index = {pair: i for i, pair in enumerate(self.c1)}

        self.c2: Tuple[Tuple[Word, Word, Word], ...] = tuple(self._triples(limit))
        logger.debug(f"Truncation k={k}, m={m}: |C⁰|={len(self.c0)}, |C¹|={len(self.c1)}, |C²|={len(self.c2)}")

        self.d1 = self._build_d1()
        self.d2 = self._build_d2()
        if not (self.d1 @ self.d2).is_zero():
            raise RuntimeError(f"δ₁∘δ₂ does not vanish at k={k}, m={m}")

    def _triples(self, limit: int) -> List[Tuple[Word, Word, Word]]:
        system, k, m = self.system, self.k, self.m
        triples = {}
        for a in system.symbols:
            for ly in range(1, k + 1):
                y = system.least_word(ly, a)
                if y is None:
                    continue
                for lz in range(max(1, ly - m), min(k, ly + m) + 1):
                    for lx in range(max(1, ly - m, lz - m), min(ly, lz) + m + 1):
                        for x in system.words_ending(lx, a):
                            for z in system.words_ending(lz, a):
                                triples[(x, y, z)] = None
                if len(triples) > limit:
                    raise InfeasibleBounds(f"C² basis at k={k}, m={m} exceeds {limit} elements")
        for length in range(1, k + 1):
            for w in system.words(length):
                triples[(w, w, w)] = None
        return list(triples)

    def _refined_bisection(self, mu: Word, nu: Word, out: Dict[int, int], sign: int):
        """Adds sign·1_Z(μ,ν), written on C¹ basis elements with |ν| = k"""
        for w in self.system.extensions(nu, self.k):
            i = self.c1_index[(mu + w[len(nu) :], w)]
            out[i] = out.get(i, 0) + sign
            if not out[i]:
                del out[i]

    def _build_d1(self) -> IntMatrix:
        columns = []
        for mu, nu in self.c1:
            column: Dict[int, int] = {}
            _cylinder_vector(self.system, nu, self.k + self.m, self.c0_index, column, 1)
            _cylinder_vector(self.system, mu, self.k + self.m, self.c0_index, column, -1)
            columns.append(column)
        return IntMatrix.from_sparse_columns(columns, len(self.c0))

    def _build_d2(self) -> IntMatrix:
        columns = []
        for x, y, z in self.c2:
            column: Dict[int, int] = {}
            self._refined_bisection(y, z, column, 1)
            self._refined_bisection(x, z, column, -1)
            self._refined_bisection(x, y, column, 1)
            columns.append(column)
        return IntMatrix.from_sparse_columns(columns, len(self.c1))

    def bisection_vector(self, mu: Word, nu: Word) -> Tuple[int, ...]:
        """1_Z(μ,ν) on the C¹ basis"""
        too_deep = len(nu) > self.k or (len(nu) == self.k and mu[-1] != nu[-1])
        if too_deep or abs(len(mu) - len(nu)) > self.m:
            raise NeedsRefinement(f"Z({format_word(mu)}, {format_word(nu)}) lies outside k={self.k}, m={self.m}")
        column: Dict[int, int] = {}
        self._refined_bisection(mu, nu, column, 1)
        return tuple(column.get(i, 0) for i in range(len(self.c1)))

    def refinement(self, following: "ChainTruncation", degree: int) -> IntMatrix:
        """Inclusion of the degree-0 or degree-1 chains into a deeper truncation"""
        if degree == 0:
            columns = []
            for w in self.c0:
                column: Dict[int, int] = {}
                _cylinder_vector(self.system, w, following.k + following.m, following.c0_index, column, 1)
                columns.append(column)
            return IntMatrix.from_sparse_columns(columns, len(following.c0))
        if degree == 1:
            columns = []
            for mu, nu in self.c1:
                column: Dict[int, int] = {}
                following._refined_bisection(mu, nu, column, 1)
                columns.append(column)
            return IntMatrix.from_sparse_columns(columns, len(following.c1))
        raise DomainViolation(f"No refinement in degree {degree}")

    def transfer_map(self) -> IntMatrix:
        """Chain map Φ from C¹ to the transfer complex at depth k + m.

        Φ(1_Z(μ,ν)) = Σ_i 1_[μ_i…] − Σ_j 1_[ν_j…] over all suffixes; it satisfies
        (id − σ_*)·Φ = −δ₁ and Φ·δ₂ = 0."""
        depth = self.k + self.m
        columns = []
        for mu, nu in self.c1:
            column: Dict[int, int] = {}
            for i in range(len(mu)):
                _cylinder_vector(self.system, mu[i:], depth, self.c0_index, column, 1)
            for j in range(len(nu)):
                _cylinder_vector(self.system, nu[j:], depth, self.c0_index, column, -1)
            columns.append(column)
        return IntMatrix.from_sparse_columns(columns, len(self.c0))


def chain_truncation(system: SftSystem, k: int, m: int) -> ChainTruncation:
    return ChainTruncation(system, k, m)


def _accumulate(out: Dict[int, int], source: Dict[int, int], sign: int):
    for i, value in source.items():
        new = out.get(i, 0) + sign * value
        if new:
            out[i] = new
        else:
            out.pop(i, None)


class ReducedTruncation:
    """Groupoid chains of one level, spanned by bisections through reference words.

    With D = level + 1 and ρ_j(a) the least word of length j ending in a, C⁰ has the
    words of length D and C¹ has two kinds of bisections: a spoke Z(w, ρ_D(a)) for
    every other word w of length D ending in a, and a shift Z(ρ_D(a), ρ_D−1(a)) per
    symbol. No composable pair has its three faces in C¹, so C² is zero.

    `piece_vector` retracts any bisection Z(μ, ν) with |μ|, |ν| <= D onto C¹: the
    retraction commutes with δ₁ and sends the boundary of every composable triple to
    zero (see `retraction`)."""

    def __init__(self, system: SftSystem, level: int):
        if level < 1:
            raise InfeasibleBounds(f"Levels start at 1, got {level}")
        self.system = system
        self.level = level
        self.depth = level + 1
        limit = get_setting("ETALE_MAX_BASIS_SIZE")
        size = sum(len(system.successors(w[-1])) for w in system.words(self.level))
        if size > limit:
            raise InfeasibleBounds(f"{size} words of length {self.depth} exceed {limit}")

        self.c0: Tuple[Word, ...] = system.words(self.depth)
        self.c0_index = system.word_index(self.depth)
        spokes = [(w, self.reference(self.depth, w[-1])) for w in self.c0]
        spokes = [(w, r) for w, r in spokes if w != r]
        shifts = [(self.reference(self.depth, a), self.reference(self.level, a)) for a in system.symbols]
        self.c1: Tuple[Tuple[Word, Word], ...] = tuple(spokes + shifts)
        self.spoke_index = {w: i for i, (w, _) in enumerate(spokes)}
        self.shift_index = {a: len(spokes) + a - 1 for a in system.symbols}
        self._classes: Dict[tuple, Dict[int, int]] = {}

        self.d1 = self._build_d1()
        logger.debug(f"Reduced level {level}: |C⁰|={len(self.c0)}, |C¹|={len(self.c1)}")

    def reference(self, length: int, a: int) -> Word:
        return self.system.least_word(length, a)

    def _build_d1(self) -> IntMatrix:
        columns = []
        for mu, nu in self.c1:
            column: Dict[int, int] = {}
            _cylinder_vector(self.system, nu, self.depth, self.c0_index, column, 1)
            _cylinder_vector(self.system, mu, self.depth, self.c0_index, column, -1)
            columns.append(column)
        return IntMatrix.from_sparse_columns(columns, len(self.c0))

    def _spoke_class(self, word: Word) -> Dict[int, int]:
        """[Z(w, ρ(w))] for a word of length at most D"""
        key = ("spoke", word)
        if key not in self._classes:
            out: Dict[int, int] = {}
            if len(word) == self.depth:
                if word in self.spoke_index:
                    out[self.spoke_index[word]] = 1
            else:
                reference = self.reference(len(word), word[-1])
                if word != reference:
                    for b in self.system.successors(word[-1]):
                        _accumulate(out, self._spoke_class(word + (b,)), 1)
                        _accumulate(out, self._spoke_class(reference + (b,)), -1)
            self._classes[key] = out
        return self._classes[key]

    def _shift_class(self, length: int, a: int) -> Dict[int, int]:
        """[Z(ρ_length+1(a), ρ_length(a))]"""
        if length == self.level:
            return {self.shift_index[a]: 1}
        if length > self.level:
            raise NeedsRefinement(f"A shift from length {length} lies below level {self.level}")
        key = ("shift", length, a)
        if key not in self._classes:
            out: Dict[int, int] = {}
            upper, lower = self.reference(length + 1, a), self.reference(length, a)
            for b in self.system.successors(a):
                _accumulate(out, self._spoke_class(upper + (b,)), 1)
                _accumulate(out, self._shift_class(length + 1, b), 1)
                _accumulate(out, self._spoke_class(lower + (b,)), -1)
            self._classes[key] = out
        return self._classes[key]

    def piece_vector(self, mu: Word, nu: Word) -> Dict[int, int]:
        """The retraction of 1_Z(μ,ν), as a sparse vector on the C¹ basis"""
        if max(len(mu), len(nu)) > self.depth:
            raise NeedsRefinement(f"Z({format_word(mu)}, {format_word(nu)}) lies below level {self.level}")
        out: Dict[int, int] = {}
        if mu[-1] != nu[-1]:
            if self.system.successors(mu[-1]) != self.system.successors(nu[-1]):
                raise DomainViolation(f"Z({format_word(mu)}, {format_word(nu)}) is not a bisection")
            if max(len(mu), len(nu)) == self.depth:
                raise NeedsRefinement(f"Z({format_word(mu)}, {format_word(nu)}) must be split below level {self.level}")
            for b in self.system.successors(nu[-1]):
                _accumulate(out, self.piece_vector(mu + (b,), nu + (b,)), 1)
            return out
        _accumulate(out, self._spoke_class(mu), 1)
        _accumulate(out, self._spoke_class(nu), -1)
        for length in range(len(nu), len(mu)):
            _accumulate(out, self._shift_class(length, mu[-1]), 1)
        for length in range(len(mu), len(nu)):
            _accumulate(out, self._shift_class(length, mu[-1]), -1)
        return out

    def chain_vector(self, pairs: Iterable[Tuple[Word, Word]]) -> Tuple[int, ...]:
        out: Dict[int, int] = {}
        for mu, nu in pairs:
            _accumulate(out, self.piece_vector(mu, nu), 1)
        return tuple(out.get(i, 0) for i in range(len(self.c1)))

    def shift_coefficients(self, vector: Sequence[int]) -> Tuple[int, ...]:
        return tuple(vector[self.shift_index[a]] for a in self.system.symbols)

    def refinement(self, following: "ReducedTruncation", degree: int) -> IntMatrix:
        if degree == 0:
            return transfer_refinement(self.system, self.depth)
        if degree == 1:
            columns = [following.piece_vector(mu, nu) for mu, nu in self.c1]
            return IntMatrix.from_sparse_columns(columns, len(following.c1))
        raise DomainViolation(f"No refinement in degree {degree}")

    def retraction(self, truncation: ChainTruncation) -> IntMatrix:
        """The retraction on the C¹ basis of a window truncation reaching at most depth D.

        `self.d1 @ R == truncation.d1` and `R @ truncation.d2 == 0`."""
        if truncation.k + truncation.m != self.depth:
            raise NeedsRefinement(f"Window k={truncation.k}, m={truncation.m} does not end at depth {self.depth}")
        columns = [self.piece_vector(mu, nu) for mu, nu in truncation.c1]
        return IntMatrix.from_sparse_columns(columns, len(self.c1))


def reduced_truncation(system: SftSystem, level: int) -> ReducedTruncation:
    key = ("reduced", level)
    if key not in system._cache:
        system._cache[key] = ReducedTruncation(system, level)
    return system._cache[key]


class HomologyLevels:
    """Level groups of one truncated model, built on demand and kept on the system.

    Level i (0-based) is the transfer complex on words of length i + 1, or the
    reduced groupoid complex of level i + 1."""

    def __init__(self, system: SftSystem, degree: int, model: str):
        if degree not in (0, 1):
            raise DomainViolation(f"Truncated homology is computed in degrees 0 and 1, not {degree}")
        if model not in MODELS:
            raise DomainViolation(f"Unknown model '{model}', expected one of {', '.join(MODELS)}")
        self.system = system
        self.degree = degree
        self.model = model
        self.groups: List[AbelianGroupPresentation] = []
        self.maps: List[IntMatrix] = []

    def _transfer_group(self, depth: int) -> AbelianGroupPresentation:
        size = len(self.system.words(depth))
        limit = get_setting("ETALE_MAX_BASIS_SIZE")
        if size > limit:
            raise InfeasibleBounds(f"{size} words of length {depth} exceed {limit}")
        d = transfer_level_matrix(self.system, depth)
        return cokernel_presentation(d) if self.degree == 0 else homology_presentation(d, None, size)

    def build(self, count: int):
        while len(self.groups) < count:
            level = len(self.groups) + 1
            if self.model == "transfer":
                group = self._transfer_group(level)
                if self.groups:
                    refinement = transfer_refinement(self.system, level - 1)
            else:
                truncation = reduced_truncation(self.system, level)
                if self.degree == 0:
                    group = cokernel_presentation(truncation.d1)
                else:
                    group = homology_presentation(truncation.d1, None, len(truncation.c1))
                if self.groups:
                    refinement = reduced_truncation(self.system, level - 1).refinement(truncation, self.degree)
            if self.groups:
                self.maps.append(induced_map(self.groups[-1], group, refinement))
            self.groups.append(group)
            logger.debug(f"{self.model.capitalize()} level {level}: H{self.degree} = {group}")

    def directed_system(self, count: int) -> DirectedGroupSystem:
        self.build(count)
        return DirectedGroupSystem(tuple(self.groups[:count]), tuple(self.maps[: max(count - 1, 0)]))

    def stabilize(self, max_depth: int, window: int) -> Tuple[AbelianGroupPresentation, int]:
        """Stops at the first level count where `window` connecting maps are isomorphisms"""
        for count in range(window + 1, max_depth):
            try:
                return colimit_stabilize(self.directed_system(count), window)
            except Unstabilized:
                continue
        return colimit_stabilize(self.directed_system(max_depth), window)

    def transport(self, coordinates: Sequence[int], source: int, target: int) -> Tuple[int, ...]:
        """Canonical coordinates carried from one level to another along the connecting maps"""
        self.build(max(source, target) + 1)
        coordinates = tuple(coordinates)
        for k in range(source, target):
            image = self.maps[k].apply(coordinates)
            coordinates = tuple(x % d if d else x for x, d in zip(image, self.groups[k + 1].moduli))
        for k in range(source - 1, target - 1, -1):
            group, following = self.groups[k], self.groups[k + 1]
            if not is_isomorphism(group, following, self.maps[k]):
                raise Unstabilized(f"The connecting map at level {k} is not an isomorphism", levels=k + 1)
            relations = IntMatrix.diagonal(following.moduli, following.generator_count, following.generator_count)
            solution = solve_integer(self.maps[k].hstack(relations), coordinates)
            if solution is None:
                raise RuntimeError(f"No preimage of {list(coordinates)} at level {k}")
            coordinates = tuple(x % d if d else x for x, d in zip(solution, group.moduli))
        return coordinates


def homology_levels(system: SftSystem, degree: int, model: str = "groupoid") -> HomologyLevels:
    key = ("levels", degree, model)
    if key not in system._cache:
        system._cache[key] = HomologyLevels(system, degree, model)
    return system._cache[key]


def homology_system(system: SftSystem, degree: int, max_depth: int, model: str = "groupoid") -> DirectedGroupSystem:
    """Level groups and connecting maps of the truncated homology"""
    return homology_levels(system, degree, model).directed_system(max_depth)


def stabilized_homology(
    system: SftSystem,
    degree: int,
    max_depth: Optional[int] = None,
    model: str = "groupoid",
    window: Optional[int] = None,
) -> Tuple[AbelianGroupPresentation, int]:
    """The stabilized group with the (0-based) level where stabilization starts"""
    if max_depth is None:
        max_depth = get_setting("ETALE_DEFAULT_DEPTH")
    if window is None:
        window = get_setting("ETALE_STABILIZATION_WINDOW")
    return homology_levels(system, degree, model).stabilize(max_depth, window)


def truncated_homology(
    system: SftSystem,
    degree: int,
    max_depth: Optional[int] = None,
    model: str = "groupoid",
    window: Optional[int] = None,
) -> AbelianGroupPresentation:
    return stabilized_homology(system, degree, max_depth, model, window)[0]


# Index map


@dataclass(frozen=True)
class IndexValue:
    """Index of a full group element.

    `coordinates` is the class of 1_U in the stabilized H₁ of the groupoid complex,
    `level` the level of that presentation. `vector` is the transfer cocycle of 1_U
    read on first-symbol cylinders, an element of ker(I − Aᵗ) ⊂ ℤⁿ; it equals the
    shift coefficients of the groupoid class."""

    vector: Tuple[int, ...]
    coordinates: Tuple[int, ...]
    level: int

    @property
    def is_zero(self) -> bool:
        return not any(self.vector)

    def to_dict(self) -> dict:
        return {"vector": list(self.vector), "coordinates": list(self.coordinates), "level": self.level}


def matched_pairs(system: SftSystem, tableau: Tableau) -> List[Tuple[Word, Word]]:
    """The pairs of a tableau, split once where the last symbols differ"""
    pairs = []
    for p in tableau.pairs:
        if p.mu[-1] == p.nu[-1]:
            pairs.append((p.mu, p.nu))
        else:
            pairs.extend((p.mu + (b,), p.nu + (b,)) for b in system.successors(p.nu[-1]))
    return pairs


def _index_vector(system: SftSystem, pairs: Sequence[Tuple[Word, Word]]) -> Tuple[int, ...]:
    """Φ(1_U) read on the depth-one cylinders, after checking it is closed"""

    depth = max(max(len(mu), len(nu)) for mu, nu in pairs)
    index = system.word_index(depth)

    boundary: Dict[int, int] = {}
    for mu, nu in pairs:
        _cylinder_vector(system, nu, depth, index, boundary, 1)
        _cylinder_vector(system, mu, depth, index, boundary, -1)
    if boundary:
        raise InvalidTableau("The tableau is not a cycle: δ₁(1_U) does not vanish")

    values: Dict[int, int] = {}
    for mu, nu in pairs:
        for i in range(len(mu)):
            _cylinder_vector(system, mu[i:], depth, index, values, 1)
        for j in range(len(nu)):
            _cylinder_vector(system, nu[j:], depth, index, values, -1)
    vector = tuple(values.get(index[system.extensions((a,), depth)[0]], 0) for a in system.symbols)
    for w, i in index.items():
        if values.get(i, 0) != vector[w[0] - 1]:
            raise RuntimeError("Index cocycle is not constant on first-symbol cylinders")
    return vector


def _index_value(system: SftSystem, levels: HomologyLevels, stable: int, tableau: Tableau) -> IndexValue:
    pairs = matched_pairs(system, tableau)
    vector = _index_vector(system, pairs)
    at = max(max(max(len(mu), len(nu)) for mu, nu in pairs) - 2, 0)
    levels.build(at + 1)
    truncation = reduced_truncation(system, at + 1)
    cycle = truncation.chain_vector(pairs)
    if any(truncation.d1.apply(cycle)):
        raise InvalidTableau("The tableau is not a cycle: δ₁(1_U) does not vanish")
    shifts = truncation.shift_coefficients(cycle)
    if shifts != vector:
        raise RuntimeError(f"Groupoid class with shifts {list(shifts)} disagrees with the transfer cocycle {list(vector)}")
    coordinates = levels.transport(reduce_element(levels.groups[at], cycle), at, stable)
    return IndexValue(vector, coordinates, stable)


def index_of(system: SftSystem, tableau: Tableau, max_depth: Optional[int] = None, window: Optional[int] = None) -> IndexValue:
    """The index [1_U] ∈ H₁ of the element given by a tableau"""

    require_valid(system, tableau)
    _, stable = stabilized_homology(system, 1, max_depth, "groupoid", window)
    return _index_value(system, homology_levels(system, 1, "groupoid"), stable, tableau)


def clopen_partitions(system: SftSystem, max_parts: int, max_depth: int) -> List[Tuple[Word, ...]]:
    """All partitions of the shift space into at most max_parts cylinders of bounded depth"""
    start = tuple(sorted((a,) for a in system.symbols))
    if len(start) > max_parts:
        return []
    seen = {start}
    frontier = [start]
    while frontier:
        partition = frontier.pop()
        for w in partition:
            if len(w) >= max_depth:
                continue
            split = tuple(sorted([v for v in partition if v != w] + list(system.extensions(w, len(w) + 1))))
            if len(split) <= max_parts and split not in seen:
                seen.add(split)
                frontier.append(split)
    return sorted(seen, key=lambda p: (len(p), sum(len(w) for w in p), p))


def enumerate_tableaux(system: SftSystem, max_pairs: int, max_depth: int) -> List[Tableau]:
    """Valid tableaux ordered by pair count, total length, then words"""

    partitions = clopen_partitions(system, max_pairs, max_depth)
    followers = sorted({system.successors(a) for a in system.symbols})
    candidates = []
    for sources, ranges in product(partitions, repeat=2):
        if len(sources) != len(ranges):
            continue
        by_followers_nu = {f: [w for w in sources if system.successors(w[-1]) == f] for f in followers}
        by_followers_mu = {f: [w for w in ranges if system.successors(w[-1]) == f] for f in followers}
        if any(len(by_followers_nu[f]) != len(by_followers_mu[f]) for f in followers):
            continue
        choices = [list(permutations(by_followers_mu[f])) for f in followers]
        for choice in product(*choices):
            pairs = []
            for f, mus in zip(followers, choice):
                pairs.extend(zip(mus, by_followers_nu[f]))
            candidates.append(Tableau.from_words(pairs).sorted())
    candidates.sort(key=lambda t: (len(t.pairs), t.total_length, [(p.nu, p.mu) for p in t.pairs]))
    return candidates


def find_with_index(
    system: SftSystem,
    target: Sequence[int],
    budget: Optional[int] = None,
    max_pairs: int = 4,
    max_depth: int = 2,
    window: Optional[int] = None,
) -> Tableau:
    """A tableau whose index has the target coordinates, by bounded enumeration"""

    if budget is None:
        budget = get_setting("ETALE_DEFAULT_BUDGET")
    group, stable = stabilized_homology(system, 1, None, "groupoid", window)
    if len(target) != group.generator_count:
        raise DimensionMismatch(f"Target has {len(target)} coordinates, H₁ has {group.generator_count} generators")
    target = tuple(target)
    levels = homology_levels(system, 1, "groupoid")
    for n, tableau in enumerate(enumerate_tableaux(system, max_pairs, max_depth)):
        if n >= budget:
            break
        if _index_value(system, levels, stable, tableau).coordinates == target:
            logger.debug(f"Found {tableau} after {n + 1} candidates")
            return tableau
    raise NotFound(f"No tableau with index {list(target)} among {budget} candidates")


# The lag-zero core


def af_core_diagram(system: SftSystem) -> BratteliDiagram:
    """Bratteli diagram of the lag-zero subgroupoid: the root reaches every symbol, then A repeats"""
    return BratteliDiagram((IntMatrix.from_rows([[1] * system.n]), system.matrix))


def word_path(word: Word) -> Tuple[Tuple[int, int], ...]:
    return tuple((a - 1, 0) for a in word)


def lag_zero_path_tableau(system: SftSystem, tableau: Tableau) -> PathTableau:
    """Re-encodes a lag-zero tableau as a path tableau on the core diagram"""
    require_valid(system, tableau)
    if not tableau.is_lag_zero:
        raise DomainViolation("The tableau has pairs with nonzero lag")
    return PathTableau(tuple((word_path(mu), word_path(nu)) for mu, nu in matched_pairs(system, tableau)))
