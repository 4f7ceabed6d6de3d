"""Exact integer linear algebra.

Smith normal form with unimodular witnesses, kernel and cokernel presentations,
integer solving, homology of integer chain complexes and stabilization of directed
systems of finitely generated abelian groups. All values are immutable; matrices are
stored sparsely with Python integers (arbitrary precision)."""

from dataclasses import dataclass, field
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix

from .conf import get_setting
from .exceptions import DimensionMismatch, Unstabilized
from .logging import logger

Vector = Tuple[int, ...]


class IntMatrix:
    """An immutable integer matrix, stored as a dict of nonzero rows."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Optional[Dict[int, Dict[int, int]]] = None):
        if rows < 0 or cols < 0:
            raise DimensionMismatch(f"Invalid shape {rows}x{cols}")
        clean = {}
        for i, row in (data or {}).items():
            if not 0 <= i < rows:
                raise DimensionMismatch(f"Row {i} outside of a {rows}x{cols} matrix")
            kept = {}
            for j, value in row.items():
                if not 0 <= j < cols:
                    raise DimensionMismatch(f"Column {j} outside of a {rows}x{cols} matrix")
                if value:
                    kept[j] = int(value)
            if kept:
                clean[i] = kept
        self.rows = rows
        self.cols = cols
        self._data = clean

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "IntMatrix":
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for row in rows:
            if len(row) != cols:
                raise DimensionMismatch("Rows of unequal length")
        return cls(len(rows), cols, {i: dict(enumerate(row)) for i, row in enumerate(rows)})

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "IntMatrix":
        data: Dict[int, Dict[int, int]] = {}
        for j, column in enumerate(columns):
            if len(column) != rows:
                raise DimensionMismatch("Column of wrong length")
            for i, value in enumerate(column):
                if value:
                    data.setdefault(i, {})[j] = value
        return cls(rows, len(columns), data)

    @classmethod
    def from_sparse_columns(cls, columns: Sequence[Dict[int, int]], rows: int) -> "IntMatrix":
        data: Dict[int, Dict[int, int]] = {}
        for j, column in enumerate(columns):
            for i, value in column.items():
                if value:
                    data.setdefault(i, {})[j] = value
        return cls(rows, len(columns), data)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, {i: {i: 1} for i in range(n)})

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols)

    @classmethod
    def diagonal(cls, values: Sequence[int], rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, {i: {i: v} for i, v in enumerate(values)})

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def entries(self) -> Tuple[int, ...]:
        """All entries in row-major order"""
        return tuple(self[i, j] for i in range(self.rows) for j in range(self.cols))

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return self._data.get(i, {}).get(j, 0)

    def items(self) -> Iterable[Tuple[int, int, int]]:
        for i, row in self._data.items():
            for j, value in row.items():
                yield i, j, value

    def nnz(self) -> int:
        return sum(len(row) for row in self._data.values())

    def sparse_rows(self) -> Dict[int, Dict[int, int]]:
        return {i: dict(row) for i, row in self._data.items()}

    def to_rows(self) -> List[List[int]]:
        return [[self[i, j] for j in range(self.cols)] for i in range(self.rows)]

    def row(self, i: int) -> Vector:
        return tuple(self[i, j] for j in range(self.cols))

    def column(self, j: int) -> Vector:
        return tuple(self[i, j] for i in range(self.rows))

    def columns(self) -> List[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def is_zero(self) -> bool:
        return not self._data

    def transpose(self) -> "IntMatrix":
        data: Dict[int, Dict[int, int]] = {}
        for i, j, value in self.items():
            data.setdefault(j, {})[i] = value
        return IntMatrix(self.cols, self.rows, data)

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise DimensionMismatch(f"Cannot stack {self.shape} with {other.shape}")
        data = self.sparse_rows()
        for i, j, value in other.items():
            data.setdefault(i, {})[self.cols + j] = value
        return IntMatrix(self.rows, self.cols + other.cols, data)

    def select_columns(self, indices: Sequence[int]) -> "IntMatrix":
        position = {j: k for k, j in enumerate(indices)}
        data: Dict[int, Dict[int, int]] = {}
        for i, j, value in self.items():
            if j in position:
                data.setdefault(i, {})[position[j]] = value
        return IntMatrix(self.rows, len(indices), data)

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, {i: {j: -v for j, v in row.items()} for i, row in self._data.items()})

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"Cannot add {self.shape} and {other.shape}")
        data = self.sparse_rows()
        for i, j, value in other.items():
            row = data.setdefault(i, {})
            row[j] = row.get(j, 0) + value
        return IntMatrix(self.rows, self.cols, data)

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + (-other)

    def to_domain_matrix(self) -> DomainMatrix:
        rep = {i: {j: ZZ(v) for j, v in row.items()} for i, row in self._data.items()}
        return DomainMatrix(rep, self.shape, ZZ)

    @classmethod
    def from_domain_matrix(cls, matrix: DomainMatrix) -> "IntMatrix":
        rows, cols = matrix.shape
        sdm = matrix.to_sparse().rep
        return cls(rows, cols, {i: {j: int(v) for j, v in row.items()} for i, row in sdm.items()})

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"Cannot multiply {self.shape} by {other.shape}")
        if self.is_zero() or other.is_zero():
            return IntMatrix.zeros(self.rows, other.cols)
        return IntMatrix.from_domain_matrix(self.to_domain_matrix() * other.to_domain_matrix())

    def apply(self, vector: Sequence[int]) -> Vector:
        """The product of this matrix with an integer column vector"""
        if len(vector) != self.cols:
            raise DimensionMismatch(f"Vector of length {len(vector)} for a matrix with {self.cols} columns")
        out = [0] * self.rows
        for i, row in self._data.items():
            out[i] = sum(value * vector[j] for j, value in row.items())
        return tuple(out)

    def determinant(self) -> int:
        if self.rows != self.cols:
            raise DimensionMismatch("Determinant of a non-square matrix")
        if self.rows == 0:
            return 1
        return int(self.to_domain_matrix().to_dense().det())

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.shape, tuple(sorted(self.items()))))

    def __repr__(self) -> str:
        return f"IntMatrix({self.rows}x{self.cols}, {self.to_rows() if self.rows * self.cols <= 64 else '...'})"


@dataclass(frozen=True)
class BasisWitness:
    """Change of basis from ambient coordinates to canonical coordinates.

    `projection` maps an ambient vector to unreduced canonical coordinates, `moduli`
    holds the invariant factor of each canonical coordinate (0 for free coordinates)
    and `generators` holds, column by column, an ambient representative of each
    canonical generator."""

    projection: IntMatrix
    generators: IntMatrix
    moduli: Tuple[int, ...]

    @property
    def ambient_dimension(self) -> int:
        return self.projection.cols


@dataclass(frozen=True)
class AbelianGroupPresentation:
    torsion: Tuple[int, ...] = ()
    free_rank: int = 0
    basis_witness: Optional[BasisWitness] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for d in self.torsion:
            if d < 2:
                raise ValueError(f"Invariant factor {d} is not >= 2")
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValueError(f"Invariant factors {self.torsion} break the divisibility chain")

    @property
    def generator_count(self) -> int:
        return len(self.torsion) + self.free_rank

    @property
    def is_trivial(self) -> bool:
        return not self.torsion and not self.free_rank

    @property
    def order(self) -> Optional[int]:
        """The order of a finite group, None for infinite groups"""
        if self.free_rank:
            return None
        order = 1
        for d in self.torsion:
            order *= d
        return order

    @property
    def moduli(self) -> Tuple[int, ...]:
        return self.torsion + (0,) * self.free_rank

    def generator(self, k: int) -> Vector:
        """Ambient representative of the k-th canonical generator"""
        return self.basis_witness.generators.column(k)

    def to_dict(self) -> dict:
        return {"torsion": list(self.torsion), "free_rank": self.free_rank}

    @classmethod
    def from_dict(cls, data: dict) -> "AbelianGroupPresentation":
        return cls(tuple(data.get("torsion", ())), int(data.get("free_rank", 0)))

    def __str__(self) -> str:
        parts = [f"ℤ/{d}ℤ" for d in self.torsion]
        if self.free_rank == 1:
            parts.append("ℤ")
        elif self.free_rank > 1:
            parts.append(f"ℤ^{self.free_rank}")
        return " ⊕ ".join(parts) if parts else "0"


@dataclass(frozen=True)
class DirectedGroupSystem:
    groups: Tuple[AbelianGroupPresentation, ...]
    connecting_maps: Tuple[IntMatrix, ...]

    def __post_init__(self):
        if len(self.connecting_maps) != max(len(self.groups) - 1, 0):
            raise DimensionMismatch(f"{len(self.groups)} groups need {len(self.groups) - 1} maps")
        for k, matrix in enumerate(self.connecting_maps):
            expected = (self.groups[k + 1].generator_count, self.groups[k].generator_count)
            if matrix.shape != expected:
                raise DimensionMismatch(f"Map {k} has shape {matrix.shape}, expected {expected}")


@dataclass(frozen=True)
class SmithDecomposition:
    """P·M·Q = diag(diagonal), plus the inverses of P and Q.

    Transforms are kept as sparse rows (P, Q^-1) or sparse columns (P^-1, Q), already
    permuted into the final order."""

    rows: int
    cols: int
    diagonal: Tuple[int, ...]
    p_rows: Tuple[Dict[int, int], ...]
    p_inverse_columns: Tuple[Dict[int, int], ...]
    q_columns: Tuple[Dict[int, int], ...]
    q_inverse_rows: Tuple[Dict[int, int], ...]

    @property
    def rank(self) -> int:
        return len(self.diagonal)

    @property
    def S(self) -> IntMatrix:
        return IntMatrix.diagonal(self.diagonal, self.rows, self.cols)

    @property
    def P(self) -> IntMatrix:
        return IntMatrix(self.rows, self.rows, dict(enumerate(self.p_rows)))

    @property
    def Q(self) -> IntMatrix:
        return IntMatrix.from_sparse_columns(self.q_columns, self.cols)

    @property
    def P_inverse(self) -> IntMatrix:
        return IntMatrix.from_sparse_columns(self.p_inverse_columns, self.rows)

    @property
    def Q_inverse(self) -> IntMatrix:
        return IntMatrix(self.cols, self.cols, dict(enumerate(self.q_inverse_rows)))


def _extended_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """Returns (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0"""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        return -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _nearest_quotient(a: int, p: int) -> int:
    """Quotient q such that |a - q*p| <= |p|/2"""
    q, r = divmod(a, p)
    if 2 * abs(r) > abs(p):
        q += 1
    return q


def _axpy(target: Dict[int, int], source: Dict[int, int], c: int):
    """target += c * source, in place, on sparse vectors"""
    for k, value in source.items():
        new = target.get(k, 0) + c * value
        if new:
            target[k] = new
        else:
            target.pop(k, None)


class _SmithReduction:
    """Mutable working state of a Smith normal form computation"""

    def __init__(self, matrix: IntMatrix, track: bool):
        self.n_rows, self.n_cols = matrix.shape
        self.track = track
        # sparsest rows first
        self.a_rows: Dict[int, Dict[int, int]] = dict(sorted(matrix.sparse_rows().items(), key=lambda item: len(item[1])))
        self.a_cols: Dict[int, set] = {}
        for i, row in self.a_rows.items():
            for j in row:
                self.a_cols.setdefault(j, set()).add(i)
        if track:
            self.p = {i: {i: 1} for i in range(self.n_rows)}
            self.p_inv = {i: {i: 1} for i in range(self.n_rows)}
            self.q = {j: {j: 1} for j in range(self.n_cols)}
            self.q_inv = {j: {j: 1} for j in range(self.n_cols)}
        self.pivots: List[List[int]] = []  # [row, col, value]

    # elementary operations, mirrored on the transforms

    def add_row(self, target: int, source: int, c: int):
        row_t = self.a_rows.setdefault(target, {})
        for j, value in self.a_rows.get(source, {}).items():
            new = row_t.get(j, 0) + c * value
            if new:
                row_t[j] = new
                self.a_cols.setdefault(j, set()).add(target)
            else:
                row_t.pop(j, None)
                self.a_cols[j].discard(target)
        if self.track:
            _axpy(self.p[target], self.p[source], c)
            _axpy(self.p_inv[source], self.p_inv[target], -c)

    def add_col(self, target: int, source: int, c: int):
        for i in list(self.a_cols.get(source, ())):
            value = self.a_rows[i][source]
            row = self.a_rows[i]
            new = row.get(target, 0) + c * value
            if new:
                row[target] = new
                self.a_cols.setdefault(target, set()).add(i)
            else:
                row.pop(target, None)
                self.a_cols[target].discard(i)
        if self.track:
            _axpy(self.q[target], self.q[source], c)
            _axpy(self.q_inv[source], self.q_inv[target], -c)

    def choose_pivot(self) -> Optional[Tuple[int, int]]:
        """Smallest absolute value first, then least Markowitz fill, then position"""
        best = None
        best_key = None
        for i, row in self.a_rows.items():
            row_weight = len(row) - 1
            for j, value in row.items():
                key = (abs(value), row_weight * (len(self.a_cols[j]) - 1))
                if best_key is None or key < best_key:
                    best, best_key = (i, j), key
                    if key == (1, 0):
                        return best
        return best

    def eliminate(self):
        while True:
            pivot = self.choose_pivot()
            if pivot is None:
                return
            i, j = pivot
            p = self.a_rows[i][j]
            clean = True
            for r in list(self.a_cols[j]):
                if r == i:
                    continue
                q = _nearest_quotient(self.a_rows[r][j], p)
                if q:
                    self.add_row(r, i, -q)
                if self.a_rows[r].get(j):
                    clean = False
            for c in list(self.a_rows[i]):
                if c == j:
                    continue
                q = _nearest_quotient(self.a_rows[i][c], p)
                if q:
                    self.add_col(c, j, -q)
                if self.a_rows[i].get(c):
                    clean = False
            if clean:
                self.pivots.append([i, j, p])
                del self.a_rows[i]
                del self.a_cols[j]

    def make_positive(self):
        for pivot in self.pivots:
            i, _, value = pivot
            if value < 0:
                pivot[2] = -value
                if self.track:
                    self.p[i] = {k: -v for k, v in self.p[i].items()}
                    self.p_inv[i] = {k: -v for k, v in self.p_inv[i].items()}

    def fix_divisibility(self):
        """Replaces diagonal pairs (a, b) with a not dividing b by (gcd, lcm)"""
        units = [p for p in self.pivots if p[2] == 1]
        others = [p for p in self.pivots if p[2] != 1]
        for x in range(len(others)):
            for y in range(x + 1, len(others)):
                first, second = others[x], others[y]
                a, b = first[2], second[2]
                if b % a == 0:
                    continue
                g, s, t = _extended_gcd(a, b)
                if self.track:
                    i1, j1 = first[0], first[1]
                    i2, j2 = second[0], second[1]
                    # col j1 += col j2
                    _axpy(self.q[j1], self.q[j2], 1)
                    _axpy(self.q_inv[j2], self.q_inv[j1], -1)
                    # rows (i1, i2) <- [[s, t], [-b/g, a/g]] (i1, i2)
                    u, v = -b // g, a // g
                    row1, row2 = self.p[i1], self.p[i2]
                    new1, new2 = {}, {}
                    _axpy(new1, row1, s)
                    _axpy(new1, row2, t)
                    _axpy(new2, row1, u)
                    _axpy(new2, row2, v)
                    self.p[i1], self.p[i2] = new1, new2
                    col1, col2 = self.p_inv[i1], self.p_inv[i2]
                    inv1, inv2 = {}, {}
                    _axpy(inv1, col1, v)
                    _axpy(inv1, col2, -u)
                    _axpy(inv2, col1, -t)
                    _axpy(inv2, col2, s)
                    self.p_inv[i1], self.p_inv[i2] = inv1, inv2
                    # col j2 -= (t*b/g) col j1
                    c = -(t * b // g)
                    _axpy(self.q[j2], self.q[j1], c)
                    _axpy(self.q_inv[j1], self.q_inv[j2], -c)
                first[2], second[2] = g, a * b // g
        self.pivots = units + others

    def result(self) -> SmithDecomposition:
        pivot_rows = [p[0] for p in self.pivots]
        pivot_cols = [p[1] for p in self.pivots]
        taken_rows, taken_cols = set(pivot_rows), set(pivot_cols)
        row_order = pivot_rows + [i for i in range(self.n_rows) if i not in taken_rows]
        col_order = pivot_cols + [j for j in range(self.n_cols) if j not in taken_cols]
        if self.track:
            p_rows = tuple(self.p[i] for i in row_order)
            p_inv = tuple(self.p_inv[i] for i in row_order)
            q_cols = tuple(self.q[j] for j in col_order)
            q_inv = tuple(self.q_inv[j] for j in col_order)
        else:
            p_rows = p_inv = q_cols = q_inv = ()
        return SmithDecomposition(
            rows=self.n_rows,
            cols=self.n_cols,
            diagonal=tuple(p[2] for p in self.pivots),
            p_rows=p_rows,
            p_inverse_columns=p_inv,
            q_columns=q_cols,
            q_inverse_rows=q_inv,
        )


def smith_decomposition(matrix: IntMatrix, track: bool = True) -> SmithDecomposition:
    """Computes the Smith normal form; `track=False` skips the transforms"""

    logger.debug(f"Smith normal form of a {matrix.rows}x{matrix.cols} matrix ({matrix.nnz()} nonzeros)")
    reduction = _SmithReduction(matrix, track)
    reduction.eliminate()
    reduction.make_positive()
    reduction.fix_divisibility()
    return reduction.result()


def smith_normal_form(matrix: IntMatrix) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Returns (S, P, Q) with P·M·Q = S, P and Q unimodular and S diagonal with d_i | d_i+1"""
    decomposition = smith_decomposition(matrix)
    return decomposition.S, decomposition.P, decomposition.Q


def invariant_factors(matrix: IntMatrix) -> Tuple[int, ...]:
    return smith_decomposition(matrix, track=False).diagonal


def rank(matrix: IntMatrix) -> int:
    return len(invariant_factors(matrix))


def _sparse_dot(row: Dict[int, int], vector: Sequence[int]) -> int:
    return sum(value * vector[k] for k, value in row.items())


def _presentation_from_decomposition(decomposition: SmithDecomposition) -> AbelianGroupPresentation:
    r = decomposition.rank
    indices = [k for k in range(r) if decomposition.diagonal[k] > 1]
    indices += list(range(r, decomposition.rows))
    torsion = tuple(decomposition.diagonal[k] for k in range(r) if decomposition.diagonal[k] > 1)
    witness = BasisWitness(
        projection=IntMatrix(
            len(indices), decomposition.rows, {n: decomposition.p_rows[k] for n, k in enumerate(indices)}
        ),
        generators=IntMatrix.from_sparse_columns(
            [decomposition.p_inverse_columns[k] for k in indices], decomposition.rows
        ),
        moduli=torsion + (0,) * (decomposition.rows - r),
    )
    return AbelianGroupPresentation(torsion, decomposition.rows - r, witness)


def cokernel_presentation(matrix: IntMatrix) -> AbelianGroupPresentation:
    """Presentation of ℤ^rows / column-span(M)"""
    return _presentation_from_decomposition(smith_decomposition(matrix))


def kernel_basis(matrix: IntMatrix) -> List[Vector]:
    """A basis of the integer kernel; it spans a saturated sublattice"""
    decomposition = smith_decomposition(matrix)
    basis = []
    for k in range(decomposition.rank, matrix.cols):
        column = decomposition.q_columns[k]
        basis.append(tuple(column.get(j, 0) for j in range(matrix.cols)))
    return basis


def solve_integer(matrix: IntMatrix, b: Sequence[int]) -> Optional[Vector]:
    """Some x with M·x = b over the integers, or None if there is none"""
    if len(b) != matrix.rows:
        raise DimensionMismatch(f"Right hand side of length {len(b)} for {matrix.rows} rows")
    decomposition = smith_decomposition(matrix)
    c = [_sparse_dot(row, b) for row in decomposition.p_rows]
    x = [0] * matrix.cols
    for k, d in enumerate(decomposition.diagonal):
        if c[k] % d:
            return None
        for j, value in decomposition.q_columns[k].items():
            x[j] += value * (c[k] // d)
    if any(c[decomposition.rank :]):
        return None
    return tuple(x)


def reduce_element(group: AbelianGroupPresentation, v: Sequence[int]) -> Vector:
    """Canonical coordinates of an ambient vector"""
    witness = group.basis_witness
    if witness is None:
        raise ValueError("The presentation carries no basis witness")
    if len(v) != witness.ambient_dimension:
        raise DimensionMismatch(f"Vector of length {len(v)} for an ambient group of rank {witness.ambient_dimension}")
    raw = witness.projection.apply(v)
    return tuple(x % d if d else x for x, d in zip(raw, witness.moduli))


def homology_presentation(d_out: Optional[IntMatrix], d_in: Optional[IntMatrix], dimension: int) -> AbelianGroupPresentation:
    """ker(d_out) / Im(d_in) on a free group of the given rank.

    The witness maps cycles (ambient vectors in ker d_out) to canonical coordinates."""

    if d_out is None or d_out.is_zero():
        kernel_projection = IntMatrix.identity(dimension)
        kernel_columns = IntMatrix.identity(dimension)
    else:
        if d_out.cols != dimension:
            raise DimensionMismatch(f"Outgoing boundary has {d_out.cols} columns, expected {dimension}")
        decomposition = smith_decomposition(d_out)
        r = decomposition.rank
        kernel_projection = IntMatrix(
            dimension - r, dimension, {n: decomposition.q_inverse_rows[k] for n, k in enumerate(range(r, dimension))}
        )
        kernel_columns = IntMatrix.from_sparse_columns(decomposition.q_columns[r:], dimension)
    if d_in is None:
        d_in = IntMatrix.zeros(dimension, 0)
    if d_in.rows != dimension:
        raise DimensionMismatch(f"Incoming boundary has {d_in.rows} rows, expected {dimension}")
    relations = kernel_projection @ d_in
    quotient = cokernel_presentation(relations)
    witness = quotient.basis_witness
    return AbelianGroupPresentation(
        quotient.torsion,
        quotient.free_rank,
        BasisWitness(
            projection=witness.projection @ kernel_projection,
            generators=kernel_columns @ witness.generators,
            moduli=witness.moduli,
        ),
    )


def induced_map(source: AbelianGroupPresentation, target: AbelianGroupPresentation, ambient_map: IntMatrix) -> IntMatrix:
    """Matrix, on canonical coordinates, of the homomorphism induced by an ambient map"""
    columns = []
    for k in range(source.generator_count):
        image = ambient_map.apply(source.generator(k))
        columns.append(reduce_element(target, image))
    return IntMatrix.from_columns(columns, target.generator_count)


def is_isomorphism(source: AbelianGroupPresentation, target: AbelianGroupPresentation, matrix: IntMatrix) -> bool:
    """Whether a map given on canonical coordinates is an isomorphism.

    Finitely generated abelian groups are Hopfian, so between isomorphic groups it is
    enough to check surjectivity."""

    if source != target:
        return False
    relations = IntMatrix.diagonal(target.moduli, target.generator_count, target.generator_count)
    return cokernel_presentation(matrix.hstack(relations)).is_trivial


def colimit_stabilize(system: DirectedGroupSystem, window: Optional[int] = None) -> Tuple[AbelianGroupPresentation, int]:
    """The common group once `window` consecutive connecting maps are isomorphisms"""

    if window is None:
        window = get_setting("ETALE_STABILIZATION_WINDOW")
    groups, maps = system.groups, system.connecting_maps
    if len(groups) < window + 1:
        raise Unstabilized(f"Need {window + 1} stages, got {len(groups)}", levels=len(groups))
    isomorphic = [is_isomorphism(groups[k], groups[k + 1], maps[k]) for k in range(len(maps))]
    for level in range(len(maps) - window + 1):
        if all(isomorphic[level : level + window]):
            logger.debug(f"Directed system stabilized at level {level} on {groups[level]}")
            return groups[level], level
    raise Unstabilized(f"No window of {window} isomorphisms within {len(groups)} stages", levels=len(groups))
