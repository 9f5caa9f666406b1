"""Exact integer and rational linear algebra.

Everything here is computed over Z (or Q where annihilators need it) with
arbitrary-precision arithmetic: Smith normal forms with recorded unimodular
transforms, determinants, cokernels as finitely generated abelian groups,
integer linear system solving with verified witnesses, kernel lattice bases,
and rational image annihilators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import prod


class DimensionError(ValueError):
    """Operands have incompatible dimensions."""


class IntMatrix:
    """Dense matrix of arbitrary-precision integers, row-major and immutable.

    Empty matrices (zero rows and/or zero columns) are first-class values;
    they stand in for empty block rows and columns of blocked matrices.
    """

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows, cols, entries):
        if rows < 0 or cols < 0:
            raise DimensionError("negative matrix dimension")
        entries = tuple(entries)
        if len(entries) != rows * cols:
            raise DimensionError(
                f"entry count {len(entries)} != {rows}x{cols}"
            )
        for e in entries:
            if not isinstance(e, int):
                raise TypeError(f"non-integer entry {e!r}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("IntMatrix is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rows(cls, rows_list):
        rows = len(rows_list)
        cols = len(rows_list[0]) if rows else 0
        for row in rows_list:
            if len(row) != cols:
                raise DimensionError("ragged rows")
        return cls(rows, cols, [e for row in rows_list for e in row])

    @classmethod
    def identity(cls, n):
        return cls(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])

    @classmethod
    def zero(cls, rows, cols):
        return cls(rows, cols, [0] * (rows * cols))

    @classmethod
    def column(cls, values):
        values = list(values)
        return cls(len(values), 1, values)

    @classmethod
    def diagonal(cls, values):
        values = list(values)
        n = len(values)
        return cls(n, n, [values[i] if i == j else 0 for i in range(n) for j in range(n)])

    # -- accessors ---------------------------------------------------------

    def __getitem__(self, ij):
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return self.entries[i * self.cols + j]

    def row(self, i):
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_rows(self):
        return [list(self.row(i)) for i in range(self.rows)]

    def column_values(self, j):
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def submatrix(self, row_idx, col_idx):
        """Submatrix on the given row/column index sequences (order kept)."""
        row_idx = list(row_idx)
        col_idx = list(col_idx)
        ent = []
        for i in row_idx:
            base = i * self.cols
            for j in col_idx:
                ent.append(self.entries[base + j])
        return IntMatrix(len(row_idx), len(col_idx), ent)

    # -- algebra -----------------------------------------------------------

    def __mul__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionError(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        from . import _kernels

        ent = _kernels.mat_mul(self.rows, self.cols, self.entries, other.cols, other.entries)
        return IntMatrix(self.rows, other.cols, ent)

    def __add__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionError("shape mismatch in addition")
        return IntMatrix(
            self.rows, self.cols, [a + b for a, b in zip(self.entries, other.entries)]
        )

    def __sub__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionError("shape mismatch in subtraction")
        return IntMatrix(
            self.rows, self.cols, [a - b for a, b in zip(self.entries, other.entries)]
        )

    def __neg__(self):
        return IntMatrix(self.rows, self.cols, [-a for a in self.entries])

    def transpose(self):
        return IntMatrix(
            self.cols,
            self.rows,
            [self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)],
        )

    def hstack(self, other):
        if self.rows != other.rows:
            raise DimensionError("row mismatch in hstack")
        ent = []
        for i in range(self.rows):
            ent.extend(self.row(i))
            ent.extend(other.row(i))
        return IntMatrix(self.rows, self.cols + other.cols, ent)

    def is_zero(self):
        return all(e == 0 for e in self.entries)

    # -- hashing / comparison / display -------------------------------------

    def __eq__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self):
        return f"IntMatrix({self.rows}x{self.cols}, {self.to_rows()})"


class QMatrix:
    """Dense matrix of exact rationals (fractions.Fraction entries)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows, cols, entries):
        entries = tuple(Fraction(e) for e in entries)
        if len(entries) != rows * cols:
            raise DimensionError("entry count mismatch")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("QMatrix is immutable")

    @classmethod
    def from_int_matrix(cls, m):
        return cls(m.rows, m.cols, m.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def mul_int(self, other):
        """Exact product with an IntMatrix on the right."""
        if self.cols != other.rows:
            raise DimensionError("dimension mismatch")
        out = []
        for i in range(self.rows):
            base = i * self.cols
            for j in range(other.cols):
                acc = Fraction(0)
                for k in range(self.cols):
                    acc += self.entries[base + k] * other.entries[k * other.cols + j]
                out.append(acc)
        return QMatrix(self.rows, other.cols, out)

    def is_zero(self):
        return all(e == 0 for e in self.entries)

    def __eq__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self):
        rows = [
            [str(self.entries[i * self.cols + j]) for j in range(self.cols)]
            for i in range(self.rows)
        ]
        return f"QMatrix({self.rows}x{self.cols}, {rows})"


@dataclass(frozen=True)
class SmithDecomposition:
    """U*A*V = S with U, V unimodular and S diagonal with a divisibility chain."""

    U: IntMatrix
    S: IntMatrix
    V: IntMatrix

    def diagonal(self):
        n = min(self.S.rows, self.S.cols)
        return tuple(self.S[i, i] for i in range(n))

    @property
    def rank(self):
        return sum(1 for d in self.diagonal() if d != 0)


@dataclass(frozen=True)
class FgAbelianGroup:
    """Finitely generated abelian group: Z^free_rank + Z/d1 + ... + Z/dk.

    Invariant factors satisfy 2 <= d1 | d2 | ... | dk.  Equality compares the
    isomorphism class only; the optional presentation (a matrix whose cokernel
    this group is) rides along uncompared.
    """

    free_rank: int
    torsion: tuple[int, ...] = ()
    presentation: IntMatrix | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        object.__setattr__(self, "torsion", tuple(self.torsion))
        prev = None
        for d in self.torsion:
            if d < 2:
                raise ValueError(f"invariant factor {d} < 2")
            if prev is not None and d % prev != 0:
                raise ValueError(f"broken divisibility chain {self.torsion}")
            prev = d

    def iso_class(self):
        return (self.free_rank, self.torsion)

    @property
    def is_finite(self):
        return self.free_rank == 0

    @property
    def is_trivial(self):
        return self.free_rank == 0 and not self.torsion

    def order(self):
        """Group order, or None when infinite."""
        if not self.is_finite:
            return None
        return prod(self.torsion) if self.torsion else 1

    def __str__(self):
        parts = ["Z"] * self.free_rank + [f"C{d}" for d in self.torsion]
        return " x ".join(parts) if parts else "trivial"


@dataclass(frozen=True)
class AnnihilatorMatrix:
    """Rational matrix M with M*C = 0 and ker M = im_Q(C) for the source C."""

    matrix: QMatrix
    source_cols: int


# ---------------------------------------------------------------------------
# Smith normal form


def _find_pivot(s, m, n, k):
    """Nonzero entry of minimal |value| in s[k:, k:], ties by (i, j)."""
    best = None
    best_abs = None
    for i in range(k, m):
        row = s[i]
        for j in range(k, n):
            v = row[j]
            if v:
                a = -v if v < 0 else v
                if best_abs is None or a < best_abs:
                    best = (i, j)
                    best_abs = a
                    if a == 1:
                        return best
    return best


def smith_normal_form(a: IntMatrix) -> SmithDecomposition:
    """Diagonalize a over Z: returns (U, S, V) with U*a*V = S.

    S is diagonal with s1 | s2 | ..., all si >= 0; U and V are unimodular.
    Pivoting always picks a nonzero entry of minimal absolute value to limit
    coefficient growth.  Deterministic for a fixed input.
    """
    m, n = a.rows, a.cols
    s = a.to_rows()
    u = IntMatrix.identity(m).to_rows()
    v = IntMatrix.identity(n).to_rows()

    k = 0
    limit = min(m, n)
    while k < limit:
        piv = _find_pivot(s, m, n, k)
        if piv is None:
            break
        pi, pj = piv
        if pi != k:
            s[k], s[pi] = s[pi], s[k]
            u[k], u[pi] = u[pi], u[k]
        if pj != k:
            for row in s:
                row[k], row[pj] = row[pj], row[k]
            for row in v:
                row[k], row[pj] = row[pj], row[k]

        while True:
            # Clear column k below the pivot; a nonzero remainder becomes the
            # new (strictly smaller) pivot.
            restart = False
            for i in range(k + 1, m):
                if s[i][k]:
                    q = s[i][k] // s[k][k]
                    if q:
                        srk = s[k]
                        sri = s[i]
                        for j in range(k, n):
                            sri[j] -= q * srk[j]
                        urk = u[k]
                        uri = u[i]
                        for j in range(m):
                            uri[j] -= q * urk[j]
                    if s[i][k]:
                        s[k], s[i] = s[i], s[k]
                        u[k], u[i] = u[i], u[k]
                        restart = True
                        break
            if restart:
                continue
            # Clear row k to the right of the pivot.
            for j in range(k + 1, n):
                if s[k][j]:
                    q = s[k][j] // s[k][k]
                    if q:
                        for row in s:
                            row[j] -= q * row[k]
                        for row in v:
                            row[j] -= q * row[k]
                    if s[k][j]:
                        for row in s:
                            row[k], row[j] = row[j], row[k]
                        for row in v:
                            row[k], row[j] = row[j], row[k]
                        restart = True
                        break
            if restart:
                continue
            if any(s[i][k] for i in range(k + 1, m)):
                continue
            # Pivot must divide every remaining entry for the chain to hold.
            offender = None
            pivot = s[k][k]
            for i in range(k + 1, m):
                row = s[i]
                for j in range(k + 1, n):
                    if row[j] % pivot:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            srk = s[k]
            sro = s[offender]
            for j in range(k, n):
                srk[j] += sro[j]
            urk = u[k]
            uro = u[offender]
            for j in range(m):
                urk[j] += uro[j]
        k += 1

    for d in range(limit):
        if s[d][d] < 0:
            for j in range(n):
                s[d][j] = -s[d][j]
            for j in range(m):
                u[d][j] = -u[d][j]

    return SmithDecomposition(
        IntMatrix.from_rows(u) if m else IntMatrix(0, 0, ()),
        IntMatrix.from_rows(s) if m else IntMatrix(0, n, ()),
        IntMatrix.from_rows(v) if n else IntMatrix(0, 0, ()),
    )


def determinant(a: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if a.rows != a.cols:
        raise DimensionError("determinant of a non-square matrix")
    n = a.rows
    if n == 0:
        return 1
    m = a.to_rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            pivot_row = next((i for i in range(k + 1, n) if m[i][k]), None)
            if pivot_row is None:
                return 0
            m[k], m[pivot_row] = m[pivot_row], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def rank(a: IntMatrix) -> int:
    return smith_normal_form(a).rank


def cokernel(a: IntMatrix) -> FgAbelianGroup:
    """cok(a) = Z^rows / im_Z(a), with the source kept as presentation."""
    dec = smith_normal_form(a)
    diag = dec.diagonal()
    torsion = tuple(d for d in diag if d >= 2)
    r = sum(1 for d in diag if d != 0)
    return FgAbelianGroup(a.rows - r, torsion, presentation=a)


def solve_integer(a: IntMatrix, b: IntMatrix) -> IntMatrix | None:
    """A column z with a*z = b over Z, or None when no integer solution exists.

    The returned solution is re-verified by exact multiplication.
    """
    if b.cols != 1:
        raise DimensionError("right-hand side must be a column")
    if a.rows != b.rows:
        raise DimensionError("row count mismatch")
    sol = solve_matrix(a, b)
    return None if sol is None else sol


def solve_matrix(a: IntMatrix, b: IntMatrix) -> IntMatrix | None:
    """Integer solution X of a*X = b (all columns at once), or None."""
    if a.rows != b.rows:
        raise DimensionError("row count mismatch")
    dec = smith_normal_form(a)
    diag = dec.diagonal()
    c = dec.U * b
    cols = []
    for jb in range(b.cols):
        w = [0] * a.cols
        ok = True
        for i in range(a.rows):
            ci = c[i, jb]
            if i < len(diag) and diag[i] != 0:
                if ci % diag[i]:
                    ok = False
                    break
                w[i] = ci // diag[i]
            elif ci != 0:
                ok = False
                break
        if not ok:
            return None
        cols.append(w)
    x_cols = IntMatrix(b.cols, a.cols, [e for col in cols for e in col]).transpose()
    x = dec.V * x_cols
    if a * x != b:  # pragma: no cover - exactness guard
        raise AssertionError("solver produced an unverified solution")
    return x


def kernel_basis(a: IntMatrix) -> IntMatrix:
    """Columns forming a basis of the integer kernel lattice of a."""
    dec = smith_normal_form(a)
    diag = dec.diagonal()
    free_cols = [j for j in range(a.cols) if j >= len(diag) or diag[j] == 0]
    basis = dec.V.submatrix(range(a.cols), free_cols)
    if not (a * basis).is_zero():  # pragma: no cover - exactness guard
        raise AssertionError("kernel basis does not annihilate")
    return basis


def column_lattice_basis(a: IntMatrix) -> IntMatrix:
    """A basis (as columns) of the lattice generated by the columns of a."""
    dec = smith_normal_form(a)
    diag = dec.diagonal()
    u_inv = invert_unimodular(dec.U)
    cols = []
    for i, d in enumerate(diag):
        if d != 0:
            cols.append([d * u_inv[r, i] for r in range(a.rows)])
    ent = [col[r] for r in range(a.rows) for col in cols]
    return IntMatrix(a.rows, len(cols), ent)


def invert_unimodular(a: IntMatrix) -> IntMatrix:
    """Exact inverse of a unimodular integer matrix."""
    if a.rows != a.cols:
        raise DimensionError("inverse of a non-square matrix")
    dec = smith_normal_form(a)
    if any(d != 1 for d in dec.diagonal()):
        raise ValueError("matrix is not a unit over Z")
    # U*a*V = I, hence a^-1 = V*U.
    inv = dec.V * dec.U
    if a * inv != IntMatrix.identity(a.rows):  # pragma: no cover
        raise AssertionError("inverse verification failed")
    return inv


def image_annihilator(c: IntMatrix) -> AnnihilatorMatrix:
    """A rational M with M*c = 0 and M*x = 0 iff x lies in im_Q(c).

    The rows are the last rows of the left Smith transform of c, so this
    particular annihilator is integral; the type stays rational.
    """
    dec = smith_normal_form(c)
    r = dec.rank
    rows = [dec.U.row(i) for i in range(r, c.rows)]
    m = QMatrix(c.rows - r, c.rows, [e for row in rows for e in row])
    return AnnihilatorMatrix(m, c.cols)


def in_rational_image(ann: AnnihilatorMatrix, x: IntMatrix) -> bool:
    """Membership of the column x in the rational image the annihilator cuts out."""
    if x.cols != 1 or x.rows != ann.matrix.cols:
        raise DimensionError("column of wrong length")
    return ann.matrix.mul_int(x).is_zero()


def lattice_contains(a: IntMatrix, b: IntMatrix) -> bool:
    """Whether every column of b lies in the column lattice of a."""
    if a.rows != b.rows:
        raise DimensionError("ambient rank mismatch")
    return solve_matrix(a, b) is not None


def lattice_equal(a: IntMatrix, b: IntMatrix) -> bool:
    """Whether two column sets generate the same integer lattice."""
    return lattice_contains(a, b) and lattice_contains(b, a)
