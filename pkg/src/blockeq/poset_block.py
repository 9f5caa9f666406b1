"""Posets, block shapes, and poset-blocked integer matrices.

A blocked matrix over a finite poset P with row sizes m and column sizes n has
block (i, j) possibly nonzero only when i <= j in P.  This module provides the
membership and unit-group tests, exact blocked arithmetic, the elementary
generator alphabet used by the search engine, and the corner embedding that
stabilizes a blocked matrix into larger block sizes.

Poset elements are the integers 1..N, normalized so that i <= j in the order
implies i <= j as integers.
"""

from __future__ import annotations

from itertools import combinations

from .intmat import DimensionError, IntMatrix, determinant, invert_unimodular

GL = "gl"
SL = "sl"

_GROUPS = (GL, SL)


class ShapeError(ValueError):
    """Blocked shapes do not match or are malformed."""


class BlockStructureError(ValueError):
    """A matrix violates the poset block-triangularity pattern."""


class Poset:
    """Finite poset on {1..size} given by its (reflexively and transitively
    closed) order relation, normalized so i <= j in P implies i <= j in Z."""

    __slots__ = ("size", "pairs")

    def __init__(self, size, pairs=()):
        if size < 0:
            raise ValueError("negative poset size")
        rel = {(i, i) for i in range(1, size + 1)}
        for i, j in pairs:
            if not (1 <= i <= size and 1 <= j <= size):
                raise ValueError(f"pair ({i},{j}) out of range 1..{size}")
            rel.add((i, j))
        # Transitive closure (sizes are small; cubic pass is fine).
        changed = True
        while changed:
            changed = False
            for i, j in list(rel):
                for k in range(1, size + 1):
                    if (j, k) in rel and (i, k) not in rel:
                        rel.add((i, k))
                        changed = True
        for i, j in rel:
            if i != j and (j, i) in rel:
                raise ValueError(f"antisymmetry violated at ({i},{j})")
            if i > j:
                raise ValueError(
                    f"normalization violated: {i} precedes {j} but {i} > {j}; "
                    "relabel with Poset.normalized"
                )
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "pairs", frozenset(rel))

    def __setattr__(self, name, value):
        raise AttributeError("Poset is immutable")

    @classmethod
    def normalized(cls, size, pairs):
        """Build a poset from an arbitrary relation, relabelling by a stable
        topological sort when the numeric normalization is violated.

        Returns (poset, relabel) where relabel[old - 1] = new label.
        """
        rel = {(i, i) for i in range(1, size + 1)}
        for i, j in pairs:
            if not (1 <= i <= size and 1 <= j <= size):
                raise ValueError(f"pair ({i},{j}) out of range 1..{size}")
            rel.add((i, j))
        changed = True
        while changed:
            changed = False
            for i, j in list(rel):
                for k in range(1, size + 1):
                    if (j, k) in rel and (i, k) not in rel:
                        rel.add((i, k))
                        changed = True
        for i, j in rel:
            if i != j and (j, i) in rel:
                raise ValueError(f"antisymmetry violated at ({i},{j})")
        # Stable topological order: repeatedly take the minimal original label
        # among elements with no unplaced predecessor.
        remaining = set(range(1, size + 1))
        order = []
        while remaining:
            ready = [
                x
                for x in sorted(remaining)
                if all(p == x or p not in remaining for (p, q) in rel if q == x)
            ]
            order.append(ready[0])
            remaining.remove(ready[0])
        relabel = [0] * size
        for new, old in enumerate(order, start=1):
            relabel[old - 1] = new
        new_pairs = {(relabel[i - 1], relabel[j - 1]) for (i, j) in rel}
        return cls(size, new_pairs), tuple(relabel)

    def leq(self, i, j):
        return (i, j) in self.pairs

    def elements(self):
        return range(1, self.size + 1)

    def strict_pairs(self):
        return sorted((i, j) for (i, j) in self.pairs if i != j)

    def is_convex(self, subset):
        s = set(subset)
        for i in s:
            for k in s:
                for j in self.elements():
                    if j not in s and self.leq(i, j) and self.leq(j, k):
                        return False
        return True

    def convex_subsets(self):
        """All nonempty convex subsets, canonically ordered."""
        out = []
        elems = list(self.elements())
        for size in range(1, self.size + 1):
            for comb in combinations(elems, size):
                if self.is_convex(comb):
                    out.append(comb)
        return out

    def downsets_within(self, subset):
        """Nonempty proper subsets of `subset` closed downward within it."""
        subset = tuple(subset)
        out = []
        for size in range(1, len(subset)):
            for comb in combinations(subset, size):
                s = set(comb)
                if all(
                    (y in s) for x in s for y in subset if self.leq(y, x)
                ):
                    out.append(comb)
        return out

    def order_isomorphisms(self, other):
        """All bijections {1..n} -> {1..n} preserving order both ways."""
        if self.size != other.size:
            return []
        out = []

        def extend(partial, used):
            i = len(partial) + 1
            if i > self.size:
                out.append(tuple(partial))
                return
            for cand in other.elements():
                if cand in used:
                    continue
                ok = True
                for prev in range(1, i):
                    if self.leq(prev, i) != other.leq(partial[prev - 1], cand):
                        ok = False
                        break
                    if self.leq(i, prev) != other.leq(cand, partial[prev - 1]):
                        ok = False
                        break
                if ok:
                    partial.append(cand)
                    used.add(cand)
                    extend(partial, used)
                    partial.pop()
                    used.remove(cand)

        extend([], set())
        return out

    def __eq__(self, other):
        if not isinstance(other, Poset):
            return NotImplemented
        return self.size == other.size and self.pairs == other.pairs

    def __hash__(self):
        return hash((self.size, self.pairs))

    def __repr__(self):
        return f"Poset({self.size}, {self.strict_pairs()})"


def chain_poset(n):
    return Poset(n, [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)])


def antichain_poset(n):
    return Poset(n)


class BlockShape:
    """A poset together with block row sizes m and block column sizes n.

    Sizes may be zero (empty block rows/columns); the index sets
    I = {i : m_i > 0} and J = {j : n_j > 0} must be nonempty.
    """

    __slots__ = (
        "poset",
        "row_sizes",
        "col_sizes",
        "row_offsets",
        "col_offsets",
        "I",
        "J",
    )

    def __init__(self, poset, row_sizes, col_sizes):
        row_sizes = tuple(row_sizes)
        col_sizes = tuple(col_sizes)
        if len(row_sizes) != poset.size or len(col_sizes) != poset.size:
            raise ShapeError("size vectors must have one entry per poset element")
        if any(s < 0 for s in row_sizes + col_sizes):
            raise ShapeError("negative block size")
        bi = tuple(i for i in poset.elements() if row_sizes[i - 1] > 0)
        bj = tuple(j for j in poset.elements() if col_sizes[j - 1] > 0)
        if not bi or not bj:
            raise ShapeError("index sets I and J must be nonempty")
        row_offsets = [0]
        for s in row_sizes:
            row_offsets.append(row_offsets[-1] + s)
        col_offsets = [0]
        for s in col_sizes:
            col_offsets.append(col_offsets[-1] + s)
        object.__setattr__(self, "poset", poset)
        object.__setattr__(self, "row_sizes", row_sizes)
        object.__setattr__(self, "col_sizes", col_sizes)
        object.__setattr__(self, "row_offsets", tuple(row_offsets))
        object.__setattr__(self, "col_offsets", tuple(col_offsets))
        object.__setattr__(self, "I", bi)
        object.__setattr__(self, "J", bj)

    def __setattr__(self, name, value):
        raise AttributeError("BlockShape is immutable")

    @classmethod
    def square(cls, poset, sizes):
        sizes = tuple(sizes)
        return cls(poset, sizes, sizes)

    @property
    def total_rows(self):
        return self.row_offsets[-1]

    @property
    def total_cols(self):
        return self.col_offsets[-1]

    @property
    def is_square(self):
        return self.row_sizes == self.col_sizes

    def row_range(self, i):
        return range(self.row_offsets[i - 1], self.row_offsets[i])

    def col_range(self, j):
        return range(self.col_offsets[j - 1], self.col_offsets[j])

    def row_square(self):
        """The square shape carrying left (row-side) transformations."""
        return BlockShape(self.poset, self.row_sizes, self.row_sizes)

    def col_square(self):
        """The square shape carrying right (column-side) transformations."""
        return BlockShape(self.poset, self.col_sizes, self.col_sizes)

    def __eq__(self, other):
        if not isinstance(other, BlockShape):
            return NotImplemented
        return (
            self.poset == other.poset
            and self.row_sizes == other.row_sizes
            and self.col_sizes == other.col_sizes
        )

    def __hash__(self):
        return hash((self.poset, self.row_sizes, self.col_sizes))

    def __repr__(self):
        return f"BlockShape({self.poset!r}, m={self.row_sizes}, n={self.col_sizes})"


def validate_membership(matrix: IntMatrix, shape: BlockShape) -> bool:
    """Whether every block with i not-below j is identically zero."""
    if matrix.rows != shape.total_rows or matrix.cols != shape.total_cols:
        raise DimensionError(
            f"matrix is {matrix.rows}x{matrix.cols}, shape wants "
            f"{shape.total_rows}x{shape.total_cols}"
        )
    poset = shape.poset
    for i in poset.elements():
        rows = shape.row_range(i)
        if not rows:
            continue
        for j in poset.elements():
            if poset.leq(i, j):
                continue
            for r in rows:
                base = r * matrix.cols
                for c in shape.col_range(j):
                    if matrix.entries[base + c]:
                        return False
    return True


class BlockedMatrix:
    """An IntMatrix constrained to a BlockShape's triangularity pattern."""

    __slots__ = ("shape", "matrix")

    def __init__(self, shape, matrix):
        if not validate_membership(matrix, shape):
            raise BlockStructureError("nonzero entry in a forbidden block")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("BlockedMatrix is immutable")

    @classmethod
    def from_blocks(cls, shape, blocks):
        """Assemble from a {(i, j): IntMatrix} mapping; missing blocks are 0."""
        rows = shape.total_rows
        cols = shape.total_cols
        ent = [0] * (rows * cols)
        for (i, j), blk in blocks.items():
            ri = list(shape.row_range(i))
            cj = list(shape.col_range(j))
            if blk.rows != len(ri) or blk.cols != len(cj):
                raise DimensionError(f"block ({i},{j}) has wrong size")
            for a, r in enumerate(ri):
                for b, c in enumerate(cj):
                    ent[r * cols + c] = blk[a, b]
        return cls(shape, IntMatrix(rows, cols, ent))

    def block(self, i, j):
        """Block (i, j) as a (possibly empty) IntMatrix."""
        return self.matrix.submatrix(self.shape.row_range(i), self.shape.col_range(j))

    def diagonal_block(self, i):
        return self.block(i, i)

    def __eq__(self, other):
        if not isinstance(other, BlockedMatrix):
            return NotImplemented
        return self.shape == other.shape and self.matrix == other.matrix

    def __hash__(self):
        return hash((self.shape, self.matrix))

    def __repr__(self):
        return f"BlockedMatrix({self.shape!r}, {self.matrix.to_rows()})"


def group_membership(matrix: IntMatrix, shape: BlockShape, group: str) -> bool:
    """Unit test for the blocked algebra: GL needs every diagonal block
    determinant +-1, SL needs determinant exactly 1."""
    if group not in _GROUPS:
        raise ValueError(f"unknown group {group!r}")
    if not shape.is_square:
        raise ShapeError("group membership needs a square shape")
    if matrix.rows != shape.total_rows or matrix.cols != shape.total_cols:
        raise DimensionError("matrix does not fit the shape")
    if not validate_membership(matrix, shape):
        return False
    for i in shape.poset.elements():
        rows = list(shape.row_range(i))
        if not rows:
            continue
        d = determinant(matrix.submatrix(rows, rows))
        if group == SL:
            if d != 1:
                return False
        elif d not in (1, -1):
            return False
    return True


def multiply_blocked(m1: BlockedMatrix, m2: BlockedMatrix) -> BlockedMatrix:
    """Exact product; the blocked pattern is closed under composition."""
    if m1.shape.poset != m2.shape.poset:
        raise ShapeError("different posets")
    if m1.shape.col_sizes != m2.shape.row_sizes:
        raise ShapeError("inner block sizes do not compose")
    out_shape = BlockShape(m1.shape.poset, m1.shape.row_sizes, m2.shape.col_sizes)
    return BlockedMatrix(out_shape, m1.matrix * m2.matrix)


def invert_blocked(u: BlockedMatrix, group: str) -> BlockedMatrix:
    """Inverse of a blocked unit; stays in the same group."""
    if not group_membership(u.matrix, u.shape, group):
        raise ValueError("matrix is not a unit of the requested blocked group")
    inv = invert_unimodular(u.matrix)
    out = BlockedMatrix(u.shape, inv)
    if not group_membership(inv, u.shape, group):  # pragma: no cover - theory
        raise AssertionError("inverse left the group")
    return out


def blocked_identity(shape: BlockShape) -> BlockedMatrix:
    if not shape.is_square:
        raise ShapeError("identity needs a square shape")
    return BlockedMatrix(shape, IntMatrix.identity(shape.total_rows))


# ---------------------------------------------------------------------------
# Elementary generators

# A move is ("t", dst, src, sign) for the transvection I + sign*E[dst,src]
# applied by index pair, or ("f", k, k, -1) for the sign flip at coordinate k.
# Orderings below are the deterministic tie-break the search engine relies on:
# transvections by (block row, block col, local row, local col, +1 before -1),
# then sign flips by coordinate.


def generator_moves(shape: BlockShape, group: str, unit_indices=None):
    """Move descriptors for the elementary generators of the blocked group.

    unit_indices restricts away the sign flips inside the named size-1 blocks
    (the paper-facing "V{i} = 1" condition); it only makes sense with GL.
    """
    if group not in _GROUPS:
        raise ValueError(f"unknown group {group!r}")
    if not shape.is_square:
        raise ShapeError("generators need a square shape")
    moves = []
    poset = shape.poset
    for i in poset.elements():
        for j in poset.elements():
            if not poset.leq(i, j):
                continue
            for s in shape.row_range(i):
                for t in shape.col_range(j):
                    if s == t:
                        continue
                    moves.append(("t", s, t, 1))
                    moves.append(("t", s, t, -1))
    if group == GL:
        blocked = set()
        if unit_indices is not None:
            blocked = {i for i in unit_indices if shape.row_sizes[i - 1] == 1}
        for i in poset.elements():
            if i in blocked:
                continue
            for k in shape.row_range(i):
                moves.append(("f", k, k, -1))
    return moves


def move_matrix(move, n) -> IntMatrix:
    kind, a, b, sign = move
    ent = IntMatrix.identity(n).to_rows()
    if kind == "t":
        ent[a][b] = sign
    else:
        ent[a][a] = -1
    return IntMatrix.from_rows(ent)


def inverse_move(move):
    kind, a, b, sign = move
    if kind == "t":
        return (kind, a, b, -sign)
    return move


def elementary_generators(shape: BlockShape, group: str, unit_indices=None):
    """All transvections I +- E[s,t] with (s, t) inside an allowed block, plus
    (for GL) the single-coordinate sign flips, as BlockedMatrix values."""
    out = []
    n = shape.total_rows
    for move in generator_moves(shape, group, unit_indices):
        mat = move_matrix(move, n)
        blocked = BlockedMatrix(shape, mat)
        if not group_membership(mat, shape, group):  # pragma: no cover - theory
            raise AssertionError("generator left the group")
        out.append(blocked)
    return out


def iota_embed(m: BlockedMatrix, target_sizes) -> BlockedMatrix:
    """Corner embedding into larger block sizes.

    Each block lands in the upper-left corner of the target block; outside
    the corner, off-diagonal blocks are zero and diagonal blocks agree with
    the identity.
    """
    shape = m.shape
    if not shape.is_square:
        raise ShapeError("corner embedding is defined for square shapes")
    target_sizes = tuple(target_sizes)
    if len(target_sizes) != shape.poset.size:
        raise ShapeError("target size vector has wrong length")
    for r, s in zip(target_sizes, shape.row_sizes):
        if r < s:
            raise ShapeError("target sizes must dominate the source sizes")
    out_shape = BlockShape.square(shape.poset, target_sizes)
    n = out_shape.total_rows
    ent = [[0] * n for _ in range(n)]
    for i in shape.poset.elements():
        oi = out_shape.row_offsets[i - 1]
        si = shape.row_sizes[i - 1]
        for k in range(si, target_sizes[i - 1]):
            ent[oi + k][oi + k] = 1
        for j in shape.poset.elements():
            if not shape.poset.leq(i, j):
                continue
            oj = out_shape.col_offsets[j - 1]
            blk = m.block(i, j)
            for a in range(blk.rows):
                for b in range(blk.cols):
                    ent[oi + a][oj + b] = blk[a, b]
    return BlockedMatrix(out_shape, IntMatrix.from_rows(ent) if n else IntMatrix(0, 0, ()))
