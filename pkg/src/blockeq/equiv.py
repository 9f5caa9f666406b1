"""Three-valued decision engine for blocked matrix equivalence.

The classical decision procedure for these questions runs through extremely
general arithmetic-group machinery with no practical bound, so this engine
replaces it with a sound semi-decision: verified witness (yes), certified
invariant difference (no), or a budget report (unknown).

Search strategy: bidirectional breadth-first expansion over products of the
elementary blocked generators applied on the left and right, meeting in the
middle on exact matrix states.  Exact arithmetic makes state hashing reliable;
determinism is guaranteed by fixed generator order and the
lexicographically-least-witness tie-break at the minimal joining depth.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels
from .intmat import (
    DimensionError,
    FgAbelianGroup,
    IntMatrix,
    cokernel,
    determinant,
    image_annihilator,
    invert_unimodular,
    solve_integer,
)
from .poset_block import (
    GL,
    SL,
    BlockedMatrix,
    BlockShape,
    ShapeError,
    generator_moves,
    group_membership,
    inverse_move,
)

UNIT_RESTRICTED = "unit"

SIDE_UAV = "uav"
SIDE_UAV_INV = "uav-inv"

_SIDES = (SIDE_UAV, SIDE_UAV_INV)
_ENGINE_GROUPS = (GL, SL, UNIT_RESTRICTED)


@dataclass(frozen=True)
class SearchBudget:
    """Resource bounds for one semi-decision.  Identical budgets and inputs
    always produce identical verdicts, witnesses included."""

    max_depth: int = 8
    max_nodes: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.max_depth <= 0 or self.max_nodes <= 0:
            raise ValueError("budget bounds must be positive")


@dataclass(frozen=True)
class BudgetReport:
    nodes_expanded: int
    depth_reached: int


@dataclass(frozen=True)
class Certificate:
    """A named obstruction with the differing values on both sides."""

    name: str
    left: str
    right: str


@dataclass(frozen=True)
class Verdict:
    status: str  # "yes" | "no" | "unknown"
    witness: tuple[IntMatrix, IntMatrix] | None = None
    certificate: Certificate | None = None
    report: BudgetReport | None = None

    @classmethod
    def yes(cls, u, v, report=None):
        return cls("yes", witness=(u, v), report=report)

    @classmethod
    def no(cls, certificate, report=None):
        return cls("no", certificate=certificate, report=report)

    @classmethod
    def unknown(cls, report):
        return cls("unknown", report=report)

    @property
    def is_yes(self):
        return self.status == "yes"

    @property
    def is_no(self):
        return self.status == "no"

    @property
    def is_unknown(self):
        return self.status == "unknown"


# ---------------------------------------------------------------------------
# Invariant profiles


@dataclass(frozen=True)
class InvariantProfile:
    """Everything cheap that is constant on a blocked equivalence class:
    the whole-matrix cokernel, each diagonal block's cokernel class (and, for
    SL on square shapes, its determinant sign), and the cokernel class of
    every convex-subset submatrix."""

    cokernel: FgAbelianGroup
    diagonal_blocks: tuple = ()
    det_signs: tuple = ()
    convex_cokernels: tuple = ()

    def differences(self, other):
        certs = []
        if self.cokernel != other.cokernel:
            certs.append(
                Certificate("cokernel", str(self.cokernel), str(other.cokernel))
            )
        for (i, dims, cls_a), (_, _, cls_b) in zip(
            self.diagonal_blocks, other.diagonal_blocks
        ):
            if cls_a != cls_b:
                certs.append(
                    Certificate(f"diagonal-block-cokernel[{i}]", str(cls_a), str(cls_b))
                )
        for (i, sa), (_, sb) in zip(self.det_signs, other.det_signs):
            if sa != sb:
                certs.append(Certificate(f"diagonal-det-sign[{i}]", str(sa), str(sb)))
        for (s, cls_a), (_, cls_b) in zip(
            self.convex_cokernels, other.convex_cokernels
        ):
            if cls_a != cls_b:
                certs.append(
                    Certificate(
                        f"convex-cokernel{list(s)}", str(cls_a), str(cls_b)
                    )
                )
        return certs


def _group_class(m: IntMatrix) -> FgAbelianGroup:
    g = cokernel(m)
    return FgAbelianGroup(g.free_rank, g.torsion)


def invariant_profile(a: BlockedMatrix, group: str) -> InvariantProfile:
    """Profile of a blocked matrix under the requested group action.

    Accepts rectangular shapes as well; determinant signs are recorded only
    for SL with square diagonal blocks, where they are genuinely invariant.
    """
    if group not in _ENGINE_GROUPS:
        raise ValueError(f"unknown group {group!r}")
    shape = a.shape
    whole = _group_class(a.matrix)
    diag = []
    signs = []
    for i in shape.poset.elements():
        blk = a.diagonal_block(i)
        if blk.rows == 0 and blk.cols == 0:
            continue
        diag.append((i, (blk.rows, blk.cols), _group_class(blk)))
        if group == SL and blk.rows == blk.cols:
            d = determinant(blk)
            signs.append((i, 0 if d == 0 else (1 if d > 0 else -1)))
    convex = []
    for s in shape.poset.convex_subsets():
        rows = [r for i in s for r in shape.row_range(i)]
        cols = [c for j in s for c in shape.col_range(j)]
        convex.append((s, _group_class(a.matrix.submatrix(rows, cols))))
    return InvariantProfile(whole, tuple(diag), tuple(signs), tuple(convex))


# ---------------------------------------------------------------------------
# Bidirectional generator-word search

_LEFT = 0
_RIGHT = 1


class _Side:
    """One frontier of the bidirectional search.

    records[i] = (entries, move_index, parent_record, depth); the visited set
    is keyed by the entry tuples themselves (exact arithmetic makes state
    hashing reliable).  The root is record 0 with no move.
    """

    __slots__ = ("records", "visited", "depth", "frontier")

    def __init__(self, root_entries):
        self.records = [(root_entries, -1, -1, 0)]
        self.visited = {root_entries: 0}
        self.depth = 0
        self.frontier = [0]


def _apply_move(axis, move, entries, rows, cols):
    kind, a, b, sign = move
    if axis == _LEFT:
        if kind == "t":
            return _kernels.row_add(entries, rows, cols, a, b, sign)
        return _kernels.row_negate(entries, rows, cols, a)
    if kind == "t":
        return _kernels.col_add(entries, rows, cols, a, b, sign)
    return _kernels.col_negate(entries, rows, cols, b)


def _chain_moves(side, idx):
    """Moves applied from the root to records[idx], in application order."""
    chain = []
    while idx > 0:
        _, move_idx, parent, _ = side.records[idx]
        chain.append(move_idx)
        idx = parent
    chain.reverse()
    return chain


class _Engine:
    """Search for (U, W) products of elementary generators with U*A*W = B."""

    def __init__(self, shape: BlockShape, group: str, budget: SearchBudget,
                 unit_indices=None):
        self.shape = shape
        self.rows = shape.total_rows
        self.cols = shape.total_cols
        self.budget = budget
        left_group = GL if group == UNIT_RESTRICTED else group
        right_group = GL if group == UNIT_RESTRICTED else group
        right_unit = None
        if group == UNIT_RESTRICTED:
            if unit_indices is None:
                right_unit = tuple(
                    i for i in shape.poset.elements() if shape.col_sizes[i - 1] == 1
                )
            else:
                right_unit = tuple(unit_indices)
        lefts = generator_moves(shape.row_square(), left_group)
        rights = generator_moves(shape.col_square(), right_group, right_unit)
        self.moves = [(_LEFT, mv) for mv in lefts] + [(_RIGHT, mv) for mv in rights]
        self.inverse_moves = [(ax, inverse_move(mv)) for ax, mv in self.moves]

    # -- witness reconstruction ---------------------------------------------

    def _forward_pair(self, fwd, idx):
        u = IntMatrix.identity(self.rows).entries
        w = IntMatrix.identity(self.cols).entries
        for move_idx in _chain_moves(fwd, idx):
            axis, move = self.moves[move_idx]
            kind, a, b, sign = move
            if axis == _LEFT:
                if kind == "t":
                    u = _kernels.row_add(u, self.rows, self.rows, a, b, sign)
                else:
                    u = _kernels.row_negate(u, self.rows, self.rows, a)
            else:
                if kind == "t":
                    w = _kernels.col_add(w, self.cols, self.cols, a, b, sign)
                else:
                    w = _kernels.col_negate(w, self.cols, self.cols, b)
        return u, w

    def _backward_pair(self, bwd, idx):
        # Chain moves are the *inverse* alphabet; the original generators wrap
        # the node as B = G(m1) G(m2) ... X ... H(m2) H(m1).
        u = IntMatrix.identity(self.rows).entries
        w = IntMatrix.identity(self.cols).entries
        chain = _chain_moves(bwd, idx)
        for move_idx in chain:
            axis, move = self.moves[move_idx]
            kind, a, b, sign = move
            if axis == _LEFT:
                # right-multiply the accumulator: u <- u * G
                if kind == "t":
                    u = _kernels.col_add(u, self.rows, self.rows, a, b, sign)
                else:
                    u = _kernels.col_negate(u, self.rows, self.rows, a)
        for move_idx in reversed(chain):
            axis, move = self.moves[move_idx]
            kind, a, b, sign = move
            if axis == _RIGHT:
                # left-multiply the accumulator: w <- H * w ... realized as
                # w * H applied in reversed order, which gives the same product
                # H(mj) ... H(m1).
                if kind == "t":
                    w = _kernels.col_add(w, self.cols, self.cols, a, b, sign)
                else:
                    w = _kernels.col_negate(w, self.cols, self.cols, b)
        return u, w

    def _witness(self, fwd, bwd, f_idx, b_idx):
        uf, wf = self._forward_pair(fwd, f_idx)
        ub, wb = self._backward_pair(bwd, b_idx)
        u = _kernels.mat_mul(self.rows, self.rows, ub, self.rows, uf)
        w = _kernels.mat_mul(self.cols, self.cols, wf, self.cols, wb)
        return (
            IntMatrix(self.rows, self.rows, u),
            IntMatrix(self.cols, self.cols, w),
        )

    # -- search drivers ------------------------------------------------------

    def _expand(self, side, other, is_forward, nodes_used):
        """Expand one full level of `side`; returns (joins, nodes, truncated)."""
        joins = []
        new_frontier = []
        count = nodes_used
        moves = self.moves if is_forward else self.inverse_moves
        for idx in side.frontier:
            entries = side.records[idx][0]
            depth = side.records[idx][3]
            for move_idx, (axis, move) in enumerate(moves):
                child = _apply_move(axis, move, entries, self.rows, self.cols)
                if child in side.visited:
                    continue
                if count + 1 > self.budget.max_nodes:
                    return joins, count, True
                rec = len(side.records)
                side.records.append((child, move_idx, idx, depth + 1))
                side.visited[child] = rec
                new_frontier.append(rec)
                count += 1
                hit = other.visited.get(child)
                if hit is not None:
                    joins.append((rec, hit))
        side.frontier = new_frontier
        side.depth += 1
        return joins, count, False

    def search(self, a: IntMatrix, b: IntMatrix):
        """Find (U, W) with U*a*W = b; returns (witnesses, report, truncated).

        witnesses is the (possibly empty) list of minimal-depth join pairs as
        (U, W) matrices, deterministically ordered.
        """
        fwd = _Side(a.entries)
        bwd = _Side(b.entries)
        nodes = 2
        truncated = False
        joins = []
        if b.entries == a.entries:
            joins = [(0, 0)]
        while not joins and not truncated:
            if fwd.depth + bwd.depth >= self.budget.max_depth:
                break
            if not fwd.frontier and not bwd.frontier:
                break
            if fwd.frontier and (
                not bwd.frontier or len(fwd.frontier) <= len(bwd.frontier)
            ):
                side, other, is_fwd = fwd, bwd, True
            else:
                side, other, is_fwd = bwd, fwd, False
            level_joins, nodes, truncated = self._expand(side, other, is_fwd, nodes)
            if is_fwd:
                joins = list(level_joins)
            else:
                joins = [(o, s) for s, o in level_joins]
        report = BudgetReport(nodes, fwd.depth + bwd.depth)
        if not joins:
            return [], report, truncated
        depth_of = lambda pair: (
            fwd.records[pair[0]][3] + bwd.records[pair[1]][3]
        )
        best = min(depth_of(p) for p in joins)
        out = [self._witness(fwd, bwd, f, b_) for f, b_ in joins if depth_of((f, b_)) == best]
        out.sort(key=lambda uw: (uw[0].entries, uw[1].entries))
        return out, report, truncated

    def stabilizer_sweep(self, b: IntMatrix, check):
        """Enumerate stabilizer pairs (U, W) with U*b*W = b, calling check on
        each until it returns a result or the budget runs out.

        Schreier-style: breadth-first search of the orbit of b keeps a tree
        word for each state, and every non-tree edge X --g--> Y contributes
        the stabilizer element word(Y)^-1 * g * word(X).  A second pass tests
        pairwise products of the harvested elements within the budget.

        Returns (result, report, truncated) where result is check's first
        non-None value.
        """
        ident = (IntMatrix.identity(self.rows), IntMatrix.identity(self.cols))
        res = check(*ident)
        if res is not None:
            return res, BudgetReport(1, 0), False
        side = _Side(b.entries)
        seen = {(ident[0].entries, ident[1].entries)}
        sigmas = []
        work = 1
        truncated = False
        depth = 0

        def word_pair(idx):
            return self._forward_pair(side, idx)

        pair_cache = {0: (ident[0].entries, ident[1].entries)}

        def cached_pair(idx):
            if idx not in pair_cache:
                pair_cache[idx] = word_pair(idx)
            return pair_cache[idx]

        while side.frontier and depth < self.budget.max_depth and not truncated:
            new_frontier = []
            for idx in side.frontier:
                entries = side.records[idx][0]
                for move_idx, (axis, move) in enumerate(self.moves):
                    child = _apply_move(axis, move, entries, self.rows, self.cols)
                    hit = side.visited.get(child)
                    if hit is None:
                        if work + 1 > self.budget.max_nodes:
                            truncated = True
                            break
                        rec = len(side.records)
                        side.records.append((child, move_idx, idx, depth + 1))
                        side.visited[child] = rec
                        new_frontier.append(rec)
                        work += 1
                        continue
                    # Non-tree edge: harvest word(Y)^-1 * g * word(X).
                    if work + 1 > self.budget.max_nodes:
                        truncated = True
                        break
                    work += 1
                    ux, wx = cached_pair(idx)
                    uy, wy = cached_pair(hit)
                    uy_inv = invert_unimodular(
                        IntMatrix(self.rows, self.rows, uy)
                    ).entries
                    wy_inv = invert_unimodular(
                        IntMatrix(self.cols, self.cols, wy)
                    ).entries
                    kind, a_, b_, sign = move
                    if axis == _LEFT:
                        if kind == "t":
                            gux = _kernels.row_add(ux, self.rows, self.rows, a_, b_, sign)
                        else:
                            gux = _kernels.row_negate(ux, self.rows, self.rows, a_)
                        u2 = _kernels.mat_mul(self.rows, self.rows, uy_inv, self.rows, gux)
                        w2 = _kernels.mat_mul(self.cols, self.cols, wx, self.cols, wy_inv)
                    else:
                        if kind == "t":
                            hwx = _kernels.col_add(wx, self.cols, self.cols, a_, b_, sign)
                        else:
                            hwx = _kernels.col_negate(wx, self.cols, self.cols, b_)
                        u2 = _kernels.mat_mul(self.rows, self.rows, uy_inv, self.rows, ux)
                        w2 = _kernels.mat_mul(self.cols, self.cols, hwx, self.cols, wy_inv)
                    sig = (u2, w2)
                    if sig in seen:
                        continue
                    seen.add(sig)
                    um = IntMatrix(self.rows, self.rows, u2)
                    wm = IntMatrix(self.cols, self.cols, w2)
                    sigmas.append((um, wm))
                    res = check(um, wm)
                    if res is not None:
                        return res, BudgetReport(work, depth + 1), truncated
                if truncated:
                    break
            side.frontier = new_frontier
            depth += 1

        # Products of harvested stabilizer elements, budget permitting.
        for u1, w1 in sigmas:
            for u2, w2 in sigmas:
                if work + 1 > self.budget.max_nodes:
                    truncated = True
                    break
                work += 1
                um, wm = u1 * u2, w2 * w1
                sig = (um.entries, wm.entries)
                if sig in seen:
                    continue
                seen.add(sig)
                res = check(um, wm)
                if res is not None:
                    return res, BudgetReport(work, depth), truncated
            if truncated:
                break
        return None, BudgetReport(work, depth), truncated


def _require_same_shape(a: BlockedMatrix, b: BlockedMatrix):
    if a.shape != b.shape:
        raise ShapeError("operands live in different blocked shapes")


def _witness_groups_ok(shape, group, u, v, unit_indices):
    if group == UNIT_RESTRICTED:
        if not group_membership(u, shape.row_square(), GL):
            return False
        if not group_membership(v, shape.col_square(), GL):
            return False
        idx = (
            tuple(i for i in shape.poset.elements() if shape.col_sizes[i - 1] == 1)
            if unit_indices is None
            else tuple(unit_indices)
        )
        for i in idx:
            blk = v.submatrix(shape.col_square().row_range(i), shape.col_square().col_range(i))
            if blk.entries != (1,):
                return False
        return True
    return group_membership(u, shape.row_square(), group) and group_membership(
        v, shape.col_square(), group
    )


def decide_blocked_equivalence(
    a: BlockedMatrix,
    b: BlockedMatrix,
    group: str = SL,
    side: str = SIDE_UAV,
    budget: SearchBudget = SearchBudget(),
    unit_indices=None,
) -> Verdict:
    """Is there (U, V) in the blocked group with U*a*V = b (side "uav") or
    U*a*V^-1 = b (side "uav-inv")?

    Yes comes with an exactly re-verified witness; No with an invariant
    certificate; Unknown with the budget report.
    """
    if group not in _ENGINE_GROUPS:
        raise ValueError(f"unknown group {group!r}")
    if side not in _SIDES:
        raise ValueError(f"unknown side {side!r}")
    _require_same_shape(a, b)

    profile_group = GL if group == UNIT_RESTRICTED else group
    pa = invariant_profile(a, profile_group)
    pb = invariant_profile(b, profile_group)
    diffs = pa.differences(pb)
    if diffs:
        return Verdict.no(diffs[0], BudgetReport(0, 0))

    engine = _Engine(a.shape, group, budget, unit_indices)
    witnesses, report, truncated = engine.search(a.matrix, b.matrix)
    if witnesses:
        u, w = witnesses[0]
        v = w if side == SIDE_UAV else invert_unimodular(w)
        right = v if side == SIDE_UAV else invert_unimodular(v)
        if u * a.matrix * right != b.matrix or not _witness_groups_ok(
            a.shape, group, u, v, unit_indices
        ):  # pragma: no cover - soundness guard
            raise AssertionError("witness failed re-verification")
        return Verdict.yes(u, v, report)
    return Verdict.unknown(report)


# ---------------------------------------------------------------------------
# Unit-vector condition (the two-equation decision)


def _pair_group_finite(shape: BlockShape) -> bool:
    """True when the full (U, V) group is provably finite: every diagonal
    block is at most 1x1 and no off-diagonal block is ever nonzero."""
    for sizes in (shape.row_sizes, shape.col_sizes):
        for i in shape.poset.elements():
            if sizes[i - 1] > 1:
                return False
    for i in shape.poset.elements():
        for j in shape.poset.elements():
            if i != j and shape.poset.leq(i, j):
                if shape.row_sizes[i - 1] and shape.row_sizes[j - 1]:
                    return False
                if shape.col_sizes[i - 1] and shape.col_sizes[j - 1]:
                    return False
    return True


def _finite_group_elements(square_shape: BlockShape, group: str, unit_indices=None):
    """All elements of a provably finite blocked group, lexicographic order."""
    n = square_shape.total_rows
    positions = []
    for i in square_shape.poset.elements():
        for k in square_shape.row_range(i):
            positions.append((i, k))
    if group == SL:
        return [IntMatrix.identity(n)]
    blocked = set()
    if group == UNIT_RESTRICTED:
        blocked = (
            {i for i in square_shape.poset.elements()
             if square_shape.row_sizes[i - 1] == 1}
            if unit_indices is None
            else set(unit_indices)
        )
    free_positions = [k for (i, k) in positions if i not in blocked]
    out = []
    for mask in range(1 << len(free_positions)):
        diag = [1] * n
        for bit, k in enumerate(free_positions):
            if mask >> bit & 1:
                diag[k] = -1
        out.append(IntMatrix.diagonal(diag))
    out.sort(key=lambda m: m.entries)
    return out


def decide_with_unit(
    a: BlockedMatrix,
    b: BlockedMatrix,
    x: IntMatrix,
    y: IntMatrix,
    group: str = GL,
    budget: SearchBudget = SearchBudget(),
    unit_indices=None,
) -> Verdict:
    """Decide the two-condition problem: (U, V) in the group with

        (1)  U*a*V^-1 = b, and
        (2)  (V^-1)^T x - y  in  im_Z(b^T).

    Complete (yes/no) when the pair group is provably finite; otherwise the
    engine searches (1)-witnesses and sweeps the stabilizer coset for (2).
    """
    if group not in _ENGINE_GROUPS:
        raise ValueError(f"unknown group {group!r}")
    _require_same_shape(a, b)
    n = a.shape.total_cols
    if x.cols != 1 or y.cols != 1 or x.rows != n or y.rows != n:
        raise DimensionError("x and y must be columns of the total column count")

    bt = b.matrix.transpose()

    def condition2(v: IntMatrix):
        vinv_t = invert_unimodular(v).transpose()
        return solve_integer(bt, vinv_t * x - y) is not None

    if _pair_group_finite(a.shape):
        left_group = GL if group == UNIT_RESTRICTED else group
        us = _finite_group_elements(a.shape.row_square(), left_group)
        vs = _finite_group_elements(a.shape.col_square(), group, unit_indices)
        checked = 0
        for u in us:
            for v in vs:
                checked += 1
                if u * a.matrix * invert_unimodular(v) == b.matrix and condition2(v):
                    return Verdict.yes(u, v, BudgetReport(checked, 0))
        return Verdict.no(
            Certificate(
                "finite-enumeration",
                f"all {checked} group pairs enumerated",
                "none satisfies conditions (1) and (2)",
            ),
            BudgetReport(checked, 0),
        )

    base = decide_blocked_equivalence(
        a, b, group=group, side=SIDE_UAV_INV, budget=budget, unit_indices=unit_indices
    )
    if base.is_no:
        return base
    if base.is_unknown:
        return base
    u1, v1 = base.witness
    if condition2(v1):
        return Verdict.yes(u1, v1, base.report)

    # Stabilizer coset sweep: every (1)-witness is (U2*U1, V2*V1) for a
    # stabilizer pair (U2, V2) of b, so test condition (2) along the coset.
    engine = _Engine(a.shape, group, budget, unit_indices)

    def check(u2: IntMatrix, w2: IntMatrix):
        # u2 * b * w2 = b, so (u2, v2) with v2 = w2^-1 stabilizes b.
        v2 = invert_unimodular(w2)
        u, v = u2 * u1, v2 * v1
        if condition2(v):
            if u * a.matrix * invert_unimodular(v) != b.matrix:  # pragma: no cover
                raise AssertionError("stabilizer composition failed")
            return (u, v)
        return None

    found, report, _ = engine.stabilizer_sweep(b.matrix, check)
    total = BudgetReport(
        (base.report.nodes_expanded if base.report else 0) + report.nodes_expanded,
        max(base.report.depth_reached if base.report else 0, report.depth_reached),
    )
    if found is not None:
        return Verdict.yes(found[0], found[1], total)
    return Verdict.unknown(total)


# ---------------------------------------------------------------------------
# The stabilizer gadget


@dataclass(frozen=True)
class Gadget:
    """The block matrix K of size n(m+1) with K00 in the upper-left n x n
    corner, K0j = -r_j * I along the top row of blocks, identity diagonal
    blocks elsewhere, and zeros everywhere else."""

    matrix: IntMatrix
    n: int
    m: int

    def block(self, i, j):
        n = self.n
        return self.matrix.submatrix(
            range(i * n, (i + 1) * n), range(j * n, (j + 1) * n)
        )

    @property
    def k00(self):
        return self.block(0, 0)

    def k0(self, j):
        if not 1 <= j <= self.m:
            raise IndexError(j)
        return self.block(0, j)

    def unpack(self):
        """Recover (V, r) with K00 = (V^-1)^T and K0j = -r_j * I."""
        v = invert_unimodular(self.k00).transpose()
        rs = []
        for j in range(1, self.m + 1):
            blk = self.k0(j)
            r = -blk[0, 0] if self.n else 0
            if blk != IntMatrix.diagonal([-r] * self.n):
                raise ValueError(f"block (0,{j}) is not a scalar multiple of I")
            rs.append(r)
        return v, tuple(rs)


def gadget_pack(v: IntMatrix, r) -> Gadget:
    """Build the gadget for a unimodular V and integer vector r."""
    if v.rows != v.cols:
        raise DimensionError("V must be square")
    r = tuple(r)
    n = v.rows
    m = len(r)
    k00 = invert_unimodular(v).transpose()
    size = n * (m + 1)
    ent = [[0] * size for _ in range(size)]
    for a in range(n):
        for b in range(n):
            ent[a][b] = k00[a, b]
    for j in range(1, m + 1):
        for a in range(n):
            ent[a][j * n + a] = -r[j - 1]
            ent[j * n + a][j * n + a] = 1
    mat = IntMatrix.from_rows(ent) if size else IntMatrix(0, 0, ())
    return Gadget(mat, n, m)


def gadget_action(g: Gadget, vectors):
    """The action on (m+1)-tuples of columns: the 0th component becomes
    sum_j K0j * w_j, the others are fixed."""
    vectors = list(vectors)
    if len(vectors) != g.m + 1:
        raise DimensionError(f"expected {g.m + 1} columns")
    for w in vectors:
        if w.rows != g.n or w.cols != 1:
            raise DimensionError("component of wrong size")
    head = IntMatrix.zero(g.n, 1)
    for j, w in enumerate(vectors):
        head = head + g.block(0, j) * w
    return (head, *vectors[1:])


def is_image_endomorphism(d: IntMatrix, c: IntMatrix) -> bool:
    """Whether d maps the rational column span of c into itself
    (equivalently M*d*c = 0 for the image annihilator M of c)."""
    if d.rows != d.cols:
        raise DimensionError("endomorphism candidate must be square")
    if d.cols != c.rows:
        raise DimensionError("dimension mismatch")
    ann = image_annihilator(c)
    return ann.matrix.mul_int(d * c).is_zero()


class StabilizerError(ValueError):
    """The supplied (U, V) does not stabilize A."""


def stabilizer_transport_check(a: IntMatrix, u: IntMatrix, v: IntMatrix) -> bool:
    """For a stabilizer pair (U*A*V^-1 = A), transport says V^T preserves the
    rational column span of A^T; exposed as a checkable property."""
    try:
        vinv = invert_unimodular(v)
    except ValueError as exc:
        raise StabilizerError("V is not unimodular") from exc
    if u * a * vinv != a:
        raise StabilizerError("(U, V) does not stabilize A")
    return is_image_endomorphism(v.transpose(), a.transpose())
