"""Shifts of finite type and flow equivalence.

A shift of finite type is presented by a square nonnegative integer adjacency
matrix A.  The classical flow-equivalence invariants are the Bowen-Franks
group cok(I - A) and the Parry-Sullivan number det(I - A); together they are
complete for nontrivial irreducible shifts (Franks).  The general (reducible)
case condenses A into strongly connected components, stabilizes the blocked
matrix I - A over the component poset, and hands the question to the blocked
SL-equivalence engine.
"""

from __future__ import annotations

from dataclasses import dataclass

from .equiv import (
    BudgetReport,
    Certificate,
    SearchBudget,
    Verdict,
    decide_blocked_equivalence,
    SIDE_UAV,
)
from .intmat import FgAbelianGroup, IntMatrix, cokernel, determinant
from .poset_block import SL, BlockedMatrix, BlockShape, Poset, iota_embed


class SftMatrix:
    """Square nonnegative integer adjacency matrix (entries are edge
    multiplicities; 0/1 matrices are the classical case)."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: IntMatrix):
        if matrix.rows != matrix.cols:
            raise ValueError("adjacency matrix must be square")
        if any(e < 0 for e in matrix.entries):
            raise ValueError("adjacency entries must be nonnegative")
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("SftMatrix is immutable")

    @classmethod
    def from_rows(cls, rows):
        return cls(IntMatrix.from_rows(rows))

    @property
    def size(self):
        return self.matrix.rows

    def __eq__(self, other):
        if not isinstance(other, SftMatrix):
            return NotImplemented
        return self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        return f"SftMatrix({self.matrix.to_rows()})"


@dataclass(frozen=True)
class FlowInvariant:
    """The classical pair: Bowen-Franks group and Parry-Sullivan number.

    Consistency: parry_sullivan = 0 iff the group has free rank, and
    |parry_sullivan| equals the torsion order otherwise.
    """

    bowen_franks: FgAbelianGroup
    parry_sullivan: int

    def __post_init__(self):
        g = self.bowen_franks
        if (self.parry_sullivan == 0) != (g.free_rank > 0):
            raise ValueError("Parry-Sullivan sign inconsistent with free rank")
        if g.free_rank == 0 and abs(self.parry_sullivan) != g.order():
            raise ValueError("Parry-Sullivan magnitude inconsistent with torsion")

    @classmethod
    def of(cls, a: SftMatrix):
        return cls(bowen_franks(a), parry_sullivan(a))


def _i_minus_a(a: SftMatrix) -> IntMatrix:
    return IntMatrix.identity(a.size) - a.matrix


def bowen_franks(a: SftMatrix) -> FgAbelianGroup:
    """cok(I - A)."""
    return cokernel(_i_minus_a(a))


def parry_sullivan(a: SftMatrix) -> int:
    """det(I - A), the signed invariant the cokernel cannot see."""
    return determinant(_i_minus_a(a))


def _digraph_sccs(a: SftMatrix):
    """Strongly connected components in Tarjan discovery order (iterative,
    rooted at increasing vertex index, hence deterministic)."""
    n = a.size
    adj = [
        [v for v in range(n) if a.matrix[u, v] > 0]
        for u in range(n)
    ]
    index = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    comps = []
    counter = 0
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for k in range(pi, len(adj[v])):
                w = adj[v][k]
                if index[w] is None:
                    work[-1] = (v, k + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comps


def is_irreducible(a: SftMatrix) -> bool:
    """Strong connectivity of the digraph; a single vertex needs a loop to
    carry any edge at all."""
    n = a.size
    if n == 0:
        return False
    if n == 1:
        return a.matrix[0, 0] > 0
    return len(_digraph_sccs(a)) == 1


def is_single_cycle(a: SftMatrix) -> bool:
    """A trivial shift: the digraph is one directed cycle (finite orbit)."""
    n = a.size
    if n == 0 or not is_irreducible(a):
        return False
    for i in range(n):
        if sum(a.matrix[i, j] for j in range(n)) != 1:
            return False
        if sum(a.matrix[j, i] for j in range(n)) != 1:
            return False
    return True


def decide_flow_equivalence_irreducible(a: SftMatrix, a2: SftMatrix) -> bool:
    """Complete decision for irreducible shifts: both trivial single cycles,
    or neither trivial and the FlowInvariants agree."""
    if not is_irreducible(a) or not is_irreducible(a2):
        raise ValueError("both inputs must be irreducible")
    t1, t2 = is_single_cycle(a), is_single_cycle(a2)
    if t1 or t2:
        return t1 and t2
    return FlowInvariant.of(a) == FlowInvariant.of(a2)


@dataclass(frozen=True)
class CondensedForm:
    """SCC condensation of I - A into poset-blocked form.

    poset: components ordered by reachability (i below j iff i reaches j),
    relabelled so the order respects the integer order; sizes: component
    sizes; permutation: original vertex for each permuted position; blocked:
    P(I - A)P^T over the component poset; trivial_flags: components that are
    a single vertex with no self-loop.
    """

    poset: Poset
    sizes: tuple[int, ...]
    permutation: tuple[int, ...]
    blocked: BlockedMatrix
    trivial_flags: tuple[bool, ...]

    def component_invariant(self, i) -> FlowInvariant:
        """FlowInvariant of component i (1-based), read off the diagonal
        block of I - A."""
        blk = self.blocked.diagonal_block(i)
        return FlowInvariant(
            FgAbelianGroup(*cokernel(blk).iso_class()), determinant(blk)
        )


def condense(a: SftMatrix) -> CondensedForm:
    """Condense into strongly connected components, topologically ordered
    with ties broken by least original vertex index."""
    n = a.size
    if n == 0:
        raise ValueError("cannot condense an empty adjacency matrix")
    comps = _digraph_sccs(a)
    comp_of = {}
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = ci
    k = len(comps)
    succ = [set() for _ in range(k)]
    pred_count = [0] * k
    for u in range(n):
        for v in range(n):
            if a.matrix[u, v] > 0 and comp_of[u] != comp_of[v]:
                if comp_of[v] not in succ[comp_of[u]]:
                    succ[comp_of[u]].add(comp_of[v])
    for ci in range(k):
        for cj in succ[ci]:
            pred_count[cj] += 1
    # Stable topological order on components: among sources, least original
    # vertex first.
    remaining = set(range(k))
    order = []
    counts = list(pred_count)
    while remaining:
        ready = sorted(
            (comps[ci][0], ci) for ci in remaining if counts[ci] == 0
        )
        _, ci = ready[0]
        order.append(ci)
        remaining.remove(ci)
        for cj in succ[ci]:
            counts[cj] -= 1
    position = {ci: p for p, ci in enumerate(order)}
    # Reachability closure gives the component poset.
    reach = [set([ci]) for ci in range(k)]
    for ci in reversed(order):
        for cj in succ[ci]:
            reach[ci] |= reach[cj]
    pairs = {
        (position[ci] + 1, position[cj] + 1)
        for ci in range(k)
        for cj in reach[ci]
    }
    poset = Poset(k, pairs)
    sizes = tuple(len(comps[ci]) for ci in order)
    permutation = tuple(v for ci in order for v in comps[ci])
    i_minus_a = _i_minus_a(a)
    permuted = i_minus_a.submatrix(permutation, permutation)
    shape = BlockShape.square(poset, sizes)
    blocked = BlockedMatrix(shape, permuted)
    trivial = tuple(
        len(comps[ci]) == 1 and a.matrix[comps[ci][0], comps[ci][0]] == 0
        for ci in order
    )
    return CondensedForm(poset, sizes, permutation, blocked, trivial)


def stabilization_target(m, m2):
    """Common stabilization sizes: n_i = 1 where m_i = 1, else
    2 + max(m_i, m2_i); requires the size-one patterns to agree."""
    m = tuple(m)
    m2 = tuple(m2)
    if len(m) != len(m2):
        raise ValueError("size vectors have different lengths")
    for i, (a, b) in enumerate(zip(m, m2), start=1):
        if (a == 1) != (b == 1):
            raise ValueError(
                f"size-one pattern mismatch at component {i}: {a} vs {b}"
            )
    return tuple(1 if a == 1 else 2 + max(a, b) for a, b in zip(m, m2))


def _relabel_blocked(cond: CondensedForm, sigma) -> BlockedMatrix:
    """cond.blocked pulled back along sigma: block (i, j) of the result is
    block (sigma(i), sigma(j)) of the source.  Returns (matrix, sizes)."""
    shape = cond.blocked.shape
    perm = []
    sizes = []
    for i in range(1, shape.poset.size + 1):
        src = sigma[i - 1]
        perm.extend(shape.row_range(src))
        sizes.append(shape.row_sizes[src - 1])
    sub = cond.blocked.matrix.submatrix(perm, perm)
    # sigma is an order isomorphism, so the pulled-back matrix is blocked
    # over the *source* poset with the permuted sizes.
    return sub, tuple(sizes)


def _alignments(c1: CondensedForm, c2: CondensedForm):
    """Order isomorphisms from c1's poset to c2's that respect trivial flags,
    the size-one pattern, and per-component flow invariants."""
    out = []
    inv1 = [c1.component_invariant(i) for i in c1.poset.elements()]
    inv2 = [c2.component_invariant(i) for i in c2.poset.elements()]
    for sigma in c1.poset.order_isomorphisms(c2.poset):
        ok = True
        for i in c1.poset.elements():
            j = sigma[i - 1]
            if c1.trivial_flags[i - 1] != c2.trivial_flags[j - 1]:
                ok = False
                break
            if (c1.sizes[i - 1] == 1) != (c2.sizes[j - 1] == 1):
                ok = False
                break
            if inv1[i - 1] != inv2[j - 1]:
                ok = False
                break
        if ok:
            out.append(sigma)
    return out


def _condensation_summary(c: CondensedForm) -> str:
    parts = []
    for i in c.poset.elements():
        inv = c.component_invariant(i)
        parts.append(
            f"{i}:size={c.sizes[i - 1]},trivial={c.trivial_flags[i - 1]},"
            f"ps={inv.parry_sullivan},bf={inv.bowen_franks}"
        )
    rel = ",".join(f"{i}<{j}" for i, j in c.poset.strict_pairs())
    return f"poset[{rel}] " + " ".join(parts)


def decide_flow_equivalence(
    a: SftMatrix, a2: SftMatrix, budget: SearchBudget = SearchBudget()
) -> Verdict:
    """Three-valued flow equivalence decision.

    Irreducible inputs get the complete Franks decision (yes/no, no witness
    matrix).  Otherwise both inputs are condensed; every invariant-compatible
    alignment of the component posets is stabilized and handed to the blocked
    SL engine.  Yes propagates immediately; No needs every alignment refuted.
    """
    if a.size == 0 or a2.size == 0:
        if a.size == a2.size:
            return Verdict.yes(IntMatrix(0, 0, ()), IntMatrix(0, 0, ()),
                               BudgetReport(0, 0))
        return Verdict.no(
            Certificate("condensation-alignment",
                        f"{a.size} vertices", f"{a2.size} vertices"),
            BudgetReport(0, 0),
        )

    if is_irreducible(a) and is_irreducible(a2):
        if decide_flow_equivalence_irreducible(a, a2):
            return Verdict("yes", report=BudgetReport(0, 0))
        t1, t2 = is_single_cycle(a), is_single_cycle(a2)
        if t1 != t2:
            return Verdict.no(
                Certificate("single-cycle", str(t1), str(t2)), BudgetReport(0, 0)
            )
        i1, i2 = FlowInvariant.of(a), FlowInvariant.of(a2)
        if i1.parry_sullivan != i2.parry_sullivan:
            return Verdict.no(
                Certificate(
                    "parry-sullivan", str(i1.parry_sullivan), str(i2.parry_sullivan)
                ),
                BudgetReport(0, 0),
            )
        return Verdict.no(
            Certificate("bowen-franks", str(i1.bowen_franks), str(i2.bowen_franks)),
            BudgetReport(0, 0),
        )

    c1 = condense(a)
    c2 = condense(a2)
    sigmas = _alignments(c1, c2)
    if not sigmas:
        return Verdict.no(
            Certificate(
                "condensation-alignment",
                _condensation_summary(c1),
                _condensation_summary(c2),
            ),
            BudgetReport(0, 0),
        )

    total_nodes = 0
    max_depth = 0
    all_no = True
    first_no = None
    for sigma in sigmas:
        sub, sizes2 = _relabel_blocked(c2, sigma)
        target = stabilization_target(c1.sizes, sizes2)
        shape2 = BlockShape.square(c1.poset, sizes2)
        b1 = iota_embed(c1.blocked, target)
        b2 = iota_embed(BlockedMatrix(shape2, sub), target)
        verdict = decide_blocked_equivalence(
            b1, b2, group=SL, side=SIDE_UAV, budget=budget
        )
        if verdict.report:
            total_nodes += verdict.report.nodes_expanded
            max_depth = max(max_depth, verdict.report.depth_reached)
        if verdict.is_yes:
            return Verdict.yes(
                verdict.witness[0],
                verdict.witness[1],
                BudgetReport(total_nodes, max_depth),
            )
        if verdict.is_no:
            if first_no is None:
                first_no = verdict.certificate
        else:
            all_no = False
    if all_no and first_no is not None:
        return Verdict.no(first_no, BudgetReport(total_nodes, max_depth))
    return Verdict.unknown(BudgetReport(total_nodes, max_depth))
