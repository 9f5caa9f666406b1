"""The three-valued engine: profiles, searches, gadgets, unit conditions."""

import random
from fractions import Fraction
from math import lcm

import pytest

from blockeq import (
    GL,
    SL,
    SIDE_UAV,
    SIDE_UAV_INV,
    UNIT_RESTRICTED,
    BlockShape,
    BlockedMatrix,
    IntMatrix,
    Poset,
    SearchBudget,
    blocked_identity,
    decide_blocked_equivalence,
    decide_with_unit,
    gadget_action,
    gadget_pack,
    invariant_profile,
    is_image_endomorphism,
    smith_normal_form,
    stabilizer_transport_check,
)
from blockeq.equiv import StabilizerError
from blockeq.intmat import DimensionError, invert_unimodular, solve_integer
from blockeq.poset_block import ShapeError, chain_poset, antichain_poset

from helpers import (
    make_solver,
    rand_blocked,
    rand_square_shape,
    scramble,
    sign_unimodulars,
    stabilizer_v_side,
)


def single_block(value):
    shape = BlockShape.square(Poset(1), (1,))
    return BlockedMatrix(shape, IntMatrix.from_rows([[value]]))


class TestInvariantProfile:
    def test_identity_trivial(self):
        shape = BlockShape.square(chain_poset(2), (1, 1))
        p = invariant_profile(blocked_identity(shape), SL)
        assert p.cokernel.is_trivial
        assert all(sign == 1 for _, sign in p.det_signs)
        assert all(cls.is_trivial for _, cls in p.convex_cokernels)

    def test_single_blocks_differ(self):
        p2 = invariant_profile(single_block(2), SL)
        p3 = invariant_profile(single_block(3), SL)
        assert p2 != p3
        diffs = p2.differences(p3)
        assert diffs and diffs[0].name == "cokernel"

    def test_invariance_under_action(self):
        rng = random.Random(21)
        for _ in range(15):
            shape = rand_square_shape(rng)
            a = rand_blocked(rng, shape)
            for group in (SL, GL):
                _, _, b = scramble(rng, a, group, 5)
                assert invariant_profile(a, group) == invariant_profile(b, group)

    def test_rectangular_accepted(self):
        shape = BlockShape(chain_poset(2), (1, 2), (2, 1))
        m = rand_blocked(random.Random(3), shape)
        p = invariant_profile(m, SL)
        assert p.det_signs == ()


class TestDecideBlockedEquivalence:
    def test_reflexive(self):
        rng = random.Random(22)
        a = rand_blocked(rng, rand_square_shape(rng))
        v = decide_blocked_equivalence(a, a, group=SL)
        assert v.is_yes
        u, w = v.witness
        assert u * a.matrix * w == a.matrix

    def test_trivial_sl_group_refutes(self):
        v = decide_blocked_equivalence(single_block(2), single_block(3), group=SL)
        assert v.is_no
        assert v.certificate is not None

    def test_gl_sign_flip(self):
        v = decide_blocked_equivalence(
            single_block(1), single_block(-1), group=GL, side=SIDE_UAV
        )
        assert v.is_yes
        u, w = v.witness
        assert u * IntMatrix.from_rows([[1]]) * w == IntMatrix.from_rows([[-1]])

    def test_shape_mismatch(self):
        a = single_block(1)
        other = BlockedMatrix(
            BlockShape.square(chain_poset(2), (1, 1)), IntMatrix.identity(2)
        )
        with pytest.raises(ShapeError):
            decide_blocked_equivalence(a, other)

    def test_side_conventions(self):
        rng = random.Random(23)
        shape = BlockShape.square(chain_poset(2), (1, 1))
        a = rand_blocked(rng, shape)
        u, v, b = scramble(rng, a, SL, 4)
        for side in (SIDE_UAV, SIDE_UAV_INV):
            verdict = decide_blocked_equivalence(a, b, group=SL, side=side)
            assert verdict.is_yes
            wu, wv = verdict.witness
            if side == SIDE_UAV:
                assert wu * a.matrix * wv == b.matrix
            else:
                assert wu * a.matrix * invert_unimodular(wv) == b.matrix

    def test_determinism(self):
        rng = random.Random(24)
        shape = rand_square_shape(rng)
        a = rand_blocked(rng, shape)
        _, _, b = scramble(rng, a, SL, 5)
        v1 = decide_blocked_equivalence(a, b, group=SL)
        v2 = decide_blocked_equivalence(a, b, group=SL)
        assert v1 == v2

    def test_unknown_on_tiny_budget(self):
        shape = BlockShape.square(Poset(1), (2,))
        a = BlockedMatrix(shape, IntMatrix.from_rows([[2, 1], [1, 1]]))
        b = BlockedMatrix(shape, IntMatrix.from_rows([[1, 1], [1, 2]]))
        v = decide_blocked_equivalence(
            a, b, group=SL, budget=SearchBudget(max_depth=1, max_nodes=5)
        )
        assert v.is_unknown
        assert v.report.nodes_expanded <= 5

    def test_no_certificate_is_invariant(self):
        # Sample group elements and confirm the profile the certificate came
        # from never moves.
        rng = random.Random(25)
        a = single_block(2)
        b = single_block(3)
        v = decide_blocked_equivalence(a, b, group=SL)
        assert v.is_no
        for _ in range(50):
            _, _, moved = scramble(rng, a, SL, 4)
            assert invariant_profile(moved, SL) == invariant_profile(a, SL)

    def test_det_sign_certificate(self):
        # Equal cokernels and block classes, opposite determinant signs: SL
        # refutes through the sign invariant.
        v = decide_blocked_equivalence(single_block(2), single_block(-2), group=SL)
        assert v.is_no
        assert v.certificate.name == "diagonal-det-sign[1]"
        # Under GL the sign is not an invariant and the pair is equivalent.
        v = decide_blocked_equivalence(single_block(2), single_block(-2), group=GL)
        assert v.is_yes

    def test_diagonal_block_certificate(self):
        shape = BlockShape.square(antichain_poset(2), (1, 1))
        a = BlockedMatrix(shape, IntMatrix.diagonal([2, 3]))
        b = BlockedMatrix(shape, IntMatrix.diagonal([6, 1]))
        v = decide_blocked_equivalence(a, b, group=GL)
        assert v.is_no
        assert v.certificate.name.startswith("diagonal-block-cokernel")

    def test_convex_subset_certificate(self):
        # Whole cokernels (Z/2 + Z/4), diagonal blocks, and det signs all
        # agree; only a proper convex pair distinguishes the two.
        shape = BlockShape.square(chain_poset(3), (1, 1, 1))
        a = BlockedMatrix(
            shape, IntMatrix.from_rows([[2, 0, 0], [0, 2, 1], [0, 0, 2]])
        )
        b = BlockedMatrix(
            shape, IntMatrix.from_rows([[2, 1, 0], [0, 2, 0], [0, 0, 2]])
        )
        pa = invariant_profile(a, SL)
        pb = invariant_profile(b, SL)
        assert pa.cokernel == pb.cokernel
        assert pa.diagonal_blocks == pb.diagonal_blocks
        assert pa.det_signs == pb.det_signs
        v = decide_blocked_equivalence(a, b, group=SL)
        assert v.is_no
        assert v.certificate.name.startswith("convex-cokernel")

    def test_stabilizer_sweep_truncates_cleanly(self):
        shape = BlockShape.square(Poset(1), (2,))
        a = BlockedMatrix(shape, IntMatrix.from_rows([[2, 0], [0, 0]]))
        x = IntMatrix.column([1, 1])
        y = IntMatrix.column([1, 0])
        v = decide_with_unit(a, a, x, y, group=SL, budget=SearchBudget(2, 30, 0))
        assert v.status in ("yes", "unknown")

    def test_witness_is_lex_least_at_min_depth(self):
        # [1] vs [-1] under GL has exactly two depth-2 witnesses; the engine
        # must pick the lexicographically least (U, V) pair.
        v = decide_blocked_equivalence(
            single_block(1), single_block(-1), group=GL, side=SIDE_UAV
        )
        u, w = v.witness
        assert (u.entries, w.entries) == ((-1,), (1,))


class TestRecoveryAcrossGroups:
    def test_rectangular_scramble_recover(self):
        # The five-element rectangular shape: rows blocked by m, columns by
        # n, transformations from the two different square groups.
        poset = Poset(5, [(1, 2), (1, 3), (1, 4), (1, 5), (2, 5), (3, 4)])
        shape = BlockShape(poset, (1, 0, 1, 0, 1), (1, 1, 0, 1, 1))
        rng = random.Random(263)
        for _ in range(10):
            a = rand_blocked(rng, shape, -2, 2)
            u, v, b = scramble(rng, a, SL, 5)
            verdict = decide_blocked_equivalence(a, b, group=SL)
            assert verdict.is_yes
            wu, wv = verdict.witness
            assert wu.rows == 3 and wv.rows == 4
            assert wu * a.matrix * wv == b.matrix

    def test_gl_scramble_recover(self):
        rng = random.Random(260)
        for _ in range(10):
            shape = rand_square_shape(rng, max_poset=2, max_block=2)
            a = rand_blocked(rng, shape, -2, 2)
            _, _, b = scramble(rng, a, GL, 5)
            verdict = decide_blocked_equivalence(a, b, group=GL)
            assert verdict.is_yes
            u, w = verdict.witness
            assert u * a.matrix * w == b.matrix

    def test_unit_scramble_recover(self):
        from blockeq.poset_block import generator_moves, move_matrix, GL as _GL

        rng = random.Random(261)
        for _ in range(10):
            shape = rand_square_shape(rng, max_poset=2, max_block=2)
            restricted = tuple(
                i for i in shape.poset.elements() if shape.col_sizes[i - 1] == 1
            )
            a = rand_blocked(rng, shape, -2, 2)
            left = generator_moves(shape.row_square(), _GL)
            right = generator_moves(shape.col_square(), _GL, restricted)
            n = shape.total_rows
            u = IntMatrix.identity(n)
            w = IntMatrix.identity(n)
            for _ in range(rng.randint(1, 5)):
                if left and (not right or rng.random() < 0.5):
                    u = move_matrix(left[rng.randrange(len(left))], n) * u
                elif right:
                    w = w * move_matrix(right[rng.randrange(len(right))], n)
            b = BlockedMatrix(shape, u * a.matrix * w)
            verdict = decide_blocked_equivalence(a, b, group=UNIT_RESTRICTED)
            assert verdict.is_yes
            wu, wv = verdict.witness
            assert wu * a.matrix * wv == b.matrix
            for i in restricted:
                sq = shape.col_square()
                blk = wv.submatrix(sq.row_range(i), sq.col_range(i))
                assert blk.entries == (1,)


class TestDecideWithUnitOracle:
    def test_finite_shapes_match_exhaustive_oracle(self):
        # On provably finite pair groups the engine is complete; compare with
        # direct enumeration of the full group.
        rng = random.Random(262)
        shape = BlockShape.square(antichain_poset(2), (1, 1))
        from itertools import product as iproduct

        signs = [IntMatrix.diagonal(d) for d in iproduct((1, -1), repeat=2)]
        for trial in range(40):
            a = BlockedMatrix(
                shape, IntMatrix.diagonal([rng.randint(-2, 2), rng.randint(-2, 2)])
            )
            b_mat = IntMatrix.diagonal(
                [a.matrix[0, 0] * rng.choice((1, -1)),
                 a.matrix[1, 1] * rng.choice((1, -1))]
            )
            b = BlockedMatrix(shape, b_mat)
            x = IntMatrix.column([rng.randint(-2, 2), rng.randint(-2, 2)])
            y = IntMatrix.column([rng.randint(-2, 2), rng.randint(-2, 2)])
            bt = b.matrix.transpose()
            oracle = any(
                u * a.matrix * invert_unimodular(v) == b.matrix
                and solve_integer(
                    bt, invert_unimodular(v).transpose() * x - y
                )
                is not None
                for u in signs
                for v in signs
            )
            verdict = decide_with_unit(a, b, x, y, group=GL)
            assert verdict.status in ("yes", "no")
            assert verdict.is_yes == oracle


class TestUnitRestricted:
    def test_restriction_refutes_where_gl_succeeds(self):
        shape = BlockShape.square(antichain_poset(2), (1, 1))
        zero = BlockedMatrix(shape, IntMatrix.zero(2, 2))
        x = IntMatrix.column([1, 0])
        y = IntMatrix.column([-1, 0])
        v_gl = decide_with_unit(zero, zero, x, y, group=GL)
        assert v_gl.is_yes
        v_unit = decide_with_unit(zero, zero, x, y, group=UNIT_RESTRICTED)
        assert v_unit.is_no

    def test_unit_witness_blocks_are_one(self):
        shape = BlockShape.square(chain_poset(2), (1, 1))
        rng = random.Random(26)
        a = rand_blocked(rng, shape)
        v = decide_blocked_equivalence(a, a, group=UNIT_RESTRICTED)
        assert v.is_yes
        _, w = v.witness
        assert w[0, 0] == 1 and w[1, 1] == 1


class TestDecideWithUnit:
    def test_identity_pair(self):
        a = single_block(1)
        v = decide_with_unit(a, a, IntMatrix.column([0]), IntMatrix.column([0]))
        assert v.is_yes

    def test_finite_enumeration_refutes(self):
        a = single_block(0)
        v = decide_with_unit(a, a, IntMatrix.column([1]), IntMatrix.column([2]), group=GL)
        assert v.is_no
        assert v.certificate.name == "finite-enumeration"

    def test_membership_witness(self):
        a = single_block(2)
        v = decide_with_unit(a, a, IntMatrix.column([1]), IntMatrix.column([3]), group=GL)
        assert v.is_yes
        u, w = v.witness
        vin_t = invert_unimodular(w).transpose()
        diff = vin_t * IntMatrix.column([1]) - IntMatrix.column([3])
        assert solve_integer(a.matrix.transpose(), diff) is not None

    def test_stabilizer_sweep_finds_coset_witness(self):
        # The identity satisfies (1) but fails (2): x - y = (1, 0) is odd in
        # the first coordinate while im_Z(A^T) = span{(2, 0)}.  The stabilizer
        # V = [[1, 0], [1, 1]] fixes A and moves x onto y, so the sweep must
        # answer yes.
        shape = BlockShape.square(Poset(1), (2,))
        a = BlockedMatrix(shape, IntMatrix.from_rows([[2, 0], [0, 0]]))
        x = IntMatrix.column([1, 1])
        y = IntMatrix.column([0, 1])
        assert solve_integer(a.matrix.transpose(), x - y) is None
        v = decide_with_unit(a, a, x, y, group=SL, budget=SearchBudget(6, 50_000, 0))
        assert v.is_yes
        u, w = v.witness
        vin_t = invert_unimodular(w).transpose()
        assert solve_integer(a.matrix.transpose(), vin_t * x - y) is not None
        assert u * a.matrix * invert_unimodular(w) == a.matrix

    def test_dimension_errors(self):
        a = single_block(1)
        with pytest.raises(DimensionError):
            decide_with_unit(a, a, IntMatrix.column([1, 2]), IntMatrix.column([0]))

    def test_rectangular_constructed_instances(self):
        # Build instances whose answer is yes by construction:
        # B = U A V^-1 and y = (V^-1)^T x - B^T r.
        poset = Poset(5, [(1, 2), (1, 3), (1, 4), (1, 5), (2, 5), (3, 4)])
        shape = BlockShape(poset, (1, 0, 1, 0, 1), (1, 1, 0, 1, 1))
        rng = random.Random(264)
        for _ in range(6):
            a = rand_blocked(rng, shape, -2, 2)
            u, v, moved = scramble(rng, a, GL, 4)
            b = BlockedMatrix(shape, u * a.matrix * invert_unimodular(v))
            x = IntMatrix.column([rng.randint(-2, 2) for _ in range(4)])
            r = IntMatrix.column([rng.randint(-1, 1) for _ in range(3)])
            y = invert_unimodular(v).transpose() * x - b.matrix.transpose() * r
            verdict = decide_with_unit(a, b, x, y, group=GL,
                                       budget=SearchBudget(8, 100_000, 0))
            assert verdict.is_yes
            wu, wv = verdict.witness
            assert wu * a.matrix * invert_unimodular(wv) == b.matrix
            diff = invert_unimodular(wv).transpose() * x - y
            assert solve_integer(b.matrix.transpose(), diff) is not None


class TestGadget:
    def test_pack_1x1(self):
        g = gadget_pack(IntMatrix.identity(1), (2,))
        assert g.matrix == IntMatrix.from_rows([[1, -2], [0, 1]])

    def test_pack_identity(self):
        g = gadget_pack(IntMatrix.identity(2), (0, 0))
        assert g.matrix == IntMatrix.identity(6)

    def test_pack_negative(self):
        g = gadget_pack(IntMatrix.from_rows([[-1]]), (0, 1))
        assert g.matrix == IntMatrix.from_rows(
            [[-1, 0, -1], [0, 1, 0], [0, 0, 1]]
        )

    def test_unpack_inverts_pack(self):
        rng = random.Random(27)
        for _ in range(20):
            n = rng.randint(1, 3)
            v = None
            while v is None:
                cand = IntMatrix(n, n, [rng.randint(-2, 2) for _ in range(n * n)])
                from blockeq import determinant

                if determinant(cand) in (1, -1):
                    v = cand
            r = tuple(rng.randint(-4, 4) for _ in range(rng.randint(1, 3)))
            g = gadget_pack(v, r)
            v2, r2 = g.unpack()
            assert v2 == v and r2 == r

    def test_pack_rejects_non_unimodular(self):
        with pytest.raises(ValueError):
            gadget_pack(IntMatrix.from_rows([[2]]), (1,))

    def test_closure_block_law(self):
        # (KL)_{0j} = K00*L0j + K0j with identity diagonal elsewhere.
        rng = random.Random(28)
        for _ in range(25):
            n = rng.randint(1, 2)
            m = rng.randint(1, 3)
            vs = [v for v in sign_unimodulars(n)]
            v1 = vs[rng.randrange(len(vs))]
            v2 = vs[rng.randrange(len(vs))]
            k = gadget_pack(v1, [rng.randint(-3, 3) for _ in range(m)])
            l = gadget_pack(v2, [rng.randint(-3, 3) for _ in range(m)])
            prod = k.matrix * l.matrix
            from blockeq.equiv import Gadget

            kl = Gadget(prod, n, m)
            for j in range(1, m + 1):
                assert kl.k0(j) == k.k00 * l.k0(j) + k.k0(j)
            for i in range(1, m + 1):
                assert kl.block(i, i) == IntMatrix.identity(n)

    def test_gadget_is_unimodular(self):
        # Block-triangular with identity diagonal: det K = det K00 = +-1.
        from blockeq import determinant

        rng = random.Random(280)
        for _ in range(10):
            n = rng.randint(1, 2)
            units = sign_unimodulars(n)
            v = units[rng.randrange(len(units))]
            g = gadget_pack(v, [rng.randint(-3, 3) for _ in range(2)])
            assert determinant(g.matrix) == determinant(g.k00)
            assert determinant(g.matrix) in (1, -1)

    def test_kappa_action(self):
        g = gadget_pack(IntMatrix.identity(1), (2,))
        out = gadget_action(g, [IntMatrix.column([5]), IntMatrix.column([3])])
        # head = K00*5 + (-2)*3 = -1, tail fixed
        assert out[0] == IntMatrix.column([-1])
        assert out[1] == IntMatrix.column([3])


class TestImageEndomorphism:
    def test_identity_always(self):
        rng = random.Random(29)
        for _ in range(10):
            k = rng.randint(1, 3)
            c = IntMatrix(2, k, [rng.randint(-2, 2) for _ in range(2 * k)])
            assert is_image_endomorphism(IntMatrix.identity(2), c)

    def test_escaping_image(self):
        c = IntMatrix.from_rows([[1], [0]])
        d = IntMatrix.from_rows([[0, 0], [1, 0]])
        assert not is_image_endomorphism(d, c)

    def test_full_image_any_d(self):
        rng = random.Random(30)
        for _ in range(10):
            d = IntMatrix(2, 2, [rng.randint(-5, 5) for _ in range(4)])
            assert is_image_endomorphism(d, IntMatrix.identity(2))


class TestStabilizerTransport:
    def test_trivial_pairs(self):
        a = IntMatrix.from_rows([[0, 1], [0, 0]])
        assert stabilizer_transport_check(a, IntMatrix.identity(2), IntMatrix.identity(2))

    def test_sign_pair(self):
        a = IntMatrix.from_rows([[2]])
        m = IntMatrix.from_rows([[-1]])
        assert stabilizer_transport_check(a, m, m)

    def test_rejects_non_stabilizer(self):
        a = IntMatrix.from_rows([[2]])
        with pytest.raises(StabilizerError):
            stabilizer_transport_check(a, IntMatrix.from_rows([[-1]]), IntMatrix.identity(1))

    def test_always_true_on_enumerated_stabilizers(self):
        rng = random.Random(31)
        for _ in range(10):
            m, n = rng.randint(1, 2), rng.randint(1, 2)
            a = IntMatrix(m, n, [rng.randint(-2, 2) for _ in range(m * n)])
            for v in stabilizer_v_side(a)[:10]:
                # find matching u by direct scan
                for u in sign_unimodulars(m):
                    if u * a == a * v:
                        assert stabilizer_transport_check(a, u, v)
                        break


def saturation_basis(at: IntMatrix) -> IntMatrix:
    """Basis of im_Q(A^T) intersected with Z^n, from the left Smith
    transform."""
    dec = smith_normal_form(at)
    r = dec.rank
    u_inv = invert_unimodular(dec.U)
    return u_inv.submatrix(range(at.rows), range(r))


def common_denominator(at: IntMatrix) -> int:
    """The l with l * (im_Q(A^T) cap Z^n) inside im_Z(A^T): write each
    saturation basis vector as A^T c with rational c and take the lcm of
    denominators."""
    sat = saturation_basis(at)
    dec = smith_normal_form(at)
    diag = dec.diagonal()
    denom = 1
    for j in range(sat.cols):
        b = sat.submatrix(range(at.rows), [j])
        c = dec.U * b
        for i, d in enumerate(diag):
            if d != 0:
                q = Fraction(c[i, 0], d)
                denom = lcm(denom, q.denominator)
    return denom


class TestLemmaSevenMachinery:
    def test_common_denominator_bound(self):
        rng = random.Random(32)
        for _ in range(25):
            m, n = rng.randint(1, 3), rng.randint(1, 3)
            a = IntMatrix(m, n, [rng.randint(-2, 2) for _ in range(m * n)])
            at = a.transpose()
            ell = common_denominator(at)
            sat = saturation_basis(at)
            solver = make_solver(at)
            for j in range(sat.cols):
                scaled = IntMatrix.column(
                    [ell * sat[i, j] for i in range(at.rows)]
                )
                assert solver(scaled) is not None

    def test_gadget_equivalence_small(self):
        # Existence of a sign-bounded stabilizer pair satisfying both Lemma-7
        # conditions must agree with the gadget-action formulation.
        rng = random.Random(33)
        for _ in range(25):
            m, n = rng.randint(1, 2), rng.randint(1, 2)
            a = IntMatrix(m, n, [rng.randint(-2, 2) for _ in range(m * n)])
            x = IntMatrix.column([rng.randint(-3, 3) for _ in range(n)])
            y = IntMatrix.column([rng.randint(-3, 3) for _ in range(n)])
            at = a.transpose()
            solver = make_solver(at)
            route1 = False
            route2 = False
            for v in stabilizer_v_side(a):
                diff = invert_unimodular(v).transpose() * x - y
                r = solver(diff)
                if r is None:
                    continue
                route1 = True
                gadget = gadget_pack(v, r.column_values(0))
                cols = [x] + [
                    at.submatrix(range(n), [j]) for j in range(m)
                ]
                out = gadget_action(gadget, cols)
                assert out[0] == y
                route2 = True
                break
            assert route1 == route2
