"""Representations, path modules, isomorphism decisions, K-webs."""

import random

import pytest

from blockeq import (
    SL,
    BlockShape,
    BlockedMatrix,
    IntMatrix,
    Quiver,
    SearchBudget,
    ZRep,
    build_kweb,
    decide_kweb_isomorphism,
    decide_rep_isomorphism,
    is_morphism,
    module_to_zrep,
    zrep_to_module,
)
from blockeq.poset_block import antichain_poset, chain_poset
from blockeq.quiver import (
    PathModule,
    PresentedGroup,
    enumerate_isomorphisms,
    normalize_hom,
)

from helpers import rand_blocked, rand_square_shape, rep_iso_oracle, scramble

Z = IntMatrix(1, 0, ())  # one generator, no relations
Z2 = IntMatrix.from_rows([[2]])
Z3 = IntMatrix.from_rows([[3]])


def edge_quiver():
    return Quiver(2, [("e", 0, 1)])


class TestPresentedGroup:
    def test_normalization(self):
        g = PresentedGroup(2, IntMatrix.from_rows([[2, 1], [0, 3]]))
        assert g.iso_class() == (0, (6,))
        assert g.orders == (6,)

    def test_free(self):
        g = PresentedGroup.free(2)
        assert g.iso_class() == (2, ())
        assert g.orders == (0, 0)

    def test_round_trip_transforms(self):
        rng = random.Random(50)
        for _ in range(20):
            gens = rng.randint(0, 3)
            rels = rng.randint(0, 3)
            g = PresentedGroup(
                gens, IntMatrix(gens, rels, [rng.randint(-3, 3) for _ in range(gens * rels)])
            )
            # to_normal . from_normal is the exact identity on normal coords.
            if g.normal_gens:
                prod = g.to_normal * g.from_normal
                assert prod == IntMatrix.identity(g.normal_gens)

    def test_enumerate_isomorphisms_counts(self):
        c6 = PresentedGroup(1, IntMatrix.from_rows([[6]]))
        assert len(enumerate_isomorphisms(c6, c6)) == 2  # units of Z/6
        klein = PresentedGroup(2, IntMatrix.diagonal([2, 2]))
        assert len(enumerate_isomorphisms(klein, klein)) == 6  # GL_2(F_2)
        c2 = PresentedGroup(1, Z2)
        assert enumerate_isomorphisms(c2, PresentedGroup(1, Z3)) == []

    def test_enumeration_cap(self):
        big = PresentedGroup(1, IntMatrix.from_rows([[65]]))
        with pytest.raises(ValueError):
            enumerate_isomorphisms(big, big)

    def test_hom_part_classes(self):
        from blockeq.quiver import (
            hom_cokernel_class,
            hom_image_class,
            hom_kernel_class,
        )

        z4 = PresentedGroup(1, IntMatrix.from_rows([[4]]))
        z2 = PresentedGroup(1, IntMatrix.from_rows([[2]]))
        free = PresentedGroup.free(1)
        reduction = IntMatrix.from_rows([[1]])  # Z/4 ->> Z/2
        assert hom_kernel_class(reduction, z4, z2) == (0, (2,))
        assert hom_image_class(reduction, z4, z2) == (0, (2,))
        assert hom_cokernel_class(reduction, z4, z2) == (0, ())
        doubling = IntMatrix.from_rows([[2]])  # Z --2--> Z
        assert hom_kernel_class(doubling, free, free) == (0, ())
        assert hom_image_class(doubling, free, free) == (1, ())
        assert hom_cokernel_class(doubling, free, free) == (0, (2,))
        to_torsion = IntMatrix.from_rows([[1]])  # Z ->> Z/4
        assert hom_kernel_class(to_torsion, free, z4) == (1, ())
        assert hom_image_class(to_torsion, free, z4) == (0, (4,))
        assert hom_cokernel_class(to_torsion, free, z4) == (0, ())


class TestZRepAndModules:
    def test_single_vertex_free(self):
        q = Quiver(1, [])
        rep = ZRep(q, [Z], [])
        mod = zrep_to_module(rep, q)
        assert mod.group.iso_class() == (1, ())
        assert mod.projections[0] == IntMatrix.identity(1)

    def test_mod2_example(self):
        q = edge_quiver()
        rep = ZRep(q, [Z, Z2], [IntMatrix.from_rows([[1]])])
        mod = zrep_to_module(rep, q)
        assert mod.group.iso_class() == (1, (2,))
        # Edge action: (x, y) -> (0, x mod 2) on generators.
        act = mod.edge_actions[0]
        assert act == IntMatrix.from_rows([[0, 0], [1, 0]])

    def test_zero_maps(self):
        q = edge_quiver()
        rep = ZRep(q, [Z2, Z3], [IntMatrix.zero(1, 1)])
        mod = zrep_to_module(rep, q)
        assert mod.edge_actions[0].is_zero()

    def test_rejects_bad_hom(self):
        q = edge_quiver()
        # Z/2 -> Z/3 sending the generator to a generator is not well-defined.
        with pytest.raises(ValueError):
            ZRep(q, [Z2, Z3], [IntMatrix.from_rows([[1]])])

    def test_path_action_composes(self):
        q = Quiver(3, [("e", 0, 1), ("f", 1, 2)])
        rep = ZRep(
            q,
            [Z, Z, Z],
            [IntMatrix.from_rows([[2]]), IntMatrix.from_rows([[3]])],
        )
        mod = zrep_to_module(rep, q)
        # Path fe acts by 6 on the first summand (right-to-left composition).
        act = mod.act_path([0, 1])
        assert act[2, 0] == 6

    def test_module_laws_validated(self):
        q = Quiver(1, [])
        group = PresentedGroup(1, Z2)
        with pytest.raises(ValueError):
            PathModule(q, group, [IntMatrix.from_rows([[2]])], [])

    def test_roundtrip_examples(self):
        q = edge_quiver()
        cases = [
            ZRep(q, [Z, Z2], [IntMatrix.from_rows([[1]])]),
            ZRep(q, [Z2, Z2], [IntMatrix.from_rows([[1]])]),
            ZRep(q, [Z3, Z3], [IntMatrix.zero(1, 1)]),
        ]
        for rep in cases:
            back = module_to_zrep(zrep_to_module(rep, q), q)
            assert decide_rep_isomorphism(rep, back, q).is_yes

    def test_trivial_module(self):
        q = Quiver(2, [])
        rep = ZRep(q, [IntMatrix.from_rows([[1]]), IntMatrix.from_rows([[1]])], [])
        back = module_to_zrep(zrep_to_module(rep, q), q)
        assert all(g.group.is_trivial for g in back.groups)

    def test_single_vertex_module_recovers_whole_group(self):
        q = Quiver(1, [])
        rep = ZRep(q, [IntMatrix.diagonal([2, 0])], [])
        mod = zrep_to_module(rep, q)
        back = module_to_zrep(mod, q)
        assert back.groups[0].iso_class() == mod.group.iso_class()


class TestIsMorphism:
    def test_identity_family(self):
        q = edge_quiver()
        rep = ZRep(q, [Z2, Z2], [IntMatrix.from_rows([[1]])])
        assert is_morphism([IntMatrix.identity(1)] * 2, rep, rep, q)

    def test_zero_family(self):
        q = edge_quiver()
        rep = ZRep(q, [Z2, Z2], [IntMatrix.from_rows([[1]])])
        assert is_morphism([IntMatrix.zero(1, 1)] * 2, rep, rep, q)

    def test_square_fails(self):
        q = edge_quiver()
        rep_id = ZRep(q, [Z2, Z2], [IntMatrix.from_rows([[1]])])
        rep_zero = ZRep(q, [Z2, Z2], [IntMatrix.zero(1, 1)])
        assert not is_morphism([IntMatrix.identity(1)] * 2, rep_id, rep_zero, q)


class TestDecideRepIsomorphism:
    def test_self_yes(self):
        q = edge_quiver()
        rep = ZRep(q, [Z2, Z2], [IntMatrix.from_rows([[1]])])
        v = decide_rep_isomorphism(rep, rep, q)
        assert v.is_yes

    def test_vertex_invariant_no(self):
        q = Quiver(1, [])
        v = decide_rep_isomorphism(
            ZRep(q, [Z2], []), ZRep(q, [Z3], []), q
        )
        assert v.is_no
        assert v.certificate.name.startswith("vertex-group")

    def test_edge_refutation_id_vs_zero(self):
        q = edge_quiver()
        rep_id = ZRep(q, [Z2, Z2], [IntMatrix.from_rows([[1]])])
        rep_zero = ZRep(q, [Z2, Z2], [IntMatrix.zero(1, 1)])
        v = decide_rep_isomorphism(rep_id, rep_zero, q)
        assert v.is_no

    def test_infinite_groups_found(self):
        # Z --2--> Z vs Z --(-2)--> Z are isomorphic via sign flip.
        q = edge_quiver()
        r1 = ZRep(q, [Z, Z], [IntMatrix.from_rows([[2]])])
        r2 = ZRep(q, [Z, Z], [IntMatrix.from_rows([[-2]])])
        v = decide_rep_isomorphism(r1, r2, q)
        assert v.is_yes

    def test_infinite_groups_refuted_by_cokernel(self):
        q = edge_quiver()
        r1 = ZRep(q, [Z, Z], [IntMatrix.from_rows([[2]])])
        r2 = ZRep(q, [Z, Z], [IntMatrix.from_rows([[3]])])
        v = decide_rep_isomorphism(r1, r2, q)
        assert v.is_no
        assert v.certificate.name.startswith("edge-")

    def test_unknown_under_tiny_budget(self):
        q = edge_quiver()
        r1 = ZRep(q, [Z, Z], [IntMatrix.from_rows([[5]])])
        r2 = ZRep(q, [Z, Z], [IntMatrix.from_rows([[-5]])])
        v = decide_rep_isomorphism(r1, r2, q, SearchBudget(1, 2, 0))
        assert v.is_unknown

    def test_oracle_agreement_small(self):
        rng = random.Random(51)
        q = edge_quiver()
        groups = [Z2, Z3, IntMatrix.from_rows([[4]]), IntMatrix.diagonal([2, 2])]
        checked = 0
        for g1 in groups:
            for g2 in groups:
                s = PresentedGroup(g1.rows, g1)
                t = PresentedGroup(g2.rows, g2)
                for _ in range(3):
                    f1 = _random_hom(rng, s, t)
                    f2 = _random_hom(rng, s, t)
                    rep1 = ZRep(q, [g1, g2], [f1])
                    rep2 = ZRep(q, [g1, g2], [f2])
                    verdict = decide_rep_isomorphism(rep1, rep2, q)
                    assert verdict.status in ("yes", "no")
                    assert verdict.is_yes == rep_iso_oracle(rep1, rep2, q)
                    checked += 1
        assert checked == 48


def _random_hom(rng, src: PresentedGroup, dst: PresentedGroup) -> IntMatrix:
    """Random well-defined raw map src -> dst (rejection sampling)."""
    from blockeq.quiver import hom_well_defined

    while True:
        f = IntMatrix(
            dst.gens, src.gens, [rng.randint(-3, 3) for _ in range(dst.gens * src.gens)]
        )
        if hom_well_defined(normalize_hom(f, src, dst), src, dst):
            return f


class TestKWeb:
    def test_identity_all_trivial(self):
        shape = BlockShape.square(chain_poset(2), (1, 1))
        web = build_kweb(BlockedMatrix(shape, IntMatrix.identity(2)))
        assert all(cls == (0, ()) for cls in web.group_list())

    def test_chain_example_groups_and_map(self):
        shape = BlockShape.square(chain_poset(2), (1, 1))
        web = build_kweb(BlockedMatrix(shape, IntMatrix.from_rows([[2, 1], [0, 3]])))
        by_label = {n.label(): web.groups[n] for n in web.nodes}
        assert by_label["cok[1]"].iso_class() == (0, (2,))
        assert by_label["cok[2]"].iso_class() == (0, (3,))
        assert by_label["cok[1, 2]"].iso_class() == (0, (6,))
        # The inclusion cok{1} -> cok{1,2} sends the generator to 3 mod 6
        # (e1 = -3*e2 modulo the column lattice).
        arrow = next(a for a in web.arrows if a.tag.startswith("cok-incl"))
        src = web.groups[arrow.src]
        dst = web.groups[arrow.dst]
        normal = normalize_hom(arrow.matrix, src, dst)
        assert normal == IntMatrix.from_rows([[3]])

    def test_antichain_delta_zero(self):
        shape = BlockShape.square(antichain_poset(2), (1, 1))
        web = build_kweb(BlockedMatrix(shape, IntMatrix.diagonal([2, 3])))
        for arrow in web.arrows:
            if arrow.tag.startswith("delta"):
                assert arrow.matrix.is_zero()

    def test_exactness_random(self):
        rng = random.Random(52)
        for _ in range(25):
            shape = rand_square_shape(rng)
            rand = rand_blocked(rng, shape)
            build_kweb(rand)  # exactness asserted inside

    def test_kweb_iso_self(self):
        shape = BlockShape.square(chain_poset(2), (1, 1))
        web = build_kweb(BlockedMatrix(shape, IntMatrix.from_rows([[2, 1], [0, 3]])))
        assert decide_kweb_isomorphism(web, web).is_yes

    def test_kweb_iso_spec_pair(self):
        shape = BlockShape.square(chain_poset(2), (1, 1))
        b1 = BlockedMatrix(shape, IntMatrix.from_rows([[2, 1], [0, 3]]))
        b2 = BlockedMatrix(shape, IntMatrix.from_rows([[2, 0], [0, 3]]))
        # Consistency: those two really are SL-blocked equivalent.
        u = IntMatrix.from_rows([[1, 1], [0, 1]])
        v = IntMatrix.from_rows([[1, -2], [0, 1]])
        assert u * b1.matrix * v == b2.matrix
        verdict = decide_kweb_isomorphism(build_kweb(b1), build_kweb(b2))
        assert verdict.is_yes

    def test_kweb_iso_refuted(self):
        shape = BlockShape.square(antichain_poset(2), (1, 1))
        w1 = build_kweb(BlockedMatrix(shape, IntMatrix.diagonal([2, 0])))
        w2 = build_kweb(BlockedMatrix(shape, IntMatrix.diagonal([4, 0])))
        v = decide_kweb_isomorphism(w1, w2)
        assert v.is_no

    def test_necessity_never_no(self):
        rng = random.Random(53)
        for _ in range(8):
            shape = rand_square_shape(rng)
            b = rand_blocked(rng, shape)
            u, v, moved = scramble(rng, b, SL, 4)
            w1 = build_kweb(b)
            w2 = build_kweb(moved)
            verdict = decide_kweb_isomorphism(w1, w2, SearchBudget(2, 2_000, 0))
            assert not verdict.is_no

    def test_shape_mismatch(self):
        s1 = BlockShape.square(chain_poset(2), (1, 1))
        s2 = BlockShape.square(antichain_poset(2), (1, 1))
        w1 = build_kweb(BlockedMatrix(s1, IntMatrix.identity(2)))
        w2 = build_kweb(BlockedMatrix(s2, IntMatrix.identity(2)))
        from blockeq.poset_block import ShapeError

        with pytest.raises(ShapeError):
            decide_kweb_isomorphism(w1, w2)
