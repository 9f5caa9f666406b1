"""blockeq: exact-arithmetic matrix equivalence toolkit.

Poset-blocked integer matrices, SL/GL-blocked equivalence with a three-valued
semi-decision engine (verified witness / invariant certificate / budget
report), flow-equivalence invariants and reductions for shifts of finite
type, and isomorphism of Z-quiver representations and K-webs.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .intmat import (
    AnnihilatorMatrix,
    DimensionError,
    FgAbelianGroup,
    IntMatrix,
    QMatrix,
    SmithDecomposition,
    cokernel,
    determinant,
    image_annihilator,
    kernel_basis,
    smith_normal_form,
    solve_integer,
)
from .poset_block import (
    GL,
    SL,
    BlockShape,
    BlockStructureError,
    BlockedMatrix,
    Poset,
    ShapeError,
    antichain_poset,
    blocked_identity,
    chain_poset,
    elementary_generators,
    group_membership,
    invert_blocked,
    iota_embed,
    multiply_blocked,
    validate_membership,
)
from .equiv import (
    SIDE_UAV,
    SIDE_UAV_INV,
    UNIT_RESTRICTED,
    BudgetReport,
    Certificate,
    Gadget,
    InvariantProfile,
    SearchBudget,
    Verdict,
    decide_blocked_equivalence,
    decide_with_unit,
    gadget_action,
    gadget_pack,
    invariant_profile,
    is_image_endomorphism,
    stabilizer_transport_check,
)
from .sft import (
    CondensedForm,
    FlowInvariant,
    SftMatrix,
    bowen_franks,
    condense,
    decide_flow_equivalence,
    decide_flow_equivalence_irreducible,
    is_irreducible,
    parry_sullivan,
    stabilization_target,
)
from .quiver import (
    Edge,
    KWeb,
    PathModule,
    PresentedGroup,
    Quiver,
    ZRep,
    build_kweb,
    decide_kweb_isomorphism,
    decide_rep_isomorphism,
    is_morphism,
    module_to_zrep,
    zrep_to_module,
)

__version__ = "0.1.0"
