"""JSON schemas for every wire format the toolkit speaks.

Integers travel as canonical decimal strings (no leading zeros, '-' only on
negatives) so arbitrary precision survives any JSON parser; rationals as
"p/q" with q >= 1 and gcd(p, q) = 1.  Parsing is exact and strict; emission
is canonical, so emit(parse(emit(x))) == emit(x) byte for byte.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

from .equiv import BudgetReport, Certificate, SearchBudget, Verdict
from .intmat import FgAbelianGroup, IntMatrix
from .poset_block import BlockedMatrix, BlockShape, Poset
from .quiver import Edge, Quiver, ZRep

_INT_RE = re.compile(r"^(0|-?[1-9][0-9]*)$")


class SchemaError(ValueError):
    """Input does not match the declared schema."""


def int_to_str(v: int) -> str:
    return str(v)


def int_from_str(s) -> int:
    if not isinstance(s, str) or not _INT_RE.match(s):
        raise SchemaError(f"not a canonical integer string: {s!r}")
    return int(s)


def fraction_to_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def fraction_from_str(s) -> Fraction:
    if not isinstance(s, str):
        raise SchemaError(f"not a rational string: {s!r}")
    num, slash, den = s.partition("/")
    if not _INT_RE.match(num):
        raise SchemaError(f"not a rational string: {s!r}")
    if slash:
        if not _INT_RE.match(den) or den.startswith("-") or int(den) == 0:
            raise SchemaError(f"not a rational string: {s!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(num))


def _require_keys(doc, keys, what):
    if not isinstance(doc, dict):
        raise SchemaError(f"{what}: expected an object")
    missing = set(keys) - doc.keys()
    extra = doc.keys() - set(keys)
    if missing:
        raise SchemaError(f"{what}: missing keys {sorted(missing)}")
    if extra:
        raise SchemaError(f"{what}: unexpected keys {sorted(extra)}")


def _count(v, what):
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise SchemaError(f"{what}: expected a nonnegative count, got {v!r}")
    return v


# -- matrices ----------------------------------------------------------------


def matrix_to_json(m: IntMatrix) -> dict:
    return {
        "rows": m.rows,
        "cols": m.cols,
        "entries": [int_to_str(e) for e in m.entries],
    }


def matrix_from_json(doc) -> IntMatrix:
    _require_keys(doc, ("rows", "cols", "entries"), "matrix")
    rows = _count(doc["rows"], "matrix.rows")
    cols = _count(doc["cols"], "matrix.cols")
    if not isinstance(doc["entries"], list):
        raise SchemaError("matrix.entries: expected a list")
    entries = [int_from_str(e) for e in doc["entries"]]
    if len(entries) != rows * cols:
        raise SchemaError("matrix.entries: wrong length")
    return IntMatrix(rows, cols, entries)


# -- posets, shapes, blocked matrices -----------------------------------------


def poset_to_json(p: Poset) -> dict:
    return {"n": p.size, "leq": [[i, j] for i, j in p.strict_pairs()]}


def poset_from_json(doc) -> Poset:
    """Reflexive pairs are optional; non-normalized relations are repaired by
    the stable topological relabelling (see Poset.normalized)."""
    p, _ = poset_from_json_with_relabel(doc)
    return p


def poset_from_json_with_relabel(doc):
    _require_keys(doc, ("n", "leq"), "poset")
    n = _count(doc["n"], "poset.n")
    pairs = []
    if not isinstance(doc["leq"], list):
        raise SchemaError("poset.leq: expected a list of pairs")
    for item in doc["leq"]:
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in item)
        ):
            raise SchemaError(f"poset.leq: bad pair {item!r}")
        pairs.append((item[0], item[1]))
    try:
        return Poset.normalized(n, pairs)
    except ValueError as exc:
        raise SchemaError(f"poset: {exc}") from exc


def shape_to_json(s: BlockShape) -> dict:
    return {
        "poset": poset_to_json(s.poset),
        "m": list(s.row_sizes),
        "n": list(s.col_sizes),
    }


def shape_from_json(doc) -> BlockShape:
    _require_keys(doc, ("poset", "m", "n"), "shape")
    poset, relabel = poset_from_json_with_relabel(doc["poset"])
    for key in ("m", "n"):
        if not isinstance(doc[key], list) or not all(
            isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in doc[key]
        ):
            raise SchemaError(f"shape.{key}: expected a list of counts")
    m = list(doc["m"])
    n = list(doc["n"])
    if len(m) != poset.size or len(n) != poset.size:
        raise SchemaError("shape: size vectors must match the poset size")
    # Apply the same relabelling the poset received.
    m2 = [0] * poset.size
    n2 = [0] * poset.size
    for old in range(poset.size):
        m2[relabel[old] - 1] = m[old]
        n2[relabel[old] - 1] = n[old]
    try:
        return BlockShape(poset, m2, n2)
    except ValueError as exc:
        raise SchemaError(f"shape: {exc}") from exc


def blocked_to_json(b: BlockedMatrix) -> dict:
    return {"shape": shape_to_json(b.shape), "matrix": matrix_to_json(b.matrix)}


def blocked_from_json(doc) -> BlockedMatrix:
    _require_keys(doc, ("shape", "matrix"), "blocked matrix")
    shape = shape_from_json(doc["shape"])
    poset_doc = doc["shape"]["poset"]
    _, relabel = poset_from_json_with_relabel(poset_doc)
    matrix = matrix_from_json(doc["matrix"])
    if relabel != tuple(range(1, shape.poset.size + 1)):
        # Permute matrix rows/columns consistently with the poset relabelling.
        old_m = doc["shape"]["m"]
        old_n = doc["shape"]["n"]
        row_perm = _block_permutation(old_m, relabel)
        col_perm = _block_permutation(old_n, relabel)
        matrix = matrix.submatrix(row_perm, col_perm)
    try:
        return BlockedMatrix(shape, matrix)
    except ValueError as exc:
        raise SchemaError(f"blocked matrix: {exc}") from exc


def _block_permutation(old_sizes, relabel):
    """Row indices of the relabelled matrix: new block order over old data."""
    n = len(old_sizes)
    old_offsets = [0]
    for s in old_sizes:
        old_offsets.append(old_offsets[-1] + s)
    order = sorted(range(n), key=lambda old: relabel[old])
    perm = []
    for old in order:
        perm.extend(range(old_offsets[old], old_offsets[old + 1]))
    return perm


# -- groups, verdicts ----------------------------------------------------------


def group_to_json(g: FgAbelianGroup) -> dict:
    return {
        "free_rank": g.free_rank,
        "torsion": [int_to_str(d) for d in g.torsion],
    }


def group_from_json(doc) -> FgAbelianGroup:
    _require_keys(doc, ("free_rank", "torsion"), "group")
    rank = _count(doc["free_rank"], "group.free_rank")
    torsion = [int_from_str(d) for d in doc["torsion"]]
    try:
        return FgAbelianGroup(rank, tuple(torsion))
    except ValueError as exc:
        raise SchemaError(f"group: {exc}") from exc


def verdict_to_json(v: Verdict, budget: SearchBudget | None = None) -> dict:
    doc = {"status": v.status}
    if v.witness is not None:
        doc["witness"] = {
            "U": matrix_to_json(v.witness[0]),
            "V": matrix_to_json(v.witness[1]),
        }
    if v.certificate is not None:
        doc["certificate"] = {
            "name": v.certificate.name,
            "left": v.certificate.left,
            "right": v.certificate.right,
        }
    budget_doc = {}
    if budget is not None:
        budget_doc.update(
            max_depth=budget.max_depth, max_nodes=budget.max_nodes, seed=budget.seed
        )
    report = v.report if v.report is not None else BudgetReport(0, 0)
    budget_doc.update(
        nodes_expanded=report.nodes_expanded, depth_reached=report.depth_reached
    )
    doc["budget"] = budget_doc
    return doc


def verdict_from_json(doc) -> Verdict:
    if not isinstance(doc, dict) or "status" not in doc:
        raise SchemaError("verdict: expected an object with a status")
    allowed = {"status", "witness", "certificate", "budget"}
    extra = doc.keys() - allowed
    if extra:
        raise SchemaError(f"verdict: unexpected keys {sorted(extra)}")
    status = doc["status"]
    if status not in ("yes", "no", "unknown"):
        raise SchemaError(f"verdict.status: {status!r}")
    witness = None
    if "witness" in doc:
        _require_keys(doc["witness"], ("U", "V"), "verdict.witness")
        witness = (
            matrix_from_json(doc["witness"]["U"]),
            matrix_from_json(doc["witness"]["V"]),
        )
    certificate = None
    if "certificate" in doc:
        _require_keys(doc["certificate"], ("name", "left", "right"), "verdict.certificate")
        c = doc["certificate"]
        certificate = Certificate(str(c["name"]), str(c["left"]), str(c["right"]))
    report = None
    if "budget" in doc:
        b = doc["budget"]
        if not isinstance(b, dict):
            raise SchemaError("verdict.budget: expected an object")
        report = BudgetReport(
            _count(b.get("nodes_expanded", 0), "budget.nodes_expanded"),
            _count(b.get("depth_reached", 0), "budget.depth_reached"),
        )
    return Verdict(status, witness=witness, certificate=certificate, report=report)


# -- quivers and representations ----------------------------------------------


def quiver_to_json(q: Quiver) -> dict:
    return {
        "vertices": q.vertices,
        "edges": [{"id": e.id, "src": e.src, "dst": e.dst} for e in q.edges],
    }


def quiver_from_json(doc) -> Quiver:
    _require_keys(doc, ("vertices", "edges"), "quiver")
    vertices = _count(doc["vertices"], "quiver.vertices")
    if not isinstance(doc["edges"], list):
        raise SchemaError("quiver.edges: expected a list")
    edges = []
    for e in doc["edges"]:
        _require_keys(e, ("id", "src", "dst"), "quiver edge")
        edges.append(
            Edge(
                str(e["id"]),
                _count(e["src"], "edge.src"),
                _count(e["dst"], "edge.dst"),
            )
        )
    try:
        return Quiver(vertices, edges)
    except ValueError as exc:
        raise SchemaError(f"quiver: {exc}") from exc


def rep_to_json(rep: ZRep) -> dict:
    return {
        "vertex_presentations": [matrix_to_json(g.relations) for g in rep.groups],
        "edge_maps": [matrix_to_json(f) for f in rep.edge_maps],
    }


def rep_from_json(doc, quiver: Quiver) -> ZRep:
    _require_keys(doc, ("vertex_presentations", "edge_maps"), "representation")
    if not isinstance(doc["vertex_presentations"], list) or not isinstance(
        doc["edge_maps"], list
    ):
        raise SchemaError("representation: expected lists")
    pres = [matrix_from_json(m) for m in doc["vertex_presentations"]]
    maps = [matrix_from_json(m) for m in doc["edge_maps"]]
    try:
        return ZRep(quiver, pres, maps)
    except ValueError as exc:
        raise SchemaError(f"representation: {exc}") from exc


# -- canonical emission ---------------------------------------------------------


def dumps(doc) -> str:
    """Canonical textual form: sorted keys, two-space indent, newline end."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


SCHEMAS = ("matrix", "poset", "shape", "blocked", "quiver", "rep", "verdict", "group")

_PARSERS = {
    "matrix": matrix_from_json,
    "poset": poset_from_json,
    "shape": shape_from_json,
    "blocked": blocked_from_json,
    "quiver": quiver_from_json,
    "verdict": verdict_from_json,
    "group": group_from_json,
}


def sniff_schema(doc) -> str:
    if not isinstance(doc, dict):
        raise SchemaError("expected a JSON object")
    keys = set(doc.keys())
    if keys == {"rows", "cols", "entries"}:
        return "matrix"
    if keys == {"n", "leq"}:
        return "poset"
    if keys == {"poset", "m", "n"}:
        return "shape"
    if keys == {"shape", "matrix"}:
        return "blocked"
    if keys == {"vertices", "edges"}:
        return "quiver"
    if keys == {"vertex_presentations", "edge_maps"}:
        return "rep"
    if "status" in keys:
        return "verdict"
    if keys == {"free_rank", "torsion"}:
        return "group"
    raise SchemaError(f"unrecognized document with keys {sorted(keys)}")


def validate_document(doc, schema: str | None = None) -> str:
    """Parse the document under its (sniffed or declared) schema; returns the
    schema name or raises SchemaError."""
    name = schema or sniff_schema(doc)
    if name not in SCHEMAS:
        raise SchemaError(f"unknown schema {name!r}")
    if name == "rep":
        _require_keys(doc, ("vertex_presentations", "edge_maps"), "representation")
        for m in doc["vertex_presentations"] + doc["edge_maps"]:
            matrix_from_json(m)
        return name
    _PARSERS[name](doc)
    return name
