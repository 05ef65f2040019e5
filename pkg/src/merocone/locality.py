"""Finite models of relation-sets with partial products and their axiom checkers.

A structure is a carrier, a binary relation ``T`` (the independence graph)
and a product defined on part of ``T``.  The scans over element triples run
in :mod:`merocone._kernels`; every failing witness is then replayed here by a
plain Python predicate so the two routes keep each other honest.
"""

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InputError


class Axiom(str, enum.Enum):
    LocalitySemigroup = "LocalitySemigroup"
    StrongSemigroup = "StrongSemigroup"
    RefinedSemigroup = "RefinedSemigroup"
    PartialSemigroup = "PartialSemigroup"
    Transitive = "Transitive"
    Symmetric = "Symmetric"
    SelectiveOneObject = "SelectiveOneObject"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        for a in cls:
            if a.value.lower() == str(name).replace("-", "").replace("_", "").lower():
                return a
        raise InputError(f"unknown axiom {name!r}; expected one of {[a.value for a in cls]}")


class Side(str, enum.Enum):
    Left = "Left"
    Right = "Right"


_KERNEL = {
    Axiom.LocalitySemigroup: "locality",
    Axiom.StrongSemigroup: "strong",
    Axiom.RefinedSemigroup: "refined",
    Axiom.PartialSemigroup: "partial",
    Axiom.Transitive: "transitive",
    Axiom.Symmetric: "symmetric",
}


@dataclass(frozen=True)
class FiniteLocalityStructure:
    """Carrier, relation graph, partial product table and optional unit.

    The product must be defined only on related pairs.  It may be undefined
    on some related pairs when the carrier is a truncation of an infinite
    structure; the scans then quantify only over triples whose intermediate
    products exist.
    """

    elements: tuple
    relation: frozenset
    product: dict = field(hash=False)
    unit: object = None

    def __post_init__(self):
        elements = tuple(self.elements)
        if len(set(elements)) != len(elements):
            raise InputError("duplicate element ids")
        object.__setattr__(self, "elements", elements)
        known = set(elements)
        rel = frozenset((a, b) for a, b in self.relation)
        for a, b in rel:
            if a not in known or b not in known:
                raise InputError(f"relation mentions unknown element in {(a, b)!r}")
        object.__setattr__(self, "relation", rel)
        prod = {(a, b): c for (a, b), c in dict(self.product).items()}
        for (a, b), c in prod.items():
            if (a, b) not in rel:
                raise InputError(f"product defined on unrelated pair {(a, b)!r}")
            if c not in known:
                raise InputError(f"product {(a, b)!r} lands outside the carrier: {c!r}")
        object.__setattr__(self, "product", prod)
        if self.unit is not None:
            if self.unit not in known:
                raise InputError(f"unit {self.unit!r} is not an element")
            for x in elements:
                for pair in ((self.unit, x), (x, self.unit)):
                    if pair not in rel:
                        raise InputError(f"unit is not related to {x!r}: missing {pair!r}")
                    if prod.get(pair) != x:
                        raise InputError(f"unit law fails on {pair!r}")

    # -- indexing ---------------------------------------------------------

    @property
    def index(self):
        return {x: i for i, x in enumerate(self.elements)}

    def matrices(self):
        """``(R, P)``: boolean relation matrix and product table (-1 = undefined)."""
        n = len(self.elements)
        idx = self.index
        R = np.zeros((n, n), dtype=np.bool_)
        P = np.full((n, n), -1, dtype=np.int64)
        for a, b in self.relation:
            R[idx[a], idx[b]] = True
        for (a, b), c in self.product.items():
            P[idx[a], idx[b]] = idx[c]
        return R, P

    def related(self, a, b):
        return (a, b) in self.relation

    def mul(self, a, b):
        return self.product.get((a, b))

    def is_symmetric(self):
        return all((b, a) in self.relation for a, b in self.relation)

    # -- JSON -------------------------------------------------------------

    def to_json(self):
        idx = self.index
        return {
            "elements": list(self.elements),
            "relation": sorted(([a, b] for a, b in self.relation), key=lambda p: (idx[p[0]], idx[p[1]])),
            "product": sorted(([a, b, c] for (a, b), c in self.product.items()),
                              key=lambda p: (idx[p[0]], idx[p[1]])),
            "unit": self.unit,
        }

    @classmethod
    def from_json(cls, obj):
        try:
            elements = [_hashable(x) for x in obj["elements"]]
            relation = [(_hashable(a), _hashable(b)) for a, b in obj.get("relation", [])]
            product = {(_hashable(a), _hashable(b)): _hashable(c) for a, b, c in obj.get("product", [])}
            unit = obj.get("unit")
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed structure JSON: {exc}") from exc
        return cls(tuple(elements), frozenset(relation), product,
                   None if unit is None else _hashable(unit))


def _hashable(x):
    return tuple(_hashable(y) for y in x) if isinstance(x, list) else x


@dataclass(frozen=True)
class AxiomReport:
    axiom: Axiom
    holds: bool
    witness: tuple = None
    reason: str = ""

    def to_json(self):
        return {
            "axiom": self.axiom.value,
            "holds": self.holds,
            "witness": None if self.witness is None else list(self.witness),
            "reason": self.reason,
        }


# ---------------------------------------------------------------------------
# polar sets

def polar_set(S, U, side=Side.Left):
    """Elements related to every member of ``U`` (on the left or the right)."""
    side = Side(side)
    U = list(U)
    known = set(S.elements)
    for u in U:
        if u not in known:
            raise InputError(f"unknown element id {u!r}")
    if side is Side.Left:
        return frozenset(x for x in S.elements if all((x, u) in S.relation for u in U))
    return frozenset(x for x in S.elements if all((u, x) in S.relation for u in U))


# ---------------------------------------------------------------------------
# pointwise predicates, used to replay witnesses

def _assoc_clash(S, x, y, z):
    xy, yz = S.mul(x, y), S.mul(y, z)
    if xy is None or yz is None:
        return False
    a, b = S.mul(xy, z), S.mul(x, yz)
    return a is not None and b is not None and a != b


def violates(S, axiom, witness):
    """True when ``witness`` breaks ``axiom`` in ``S``."""
    axiom = Axiom.parse(axiom)
    T = S.related
    if axiom is Axiom.Symmetric:
        x, y = witness
        return T(x, y) and not T(y, x)
    if axiom is Axiom.Transitive:
        a, b, c = witness
        return T(a, b) and T(b, c) and not T(a, c)
    if axiom is Axiom.SelectiveOneObject:
        return _selective_violation(S, witness)
    x, y, z = witness
    xy, yz = S.mul(x, y), S.mul(y, z)
    if axiom is Axiom.LocalitySemigroup:
        if T(x, y) and xy is not None:
            if T(x, z) and T(y, z) and not T(xy, z):
                return True
            if T(z, x) and T(z, y) and not T(z, xy):
                return True
        if T(x, y) and T(y, z) and T(x, z) and xy is not None and yz is not None:
            return T(xy, z) and T(x, yz) and _assoc_clash(S, x, y, z)
        return False
    if axiom is Axiom.StrongSemigroup:
        if not (T(x, y) and T(y, z) and xy is not None and yz is not None):
            return False
        return not T(xy, z) or not T(x, yz) or _assoc_clash(S, x, y, z)
    if axiom is Axiom.RefinedSemigroup:
        if T(x, y) and xy is not None and T(y, z) != T(xy, z):
            return True
        if T(y, z) and yz is not None and T(x, y) != T(x, yz):
            return True
        return (T(x, y) and T(y, z) and xy is not None and yz is not None
                and T(xy, z) and T(x, yz) and _assoc_clash(S, x, y, z))
    if axiom is Axiom.PartialSemigroup:
        if (T(x, y) and xy is None) or (T(y, z) and yz is None):
            return False
        lhs = T(x, y) and T(xy, z)
        rhs = T(y, z) and T(x, yz)
        return lhs != rhs or (lhs and _assoc_clash(S, x, y, z))
    raise InputError(f"no predicate for {axiom}")


def _selective_violation(S, witness):
    u = S.unit
    if len(witness) == 2:
        s, t = witness
        if s == u or t == u:
            x = t if s == u else s
            return not (S.related(u, x) and S.related(x, u)
                        and S.mul(u, x) == x and S.mul(x, u) == x)
        # an inverse pair must be related in both orders
        return S.mul(s, t) == u and not (S.related(t, s) and S.mul(t, s) == u)
    return violates(S, Axiom.PartialSemigroup, witness)


# ---------------------------------------------------------------------------
# scans

_REASONS = {
    Axiom.LocalitySemigroup: "closure of polar sets under the product or associativity fails",
    Axiom.StrongSemigroup: "(x,y),(y,z) related but a bracketing is unrelated or disagrees",
    Axiom.RefinedSemigroup: "relation with a product is not inherited in both directions",
    Axiom.PartialSemigroup: "the two bracketings are not defined together or disagree",
    Axiom.Transitive: "(a,b) and (b,c) related but (a,c) is not",
    Axiom.Symmetric: "(x,y) related but (y,x) is not",
}


def check_axiom(S, axiom, backend=None):
    """Exhaustive check; the witness is the first violating tuple in carrier order."""
    axiom = Axiom.parse(axiom)
    if axiom is Axiom.SelectiveOneObject:
        return _check_selective(S, backend)
    R, P = S.matrices()
    hit = _kernels.scan(_KERNEL[axiom], R, P, backend)
    if hit is None:
        return AxiomReport(axiom, True)
    witness = tuple(S.elements[i] for i in hit)
    if not violates(S, axiom, witness):
        raise AssertionError(f"kernel witness {witness!r} does not replay for {axiom.value}")
    return AxiomReport(axiom, False, witness, _REASONS[axiom])


def _check_selective(S, backend):
    if S.unit is None:
        raise InputError("SelectiveOneObject needs a structure with a unit")
    axiom = Axiom.SelectiveOneObject
    u = S.unit
    for x in S.elements:
        w = (u, x)
        if _selective_violation(S, w):
            return AxiomReport(axiom, False, w, "unit is not a two-sided related identity")
    for s, t in itertools.product(S.elements, repeat=2):
        if u in (s, t):
            continue
        if _selective_violation(S, (s, t)):
            return AxiomReport(axiom, False, (s, t), "inverse pair is not related in both orders")
    rep = check_axiom(S, Axiom.PartialSemigroup, backend)
    if not rep.holds:
        return AxiomReport(axiom, False, rep.witness, rep.reason)
    return AxiomReport(axiom, True)


def check_locality_by_polar_sets(S, max_size=8):
    """Locality-semigroup closure stated over all subsets (small carriers only).

    Returns ``True`` when for every ``U`` both polar sets are closed under
    the defined products of related pairs, and the associativity clause holds.
    """
    if len(S.elements) > max_size:
        raise InputError(f"polar-set formulation is exponential; carrier exceeds {max_size}")
    for r in range(len(S.elements) + 1):
        for U in itertools.combinations(S.elements, r):
            for side in Side:
                pol = polar_set(S, U, side)
                for x in pol:
                    for y in pol:
                        xy = S.mul(x, y)
                        if S.related(x, y) and xy is not None and xy not in pol:
                            return False
    for x, y, z in itertools.product(S.elements, repeat=3):
        if (S.related(x, y) and S.related(y, z) and S.related(x, z)
                and S.related(S.mul(x, y), z) and S.related(x, S.mul(y, z))
                and _assoc_clash(S, x, y, z)):
            return False
    return True


# ---------------------------------------------------------------------------
# built-in structures

def coprime_naturals(n):
    """``{1..n}`` with the coprime relation; a product is kept only when it stays <= n."""
    if n < 1:
        raise InputError("CoprimeNaturals needs n >= 1")
    elements = tuple(range(1, n + 1))
    rel = frozenset((a, b) for a in elements for b in elements if math.gcd(a, b) == 1)
    prod = {(a, b): a * b for a, b in rel if a * b <= n}
    return FiniteLocalityStructure(elements, rel, prod, 1)


def subset_label(s):
    return "{" + ",".join(sorted(s)) + "}"


def disjoint_powerset(base):
    """All subsets of ``base`` (labelled ``{a,b}``), disjointness and union."""
    base = sorted(set(str(b) for b in base))
    subsets = [frozenset(c) for r in range(len(base) + 1) for c in itertools.combinations(base, r)]
    label = {s: subset_label(s) for s in subsets}
    elements = tuple(label[s] for s in subsets)
    rel = set()
    prod = {}
    for a in subsets:
        for b in subsets:
            if not (a & b):
                rel.add((label[a], label[b]))
                prod[(label[a], label[b])] = label[a | b]
    return FiniteLocalityStructure(elements, frozenset(rel), prod, label[frozenset()])


def builtin_structure(kind, arg):
    key = str(kind).replace("_", "").replace("-", "").lower()
    if key in ("coprimenaturals", "coprime"):
        return coprime_naturals(int(arg))
    if key in ("disjointpowerset", "powerset"):
        return disjoint_powerset(arg)
    raise InputError(f"unknown built-in structure {kind!r}")
