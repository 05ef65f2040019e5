"""Simplicial lattice cones, their exponential sums and integrals.

A cone is a set of linearly independent generators together with a lattice
spanning the same subspace.  The exponential sums ``S_open``/``S_closed``
and the integral ``I_cone`` are meromorphic germs in the dual variables
``eps``; on a smooth cone they factor over the generators, and every other
cone is reduced to smooth ones by stellar subdivision.
"""

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce

import numpy as np
from sympy import bernoulli

from . import _kernels, linalg, series
from .errors import InputError, InsufficientOrderError, UnsupportedInputError
from .germs import IDENTITY, Germ, _mode
from .projection import renormalised_value


def default_order(k):
    """Numerator jet order used when the caller gives none: dimension + 4."""
    env = os.environ.get("MEROCONE_DEFAULT_ORDER")
    if env:
        return int(env)
    return k + 4


def _ray(v):
    return linalg.primitive(v)


class LatticeCone:
    """Pair (cone generated by ``generators``, lattice with basis ``lattice``).

    ``generators`` are stored as given (integer or rational vectors, padded
    to the ambient dimension).  ``lattice=None`` means the saturated lattice
    ``Z^n`` intersected with the span of the generators.
    """

    __slots__ = ("dim", "generators", "lattice", "_cache")

    def __init__(self, generators, lattice=None, dim=None):
        gens = [tuple(Fraction(x) for x in g) for g in generators]
        n = max([len(g) for g in gens] + [dim or 0])
        if lattice is not None:
            n = max([n] + [len(b) for b in lattice])
        gens = [linalg.pad(g, n) for g in gens]
        for g in gens:
            if all(x == 0 for x in g):
                raise InputError("zero generator")
        if linalg.rank(gens) != len(gens):
            raise UnsupportedInputError(
                "generators are linearly dependent; only simplicial cones are supported "
                "(supply a triangulation instead)")
        if lattice is None:
            basis = linalg.saturate([_ray(g) for g in gens], n)
            basis = [tuple(Fraction(x) for x in b) for b in basis]
        else:
            basis = [linalg.pad(tuple(Fraction(x) for x in b), n) for b in lattice]
            if linalg.rank(basis) != len(basis):
                raise InputError("lattice basis is linearly dependent")
            if len(basis) != len(gens):
                raise InputError("lattice rank differs from the number of generators")
            for g in gens:
                if linalg.solve_in_span(basis, g) is None:
                    raise InputError(f"generator {g} is outside the span of the lattice")
        self.dim = n
        self.generators = tuple(tuple(x.numerator if x.denominator == 1 else x for x in g) for g in gens)
        self.lattice = tuple(tuple(basis))
        self._cache = {}

    # -- basic views --------------------------------------------------------

    @classmethod
    def zero(cls, dim=0):
        return cls((), (), dim)

    @property
    def rank(self):
        return len(self.generators)

    def rays(self):
        return tuple(sorted(_ray(g) for g in self.generators))

    def lattice_hnf(self):
        if "hnf" not in self._cache:
            self._cache["hnf"] = tuple(linalg.rational_lattice_hnf(self.lattice))
        return self._cache["hnf"]

    def lattice_coords(self, v):
        """Coordinates of ``v`` in the lattice basis (rationals), or ``None``."""
        return linalg.solve_in_span(self.lattice, linalg.pad(v, self.dim))

    def generator_coords(self):
        """Generators in lattice coordinates, rescaled to be primitive there."""
        if "gc" not in self._cache:
            rows = [linalg.primitive(self.lattice_coords(g)) for g in self.generators]
            self._cache["gc"] = tuple(rows)
        return self._cache["gc"]

    def to_ambient(self, coords):
        return tuple(sum((Fraction(c) * b[j] for c, b in zip(coords, self.lattice)), Fraction(0))
                     for j in range(self.dim))

    def primitive_generators(self):
        """Lattice-primitive vectors along each generator ray."""
        return tuple(self.to_ambient(a) for a in self.generator_coords())

    def padded(self, n):
        if n == self.dim:
            return self
        return LatticeCone(self.generators, self.lattice, n)

    def __eq__(self, other):
        if not isinstance(other, LatticeCone):
            return NotImplemented
        n = max(self.dim, other.dim)
        a, b = self.padded(n), other.padded(n)
        return a.rays() == b.rays() and a.lattice_hnf() == b.lattice_hnf()

    def __hash__(self):
        return hash((tuple(linalg.strip(r) for r in self.rays()),
                     tuple(linalg.strip(r) for r in self.lattice_hnf())))

    def __repr__(self):
        gens = ", ".join("(" + ",".join(str(x) for x in g) + ")" for g in self.generators)
        return f"LatticeCone<{gens}>"

    # -- JSON ---------------------------------------------------------------

    def to_json(self):
        def enc(x):
            x = Fraction(x)
            return x.numerator if x.denominator == 1 else str(x)

        return {
            "dim": self.dim,
            "generators": [[enc(x) for x in g] for g in self.generators],
            "lattice": [[str(Fraction(x)) for x in b] for b in self.lattice],
        }

    @classmethod
    def from_json(cls, obj):
        try:
            gens = [[Fraction(x) for x in g] for g in obj["generators"]]
            lat = obj.get("lattice")
            lat = None if lat is None else [[Fraction(x) for x in b] for b in lat]
            return cls(gens, lat, int(obj.get("dim", 0)))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"malformed cone JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# locality structure on cones

def minkowski(c1, c2):
    """Minkowski sum with the sum lattice."""
    n = max(c1.dim, c2.dim)
    c1, c2 = c1.padded(n), c2.padded(n)
    seen = {}
    for g in c1.generators + c2.generators:
        seen.setdefault(_ray(g), g)
    gens = list(seen.values())
    gens = _prune(gens)
    lattice = linalg.rational_lattice_hnf(list(c1.lattice) + list(c2.lattice))
    return LatticeCone(gens, lattice, n)


def _prune(gens):
    """Drop generators lying in the cone of the others until independent."""
    gens = list(gens)
    while linalg.rank(gens) != len(gens):
        for i, g in enumerate(gens):
            rest = gens[:i] + gens[i + 1:]
            if linalg.rank(rest) != len(rest):
                continue
            coeffs = linalg.solve_in_span(rest, g)
            if coeffs is not None and all(c >= 0 for c in coeffs):
                gens = rest
                break
        else:
            raise UnsupportedInputError(
                "Minkowski sum is not a simplicial strongly convex cone")
    return gens


def cone_independent(c1, c2, q=IDENTITY, mode="PerpQ"):
    mode = _mode(mode)
    if mode == "TopD":
        if not q.is_identity:
            raise InputError("TopD requires the identity Gram matrix (support is basis-dependent)")
        s1 = {j for b in c1.lattice for j, x in enumerate(b) if x}
        s2 = {j for b in c2.lattice for j, x in enumerate(b) if x}
        return not (s1 & s2)
    return all(q.pair(u, v) == 0 for u in c1.lattice for v in c2.lattice)


def is_smooth(c):
    """Generators (as given) form a basis of the lattice."""
    rows = [c.lattice_coords(g) for g in c.generators]
    if any(x.denominator != 1 for r in rows for x in r):
        return False
    return abs(linalg.det(rows)) == 1 if rows else True


def index(c):
    """Lattice index of the sublattice spanned by the primitive generators."""
    rows = c.generator_coords()
    return abs(int(linalg.det(rows))) if rows else 1


# ---------------------------------------------------------------------------
# subdivision

def _parallelepiped_points(A):
    """Nonzero integer points ``lam A`` with ``lam`` in ``[0,1)^k``."""
    k = len(A)
    inv = linalg.inverse(A)
    lo = [sum(min(0, A[i][j]) for i in range(k)) for j in range(k)]
    hi = [sum(max(0, A[i][j]) for i in range(k)) for j in range(k)]
    out = []
    for p in itertools.product(*(range(lo[j], hi[j] + 1) for j in range(k))):
        if not any(p):
            continue
        lam = [sum(Fraction(p[j]) * inv[j][i] for j in range(k)) for i in range(k)]
        if all(0 <= x < 1 for x in lam):
            out.append(p)
    return out


def _stellar(A, w):
    """Replace each generator whose coefficient in ``w`` is positive by ``w``."""
    lam = linalg.solve_in_span([tuple(Fraction(x) for x in r) for r in A], w)
    if lam is None or any(x < 0 for x in lam):
        raise InputError(f"subdivision point {w} is not in the cone")
    pieces = []
    for i, x in enumerate(lam):
        if x > 0:
            pieces.append(tuple(w if j == i else A[j] for j in range(len(A))))
    return pieces


def smooth_subdivision(c, pick=None):
    """Smooth cones with disjoint interiors covering ``c``.

    ``pick(cone)`` may return an ambient lattice vector to subdivide at
    (or ``None`` for the default rule); it exists so tests can force
    different subdivisions of the same cone.
    """
    if c.rank == 0:
        return [c]
    out = []
    _subdivide(c, tuple(c.generator_coords()), pick, out)
    return out


def _piece(c, A):
    return LatticeCone([c.to_ambient(a) for a in A], c.lattice, c.dim)


def _subdivide(c, A, pick, out):
    w = None
    if pick is not None:
        v = pick(_piece(c, A))
        if v is not None:
            coords = c.lattice_coords(v)
            if coords is None or any(x.denominator != 1 for x in coords):
                raise InputError(f"subdivision point {v} is not a lattice point")
            w = tuple(int(x) for x in coords)
    if w is None:
        if abs(linalg.det(A)) == 1:
            out.append(_piece(c, A))
            return
        pts = _parallelepiped_points(A)
        amb = [(c.to_ambient(p), p) for p in pts]
        amb.sort(key=lambda t: (sum(x * x for x in t[0]), t[0]))
        w = amb[0][1]
    for B in _stellar(A, w):
        _subdivide(c, B, pick, out)


# ---------------------------------------------------------------------------
# indicator decompositions

@dataclass(frozen=True)
class SmoothOpenConeSum:
    """Integer combination of indicators of relatively open smooth cones."""

    dim: int
    terms: tuple

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def to_json(self):
        return {"dim": self.dim, "terms": [{"coeff": k, "cone": c.to_json()} for k, c in self.terms]}


def _faces(c, pick=None):
    """Distinct faces of the fan of a smooth subdivision, as lattice-basis generator sets."""
    faces = {}
    for piece in smooth_subdivision(c, pick):
        prim = piece.primitive_generators()
        for r in range(len(prim) + 1):
            for sub in itertools.combinations(prim, r):
                key = frozenset(_ray(g) for g in sub)
                faces.setdefault(key, sub)
    return faces


def open_decomposition(c, closure="Closed", pick=None):
    closed = str(closure).lower() == "closed"
    gens = list(c.generators)
    terms = []
    for key, sub in sorted(_faces(c, pick).items(), key=lambda kv: sorted(kv[0])):
        if not closed:
            interior = tuple(sum((g[j] for g in sub), Fraction(0)) for j in range(c.dim))
            if gens:
                lam = linalg.solve_in_span(gens, interior)
                if any(x <= 0 for x in lam):
                    continue
        lattice = list(sub)
        terms.append((1, LatticeCone(list(sub), lattice, c.dim)))
    return SmoothOpenConeSum(c.dim, tuple(terms))


# ---------------------------------------------------------------------------
# germs

@lru_cache(maxsize=None)
def _bernoulli(k, plus):
    if k == 1:
        return Fraction(1, 2) if plus else Fraction(-1, 2)
    b = bernoulli(k)
    return Fraction(int(b.p), int(b.q))


@lru_cache(maxsize=4096)
def _factor(form, order, kind):
    """One-generator germ: ``e^L/(1-e^L)``, ``1/(1-e^L)`` or ``-1/L``."""
    if kind == "integral":
        return Germ.polar(-1, [form])
    plus = kind == "open"
    lin = series.linear(form)
    num = {}
    power = series.constant(1)
    fact = 1
    for k in range(order + 1):
        if k:
            power = series.mul(power, lin)
            fact *= k
        b = _bernoulli(k, plus)
        if b:
            series.add_into(num, power, -b / fact)
    return Germ.polar(num, [form], dmax=order - 1)


def _smooth_product(gens, order, kind):
    return _smooth_product_cached(tuple(sorted(tuple(g) for g in gens)), order, kind)


@lru_cache(maxsize=8192)
def _smooth_product_cached(gens, order, kind):
    out = Germ.one()
    for g in gens:
        out = out * _factor(g, order, kind)
    if not gens and order is not None:
        out = out.with_dmax(order)
    return out


def _face_germ(args):
    gens, order, kind = args
    return _smooth_product(gens, order, kind)


def _sum_faces(jobs, order, kind, jobs_n):
    if jobs_n and jobs_n > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=jobs_n) as ex:
            parts = list(ex.map(_face_germ, [(g, order, kind) for g in jobs]))
    else:
        parts = [_smooth_product(g, order, kind) for g in jobs]
    return reduce(lambda a, b: a + b, parts, Germ.zero()).reduce()


def S_open(c, order=None, pick=None, jobs=1):
    """Exponential sum over the interior lattice points, as a germ."""
    order = default_order(c.rank) if order is None else order
    if pick is None and is_smooth(c):
        return _smooth_product(c.primitive_generators(), order, "open").reduce()
    dec = open_decomposition(c, "Open", pick)
    return _sum_faces([t.generators for _, t in dec.terms], order, "open", jobs)


def S_closed(c, order=None, pick=None, jobs=1):
    """Exponential sum over all lattice points of the closed cone."""
    order = default_order(c.rank) if order is None else order
    dec = open_decomposition(c, "Closed", pick)
    return _sum_faces([t.generators for _, t in dec.terms], order, "open", jobs)


def S_closed_smooth(c, order=None):
    """Closed form ``prod 1/(1-e^L)`` for a smooth cone (independent check)."""
    if not is_smooth(c):
        raise InputError("closed-form sum needs a smooth cone")
    order = default_order(c.rank) if order is None else order
    return _smooth_product(c.generators, order, "closed")


def I_cone(c, pick=None):
    """Integral with the lattice-normalised measure."""
    if c.rank == 0:
        return Germ.one()
    pieces = smooth_subdivision(c, pick)
    return reduce(lambda a, b: a + b,
                  [_smooth_product(p.generators, None, "integral") for p in pieces]).reduce()


def I_cone_direct(c):
    """``index * prod(-1/L)`` over the lattice-primitive generators."""
    return _smooth_product(c.primitive_generators(), None, "integral") * index(c)


def _zeta(germ_fn, c, q, order):
    order = default_order(c.rank) if order is None else order
    try:
        return renormalised_value(germ_fn(c, order), q)
    except InsufficientOrderError as exc:
        raise InsufficientOrderError(
            f"order {order} is too small for a cone of dimension {c.rank}; "
            f"need at least {c.rank}", required=c.rank) from exc


def zeta_open(c, q=IDENTITY, order=None):
    return _zeta(S_open, c, q, order)


def zeta_closed(c, q=IDENTITY, order=None):
    return _zeta(S_closed, c, q, order)


# ---------------------------------------------------------------------------
# numeric oracle

def lattice_sum(c, eps, N=60, closed=False, backend=None):
    """Truncated sum of ``exp(<eps, n>)`` over lattice points of the cone.

    Points are enumerated in lattice coordinates within ``[-N, N]^k``.
    """
    if c.rank == 0:
        return 1.0
    basis = np.array([[float(x) for x in b] for b in c.lattice])
    A = [tuple(Fraction(x) for x in c.lattice_coords(g)) for g in c.generators]
    to_gen = np.array([[float(x) for x in r] for r in linalg.inverse(A)])
    e = np.zeros(c.dim)
    e[:len(eps)] = eps
    return _kernels.lattice_sum(basis, to_gen, e, N, closed, backend)


def finite_sum_bound(c, eps):
    """Largest exponent ``<eps, g>`` over generators; negative means convergent."""
    return max((sum(float(x) * y for x, y in zip(g, eps)) for g in c.generators), default=-math.inf)


# ---------------------------------------------------------------------------
# unions of simplicial cones (pre-triangulated input)

def face_cone(c, subset):
    """Face spanned by ``subset`` of ``c.generators`` with lattice ``Lambda`` cut to its span."""
    gens = [c.generators[i] for i in subset]
    if not gens:
        return LatticeCone.zero(c.dim)
    coords = [linalg.primitive(c.lattice_coords(g)) for g in gens]
    sat = linalg.saturate(coords, c.rank)
    return LatticeCone(gens, [c.to_ambient(r) for r in sat], c.dim)


def triangulated_faces(cones, closure="Closed"):
    """Relatively open faces whose indicators sum to the union (or its interior).

    The cones must form a triangulation: pairwise intersections are common
    faces.  For ``Open`` the faces lying on the boundary of the union are
    dropped; a face is on the boundary when it sits inside a facet that
    belongs to exactly one maximal cone.
    """
    if not cones:
        raise InputError("empty triangulation")
    n = max(c.dim for c in cones)
    cones = [c.padded(n) for c in cones]
    top = max(c.rank for c in cones)
    faces = {}
    facet_count = {}
    for c in cones:
        k = c.rank
        for r in range(k + 1):
            for sub in itertools.combinations(range(k), r):
                key = frozenset(_ray(c.generators[i]) for i in sub)
                faces.setdefault(key, (c, sub))
                if k == top and r == k - 1:
                    facet_count[key] = facet_count.get(key, 0) + 1
    boundary = [f for f, m in facet_count.items() if m == 1]
    out = []
    for key in sorted(faces, key=lambda s: (len(s), sorted(s))):
        if str(closure).lower() == "open":
            if any(key <= b for b in boundary):
                continue
        c, sub = faces[key]
        out.append(face_cone(c, sub))
    return out


def S_union(cones, closure="Closed", order=None, jobs=1):
    """Exponential sum over a triangulated union via open faces."""
    top = max(c.rank for c in cones)
    order = default_order(top) if order is None else order
    total = Germ.zero()
    for f in triangulated_faces(cones, closure):
        total = total + S_open(f, order, jobs=jobs)
    return total.reduce()


def zeta_union(cones, closure="Closed", q=IDENTITY, order=None):
    top = max(c.rank for c in cones)
    order = default_order(top) if order is None else order
    try:
        return renormalised_value(S_union(cones, closure, order), q)
    except InsufficientOrderError as exc:
        raise InsufficientOrderError(
            f"order {order} is too small for a cone of dimension {top}; need at least {top}",
            required=top) from exc
