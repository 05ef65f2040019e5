"""Properly decorated rooted forests, the universal lift and Kreimer's toy model.

Forests are non-planar; vertex decorations are linear forms that must be
pairwise Q-orthogonal.  ``lift_hat`` evaluates a forest in any operated
locality algebra by structural recursion.  The Kreimer target is the group
ring ``M[L]`` of germs times formal powers ``x^l``, with the grafting
operator acting through the meromorphic closed form ``pi / sin(pi a)``.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Protocol

from . import linalg, series
from .errors import InputError, InsufficientOrderError, LocalityError
from .germs import IDENTITY, Germ, InnerProduct, LinearForm, render_form
from .projection import renormalised_value


def _form(x):
    return x if isinstance(x, LinearForm) else LinearForm(x)


def _orthogonal(a, b, q):
    return q.pair(_form(a).coeffs, _form(b).coeffs) == 0


# ---------------------------------------------------------------------------
# forests

@dataclass(frozen=True)
class DecoratedForest:
    """Vertices, parent map (roots absent or ``None``) and decorations."""

    vertices: tuple
    parent: dict = field(default_factory=dict, hash=False)
    decoration: dict = field(default_factory=dict, hash=False)
    q: InnerProduct = IDENTITY

    def __post_init__(self):
        verts = tuple(self.vertices)
        if len(set(verts)) != len(verts):
            raise InputError("duplicate vertex ids")
        object.__setattr__(self, "vertices", verts)
        parent = {v: p for v, p in dict(self.parent).items() if p is not None}
        object.__setattr__(self, "parent", parent)
        deco = {v: _form(d) for v, d in dict(self.decoration).items()}
        object.__setattr__(self, "decoration", deco)
        validate_forest(self)

    @classmethod
    def empty(cls, q=IDENTITY):
        return cls((), {}, {}, q)

    @classmethod
    def vertex(cls, form, q=IDENTITY):
        return cls((0,), {}, {0: _form(form)}, q)

    def __len__(self):
        return len(self.vertices)

    def roots(self):
        return [v for v in self.vertices if v not in self.parent]

    def children(self, v):
        return [w for w in self.vertices if self.parent.get(w) == v]

    def subtree(self, v):
        """The tree hanging at ``v`` (``v`` becomes its root)."""
        keep = []
        stack = [v]
        while stack:
            u = stack.pop()
            keep.append(u)
            stack.extend(self.children(u))
        keep = [u for u in self.vertices if u in set(keep)]
        parent = {u: self.parent[u] for u in keep if u != v and u in self.parent}
        return DecoratedForest(tuple(keep), parent, {u: self.decoration[u] for u in keep}, self.q)

    def trees(self):
        return [self.subtree(r) for r in self.roots()]

    def canonical(self):
        """Isomorphism-invariant nested description."""
        def shape(v):
            kids = tuple(sorted(shape(w) for w in self.children(v)))
            return (linalg.strip(self.decoration[v].coeffs), kids)

        return tuple(sorted(shape(r) for r in self.roots()))

    def __eq__(self, other):
        if not isinstance(other, DecoratedForest):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def __str__(self):
        def show(v):
            kids = self.children(v)
            d = render_form(self.decoration[v].coeffs)
            return d if not kids else f"{d}[" + ", ".join(show(w) for w in kids) + "]"

        return " ".join(show(r) for r in self.roots()) or "1"

    # -- JSON ---------------------------------------------------------------

    def to_json(self):
        return {"vertices": [
            {"id": v, "parent": self.parent.get(v),
             "decoration": [str(Fraction(c)) for c in self.decoration[v].coeffs]}
            for v in self.vertices]}

    @classmethod
    def from_json(cls, obj, q=IDENTITY):
        """Decorations may be explicit vectors or ``"auto"``; auto vertices get
        fresh coordinates after every explicitly used one, in list order."""
        try:
            rows = obj["vertices"]
            explicit = [r["decoration"] for r in rows if r.get("decoration", "auto") != "auto"]
            nxt = max((len(d) for d in explicit), default=0)
            verts, parent, deco = [], {}, {}
            for r in rows:
                v = r["id"]
                verts.append(v)
                if r.get("parent") is not None:
                    parent[v] = r["parent"]
                d = r.get("decoration", "auto")
                if d == "auto":
                    deco[v] = LinearForm.coordinate(nxt)
                    nxt += 1
                else:
                    deco[v] = LinearForm(tuple(Fraction(x) for x in d))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"malformed forest JSON: {exc}") from exc
        return cls(tuple(verts), parent, deco, q)


def validate_forest(F):
    verts = set(F.vertices)
    for v, p in F.parent.items():
        if v not in verts or p not in verts:
            raise InputError(f"parent map mentions unknown vertex in {(v, p)!r}")
    for v in F.vertices:
        if v not in F.decoration:
            raise InputError(f"vertex {v!r} has no decoration")
        if F.decoration[v].is_zero():
            raise InputError(f"vertex {v!r} has a zero decoration")
        seen = {v}
        u = v
        while u in F.parent:
            u = F.parent[u]
            if u in seen:
                raise InputError(f"parent map has a cycle through {v!r}")
            seen.add(u)
    vs = F.vertices
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            if not _orthogonal(F.decoration[vs[i]], F.decoration[vs[j]], F.q):
                raise LocalityError(
                    f"decorations of vertices {vs[i]!r} and {vs[j]!r} are not independent",
                    pair=(vs[i], vs[j]))
    return True


def _relabel(F, start):
    mapping = {v: start + i for i, v in enumerate(F.vertices)}
    return ([mapping[v] for v in F.vertices],
            {mapping[v]: mapping[p] for v, p in F.parent.items()},
            {mapping[v]: d for v, d in F.decoration.items()})


def concat(F1, F2):
    """Disjoint union; vertices are renumbered ``0..n-1`` (F1 first)."""
    for a in F1.vertices:
        for b in F2.vertices:
            if not _orthogonal(F1.decoration[a], F2.decoration[b], F1.q):
                raise LocalityError(
                    f"vertex {a!r} of the first forest and {b!r} of the second are not independent",
                    pair=(a, b))
    v1, p1, d1 = _relabel(F1, 0)
    v2, p2, d2 = _relabel(F2, len(v1))
    return DecoratedForest(tuple(v1 + v2), {**p1, **p2}, {**d1, **d2}, F1.q)


def graft(L, F):
    """New root decorated ``L`` above the roots of ``F``."""
    L = _form(L)
    for v in F.vertices:
        if not _orthogonal(L, F.decoration[v], F.q):
            raise LocalityError(f"grafting form {L} is not independent of vertex {v!r}",
                                pair=(str(L), v))
    verts, parent, deco = _relabel(F, 1)
    roots = [v for v in verts if v not in parent]
    for r in roots:
        parent[r] = 0
    deco[0] = L
    return DecoratedForest(tuple([0] + verts), parent, deco, F.q)


# ---------------------------------------------------------------------------
# universal lift

class OperatedLocalityAlgebra(Protocol):
    def unit(self): ...

    def mul(self, a, b): ...

    def act(self, omega, u): ...


def lift_hat(target, F):
    """Structural recursion: empty -> unit, concatenation -> product, grafting -> action."""
    def tree(v):
        inner = reduce(target.mul, (tree(w) for w in F.children(v)), target.unit())
        return target.act(F.decoration[v], inner)

    return reduce(target.mul, (tree(r) for r in F.roots()), target.unit())


# ---------------------------------------------------------------------------
# Kreimer target

@lru_cache(maxsize=None)
def _phi_even_series(order):
    """Coefficients (in Q[tau], as dicts tau_power->Fraction) of pi a / sin(pi a)
    up to ``a^order``, by inverting sin(pi a)/(pi a) = sum (-1)^k tau^k a^{2k}/(2k+1)!."""
    half = order // 2
    s = [{k: Fraction((-1) ** k, math.factorial(2 * k + 1))} for k in range(half + 1)]
    inv = [{0: Fraction(1)}]
    for n in range(1, half + 1):
        acc = {}
        for k in range(1, n + 1):
            for t1, c1 in s[k].items():
                for t2, c2 in inv[n - k].items():
                    acc[t1 + t2] = acc.get(t1 + t2, 0) - c1 * c2
        inv.append({t: c for t, c in acc.items() if c})
    return tuple(inv)


@lru_cache(maxsize=4096)
def phi_germ(form, order):
    """``pi / sin(pi a)`` at the linear form ``a``, numerator jet to ``order``."""
    form = tuple(form)
    lin = series.linear(form)
    sq = series.mul(lin, lin)
    num = {}
    power = series.constant(1)
    for k, coeffs in enumerate(_phi_even_series(order)):
        if k:
            power = series.mul(power, sq)
        for t, c in coeffs.items():
            series.add_into(num, {(e, tt + t): v for (e, tt), v in power.items()}, c)
    return Germ.polar(num, [form], dmax=order - 1)


def _exp_key(form):
    return linalg.strip(Fraction(x) for x in form)


class SymbolSum:
    """Finite sum ``sum_i f_i x^{l_i}`` with germ coefficients and form exponents."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        acc = {}
        for g, ell in (terms.items() if isinstance(terms, dict) else (terms or ())):
            if isinstance(terms, dict):
                g, ell = ell, g
            key = _exp_key(_form(ell).coeffs if isinstance(ell, LinearForm) else ell)
            acc[key] = acc[key] + g if key in acc else g
        self.terms = {k: g for k, g in acc.items() if not g.is_trivially_zero()}

    @classmethod
    def unit(cls):
        return cls([(Germ.one(), ())])

    def items(self):
        return sorted(self.terms.items())

    def exponents(self):
        return [k for k in sorted(self.terms)]

    def dependence(self):
        rows = [k for k in self.terms if k]
        for g in self.terms.values():
            rows.extend(g.dep())
        return rows

    def __mul__(self, other):
        out = {}
        for l1, f in self.terms.items():
            for l2, g in other.terms.items():
                key = _exp_key(linalg.pad(l1, max(len(l1), len(l2)))[i] + linalg.pad(l2, max(len(l1), len(l2)))[i]
                               for i in range(max(len(l1), len(l2))))
                out[key] = out[key] + f * g if key in out else f * g
        return SymbolSum([(g, k) for k, g in out.items()])

    def __add__(self, other):
        return SymbolSum([(g, k) for k, g in self.items()] + [(g, k) for k, g in other.items()])

    def __eq__(self, other):
        if not isinstance(other, SymbolSum):
            return NotImplemented
        keys = set(self.terms) | set(other.terms)
        return all(self.terms.get(k, Germ.zero()) == other.terms.get(k, Germ.zero()) for k in keys)

    __hash__ = None

    def at_one(self):
        """Evaluate ``x = 1``: the sum of the germ coefficients."""
        return reduce(lambda a, b: a + b, self.terms.values(), Germ.zero()).reduce()

    def __repr__(self):
        parts = [f"({g})*x^({render_form(k) if k else '0'})" for k, g in self.items()]
        return "SymbolSum<" + " + ".join(parts) + ">"


def _gate(rows_a, rows_b, q, what):
    for u in rows_a:
        for v in rows_b:
            if q.pair(u, v) != 0:
                raise LocalityError(f"{what}: {render_form(u)} and {render_form(v)} are not orthogonal",
                                    pair=(render_form(u), render_form(v)))


def kreimer_beta(L, u, order, q=IDENTITY):
    """Grafting operator: ``g x^l -> g * Phi(L - l) * x^(l - L)``."""
    L = _form(L)
    _gate([L.coeffs], u.dependence(), q, "grafting gate")
    out = []
    n = max([len(L.coeffs)] + [len(k) for k in u.terms])
    lc = linalg.pad(L.coeffs, n)
    for ell, g in u.items():
        ell = linalg.pad(ell, n)
        a = tuple(x - y for x, y in zip(lc, ell))
        out.append((g * phi_germ(linalg.strip(a), order), tuple(y - x for x, y in zip(lc, ell))))
    return SymbolSum(out)


@dataclass(frozen=True)
class KreimerAlgebra:
    """``M[L]`` with the locality-gated product and the grafting action."""

    order: int
    q: InnerProduct = IDENTITY

    def unit(self):
        return SymbolSum.unit()

    def mul(self, a, b):
        _gate(a.dependence(), b.dependence(), self.q, "product gate")
        return a * b

    def act(self, omega, u):
        return kreimer_beta(omega, u, self.order, self.q)


def kreimer_R(F, order):
    return lift_hat(KreimerAlgebra(order, F.q), F)


def kreimer_R1(F, order):
    return kreimer_R(F, order).at_one()


def kreimer_renormalised(F, q=None, order=None):
    q = F.q if q is None else q
    order = len(F) + 4 if order is None else order
    try:
        return renormalised_value(kreimer_R1(F, order), q)
    except InsufficientOrderError as exc:
        raise InsufficientOrderError(
            f"order {order} is too small for a forest with {len(F)} vertices; "
            f"need at least {len(F)}", required=len(F)) from exc
