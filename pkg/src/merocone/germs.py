"""Meromorphic germs at 0 with linear poles, in exact arithmetic.

A germ is a finite sum of terms ``numerator / prod L_i^{m_i}`` where each
numerator is a truncated polynomial (a jet) and the ``L_i`` are linear forms
stored in canonical integer shape (primitive, first nonzero entry positive;
any scalar is pushed into the numerator).

Truncation is tracked by a single number, ``dmax``: the germ is exact in
every homogeneous degree ``<= dmax`` (a term ``h / prod L^m`` with ``h``
of degree ``k`` sits in degree ``k - sum m``).  Germs built from finite
expressions carry ``dmax = inf``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import linalg, series
from .errors import ContractError, DomainError, InputError, InsufficientOrderError
from .series import Coefficient

INF = math.inf


class InnerProduct:
    """Symmetric positive-definite Gram matrix on coefficient vectors.

    Vectors longer than the matrix are paired with the identity on the extra
    coordinates, which is how a finite Gram matrix extends to R^infinity.
    """

    __slots__ = ("gram", "n")

    def __init__(self, gram):
        g = tuple(tuple(Fraction(x) for x in row) for row in gram)
        n = len(g)
        if any(len(row) != n for row in g):
            raise InputError("Gram matrix must be square")
        for i in range(n):
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise InputError(f"Gram matrix not symmetric at ({i}, {j})")
        for k in range(1, n + 1):
            if linalg.det([row[:k] for row in g[:k]]) <= 0:
                raise InputError(f"Gram matrix not positive definite (minor {k})")
        self.gram = g
        self.n = n

    @classmethod
    def identity(cls, n=0):
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @property
    def is_identity(self):
        return all(self.gram[i][j] == (i == j) for i in range(self.n) for j in range(self.n))

    def block(self, n):
        """The leading ``n x n`` Gram block (identity-extended)."""
        return tuple(
            tuple(self.gram[i][j] if i < self.n and j < self.n else Fraction(int(i == j))
                  for j in range(n))
            for i in range(n))

    def pair(self, u, v):
        total = Fraction(0)
        for i, a in enumerate(u):
            if not a:
                continue
            for j, b in enumerate(v):
                if not b:
                    continue
                if i < self.n and j < self.n:
                    total += a * self.gram[i][j] * b
                elif i == j:
                    total += a * b
        return total

    def __eq__(self, other):
        if not isinstance(other, InnerProduct):
            return NotImplemented
        n = max(self.n, other.n)
        return self.block(n) == other.block(n)

    def __hash__(self):
        return hash(self.block(self.n))

    def __repr__(self):
        return f"InnerProduct({[[str(x) for x in r] for r in self.gram]})"


IDENTITY = InnerProduct.identity()


@dataclass(frozen=True)
class LinearForm:
    """Rational covector ``sum c_j e_j`` (0-based coordinates, trailing zeros dropped)."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", linalg.strip(Fraction(c) for c in self.coeffs))

    @classmethod
    def coordinate(cls, j, scale=1):
        return cls((0,) * j + (scale,))

    @property
    def dim(self):
        return len(self.coeffs)

    def is_zero(self):
        return not self.coeffs

    def __add__(self, other):
        n = max(self.dim, other.dim)
        return LinearForm(tuple(a + b for a, b in zip(linalg.pad(self.coeffs, n), linalg.pad(other.coeffs, n))))

    def __neg__(self):
        return LinearForm(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return LinearForm(tuple(x * c for x in self.coeffs))

    __rmul__ = __mul__

    def canonical(self):
        """``(scale, integer tuple)`` with ``self = scale * form``."""
        if self.is_zero():
            raise InputError("zero linear form cannot be a denominator")
        s, w = linalg.canonical_form(self.coeffs)
        return s, linalg.strip(w)

    def poly(self):
        return series.linear(self.coeffs)

    def __str__(self):
        return render_form(self.coeffs)


def render_form(coeffs):
    parts = []
    for j, c in enumerate(coeffs):
        if not c:
            continue
        name = f"e{j + 1}"
        c = Fraction(c)
        if c == 1:
            body = name
        elif c == -1:
            body = "-" + name
        else:
            body = f"{c}*{name}"
        if parts and not body.startswith("-"):
            body = "+" + body
        parts.append(body)
    return "".join(parts) or "0"


@dataclass(frozen=True)
class Jet:
    """Truncated holomorphic germ: polynomial of total degree <= ``order``."""

    n: int
    order: float
    coeffs: dict

    def __getitem__(self, key):
        exp, tau = key if isinstance(key, tuple) and len(key) == 2 and isinstance(key[0], tuple) else (key, 0)
        return self.coeffs.get((linalg.strip(exp), tau), Fraction(0))


@dataclass(frozen=True)
class GermTerm:
    numerator: Jet
    denominator: tuple  # ((LinearForm, multiplicity), ...)


# ---------------------------------------------------------------------------
# independence of integer forms, cached by key

@lru_cache(maxsize=None)
def _circuit(forms):
    """First linear dependency among ``forms`` (in order).

    Returns ``None`` if independent, else ``(k, {i: a_i})`` with
    ``forms[k] = sum a_i forms[i]`` over an independent prefix.
    """
    indep = []
    idx = []
    for k, f in enumerate(forms):
        coeffs = linalg.solve_in_span(indep, f) if indep else None
        if coeffs is not None:
            return k, {idx[i]: a for i, a in enumerate(coeffs) if a}
        indep.append(f)
        idx.append(k)
    return None


def _den_key(mults):
    return tuple(sorted((f, m) for f, m in mults.items() if m))


def _den_degree(key):
    return sum(m for _, m in key)


class Germ:
    """Exact multivariate meromorphic germ with linear poles."""

    __slots__ = ("_terms", "dim", "dmax", "_cache")

    def __init__(self, terms=None, dim=0, dmax=INF):
        clean = {}
        ndim = dim
        if terms:
            for key, num in terms.items():
                maxdeg = None if dmax == INF else dmax + _den_degree(key)
                num = series.truncate(num, maxdeg)
                num = {k: v for k, v in num.items() if v}
                if not num:
                    continue
                if key in clean:
                    series.add_into(clean[key], num)
                    if not clean[key]:
                        del clean[key]
                else:
                    clean[key] = num
                ndim = max([ndim, series.nvars(num)] + [len(f) for f, _ in key])
        self._terms = clean
        self.dim = ndim
        self.dmax = dmax
        self._cache = {}

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def one(cls):
        return cls.constant(1)

    @classmethod
    def constant(cls, c):
        c = Coefficient.coerce(c)
        return cls({(): {((), t): v for t, v in enumerate(c.coeffs) if v}})

    @classmethod
    def from_poly(cls, poly, dmax=INF):
        return cls({(): dict(poly)}, dmax=dmax)

    @classmethod
    def coordinate(cls, j):
        return cls.from_poly(series.variable(j))

    @classmethod
    def from_form(cls, form):
        form = form if isinstance(form, LinearForm) else LinearForm(form)
        return cls.from_poly(form.poly())

    @classmethod
    def polar(cls, numerator, denominator, dmax=INF):
        """``numerator / prod L^m``; ``denominator`` is a list of forms or ``(form, m)``.

        Forms may be arbitrary nonzero rational vectors; scalars are moved
        into the numerator.
        """
        mults = {}
        factor = Fraction(1)
        for item in denominator:
            if isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], int) and not isinstance(item[0], (int, Fraction)):
                form, m = item
            else:
                form, m = item, 1
            form = form if isinstance(form, LinearForm) else LinearForm(form)
            s, w = form.canonical()
            mults[w] = mults.get(w, 0) + m
            factor /= s ** m
        if isinstance(numerator, (int, Fraction, Coefficient)):
            num = Germ.constant(numerator)._terms.get((), {})
        elif isinstance(numerator, LinearForm):
            num = numerator.poly()
        else:
            num = dict(numerator)
        return cls({_den_key(mults): series.scale(num, factor)}, dmax=dmax).reduce()

    # -- views --------------------------------------------------------------

    @property
    def raw_terms(self):
        """Internal mapping ``denominator key -> numerator polynomial`` (read-only use)."""
        return self._terms

    @property
    def terms(self):
        out = []
        for key in sorted(self._terms):
            order = INF if self.dmax == INF else self.dmax + _den_degree(key)
            den = tuple((LinearForm(f), m) for f, m in key)
            out.append(GermTerm(Jet(self.dim, order, dict(self._terms[key])), den))
        return out

    @property
    def dmin(self):
        return -max((_den_degree(k) for k in self._terms), default=0)

    @property
    def window(self):
        return self.dmin, self.dmax

    def is_holomorphic(self):
        return all(not k for k in self._terms)

    def holomorphic_poly(self):
        return dict(self._terms.get((), {}))

    def is_trivially_zero(self):
        return not self._terms

    def with_dmax(self, dmax):
        return Germ(self._terms, self.dim, min(dmax, self.dmax))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _as_germ(other)
        terms = {k: dict(v) for k, v in self._terms.items()}
        for k, v in other._terms.items():
            if k in terms:
                series.add_into(terms[k], v)
            else:
                terms[k] = dict(v)
        return Germ(terms, max(self.dim, other.dim), min(self.dmax, other.dmax))

    __radd__ = __add__

    def __neg__(self):
        return Germ({k: series.scale(v, -1) for k, v in self._terms.items()}, self.dim, self.dmax)

    def __sub__(self, other):
        return self + (-_as_germ(other))

    def __rsub__(self, other):
        return _as_germ(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Germ({k: series.scale(v, Fraction(other)) for k, v in self._terms.items()}, self.dim, self.dmax)
        other = _as_germ(other)
        dmax = min(self.dmax + other.dmin, other.dmax + self.dmin)
        terms = {}
        for k1, p1 in self._terms.items():
            m1 = dict(k1)
            for k2, p2 in other._terms.items():
                mults = dict(m1)
                for f, m in k2:
                    mults[f] = mults.get(f, 0) + m
                key = _den_key(mults)
                maxdeg = None if dmax == INF else dmax + _den_degree(key)
                prod = series.mul(p1, p2, maxdeg)
                if key in terms:
                    series.add_into(terms[key], prod)
                else:
                    terms[key] = prod
        return Germ(terms, max(self.dim, other.dim), dmax).reduce()

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Germ.one()
        for _ in range(k):
            out = out * self
        return out

    # -- canonical reduction ------------------------------------------------

    def reduce(self, cancel_check=None):
        """Partial-fraction form: distinct forms in each term are independent.

        ``cancel_check`` (if given) is called between passes and may raise to
        abort long reductions.
        """
        if self._cache.get("reduced"):
            return self
        current = {k: v for k, v in self._terms.items()}
        done = {}
        while current:
            if cancel_check is not None:
                cancel_check()
            nxt = {}
            for key, num in current.items():
                key, num = _cancel(key, num)
                if not num:
                    continue
                forms = tuple(f for f, _ in key)
                circ = _circuit(forms) if len(forms) > 1 else None
                if circ is None:
                    series.add_into(done.setdefault(key, {}), num)
                    continue
                k, coeffs = circ
                mults = dict(key)
                for i, a in coeffs.items():
                    new = dict(mults)
                    new[forms[i]] -= 1
                    new[forms[k]] += 1
                    nkey = _den_key(new)
                    series.add_into(nxt.setdefault(nkey, {}), num, a)
            current = {k: v for k, v in nxt.items() if v}
        out = Germ(done, self.dim, self.dmax)
        out._cache["reduced"] = True
        return out

    # -- comparison ---------------------------------------------------------

    def common_numerator(self):
        """``(P, D)``: the germ equals ``P / D`` with ``D = prod L^{M_L}``."""
        maxm = {}
        for key in self._terms:
            for f, m in key:
                maxm[f] = max(maxm.get(f, 0), m)
        degd = sum(maxm.values())
        maxdeg = None if self.dmax == INF else self.dmax + degd
        total = {}
        for key, num in self._terms.items():
            have = dict(key)
            p = num
            for f, mm in maxm.items():
                for _ in range(mm - have.get(f, 0)):
                    p = series.mul(p, series.linear(f), maxdeg)
            series.add_into(total, p)
        return total, tuple(sorted(maxm.items()))

    def is_zero(self):
        """Exact test that the germ vanishes in every degree <= dmax."""
        if not self._terms:
            return True
        p, _ = self.common_numerator()
        return not p

    def equals(self, other):
        return (self - _as_germ(other)).is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Coefficient, Germ)):
            return self.equals(other)
        return NotImplemented

    __hash__ = None

    def same_representation(self, other):
        return self._terms == other._terms

    # -- dependence ---------------------------------------------------------

    def dep(self):
        """Basis (RREF rows) of the span of linear forms the germ depends on."""
        if "dep" in self._cache:
            return self._cache["dep"]
        rows = []
        for key, num in self._terms.items():
            rows.extend(f for f, _ in key)
            rows.extend(_numerator_dependence(num))
        n = max((len(r) for r in rows), default=0)
        basis = [linalg.strip(r) for r in linalg.rref(rows, n)[0]] if rows else []
        self._cache["dep"] = basis
        return basis

    def supp(self):
        """0-based coordinate indices touched by ``dep()``."""
        return frozenset(j for row in self.dep() for j, c in enumerate(row) if c)

    # -- numerics -----------------------------------------------------------

    def compiled(self):
        if "compiled" not in self._cache:
            self._cache["compiled"] = _compile(self)
        return self._cache["compiled"]

    def __call__(self, *point):
        return numeric_eval(self, point[0] if len(point) == 1 and hasattr(point[0], "__len__") else point)

    # -- rendering ----------------------------------------------------------

    def __str__(self):
        from .textio import render_germ
        return render_germ(self)

    def __repr__(self):
        return f"Germ({str(self)!r}, dmax={self.dmax})"


def _as_germ(x):
    if isinstance(x, Germ):
        return x
    if isinstance(x, (int, Fraction, Coefficient)):
        return Germ.constant(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Germ")


def _cancel(key, num):
    """Divide out denominator forms that divide the numerator exactly."""
    if not key:
        return key, num
    mults = dict(key)
    changed = False
    for f in list(mults):
        while mults[f] > 0:
            q = series.divide_linear(num, f)
            if q is None:
                break
            num = q
            mults[f] -= 1
            changed = True
    if not changed:
        return key, num
    return _den_key(mults), num


def _numerator_dependence(num):
    """Spanning rows of the smallest space of forms a polynomial depends on.

    Row ``(d_1 p, ..., d_n p)[monomial]`` for each monomial: the directions
    killing ``p`` are exactly the kernel of this matrix.
    """
    n = series.nvars(num)
    if n == 0:
        return []
    derivs = [series.derivative(num, j) for j in range(n)]
    keys = set()
    for d in derivs:
        keys.update(d)
    return [tuple(d.get(k, Fraction(0)) for d in derivs) for k in keys]


def dep(f):
    return f.dep()


def supp(f):
    return f.supp()


def reduce(f):
    return f.reduce()


def germ_add(f, g):
    return f + g


def germ_mul(f, g):
    return f * g


def spaces_orthogonal(basis1, basis2, q):
    return all(q.pair(u, v) == 0 for u in basis1 for v in basis2)


def are_independent(f, g, q=IDENTITY, mode="PerpQ"):
    """Locality relation between two germs.

    ``PerpQ``: dependence spaces are Q-orthogonal.  ``TopD``: coordinate
    supports are disjoint (only meaningful for the identity Gram matrix).
    """
    mode = _mode(mode)
    if mode == "TopD":
        if not q.is_identity:
            raise InputError("TopD requires the identity Gram matrix (support is basis-dependent)")
        return not (f.supp() & g.supp())
    return spaces_orthogonal(f.dep(), g.dep(), q)


def _mode(mode):
    key = str(mode).replace("_", "").replace("-", "").lower()
    if key in ("perpq", "perp", "orthogonal"):
        return "PerpQ"
    if key in ("topd", "support", "disjoint"):
        return "TopD"
    raise InputError(f"unknown locality mode {mode!r}")


# ---------------------------------------------------------------------------
# numeric evaluation

def _compile(f):
    import numpy as np

    n = max(f.dim, 1)
    keys = sorted(f._terms)
    exps, coef, owner = [], [], []
    kmax = max((len(k) for k in keys), default=0)
    forms = np.zeros((len(keys), max(kmax, 1), n))
    mults = np.zeros((len(keys), max(kmax, 1)), dtype=np.int64)
    tau = math.pi ** 2
    for t, key in enumerate(keys):
        for i, (form, m) in enumerate(key):
            forms[t, i, :len(form)] = [float(c) for c in form]
            mults[t, i] = m
        for (e, tp), c in f._terms[key].items():
            exps.append(list(linalg.pad(e, n)))
            coef.append(float(c) * tau ** tp)
            owner.append(t)
    return (np.array(exps, dtype=np.int64).reshape(len(exps), n),
            np.array(coef, dtype=np.float64),
            np.array(owner, dtype=np.int64),
            forms, mults)


def numeric_eval_many(f, points):
    """Evaluate the truncated representation at each row of ``points``."""
    import numpy as np

    from . import _kernels

    exps, coef, owner, forms, mults = f.compiled()
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = exps.shape[1]
    if pts.shape[1] < n:
        pts = np.hstack([pts, np.zeros((pts.shape[0], n - pts.shape[1]))])
    elif pts.shape[1] > n:
        extra = pts.shape[1] - n
        exps = np.hstack([exps, np.zeros((exps.shape[0], extra), dtype=np.int64)])
        forms = np.concatenate([forms, np.zeros(forms.shape[:2] + (extra,))], axis=2)
    vals, bad = _kernels.eval_germ(pts, exps, coef, owner, forms, mults)
    if bad >= 0:
        raise DomainError(f"point {pts[bad].tolist()} lies on a pole hyperplane")
    return vals


def numeric_eval(f, point):
    return float(numeric_eval_many(f, [list(point)])[0])


def ev0(f):
    """Degree-zero coefficient of a holomorphic germ."""
    if not f.is_holomorphic():
        raise ContractError("ev0 requires a holomorphic germ; project first")
    if f.dmax < 0:
        raise InsufficientOrderError(
            f"insufficient working order: jet exact only through degree {f.dmax}")
    return Coefficient.from_poly(f.holomorphic_poly())
