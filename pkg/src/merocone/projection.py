"""Projection of germs onto their holomorphic part along Q-polar germs.

Every germ splits uniquely as ``plus + minus`` where ``plus`` is a jet and
``minus`` is a sum of terms ``h(w) / prod L_i^{m_i}`` with independent
``L_i`` and a numerator depending only on forms ``w`` that are Q-orthogonal
to every ``L_i``.  The split of one term is computed by rewriting its
numerator in coordinates ``(L_1..L_k, w_1..w_{n-k})`` with the ``w`` spanning
the Q-orthogonal complement; monomials then sort themselves into fully
cancelled (holomorphic), untouched (polar) and partially cancelled pieces,
the last being re-split against the surviving denominators.
"""

from fractions import Fraction
from functools import lru_cache

from . import linalg, series
from .errors import InsufficientOrderError
from .germs import IDENTITY, Germ, _den_key, ev0


@lru_cache(maxsize=4096)
def _frame(forms, n, gram):
    """Rows of the new coordinates and the inverse substitution.

    Returns ``(rows, to_new)``: ``rows[i]`` is the coefficient vector of new
    coordinate ``y_i`` (first the denominator forms, then an integral basis of
    their Q-orthogonal complement); ``to_new[j]`` expresses ``e_j`` as a
    linear polynomial in the ``y``.
    """
    qforms = [tuple(sum(Fraction(f[a]) * gram[a][b] for a in range(len(f))) for b in range(n))
              for f in forms]
    comp = [linalg.primitive(w) for w in linalg.nullspace(qforms, n)]
    rows = [linalg.pad(f, n) for f in forms] + list(comp)
    inv = linalg.inverse(rows)
    to_new = tuple(series.linear(inv[j]) for j in range(n))
    from_new = tuple(series.linear(r) for r in rows)
    return tuple(rows), to_new, from_new


def _split(key, num, gram_q, plus, minus):
    """Accumulate the holomorphic / polar split of ``num / key`` into the buckets."""
    if not key:
        series.add_into(plus, num)
        return
    forms = tuple(f for f, _ in key)
    mults = tuple(m for _, m in key)
    k = len(forms)
    n = max([series.nvars(num)] + [len(f) for f in forms])
    _, to_new, from_new = _frame(forms, n, gram_q.block(n))
    ynum = series.substitute(num, to_new)

    hol = {}
    pol = {}
    partial = {}
    for (e, t), c in ynum.items():
        e = linalg.pad(e, n)
        surv = tuple((i, mults[i] - e[i]) for i in range(k) if e[i] < mults[i])
        if not surv:
            ne = tuple(e[i] - mults[i] for i in range(k)) + e[k:]
            hol[(linalg.strip(ne), t)] = hol.get((linalg.strip(ne), t), 0) + c
        elif len(surv) == k:
            ne = (0,) * k + e[k:]
            bucket = pol.setdefault(surv, {})
            kk = (linalg.strip(ne), t)
            bucket[kk] = bucket.get(kk, 0) + c
        else:
            alive = {i for i, _ in surv}
            ne = tuple(0 if i in alive else e[i] - mults[i] for i in range(k)) + e[k:]
            bucket = partial.setdefault(surv, {})
            kk = (linalg.strip(ne), t)
            bucket[kk] = bucket.get(kk, 0) + c

    if hol:
        series.add_into(plus, series.substitute(_nonzero(hol), from_new))
    for surv, p in pol.items():
        p = _nonzero(p)
        if p:
            dkey = _den_key({forms[i]: m for i, m in surv})
            series.add_into(minus.setdefault(dkey, {}), series.substitute(p, from_new))
    for surv, p in partial.items():
        p = _nonzero(p)
        if p:
            dkey = _den_key({forms[i]: m for i, m in surv})
            _split(dkey, series.substitute(p, from_new), gram_q, plus, minus)


def _nonzero(p):
    return {k: v for k, v in p.items() if v}


def split(f, q=IDENTITY, degree=0):
    """``(plus, minus)`` with ``f = plus + minus`` through degree ``f.dmax``."""
    if f.dmax < degree:
        raise InsufficientOrderError(
            f"insufficient working order: germ is exact through degree {f.dmax}, "
            f"degree {degree} requested; rebuild the inputs at higher jet order")
    f = f.reduce()
    plus, minus = {}, {}
    for key, num in f.raw_terms.items():
        _split(key, num, q, plus, minus)
    minus = {k: v for k, v in minus.items() if v}
    return Germ.from_poly(plus, f.dmax), Germ(minus, f.dim, f.dmax)


def project_plus(f, q=IDENTITY):
    return split(f, q)[0]


def project_minus(f, q=IDENTITY):
    return split(f, q)[1]


def renormalised_value(f, q=IDENTITY):
    """Multivariate minimal subtraction: ``ev0(project_plus(f))``."""
    return ev0(project_plus(f, q))


def is_q_polar(f, q=IDENTITY):
    """Structural membership test for the polar complement.

    Each term must have independent denominators and a numerator whose
    dependence space is Q-orthogonal to them (no holomorphic term at all).
    """
    from .germs import _numerator_dependence, spaces_orthogonal

    for key, num in f.raw_terms.items():
        if not key:
            return False
        forms = [fm for fm, _ in key]
        if linalg.rank(forms) != len(forms):
            return False
        rows = _numerator_dependence(num)
        if not spaces_orthogonal(rows, forms, q):
            return False
    return True
