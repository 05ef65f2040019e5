"""Exact linear algebra over Q and Z on plain tuples.

Everything here works on sequences of ``Fraction``/``int`` so that the germ
and cone engines never touch floating point.  Vectors of different lengths
are compared after zero-padding, matching the direct-limit convention for
R^infinity.
"""

from fractions import Fraction
from math import gcd, lcm

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_decomp


def pad(v, n):
    v = tuple(v)
    return v + (0,) * (n - len(v)) if len(v) < n else v


def strip(v):
    """Drop trailing zeros, giving the dimension-free key of a vector."""
    v = tuple(v)
    end = len(v)
    while end and v[end - 1] == 0:
        end -= 1
    return v[:end]


def dot(u, v):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def rref(rows, ncols=None):
    """Reduced row echelon form.  Returns ``(rows, pivot_columns)``."""
    if ncols is None:
        ncols = max((len(r) for r in rows), default=0)
    m = [[Fraction(x) for x in pad(r, ncols)] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return [tuple(row) for row in m[:r]], pivots


def rank(rows):
    return len(rref(rows)[0]) if rows else 0


def nullspace(rows, n):
    """Basis of ``{x in Q^n : row . x = 0 for every row}``."""
    red, pivots = rref(rows, n) if rows else ([], [])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            x[pc] = -row[f]
        basis.append(tuple(x))
    return basis


def solve_in_span(basis, v):
    """Coefficients ``c`` with ``v = sum c_i basis_i``, or ``None``.

    ``basis`` must be linearly independent.
    """
    k = len(basis)
    n = max([len(v)] + [len(b) for b in basis]) if basis else len(v)
    if k == 0:
        return () if all(x == 0 for x in v) else None
    # augmented system: columns are basis vectors
    aug = [[Fraction(b[i]) if i < len(b) else Fraction(0) for b in basis]
           + [Fraction(v[i]) if i < len(v) else Fraction(0)] for i in range(n)]
    red, pivots = rref(aug, k + 1)
    if k in pivots:
        return None
    coeffs = [Fraction(0)] * k
    for row, pc in zip(red, pivots):
        coeffs[pc] = row[k]
    return tuple(coeffs)


def inverse(square):
    n = len(square)
    aug = [list(pad(row, n)) + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(square)]
    red, pivots = rref(aug, 2 * n)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [tuple(row[n:]) for row in red]


def det(square):
    n = len(square)
    m = [[Fraction(x) for x in row] for row in square]
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return d


def primitive(v):
    """Scale a rational vector to a primitive integer vector (same ray)."""
    v = [Fraction(x) for x in v]
    den = lcm(*(x.denominator for x in v)) if v else 1
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def canonical_form(v):
    """Split ``v = scale * w`` with ``w`` primitive integral, first nonzero > 0."""
    w = primitive(v)
    lead = next((x for x in w if x != 0), 0)
    if lead == 0:
        raise ZeroDivisionError("zero vector has no canonical form")
    if lead < 0:
        w = tuple(-x for x in w)
    i = next(i for i, x in enumerate(w) if x != 0)
    scale = Fraction(v[i]) / w[i]
    return scale, w


def row_hnf(rows):
    """Canonical row Hermite normal form of an integer matrix (zero rows removed).

    Pivots are positive; entries above a pivot lie in ``[0, pivot)``.
    """
    m = [list(map(int, r)) for r in rows]
    if not m:
        return []
    ncols = max(len(r) for r in m)
    m = [r + [0] * (ncols - len(r)) for r in m]
    r = 0
    for c in range(ncols):
        # gcd-combine all rows below r into a single pivot at column c
        for i in range(r + 1, len(m)):
            a, b = m[r][c], m[i][c]
            if b == 0:
                continue
            g, x, y = _xgcd(a, b)
            ag, bg = a // g, b // g
            m[r], m[i] = ([x * p + y * q for p, q in zip(m[r], m[i])],
                          [-bg * p + ag * q for p, q in zip(m[r], m[i])])
        if r < len(m) and m[r][c] != 0:
            if m[r][c] < 0:
                m[r] = [-x for x in m[r]]
            for i in range(r):
                f = m[i][c] // m[r][c]
                if f:
                    m[i] = [p - f * q for p, q in zip(m[i], m[r])]
            r += 1
        if r == len(m):
            break
    return [tuple(row) for row in m[:r]]


def _xgcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def rational_lattice_hnf(rows):
    """Canonical basis of the Z-module generated by rational vectors."""
    if not rows:
        return []
    fr = [[Fraction(x) for x in r] for r in rows]
    den = lcm(*(x.denominator for r in fr for x in r))
    ints = [[int(x * den) for x in r] for r in fr]
    return [tuple(Fraction(x, den) for x in r) for r in row_hnf(ints)]


def saturate(int_rows, n):
    """Z-basis of ``Z^n`` intersected with the Q-span of integer rows."""
    if not int_rows:
        return []
    a = Matrix([list(pad(r, n)) for r in int_rows])
    s, _, v = smith_normal_decomp(a, domain=ZZ)
    k = sum(1 for i in range(min(s.shape)) if s[i, i] != 0)
    vinv = v.inv()
    basis = [tuple(int(vinv[i, j]) for j in range(n)) for i in range(k)]
    return row_hnf(basis)
