"""Sparse truncated polynomials with coefficients in Q[tau].

A polynomial is a plain ``dict`` mapping ``(exponent, tau_power)`` to a
nonzero ``Fraction``.  Exponent tuples carry no trailing zeros, so a
polynomial in ``e1`` is literally the same object whether it lives in two or
five variables.  ``tau`` stands for pi**2 wherever the forest engine needs
it; everything else stays in tau-degree 0.
"""

import math
from fractions import Fraction

from .linalg import strip

ONE_KEY = ((), 0)


def exp_add(a, b):
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return a
    return tuple(x + y for x, y in zip(a, b)) + a[len(b):]


def exp_degree(e):
    return sum(e)


def constant(c, tau=0):
    c = Fraction(c)
    return {((), tau): c} if c else {}


def variable(j, c=1):
    """The polynomial ``c * e_{j+1}`` (0-based index ``j``)."""
    e = (0,) * j + (1,)
    return {(e, 0): Fraction(c)}


def linear(coeffs):
    """Polynomial of the linear form with the given coefficient vector."""
    out = {}
    for j, c in enumerate(coeffs):
        if c:
            out[((0,) * j + (1,), 0)] = Fraction(c)
    return out


def add_into(acc, p, scale=1):
    for k, v in p.items():
        nv = acc.get(k, 0) + v * scale
        if nv:
            acc[k] = nv
        else:
            acc.pop(k, None)
    return acc


def add(p, q, scale=1):
    return add_into(dict(p), q, scale)


def scale(p, c):
    if not c:
        return {}
    return {k: v * c for k, v in p.items()}


def mul(p, q, maxdeg=None):
    out = {}
    for (e1, t1), v1 in p.items():
        d1 = sum(e1)
        for (e2, t2), v2 in q.items():
            if maxdeg is not None and d1 + sum(e2) > maxdeg:
                continue
            k = (exp_add(e1, e2), t1 + t2)
            nv = out.get(k, 0) + v1 * v2
            if nv:
                out[k] = nv
            else:
                del out[k]
    return out


def truncate(p, maxdeg):
    if maxdeg is None or maxdeg == math.inf:
        return p
    return {k: v for k, v in p.items() if sum(k[0]) <= maxdeg}


def max_degree(p):
    return max((sum(e) for e, _ in p), default=-1)


def substitute(p, images):
    """Replace variable ``j`` by the polynomial ``images[j]``.

    Used for linear changes of coordinates, so every image is homogeneous of
    degree one and no truncation is needed.
    """
    powers = {}

    def power(j, m):
        key = (j, m)
        if key not in powers:
            if m == 0:
                powers[key] = {ONE_KEY: Fraction(1)}
            elif m == 1:
                powers[key] = images[j]
            else:
                half = power(j, m // 2)
                sq = mul(half, half)
                powers[key] = mul(sq, images[j]) if m % 2 else sq
        return powers[key]

    prefix = {(): {ONE_KEY: Fraction(1)}}

    def monomial(e):
        # products over leading variables are shared between monomials
        if e in prefix:
            return prefix[e]
        head = monomial(strip(e[:-1]))
        val = mul(head, power(len(e) - 1, e[-1]))
        prefix[e] = val
        return val

    out = {}
    for (e, t), c in p.items():
        for (e2, t2), c2 in monomial(e).items():
            k = (e2, t + t2)
            nv = out.get(k, 0) + c * c2
            if nv:
                out[k] = nv
            else:
                del out[k]
    return out


def divide_linear(p, form):
    """Exact quotient ``p / L`` for a linear form, or ``None``."""
    j = next(i for i, c in enumerate(form) if c)
    lead = Fraction(form[j])
    lin = linear(form)
    rem = dict(p)
    quot = {}
    while True:
        pending = [(k, v) for k, v in rem.items() if len(k[0]) > j and k[0][j] > 0]
        if not pending:
            break
        (e, t), v = max(pending, key=lambda kv: kv[0][0][j])
        q_e = list(e)
        q_e[j] -= 1
        qk = (strip(q_e), t)
        qc = v / lead
        quot[qk] = quot.get(qk, 0) + qc
        add_into(rem, mul({qk: qc}, lin), -1)
    if rem:
        return None
    return {k: v for k, v in quot.items() if v}


def derivative(p, j):
    out = {}
    for (e, t), c in p.items():
        if len(e) > j and e[j]:
            ne = list(e)
            ne[j] -= 1
            k = (strip(ne), t)
            out[k] = out.get(k, 0) + c * e[j]
    return {k: v for k, v in out.items() if v}


def nvars(p):
    return max((len(e) for e, _ in p), default=0)


class Coefficient:
    """Element of Q[tau], tau standing for pi**2.

    >>> str(Coefficient([Fraction(-1, 2)]))
    '-1/2'
    >>> str(Coefficient([0, Fraction(1, 4)]))
    '1/4*pi^2'
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    def __setattr__(self, name, value):
        raise AttributeError("Coefficient is immutable")

    @classmethod
    def coerce(cls, x):
        if isinstance(x, Coefficient):
            return x
        return cls([x])

    @property
    def tau_degree(self):
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __add__(self, other):
        other = Coefficient.coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Coefficient([self[k] + other[k] for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return Coefficient([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-Coefficient.coerce(other))

    def __rsub__(self, other):
        return Coefficient.coerce(other) - self

    def __mul__(self, other):
        other = Coefficient.coerce(other)
        out = [Fraction(0)] * max(len(self.coeffs) + len(other.coeffs) - 1, 0)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Coefficient(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Coefficient([other])
        if not isinstance(other, Coefficient):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __float__(self):
        tau = math.pi ** 2
        return float(sum(float(c) * tau ** k for k, c in enumerate(self.coeffs)))

    def __bool__(self):
        return bool(self.coeffs)

    def __repr__(self):
        return f"Coefficient({str(self)!r})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                parts.append(str(c))
            else:
                parts.append(f"{c}*pi^{2 * k}")
        return " + ".join(parts)

    def to_json(self):
        return {"tau_coeffs": [str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj):
        return cls([Fraction(s) for s in obj["tau_coeffs"]])

    @classmethod
    def from_poly(cls, p):
        """Degree-zero part of a polynomial, as an element of Q[tau]."""
        degs = [t for (e, t) in p if not e]
        out = [Fraction(0)] * (max(degs) + 1 if degs else 0)
        for (e, t), c in p.items():
            if not e:
                out[t] += c
        return cls(out)
