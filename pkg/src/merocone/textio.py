"""Canonical text and JSON wire formats for germs.

Text example::

    (-1/2) + (-1/12)*e1 + [(-1)]/[e1]

Holomorphic monomials come first (by degree, then ``e1`` before ``e2``),
then polar terms ``[numerator]/[denominator]`` ordered by denominator.
``pi^2`` stands for tau.  Rendering is a fixed point of parsing.
"""

import math
import re
from fractions import Fraction

from . import linalg
from .errors import InputError
from .germs import Germ, _den_key

SCHEMA = "merocone/1"


def _mono_sort_key(item):
    (e, t), _ = item
    return (sum(e), tuple(-x for x in linalg.pad(e, 16)), t)


def _render_monomial(e, t, c):
    s = f"({c})"
    if t:
        s += f"*pi^{2 * t}"
    for j, p in enumerate(e):
        if p == 1:
            s += f"*e{j + 1}"
        elif p > 1:
            s += f"*e{j + 1}^{p}"
    return s


def _render_poly(p):
    return " + ".join(_render_monomial(e, t, c) for (e, t), c in sorted(p.items(), key=_mono_sort_key))


def _render_factor(form, m):
    nz = [j for j, c in enumerate(form) if c]
    if len(nz) == 1 and form[nz[0]] == 1:
        body = f"e{nz[0] + 1}"
    else:
        from .germs import render_form
        body = f"({render_form(form)})"
    return body + (f"^{m}" if m > 1 else "")


def render_germ(f):
    terms = f.raw_terms
    if not terms:
        return "0"
    parts = []
    if () in terms:
        parts.append(_render_poly(terms[()]))
    for key in sorted(k for k in terms if k):
        den = "*".join(_render_factor(form, m) for form, m in key)
        parts.append(f"[{_render_poly(terms[key])}]/[{den}]")
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# parsing

_FORM_TERM = re.compile(r"([+-]?)(?:(\d+(?:/\d+)?)\*)?e(\d+)")


def _split_top(s, sep=" + "):
    out, depth, start, i = [], 0, 0, 0
    while i < len(s):
        ch = s[i]
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if depth == 0 and s.startswith(sep, i):
            out.append(s[start:i])
            i += len(sep)
            start = i
            continue
        i += 1
    out.append(s[start:])
    return [x.strip() for x in out if x.strip()]


def _parse_form(s):
    s = s.replace(" ", "")
    pos = 0
    coeffs = {}
    while pos < len(s):
        m = _FORM_TERM.match(s, pos)
        if not m:
            raise InputError(f"cannot parse linear form {s!r}")
        sign = -1 if m.group(1) == "-" else 1
        c = Fraction(m.group(2)) if m.group(2) else Fraction(1)
        j = int(m.group(3)) - 1
        coeffs[j] = coeffs.get(j, 0) + sign * c
        pos = m.end()
    n = max(coeffs) + 1 if coeffs else 0
    return tuple(coeffs.get(j, 0) for j in range(n))


def _parse_monomial(s):
    m = re.match(r"\(([^()]*)\)", s)
    if not m:
        raise InputError(f"cannot parse monomial {s!r}")
    c = Fraction(m.group(1).replace(" ", ""))
    rest = s[m.end():]
    tau = 0
    exps = {}
    for factor in filter(None, rest.split("*")):
        if factor.startswith("pi^"):
            tau += int(factor[3:]) // 2
            continue
        fm = re.fullmatch(r"e(\d+)(?:\^(\d+))?", factor)
        if not fm:
            raise InputError(f"cannot parse factor {factor!r}")
        j = int(fm.group(1)) - 1
        exps[j] = exps.get(j, 0) + int(fm.group(2) or 1)
    n = max(exps) + 1 if exps else 0
    return (linalg.strip(exps.get(j, 0) for j in range(n)), tau), c


def _parse_poly(s):
    out = {}
    for item in _split_top(s):
        k, c = _parse_monomial(item)
        out[k] = out.get(k, 0) + c
    return {k: v for k, v in out.items() if v}


def _parse_den(s):
    mults = {}
    for factor in _split_top(s, "*"):
        m = re.fullmatch(r"(\(.*\)|e\d+)(?:\^(\d+))?", factor)
        if not m:
            raise InputError(f"cannot parse denominator factor {factor!r}")
        body = m.group(1)
        form = _parse_form(body[1:-1] if body.startswith("(") else body)
        mult = int(m.group(2) or 1)
        scale, w = linalg.canonical_form(form)
        if scale != 1:
            raise InputError(f"denominator form {body} is not in canonical shape")
        w = linalg.strip(w)
        mults[w] = mults.get(w, 0) + mult
    return _den_key(mults)


def parse_germ(text):
    text = text.strip()
    if text == "0":
        return Germ()
    terms = {}
    for item in _split_top(text):
        if item.startswith("["):
            m = re.fullmatch(r"\[(.*)\]/\[(.*)\]", item)
            if not m:
                raise InputError(f"cannot parse polar term {item!r}")
            key = _parse_den(m.group(2))
            poly = _parse_poly(m.group(1))
        else:
            key = ()
            k, c = _parse_monomial(item)
            poly = {k: c}
        acc = terms.setdefault(key, {})
        for k, v in poly.items():
            acc[k] = acc.get(k, 0) + v
    return Germ(terms)


# ---------------------------------------------------------------------------
# JSON

def germ_to_json(f):
    terms = []
    for key in sorted(f.raw_terms):
        num = [{"exp": list(e), "tau": t, "coeff": str(c)}
               for (e, t), c in sorted(f.raw_terms[key].items(), key=_mono_sort_key)]
        terms.append({"denominator": [{"form": list(form), "mult": m} for form, m in key],
                      "numerator": num})
    dmax = None if f.dmax == math.inf else f.dmax
    return {"schema": SCHEMA, "dim": f.dim, "window": [f.dmin, dmax], "terms": terms}


def germ_from_json(obj):
    if obj.get("schema", SCHEMA) != SCHEMA:
        raise InputError(f"unsupported schema {obj.get('schema')!r}")
    try:
        terms = {}
        for t in obj["terms"]:
            mults = {}
            for d in t["denominator"]:
                form = tuple(int(x) for x in d["form"])
                mults[linalg.strip(form)] = mults.get(linalg.strip(form), 0) + int(d["mult"])
            key = _den_key(mults)
            acc = terms.setdefault(key, {})
            for mono in t["numerator"]:
                k = (linalg.strip(int(x) for x in mono["exp"]), int(mono.get("tau", 0)))
                acc[k] = acc.get(k, 0) + Fraction(mono["coeff"])
        window = obj.get("window", [None, None])
        dmax = math.inf if window[1] is None else int(window[1])
        return Germ(terms, int(obj.get("dim", 0)), dmax)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed germ JSON: {exc}") from exc
